// SPDX-License-Identifier: MIT
#include "soilrf/learning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "soilrf/error.hpp"
#include "soilrf/util.hpp"

#include "rng.hpp"

namespace soilrf {

using nlohmann::json;

int encode_label(double ppm, double threshold_ppm) {
    if (ppm < 0.0)
        fail(ErrorKind::numeric, "labels: concentration must be >= 0 ppm");
    if (!(threshold_ppm > 0.0))
        fail(ErrorKind::config, "labels: threshold must be positive");
    return ppm >= threshold_ppm ? 1 : 0;
}

std::vector<int> encode_labels(const std::vector<double>& ppm, double threshold_ppm) {
    std::vector<int> out(ppm.size());
    for (size_t i = 0; i < ppm.size(); ++i)
        out[i] = encode_label(ppm[i], threshold_ppm);
    return out;
}

void LabeledDataset::validate() const {
    if (x.rows == 0 || x.cols == 0)
        fail(ErrorKind::config, "dataset: empty feature matrix");
    if (ids.size() != x.rows)
        fail(ErrorKind::config, "dataset: id count does not match row count");
    if (labels.size() != x.rows)
        fail(ErrorKind::config, "dataset: label count does not match row count");
    if (!pb_ppm.empty() && pb_ppm.size() != x.rows)
        fail(ErrorKind::config, "dataset: concentration count does not match row count");
    std::set<std::string> seen;
    for (const auto& id : ids)
        if (!seen.insert(id).second)
            fail(ErrorKind::config, "dataset: duplicate sample id '" + id + "'");
    for (int label : labels)
        if (label != 0 && label != 1)
            fail(ErrorKind::config, "dataset: labels must be 0 or 1");
}

// --- augmentation --------------------------------------------------------------

Matrix augment_rows(const Matrix& x, const AugmentationConfig& config) {
    if (config.r < 1)
        fail(ErrorKind::config, "augmentation: r must be >= 1");
    if (config.sigma_max < 0.0)
        fail(ErrorKind::config, "augmentation: sigma_max must be >= 0");
    if (x.rows == 0 || x.cols == 0)
        fail(ErrorKind::config, "augmentation: empty input matrix");
    Matrix out(x.rows * static_cast<size_t>(config.r), x.cols);
    for (int copy = 0; copy < config.r; ++copy) {
        Rng rng(mix64(config.seed, static_cast<uint64_t>(copy)));
        double sigma = std::max(rng.uniform_open_lo(config.sigma_max), 1e-12);
        size_t base = static_cast<size_t>(copy) * x.rows;
        for (size_t r = 0; r < x.rows; ++r)
            for (size_t c = 0; c < x.cols; ++c)
                out.at(base + r, c) = x.at(r, c) + sigma * rng.gaussian();
    }
    return out;
}

LabeledDataset augment(const LabeledDataset& train, const AugmentationConfig& config) {
    train.validate();
    LabeledDataset out;
    out.x = augment_rows(train.x, config);
    out.ids.reserve(out.x.rows);
    out.labels.reserve(out.x.rows);
    char suffix[32];
    for (int copy = 0; copy < config.r; ++copy) {
        std::snprintf(suffix, sizeof(suffix), "#a%03d", copy);
        for (size_t r = 0; r < train.x.rows; ++r) {
            out.ids.push_back(train.ids[r] + suffix);
            out.labels.push_back(train.labels[r]);
            if (!train.pb_ppm.empty())
                out.pb_ppm.push_back(train.pb_ppm[r]);
        }
    }
    out.validate();
    return out;
}

// --- base models ----------------------------------------------------------------

void EnsembleSpec::validate() const {
    if (models.size() < 2)
        fail(ErrorKind::config, "ensemble: need at least two base models to vote");
}

namespace {

struct ClassCounts {
    size_t n0 = 0, n1 = 0;
};

ClassCounts count_classes(const std::vector<int>& y) {
    ClassCounts c;
    for (int v : y)
        (v == 1 ? c.n1 : c.n0)++;
    return c;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Constant predictor used by models that tolerate single-class training data.
class ConstantModel : public BaseModel {
public:
    explicit ConstantModel(int cls) : cls_(cls) {}
    std::array<double, 2> predict_proba(const double*, size_t) const override {
        return cls_ == 1 ? std::array<double, 2>{0.0, 1.0}
                         : std::array<double, 2>{1.0, 0.0};
    }

private:
    int cls_;
};

// L2-regularized logistic regression fitted by Newton-Raphson.
class LogisticModel : public BaseModel {
public:
    LogisticModel(const Matrix& x, const std::vector<int>& y, const LogisticParams& prm) {
        size_t n = x.rows, p = x.cols;
        w_.assign(p + 1, 0.0); // w_[0] is the intercept
        std::vector<double> prob(n), grad(p + 1), hess((p + 1) * (p + 1));
        for (int iter = 0; iter < prm.max_iter; ++iter) {
            std::fill(grad.begin(), grad.end(), 0.0);
            std::fill(hess.begin(), hess.end(), 0.0);
            for (size_t i = 0; i < n; ++i) {
                double z = w_[0];
                const double* row = x.row(i);
                for (size_t j = 0; j < p; ++j)
                    z += w_[j + 1] * row[j];
                double pr = sigmoid(z);
                prob[i] = pr;
                double resid = static_cast<double>(y[i]) - pr;
                double wgt = pr * (1.0 - pr);
                grad[0] += resid;
                hess[0] += wgt;
                for (size_t j = 0; j < p; ++j) {
                    grad[j + 1] += resid * row[j];
                    hess[j + 1] += wgt * row[j];
                    hess[(j + 1) * (p + 1)] += wgt * row[j];
                    for (size_t k = 0; k <= j; ++k) {
                        double v = wgt * row[j] * row[k];
                        hess[(j + 1) * (p + 1) + (k + 1)] += v;
                        if (k != j)
                            hess[(k + 1) * (p + 1) + (j + 1)] += v;
                    }
                }
            }
            // Ridge on the non-intercept weights.
            double gmax = std::abs(grad[0]);
            for (size_t j = 1; j <= p; ++j) {
                grad[j] -= prm.l2 * w_[j];
                hess[j * (p + 1) + j] += prm.l2;
                gmax = std::max(gmax, std::abs(grad[j]));
            }
            if (gmax < prm.tol)
                break;
            std::vector<double> step = solve_linear_system(hess, grad, p + 1);
            for (size_t j = 0; j <= p; ++j)
                w_[j] += step[j];
        }
    }

    std::array<double, 2> predict_proba(const double* x, size_t p) const override {
        if (p + 1 != w_.size())
            fail(ErrorKind::contract, "logistic: feature count mismatch");
        double z = w_[0];
        for (size_t j = 0; j < p; ++j)
            z += w_[j + 1] * x[j];
        double p1 = sigmoid(z);
        return {1.0 - p1, p1};
    }

private:
    std::vector<double> w_;
};

// Linear SVM fitted by full-batch subgradient descent on the mean hinge loss,
// with a Platt sigmoid fitted on the training scores for probabilities.
class SvmModel : public BaseModel {
public:
    SvmModel(const Matrix& x, const std::vector<int>& y, const SvmParams& prm) {
        size_t n = x.rows, p = x.cols;
        w_.assign(p, 0.0);
        b_ = 0.0;
        double lambda = 1.0 / (prm.c * static_cast<double>(n));
        std::vector<double> gw(p);
        for (int epoch = 0; epoch < prm.epochs; ++epoch) {
            std::fill(gw.begin(), gw.end(), 0.0);
            double gb = 0.0;
            for (size_t i = 0; i < n; ++i) {
                double yi = y[i] == 1 ? 1.0 : -1.0;
                double s = b_;
                const double* row = x.row(i);
                for (size_t j = 0; j < p; ++j)
                    s += w_[j] * row[j];
                if (yi * s < 1.0) {
                    for (size_t j = 0; j < p; ++j)
                        gw[j] -= yi * row[j];
                    gb -= yi;
                }
            }
            double inv_n = 1.0 / static_cast<double>(n);
            double eta = 1.0 / (1.0 + 0.1 * static_cast<double>(epoch));
            for (size_t j = 0; j < p; ++j)
                w_[j] -= eta * (lambda * w_[j] + gw[j] * inv_n);
            b_ -= eta * gb * inv_n;
        }
        fit_platt(x, y);
    }

    std::array<double, 2> predict_proba(const double* x, size_t p) const override {
        if (p != w_.size())
            fail(ErrorKind::contract, "svm: feature count mismatch");
        double s = b_;
        for (size_t j = 0; j < p; ++j)
            s += w_[j] * x[j];
        double p1 = sigmoid(-(a_ * s + c_));
        return {1.0 - p1, p1};
    }

private:
    void fit_platt(const Matrix& x, const std::vector<int>& y) {
        size_t n = x.rows, p = x.cols;
        std::vector<double> scores(n);
        for (size_t i = 0; i < n; ++i) {
            double s = b_;
            const double* row = x.row(i);
            for (size_t j = 0; j < p; ++j)
                s += w_[j] * row[j];
            scores[i] = s;
        }
        ClassCounts cc = count_classes(y);
        double hi = (static_cast<double>(cc.n1) + 1.0) / (static_cast<double>(cc.n1) + 2.0);
        double lo = 1.0 / (static_cast<double>(cc.n0) + 2.0);
        a_ = 0.0;
        c_ = std::log((static_cast<double>(cc.n0) + 1.0) /
                      (static_cast<double>(cc.n1) + 1.0));
        for (int iter = 0; iter < 100; ++iter) {
            double g1 = 0.0, g2 = 0.0, h11 = 1e-12, h22 = 1e-12, h12 = 0.0;
            for (size_t i = 0; i < n; ++i) {
                double t = y[i] == 1 ? hi : lo;
                double f = a_ * scores[i] + c_;
                double pr = sigmoid(-f); // P(class 1 | score)
                double d1 = t - pr;      // d(-loglik)/df since dpr/df = -pr(1-pr)
                g1 += scores[i] * d1;
                g2 += d1;
                double d2 = pr * (1.0 - pr);
                h11 += scores[i] * scores[i] * d2;
                h22 += d2;
                h12 += scores[i] * d2;
            }
            if (std::abs(g1) < 1e-10 && std::abs(g2) < 1e-10)
                break;
            double det = h11 * h22 - h12 * h12;
            if (std::abs(det) < 1e-300)
                break;
            a_ -= (h22 * g1 - h12 * g2) / det;
            c_ -= (h11 * g2 - h12 * g1) / det;
        }
    }

    std::vector<double> w_;
    double b_ = 0.0;
    double a_ = 0.0, c_ = 0.0; // Platt sigmoid coefficients
};

// CART-style binary tree on Gini impurity with deterministic tie-breaking:
// the first feature (lowest index) and lowest threshold reaching the best
// gain wins.
class TreeModel : public BaseModel {
public:
    TreeModel(const Matrix& x, const std::vector<int>& y, const TreeParams& prm)
        : params_(prm) {
        std::vector<size_t> idx(x.rows);
        for (size_t i = 0; i < idx.size(); ++i)
            idx[i] = i;
        root_ = build(x, y, idx, 0);
    }

    std::array<double, 2> predict_proba(const double* x, size_t p) const override {
        size_t node = root_;
        while (!nodes_[node].leaf) {
            const Node& nd = nodes_[node];
            if (nd.feature >= p)
                fail(ErrorKind::contract, "tree: feature count mismatch");
            node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
        }
        return {nodes_[node].p0, nodes_[node].p1};
    }

private:
    struct Node {
        bool leaf = true;
        size_t feature = 0;
        double threshold = 0.0;
        size_t left = 0, right = 0;
        double p0 = 0.0, p1 = 0.0;
    };

    static double gini(double n0, double n1) {
        double n = n0 + n1;
        if (n <= 0.0)
            return 0.0;
        double f0 = n0 / n, f1 = n1 / n;
        return 1.0 - f0 * f0 - f1 * f1;
    }

    size_t build(const Matrix& x, const std::vector<int>& y, std::vector<size_t>& idx,
                 int depth) {
        double n0 = 0.0, n1 = 0.0;
        for (size_t i : idx)
            (y[i] == 1 ? n1 : n0) += 1.0;
        double total = n0 + n1;

        size_t self = nodes_.size();
        nodes_.push_back({});
        nodes_[self].p0 = n0 / total;
        nodes_[self].p1 = n1 / total;

        if (depth >= params_.max_depth || n0 == 0.0 || n1 == 0.0 ||
            idx.size() < 2 * static_cast<size_t>(params_.min_leaf))
            return self;

        double parent = gini(n0, n1);
        double best_gain = 1e-12;
        size_t best_feature = 0;
        double best_threshold = 0.0;
        bool found = false;

        std::vector<std::pair<double, int>> vals(idx.size());
        for (size_t f = 0; f < x.cols; ++f) {
            for (size_t i = 0; i < idx.size(); ++i)
                vals[i] = {x.at(idx[i], f), y[idx[i]]};
            std::sort(vals.begin(), vals.end());
            double l0 = 0.0, l1 = 0.0;
            for (size_t i = 1; i < vals.size(); ++i) {
                (vals[i - 1].second == 1 ? l1 : l0) += 1.0;
                if (vals[i].first <= vals[i - 1].first)
                    continue; // no boundary between equal values
                double nl = l0 + l1, nr = total - nl;
                if (nl < params_.min_leaf || nr < params_.min_leaf)
                    continue;
                double gain = parent - (nl * gini(l0, l1) + nr * gini(n0 - l0, n1 - l1)) /
                                           total;
                if (gain > best_gain) { // strict: earliest feature/threshold wins ties
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = (vals[i - 1].first + vals[i].first) / 2.0;
                    found = true;
                }
            }
        }
        if (!found)
            return self;

        std::vector<size_t> left, right;
        for (size_t i : idx) {
            if (x.at(i, best_feature) <= best_threshold)
                left.push_back(i);
            else
                right.push_back(i);
        }
        size_t left_id = build(x, y, left, depth + 1);
        size_t right_id = build(x, y, right, depth + 1);
        nodes_[self].leaf = false;
        nodes_[self].feature = best_feature;
        nodes_[self].threshold = best_threshold;
        nodes_[self].left = left_id;
        nodes_[self].right = right_id;
        return self;
    }

    TreeParams params_;
    std::vector<Node> nodes_;
    size_t root_ = 0;
};

// Gaussian naive Bayes with per-class feature means and floored variances.
class GnbModel : public BaseModel {
public:
    GnbModel(const Matrix& x, const std::vector<int>& y, const NbParams& prm) {
        size_t n = x.rows, p = x.cols;
        ClassCounts cc = count_classes(y);
        prior1_ = static_cast<double>(cc.n1) / static_cast<double>(n);
        mean_[0].assign(p, 0.0);
        mean_[1].assign(p, 0.0);
        var_[0].assign(p, 0.0);
        var_[1].assign(p, 0.0);
        double cnt[2] = {static_cast<double>(cc.n0), static_cast<double>(cc.n1)};
        for (size_t i = 0; i < n; ++i) {
            int c = y[i];
            for (size_t j = 0; j < p; ++j)
                mean_[c][j] += x.at(i, j);
        }
        for (int c = 0; c < 2; ++c)
            for (size_t j = 0; j < p; ++j)
                mean_[c][j] /= cnt[c];
        for (size_t i = 0; i < n; ++i) {
            int c = y[i];
            for (size_t j = 0; j < p; ++j) {
                double d = x.at(i, j) - mean_[c][j];
                var_[c][j] += d * d;
            }
        }
        for (int c = 0; c < 2; ++c)
            for (size_t j = 0; j < p; ++j)
                var_[c][j] = std::max(var_[c][j] / cnt[c], prm.var_floor);
    }

    std::array<double, 2> predict_proba(const double* x, size_t p) const override {
        if (p != mean_[0].size())
            fail(ErrorKind::contract, "naive bayes: feature count mismatch");
        double ll[2] = {std::log(1.0 - prior1_), std::log(prior1_)};
        for (int c = 0; c < 2; ++c) {
            for (size_t j = 0; j < p; ++j) {
                double d = x[j] - mean_[c][j];
                ll[c] -= 0.5 * (std::log(2.0 * M_PI * var_[c][j]) + d * d / var_[c][j]);
            }
        }
        double p1 = 1.0 / (1.0 + std::exp(ll[0] - ll[1]));
        return {1.0 - p1, p1};
    }

private:
    double prior1_ = 0.5;
    std::vector<double> mean_[2];
    std::vector<double> var_[2];
};

} // namespace

std::unique_ptr<BaseModel> fit_base(ModelKind kind, const Matrix& x,
                                    const std::vector<int>& y,
                                    const EnsembleSpec& spec) {
    if (x.rows == 0 || x.cols == 0 || y.size() != x.rows)
        fail(ErrorKind::config, "model fit: bad training shape");
    ClassCounts cc = count_classes(y);
    bool single_class = cc.n0 == 0 || cc.n1 == 0;
    switch (kind) {
    case ModelKind::logistic:
        if (single_class)
            fail(ErrorKind::numeric,
                 "logistic regression requires both classes in the training data");
        return std::make_unique<LogisticModel>(x, y, spec.logistic);
    case ModelKind::svm:
        if (single_class)
            return std::make_unique<ConstantModel>(cc.n0 == 0 ? 1 : 0);
        return std::make_unique<SvmModel>(x, y, spec.svm);
    case ModelKind::tree:
        return std::make_unique<TreeModel>(x, y, spec.tree);
    case ModelKind::gnb:
        if (single_class)
            fail(ErrorKind::numeric,
                 "naive Bayes requires both classes in the training data");
        return std::make_unique<GnbModel>(x, y, spec.nb);
    }
    fail(ErrorKind::contract, "unknown model kind");
}

std::array<double, 2> Ensemble::soft_vote(const double* x, size_t p) const {
    if (models.empty())
        fail(ErrorKind::config, "ensemble: no fitted models");
    double sum0 = 0.0, sum1 = 0.0;
    for (const auto& m : models) {
        std::array<double, 2> pr = m->predict_proba(x, p);
        if (std::abs(pr[0] + pr[1] - 1.0) > 1e-6)
            fail(ErrorKind::contract,
                 "ensemble: a member produced probabilities that do not sum to 1");
        sum0 += pr[0];
        sum1 += pr[1];
    }
    double n = static_cast<double>(models.size());
    return {sum0 / n, sum1 / n};
}

int Ensemble::predict(const double* x, size_t p) const {
    std::array<double, 2> pr = soft_vote(x, p);
    return pr[1] >= pr[0] ? 1 : 0; // ties resolve to the positive class
}

Ensemble fit_ensemble(const EnsembleSpec& spec, const Matrix& x,
                      const std::vector<int>& y) {
    spec.validate();
    Ensemble e;
    for (ModelKind kind : spec.models)
        e.models.push_back(fit_base(kind, x, y, spec));
    return e;
}

// --- metrics --------------------------------------------------------------------

Metrics report_metrics(const ConfusionMatrix& m) {
    if (m.tn < 0 || m.fp < 0 || m.fn < 0 || m.tp < 0)
        fail(ErrorKind::config, "metrics: confusion entries must be >= 0");
    double sum = m.tn + m.fp + m.fn + m.tp;
    if (!(sum > 0.0))
        fail(ErrorKind::config, "metrics: confusion entries must not all be zero");
    Metrics out;
    if (std::abs(sum - 1.0) <= 0.02) {
        // Already proportions; renormalizing would amplify rounding noise.
        out.accuracy = m.tn + m.tp;
    } else {
        out.accuracy = (m.tn + m.tp) / sum;
    }
    out.recall = (m.tp + m.fn) > 0.0 ? m.tp / (m.tp + m.fn) : 1.0;
    return out;
}

// --- repeated LOOCV --------------------------------------------------------------

uint64_t fold_seed(uint64_t master_seed, int repeat, int fold) {
    return mix64(mix64(master_seed, static_cast<uint64_t>(repeat)),
                 static_cast<uint64_t>(fold));
}

namespace {

Matrix rows_from(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols)
            fail(ErrorKind::contract, "transform produced rows of varying width");
        for (size_t j = 0; j < m.cols; ++j)
            m.at(i, j) = rows[i][j];
    }
    return m;
}

TrialRecord run_fold(const LabeledDataset& data, const EnsembleSpec& spec,
                     const EvalConfig& config, const TransformFactory& factory,
                     int repeat, int fold) {
    size_t n = data.x.rows;
    size_t p = data.x.cols;

    Matrix train(n - 1, p);
    std::vector<int> labels;
    labels.reserve(n - 1);
    size_t r = 0;
    for (size_t i = 0; i < n; ++i) {
        if (i == static_cast<size_t>(fold))
            continue;
        for (size_t j = 0; j < p; ++j)
            train.at(r, j) = data.x.at(i, j);
        labels.push_back(data.labels[i]);
        ++r;
    }

    RowTransform transform;
    if (factory)
        transform = factory(train);
    auto apply = [&](const double* row, size_t width) {
        if (transform)
            return transform(row, width);
        return std::vector<double>(row, row + width);
    };

    AugmentationConfig aug = config.aug;
    aug.seed = fold_seed(config.seed, repeat, fold);

    Matrix model_x;
    if (config.space == AugmentSpace::raw_spectra) {
        // Noise lands on the raw rows, then each noisy row is transformed.
        Matrix noisy = augment_rows(train, aug);
        std::vector<std::vector<double>> transformed(noisy.rows);
        for (size_t i = 0; i < noisy.rows; ++i)
            transformed[i] = apply(noisy.row(i), noisy.cols);
        model_x = rows_from(transformed);
    } else {
        // Noise lands on the transformed feature rows.
        std::vector<std::vector<double>> transformed(train.rows);
        for (size_t i = 0; i < train.rows; ++i)
            transformed[i] = apply(train.row(i), train.cols);
        model_x = augment_rows(rows_from(transformed), aug);
    }

    std::vector<int> model_y;
    model_y.reserve(model_x.rows);
    for (int copy = 0; copy < aug.r; ++copy)
        model_y.insert(model_y.end(), labels.begin(), labels.end());

    Ensemble ensemble = fit_ensemble(spec, model_x, model_y);
    std::vector<double> held = apply(data.x.row(static_cast<size_t>(fold)), p);

    TrialRecord trial;
    trial.repeat = repeat;
    trial.fold = fold;
    trial.sample_id = data.ids[static_cast<size_t>(fold)];
    trial.label = data.labels[static_cast<size_t>(fold)];
    std::array<double, 2> pr = ensemble.soft_vote(held.data(), held.size());
    trial.prob1 = pr[1];
    trial.predicted = pr[1] >= pr[0] ? 1 : 0;
    return trial;
}

} // namespace

EvaluationReport loocv_evaluate(const LabeledDataset& data, const EnsembleSpec& spec,
                                const EvalConfig& config, const TransformFactory& factory) {
    data.validate();
    spec.validate();
    if (data.x.rows < 3)
        fail(ErrorKind::config, "cross-validation needs at least 3 samples");
    if (config.repeats < 1)
        fail(ErrorKind::config, "cross-validation needs at least 1 repeat");

    size_t n = data.x.rows;
    size_t total = n * static_cast<size_t>(config.repeats);
    std::vector<TrialRecord> trials(total);

    auto task = [&](size_t t) {
        int repeat = static_cast<int>(t / n);
        int fold = static_cast<int>(t % n);
        trials[t] = run_fold(data, spec, config, factory, repeat, fold);
    };

    if (config.parallel && total > 1) {
        unsigned hw = std::thread::hardware_concurrency();
        size_t want = config.threads > 0 ? static_cast<size_t>(config.threads)
                                         : (hw > 0 ? hw : 2);
        size_t nthreads = std::min(want, total);
        std::atomic<size_t> next{0};
        std::vector<std::thread> workers;
        std::exception_ptr first_error;
        std::mutex error_mu;
        for (size_t w = 0; w < nthreads; ++w) {
            workers.emplace_back([&]() {
                for (;;) {
                    size_t t = next.fetch_add(1);
                    if (t >= total)
                        return;
                    try {
                        task(t);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mu);
                        if (!first_error)
                            first_error = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& w : workers)
            w.join();
        if (first_error)
            std::rethrow_exception(first_error);
    } else {
        for (size_t t = 0; t < total; ++t)
            task(t);
    }

    EvaluationReport report;
    double tn = 0, fp = 0, fn = 0, tp = 0;
    for (const TrialRecord& trial : trials) {
        if (trial.label == 0)
            (trial.predicted == 0 ? tn : fp) += 1.0;
        else
            (trial.predicted == 1 ? tp : fn) += 1.0;
    }
    double denom = static_cast<double>(total);
    report.confusion = {tn / denom, fp / denom, fn / denom, tp / denom};
    Metrics m = report_metrics(report.confusion);
    report.accuracy = m.accuracy;
    report.recall = m.recall;
    report.trials = std::move(trials);
    report.config_echo["n_samples"] = std::to_string(n);
    report.config_echo["repeats"] = std::to_string(config.repeats);
    report.config_echo["seed"] = std::to_string(config.seed);
    report.config_echo["augment_r"] = std::to_string(config.aug.r);
    report.config_echo["augment_sigma_max"] = format_double(config.aug.sigma_max);
    report.config_echo["augment_space"] =
        config.space == AugmentSpace::raw_spectra ? "raw_spectra" : "features";
    report.config_echo["parallel"] = config.parallel ? "1" : "0";
    return report;
}

// --- regression -------------------------------------------------------------------

RegressionFit linear_regression(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        fail(ErrorKind::config, "regression: x and y sizes differ");
    size_t n = x.size();
    if (n < 3)
        fail(ErrorKind::numeric, "regression needs at least 3 points");
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0)
        fail(ErrorKind::numeric, "regression: x is constant, slope undefined");
    RegressionFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy <= 0.0) {
        fit.r2 = 1.0; // constant y fitted exactly by the constant line
        return fit;
    }
    double ss_res = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double e = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += e * e;
    }
    fit.r2 = 1.0 - ss_res / syy;
    return fit;
}

// --- serialization -----------------------------------------------------------------

void write_report_json(const EvaluationReport& r, const std::string& path) {
    json j;
    j["confusion"] = {{"tn", r.confusion.tn},
                      {"fp", r.confusion.fp},
                      {"fn", r.confusion.fn},
                      {"tp", r.confusion.tp}};
    j["accuracy"] = r.accuracy;
    j["recall"] = r.recall;
    j["n_trials"] = r.trials.size();
    j["config"] = r.config_echo;
    atomic_write_text(path, j.dump(2) + "\n");
}

void write_trials_csv(const EvaluationReport& r, const std::string& path) {
    std::string text = kv_header(r.config_echo);
    text += "repeat,fold,sample_id,label,prob1,predicted\n";
    for (const TrialRecord& t : r.trials) {
        text += std::to_string(t.repeat);
        text += ",";
        text += std::to_string(t.fold);
        text += ",";
        text += t.sample_id;
        text += ",";
        text += std::to_string(t.label);
        text += ",";
        text += format_double(t.prob1);
        text += ",";
        text += std::to_string(t.predicted);
        text += "\n";
    }
    atomic_write_text(path, text);
}

} // namespace soilrf
