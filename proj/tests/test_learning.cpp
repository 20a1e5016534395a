// SPDX-License-Identifier: MIT
//
// Classification pipeline: label encoding, the augmentation contract (row
// counts, copy-major noise stream, label preservation), base-model behaviour
// including a brute-force stump oracle for the tree, soft voting, confusion
// metrics, repeated LOOCV (pooling, leakage, parallel determinism) and the
// least-squares fits.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "rng.hpp"
#include "soilrf/error.hpp"
#include "soilrf/learning.hpp"
#include "soilrf/util.hpp"

using namespace soilrf;
namespace fs = std::filesystem;

namespace {

template <typename Fn> ErrorKind error_kind_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error to be thrown");
    return ErrorKind::contract;
}

Matrix rows_of(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.front().size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j)
            m.at(i, j) = rows[i][j];
    return m;
}

LabeledDataset tiny_dataset() {
    // 1D feature with a wide class gap.
    LabeledDataset d;
    d.ids = {"a", "b", "c", "d", "e"};
    d.x = rows_of({{0.0}, {1.0}, {2.0}, {10.0}, {11.0}});
    d.labels = {0, 0, 0, 1, 1};
    return d;
}

struct FixedModel : BaseModel {
    std::array<double, 2> probs;
    explicit FixedModel(std::array<double, 2> p) : probs(p) {}
    std::array<double, 2> predict_proba(const double*, size_t) const override {
        return probs;
    }
};

} // namespace

TEST_CASE("label encoding at the concentration threshold") {
    CHECK(encode_label(0.0) == 0);
    CHECK(encode_label(199.999) == 0);
    CHECK(encode_label(200.0) == 1);
    CHECK(encode_label(2000.0) == 1);
    CHECK(encode_label(75.0, 50.0) == 1);
    CHECK(error_kind_of([] { encode_label(-1.0); }) == ErrorKind::numeric);
    CHECK(error_kind_of([] { encode_label(10.0, 0.0); }) == ErrorKind::config);
    CHECK(encode_labels({0.0, 200.0, 36.0}) == std::vector<int>{0, 1, 0});
}

TEST_CASE("confusion metrics: proportions, counts and edge cases") {
    // Normalized matrix whose entries sum to 0.991: treated as proportions.
    Metrics m = report_metrics({0.36, 0.18, 0.091, 0.36});
    CHECK(m.accuracy == doctest::Approx(0.72).epsilon(1e-12));
    CHECK(m.recall == doctest::Approx(0.36 / 0.451).epsilon(1e-12));
    CHECK(std::abs(m.recall - 0.80) < 0.01);

    // Raw counts normalize by the sum.
    Metrics c = report_metrics({8.0, 4.0, 2.0, 8.0});
    CHECK(c.accuracy == doctest::Approx(16.0 / 22.0).epsilon(1e-12));
    CHECK(c.recall == doctest::Approx(0.8).epsilon(1e-12));

    // No positive ground truth: recall is vacuously 1.
    Metrics v = report_metrics({10.0, 2.0, 0.0, 0.0});
    CHECK(v.recall == 1.0);
    CHECK(v.accuracy == doctest::Approx(10.0 / 12.0).epsilon(1e-12));

    CHECK(error_kind_of([] { report_metrics({-0.1, 0.5, 0.3, 0.3}); }) ==
          ErrorKind::config);
    CHECK(error_kind_of([] { report_metrics({0.0, 0.0, 0.0, 0.0}); }) ==
          ErrorKind::config);
}

TEST_CASE("augmentation: exact row count and copy-major noise stream") {
    Matrix x = rows_of({{1.0, -2.0}, {3.0, 4.0}, {-5.0, 0.5}});
    AugmentationConfig config{4, 2.0, 99};
    Matrix out = augment_rows(x, config);
    REQUIRE(out.rows == 12); // r * n exactly
    REQUIRE(out.cols == 2);

    SUBCASE("bitwise reconstruction of every copy") {
        for (int copy = 0; copy < config.r; ++copy) {
            Rng rng(mix64(config.seed, static_cast<uint64_t>(copy)));
            double sigma = std::max(rng.uniform_open_lo(config.sigma_max), 1e-12);
            for (size_t r = 0; r < x.rows; ++r)
                for (size_t c = 0; c < x.cols; ++c) {
                    double expect = x.at(r, c) + sigma * rng.gaussian();
                    CHECK(out.at(static_cast<size_t>(copy) * x.rows + r, c) == expect);
                }
        }
    }
    SUBCASE("deterministic in the seed") {
        Matrix again = augment_rows(x, config);
        CHECK(out.d == again.d);
        AugmentationConfig other = config;
        other.seed = 100;
        CHECK(augment_rows(x, other).d != out.d);
    }
    SUBCASE("sigma_max -> 0 degenerates to near-exact copies") {
        AugmentationConfig tame{2, 0.0, 5};
        Matrix copies = augment_rows(x, tame);
        for (size_t r = 0; r < copies.rows; ++r)
            for (size_t c = 0; c < copies.cols; ++c)
                CHECK(copies.at(r, c) ==
                      doctest::Approx(x.at(r % x.rows, c)).epsilon(1e-9));
    }
    SUBCASE("labels and ids follow the copies") {
        LabeledDataset d = tiny_dataset();
        LabeledDataset a = augment(d, AugmentationConfig{3, 1.0, 7});
        REQUIRE(a.x.rows == 15);
        REQUIRE(a.labels.size() == 15);
        int ones = 0;
        for (int label : a.labels)
            ones += label;
        CHECK(ones == 3 * 2); // class proportions preserved exactly
        CHECK(a.ids[0] == "a#a000");
        CHECK(a.ids[5] == "a#a001");
        CHECK(a.ids[14] == "e#a002");
    }
    SUBCASE("config validation") {
        CHECK(error_kind_of([&] { augment_rows(x, {0, 1.0, 0}); }) ==
              ErrorKind::config);
        CHECK(error_kind_of([&] { augment_rows(x, {1, -1.0, 0}); }) ==
              ErrorKind::config);
        Matrix empty;
        CHECK(error_kind_of([&] { augment_rows(empty, {1, 1.0, 0}); }) ==
              ErrorKind::config);
    }
}

TEST_CASE("base models on cleanly separated data") {
    LabeledDataset d = tiny_dataset();
    EnsembleSpec spec;
    for (ModelKind kind :
         {ModelKind::logistic, ModelKind::svm, ModelKind::tree, ModelKind::gnb}) {
        auto model = fit_base(kind, d.x, d.labels, spec);
        for (size_t i = 0; i < d.x.rows; ++i) {
            auto pr = model->predict_proba(d.x.row(i), 1);
            CHECK(pr[0] + pr[1] == doctest::Approx(1.0).epsilon(1e-9));
            CHECK((pr[1] >= pr[0] ? 1 : 0) == d.labels[i]);
        }
    }
}

TEST_CASE("single-class training data") {
    Matrix x = rows_of({{1.0}, {2.0}, {3.0}});
    std::vector<int> y{1, 1, 1};
    EnsembleSpec spec;
    CHECK(error_kind_of([&] { fit_base(ModelKind::logistic, x, y, spec); }) ==
          ErrorKind::numeric);
    CHECK(error_kind_of([&] { fit_base(ModelKind::gnb, x, y, spec); }) ==
          ErrorKind::numeric);
    // The margin models degrade to constant predictors.
    for (ModelKind kind : {ModelKind::svm, ModelKind::tree}) {
        auto model = fit_base(kind, x, y, spec);
        auto pr = model->predict_proba(x.row(0), 1);
        CHECK(pr[1] > pr[0]);
    }
}

TEST_CASE("logistic regression is symmetric on antisymmetric data") {
    Matrix x = rows_of({{-2.0}, {-1.0}, {1.0}, {2.0}});
    std::vector<int> y{0, 0, 1, 1};
    EnsembleSpec spec;
    auto model = fit_base(ModelKind::logistic, x, y, spec);
    double zero = 0.0;
    auto pr = model->predict_proba(&zero, 1);
    CHECK(pr[1] == doctest::Approx(0.5).epsilon(1e-6));
    double neg = -1.5, pos = 1.5;
    CHECK(model->predict_proba(&pos, 1)[1] ==
          doctest::Approx(model->predict_proba(&neg, 1)[0]).epsilon(1e-6));
    CHECK(model->predict_proba(&pos, 1)[1] > 0.5);
}

TEST_CASE("gaussian naive bayes matches the closed-form posterior") {
    Matrix x = rows_of({{0.0}, {1.0}, {3.0}, {5.0}});
    std::vector<int> y{0, 0, 1, 1};
    EnsembleSpec spec;
    auto model = fit_base(ModelKind::gnb, x, y, spec);

    // Maximum-likelihood fits: class 0 N(0.5, 0.25), class 1 N(4, 1),
    // priors 0.5 each; independent arithmetic for the posterior at x = 2.
    auto log_pdf = [](double v, double mean, double var) {
        return -0.5 * std::log(2.0 * M_PI * var) -
               (v - mean) * (v - mean) / (2.0 * var);
    };
    double w0 = std::exp(std::log(0.5) + log_pdf(2.0, 0.5, 0.25));
    double w1 = std::exp(std::log(0.5) + log_pdf(2.0, 4.0, 1.0));
    double probe = 2.0;
    auto pr = model->predict_proba(&probe, 1);
    CHECK(pr[1] == doctest::Approx(w1 / (w0 + w1)).epsilon(1e-9));

    SUBCASE("variance floor tolerates constant features") {
        Matrix xc = rows_of({{1.0, 0.0}, {1.0, 1.0}, {1.0, 4.0}, {1.0, 5.0}});
        auto flat = fit_base(ModelKind::gnb, xc, y, spec);
        double q[2] = {1.0, 4.5};
        auto p = flat->predict_proba(q, 2);
        CHECK(std::isfinite(p[1]));
        CHECK(p[1] > p[0]);
    }
}

TEST_CASE("depth-1 tree matches a brute-force stump oracle") {
    std::mt19937_64 gen(0x57D3C1);
    std::uniform_int_distribution<int> n_d(4, 16), p_d(1, 3), v_d(0, 4), y_d(0, 1);
    EnsembleSpec spec;
    spec.tree.max_depth = 1;
    spec.tree.min_leaf = 1;

    for (int rep = 0; rep < 200; ++rep) {
        int n = n_d(gen), p = p_d(gen);
        Matrix x(n, p);
        std::vector<int> y(n);
        bool both = false;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j)
                x.at(i, j) = static_cast<double>(v_d(gen));
            y[i] = y_d(gen);
        }
        for (int i = 1; i < n; ++i)
            both = both || y[i] != y[0];
        if (!both)
            continue;

        // Oracle: exhaustive Gini stump with the same deterministic tie rule
        // (first feature, then lowest threshold, strictly better gain).
        auto gini = [](double n0, double n1) {
            double t = n0 + n1;
            if (t <= 0.0)
                return 0.0;
            return 1.0 - (n0 / t) * (n0 / t) - (n1 / t) * (n1 / t);
        };
        double tot0 = 0, tot1 = 0;
        for (int i = 0; i < n; ++i)
            (y[i] == 1 ? tot1 : tot0) += 1.0;
        double parent = gini(tot0, tot1);
        double best_gain = 1e-12, best_thr = 0.0;
        int best_f = -1;
        for (int f = 0; f < p; ++f) {
            std::vector<double> vals;
            for (int i = 0; i < n; ++i)
                vals.push_back(x.at(i, f));
            std::sort(vals.begin(), vals.end());
            vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
            for (size_t t = 0; t + 1 < vals.size(); ++t) {
                double thr = (vals[t] + vals[t + 1]) / 2.0;
                double l0 = 0, l1 = 0;
                for (int i = 0; i < n; ++i)
                    if (x.at(i, f) <= thr)
                        (y[i] == 1 ? l1 : l0) += 1.0;
                double nl = l0 + l1, nr = tot0 + tot1 - nl;
                double gain =
                    parent - (nl * gini(l0, l1) + nr * gini(tot0 - l0, tot1 - l1)) /
                                 (tot0 + tot1);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_f = f;
                    best_thr = thr;
                }
            }
        }

        auto tree = fit_base(ModelKind::tree, x, y, spec);
        for (int i = 0; i < n; ++i) {
            double expect1;
            if (best_f < 0) {
                expect1 = tot1 / (tot0 + tot1);
            } else {
                double s0 = 0, s1 = 0;
                bool left = x.at(i, best_f) <= best_thr;
                for (int k = 0; k < n; ++k)
                    if ((x.at(k, best_f) <= best_thr) == left)
                        (y[k] == 1 ? s1 : s0) += 1.0;
                expect1 = s1 / (s0 + s1);
            }
            CHECK(tree->predict_proba(x.row(i), p)[1] ==
                  doctest::Approx(expect1).epsilon(1e-12));
        }
    }
}

TEST_CASE("tree respects min_leaf and never splits pure nodes") {
    EnsembleSpec spec;
    spec.tree.min_leaf = 3;
    Matrix x = rows_of({{0.0}, {1.0}, {2.0}, {3.0}, {4.0}});
    std::vector<int> y{0, 0, 1, 1, 1};
    // No split can keep 3 on each side of 5 rows: the root stays a leaf.
    auto tree = fit_base(ModelKind::tree, x, y, spec);
    for (size_t i = 0; i < x.rows; ++i)
        CHECK(tree->predict_proba(x.row(i), 1)[1] ==
              doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("soft voting averages member probabilities") {
    Ensemble e;
    e.models.push_back(std::make_unique<FixedModel>(std::array<double, 2>{0.9, 0.1}));
    e.models.push_back(std::make_unique<FixedModel>(std::array<double, 2>{0.3, 0.7}));
    double x = 0.0;
    auto pr = e.soft_vote(&x, 1);
    CHECK(pr[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(pr[1] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(e.predict(&x, 1) == 0);

    SUBCASE("exact ties resolve to the positive class") {
        Ensemble tie;
        tie.models.push_back(
            std::make_unique<FixedModel>(std::array<double, 2>{0.5, 0.5}));
        tie.models.push_back(
            std::make_unique<FixedModel>(std::array<double, 2>{0.5, 0.5}));
        CHECK(tie.predict(&x, 1) == 1);
    }
    SUBCASE("a member violating the probability contract is rejected") {
        Ensemble bad;
        bad.models.push_back(
            std::make_unique<FixedModel>(std::array<double, 2>{0.9, 0.3}));
        bad.models.push_back(
            std::make_unique<FixedModel>(std::array<double, 2>{0.5, 0.5}));
        CHECK(error_kind_of([&] { bad.soft_vote(&x, 1); }) == ErrorKind::contract);
    }
    SUBCASE("an empty ensemble cannot vote") {
        Ensemble none;
        CHECK(error_kind_of([&] { none.soft_vote(&x, 1); }) == ErrorKind::config);
    }
}

TEST_CASE("fold seeds derive from the master seed") {
    CHECK(fold_seed(42, 0, 0) == mix64(mix64(42, 0), 0));
    CHECK(fold_seed(42, 3, 17) == mix64(mix64(42, 3), 17));
    CHECK(fold_seed(42, 3, 17) != fold_seed(42, 17, 3));
}

TEST_CASE("LOOCV pools trials and validates its inputs") {
    LabeledDataset d = tiny_dataset();
    EnsembleSpec spec;
    EvalConfig config;
    config.aug = {5, 0.05, 0};
    config.repeats = 3;
    config.seed = 11;

    EvaluationReport report = loocv_evaluate(d, spec, config);
    REQUIRE(report.trials.size() == 15); // n * k
    double sum = report.confusion.tn + report.confusion.fp + report.confusion.fn +
                 report.confusion.tp;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    // Trials run repeat-major, fold-minor.
    CHECK(report.trials[0].repeat == 0);
    CHECK(report.trials[0].sample_id == "a");
    CHECK(report.trials[4].sample_id == "e");
    CHECK(report.trials[5].repeat == 1);
    CHECK(report.trials[5].sample_id == "a");
    // The wide margin makes every trial correct here.
    CHECK(report.accuracy == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.recall == doctest::Approx(1.0).epsilon(1e-12));

    SUBCASE("too few samples or repeats") {
        LabeledDataset small;
        small.ids = {"a", "b"};
        small.x = rows_of({{0.0}, {1.0}});
        small.labels = {0, 1};
        CHECK(error_kind_of([&] { loocv_evaluate(small, spec, config); }) ==
              ErrorKind::config);
        EvalConfig zero = config;
        zero.repeats = 0;
        CHECK(error_kind_of([&] { loocv_evaluate(d, spec, zero); }) ==
              ErrorKind::config);
    }
}

TEST_CASE("the held-out label never reaches the fold model") {
    // Enough members per class that flipping any single label still leaves
    // every fold's training set with both classes.
    LabeledDataset d;
    d.ids = {"a", "b", "c", "d", "e", "f", "g", "h"};
    d.x = rows_of({{0.0}, {1.0}, {2.0}, {3.0}, {10.0}, {11.0}, {12.0}, {13.0}});
    d.labels = {0, 0, 0, 0, 1, 1, 1, 1};
    EnsembleSpec spec;
    EvalConfig config;
    config.aug = {3, 0.1, 0};
    config.repeats = 1;
    config.seed = 5;
    EvaluationReport base = loocv_evaluate(d, spec, config);

    for (size_t i = 0; i < d.x.rows; ++i) {
        LabeledDataset flipped = d;
        flipped.labels[i] = 1 - flipped.labels[i];
        EvaluationReport poisoned = loocv_evaluate(flipped, spec, config);
        // Same features, same fold seed, same training labels: the held-out
        // probability must be bitwise identical however row i is labeled.
        CHECK(poisoned.trials[i].prob1 == base.trials[i].prob1);
    }
}

TEST_CASE("per-fold transforms are fitted without the held-out row") {
    LabeledDataset d = tiny_dataset();
    EnsembleSpec spec;
    EvalConfig config;
    config.aug = {2, 0.01, 0};
    config.repeats = 1;
    config.seed = 9;

    auto seen = std::make_shared<std::vector<Matrix>>();
    TransformFactory factory = [seen](const Matrix& train) -> RowTransform {
        seen->push_back(train);
        return [](const double* row, size_t p) {
            return std::vector<double>(row, row + p);
        };
    };
    loocv_evaluate(d, spec, config, factory);
    REQUIRE(seen->size() == d.x.rows); // one fit per fold, sequential order
    for (size_t fold = 0; fold < seen->size(); ++fold) {
        const Matrix& train = (*seen)[fold];
        CHECK(train.rows == d.x.rows - 1);
        for (size_t r = 0; r < train.rows; ++r)
            CHECK(train.at(r, 0) != d.x.at(fold, 0)); // held-out row absent
    }
}

TEST_CASE("augmentation space controls what the transform sees") {
    LabeledDataset d = tiny_dataset();
    EnsembleSpec spec;
    EvalConfig config;
    config.aug = {4, 0.01, 0};
    config.repeats = 1;
    config.seed = 3;

    auto calls = std::make_shared<std::atomic<size_t>>(0);
    TransformFactory factory = [calls](const Matrix&) -> RowTransform {
        return [calls](const double* row, size_t p) {
            calls->fetch_add(1);
            return std::vector<double>(row, row + p);
        };
    };

    size_t n = d.x.rows;
    config.space = AugmentSpace::features;
    loocv_evaluate(d, spec, config, factory);
    // Train rows plus the held-out row, per fold.
    CHECK(calls->load() == n * ((n - 1) + 1));

    calls->store(0);
    config.space = AugmentSpace::raw_spectra;
    loocv_evaluate(d, spec, config, factory);
    // Every augmented copy is transformed, plus the held-out row, per fold.
    CHECK(calls->load() ==
          n * (static_cast<size_t>(config.aug.r) * (n - 1) + 1));
}

TEST_CASE("parallel evaluation reproduces the sequential report") {
    std::mt19937_64 gen(0xC0FFEE);
    std::uniform_real_distribution<double> v(-2.0, 2.0);
    LabeledDataset d;
    for (int i = 0; i < 8; ++i) {
        d.ids.push_back("s" + std::to_string(i));
        d.labels.push_back(i % 2);
    }
    d.x = Matrix(8, 2);
    for (size_t i = 0; i < 8; ++i)
        for (size_t j = 0; j < 2; ++j)
            d.x.at(i, j) = v(gen) + (d.labels[i] ? 1.0 : 0.0);

    EnsembleSpec spec;
    EvalConfig config;
    config.aug = {6, 0.4, 0};
    config.repeats = 4;
    config.seed = 77;

    config.parallel = false;
    EvaluationReport seq = loocv_evaluate(d, spec, config);
    config.parallel = true;
    config.threads = 3;
    EvaluationReport par = loocv_evaluate(d, spec, config);

    REQUIRE(par.trials.size() == seq.trials.size());
    for (size_t t = 0; t < seq.trials.size(); ++t) {
        CHECK(par.trials[t].prob1 == seq.trials[t].prob1); // bitwise
        CHECK(par.trials[t].predicted == seq.trials[t].predicted);
        CHECK(par.trials[t].sample_id == seq.trials[t].sample_id);
    }
    CHECK(par.confusion.tn == seq.confusion.tn);
    CHECK(par.confusion.fp == seq.confusion.fp);
    CHECK(par.confusion.fn == seq.confusion.fn);
    CHECK(par.confusion.tp == seq.confusion.tp);
    CHECK(par.accuracy == seq.accuracy);
}

TEST_CASE("ordinary least squares") {
    RegressionFit exact = linear_regression({1.0, 2.0, 3.0}, {2.0, 4.0, 6.0});
    CHECK(exact.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(exact.intercept == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(exact.r2 == doctest::Approx(1.0).epsilon(1e-12));

    // Hand-computed: x = {0,1,2,3}, y = {1,3,2,5}; slope 1.1, intercept 1.1,
    // SS_res 2.7, SS_tot 8.75.
    RegressionFit hand = linear_regression({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 2.0, 5.0});
    CHECK(hand.slope == doctest::Approx(1.1).epsilon(1e-12));
    CHECK(hand.intercept == doctest::Approx(1.1).epsilon(1e-12));
    CHECK(hand.r2 == doctest::Approx(1.0 - 2.7 / 8.75).epsilon(1e-12));

    CHECK(error_kind_of([] { linear_regression({1.0, 2.0}, {1.0, 2.0}); }) ==
          ErrorKind::numeric);
    CHECK(error_kind_of([] {
        linear_regression({2.0, 2.0, 2.0}, {1.0, 2.0, 3.0});
    }) == ErrorKind::numeric);
    CHECK(error_kind_of([] { linear_regression({1.0, 2.0, 3.0}, {1.0}); }) ==
          ErrorKind::config);
    // Constant y is fitted exactly by the constant line.
    CHECK(linear_regression({1.0, 2.0, 3.0}, {4.0, 4.0, 4.0}).r2 == 1.0);
}

TEST_CASE("evaluation reports serialize completely") {
    LabeledDataset d = tiny_dataset();
    EnsembleSpec spec;
    EvalConfig config;
    config.aug = {2, 0.05, 0};
    config.repeats = 2;
    config.seed = 123;
    EvaluationReport report = loocv_evaluate(d, spec, config);

    fs::path dir = fs::temp_directory_path();
    fs::path jpath = dir / ("soilrf_rep_" + std::to_string(::getpid()) + ".json");
    fs::path cpath = dir / ("soilrf_tri_" + std::to_string(::getpid()) + ".csv");
    write_report_json(report, jpath.string());
    write_trials_csv(report, cpath.string());

    nlohmann::json j = nlohmann::json::parse(read_text_file(jpath.string()));
    CHECK(j["n_trials"] == 10);
    CHECK(j["accuracy"].get<double>() == report.accuracy);
    CHECK(j["recall"].get<double>() == report.recall);
    double sum = j["confusion"]["tn"].get<double>() +
                 j["confusion"]["fp"].get<double>() +
                 j["confusion"]["fn"].get<double>() +
                 j["confusion"]["tp"].get<double>();
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(j["config"]["repeats"] == "2");

    std::string csv = read_text_file(cpath.string());
    CHECK(csv.find("repeat,fold,sample_id,label,prob1,predicted") !=
          std::string::npos);
    size_t lines = 0;
    for (char ch : csv)
        lines += ch == '\n';
    CHECK(lines >= 11); // header + 10 trials

    fs::remove(jpath);
    fs::remove(cpath);
}
