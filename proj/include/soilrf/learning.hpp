// SPDX-License-Identifier: MIT
//
// Classification pipeline: threshold label encoding, Gaussian augmentation,
// four from-scratch base classifiers under a soft-voting ensemble, repeated
// leave-one-out cross-validation with trial-level pooling, ordinary
// least-squares calibration fits, and confusion-matrix metrics.
#ifndef SOILRF_LEARNING_HPP
#define SOILRF_LEARNING_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "soilrf/matrix.hpp"

namespace soilrf {

inline constexpr double kDefaultThresholdPpm = 200.0;

// 1 when concentration >= threshold. Negative concentrations are a domain
// error.
int encode_label(double ppm, double threshold_ppm = kDefaultThresholdPpm);
std::vector<int> encode_labels(const std::vector<double>& ppm,
                               double threshold_ppm = kDefaultThresholdPpm);

struct LabeledDataset {
    std::vector<std::string> ids;
    Matrix x;
    std::vector<int> labels;    // 0/1, consistent with pb_ppm >= threshold
    std::vector<double> pb_ppm; // source concentrations (may be empty)

    void validate() const; // shape/label checks, Error{config}
};

// Noise-based oversampling: the training rows are copied `r` times and every
// copy gets i.i.d. Gaussian feature noise, with the copy's sigma drawn
// uniformly from (0, sigma_max] (clamped to >= 1e-12 so the sigma_max -> 0
// limit degenerates to near-exact copies). Labels are copied unchanged, so
// class proportions are preserved. Output row count is exactly r * n.
struct AugmentationConfig {
    int r = 200;
    double sigma_max = 3.0;
    uint64_t seed = 0;
};

Matrix augment_rows(const Matrix& x, const AugmentationConfig& config);
LabeledDataset augment(const LabeledDataset& train, const AugmentationConfig& config);

// Whether augmentation noise lands on raw spectrum rows (before the feature
// transform) or on transformed feature rows.
enum class AugmentSpace { raw_spectra, features };

// --- base models -------------------------------------------------------------

struct LogisticParams {
    double l2 = 1.0;     // ridge strength on non-intercept weights
    int max_iter = 1000; // Newton iteration cap
    double tol = 1e-8;   // gradient-norm stopping tolerance
};

struct SvmParams {
    double c = 1.0;  // hinge-loss weight
    int epochs = 200; // full-batch subgradient passes
};

struct TreeParams {
    int max_depth = 4;
    int min_leaf = 2;
};

struct NbParams {
    double var_floor = 1e-9;
};

enum class ModelKind { logistic, svm, tree, gnb };

struct EnsembleSpec {
    std::vector<ModelKind> models{ModelKind::logistic, ModelKind::svm,
                                  ModelKind::tree, ModelKind::gnb};
    LogisticParams logistic;
    SvmParams svm;
    TreeParams tree;
    NbParams nb;

    void validate() const; // >= 2 base models, Error{config}
};

class BaseModel {
public:
    virtual ~BaseModel() = default;
    // P(class 0), P(class 1); must sum to 1.
    virtual std::array<double, 2> predict_proba(const double* x, size_t p) const = 0;
};

// Fits one base model. Logistic regression and Gaussian naive Bayes require
// both classes in the training data (domain error otherwise); the tree and
// the SVM degrade to a constant predictor on single-class data.
std::unique_ptr<BaseModel> fit_base(ModelKind kind, const Matrix& x,
                                    const std::vector<int>& y,
                                    const EnsembleSpec& spec);

struct Ensemble {
    std::vector<std::unique_ptr<BaseModel>> models;

    // Mean of the members' probability vectors. Throws Error{contract} if a
    // member emits probabilities that do not sum to 1 within 1e-6.
    std::array<double, 2> soft_vote(const double* x, size_t p) const;
    // Argmax of soft_vote with ties (p1 == p0) resolved to class 1.
    int predict(const double* x, size_t p) const;
};

Ensemble fit_ensemble(const EnsembleSpec& spec, const Matrix& x,
                      const std::vector<int>& y);

// --- metrics -----------------------------------------------------------------

struct ConfusionMatrix {
    double tn = 0, fp = 0, fn = 0, tp = 0;
};

struct Metrics {
    double accuracy = 0.0;
    double recall = 0.0;
};

// accuracy = (tn+tp)/total, recall = tp/(tp+fn). Entries must be
// non-negative with a positive sum. Entries summing to within 2% of 1 are
// treated as exact proportions (published normalized matrices carry rounding
// slack that renormalization would amplify); anything else is treated as raw
// counts and normalized by the sum. Recall is scale-free either way and is
// defined as 1 (vacuous) when tp+fn == 0.
Metrics report_metrics(const ConfusionMatrix& m);

// --- repeated LOOCV ----------------------------------------------------------

struct TrialRecord {
    int repeat = 0;
    int fold = 0;
    std::string sample_id;
    int label = 0;
    double prob1 = 0.0;
    int predicted = 0;
};

struct EvalConfig {
    AugmentationConfig aug; // aug.seed is ignored here; fold seeds derive from `seed`
    int repeats = 100;      // k
    uint64_t seed = 0;
    AugmentSpace space = AugmentSpace::features;
    bool parallel = false; // execution strategy only; never changes results
    int threads = 0;       // 0 = hardware concurrency
};

// Built per fold from the training rows (raw, pre-augmentation) and applied
// to every row entering the models that fold; this is what keeps fitted
// transforms (e.g. variance weights) blind to the held-out row.
using RowTransform = std::function<std::vector<double>(const double* row, size_t p)>;
using TransformFactory = std::function<RowTransform(const Matrix& train_rows)>;

struct EvaluationReport {
    ConfusionMatrix confusion; // normalized: entries sum to 1 over n*k trials
    double accuracy = 0.0;
    double recall = 0.0;
    std::vector<TrialRecord> trials; // n*k rows, repeat-major then fold order
    std::map<std::string, std::string> config_echo;
};

// Deterministic sub-seed for (repeat, fold); published so external code can
// reproduce any single fold exactly (leakage audits rely on this).
uint64_t fold_seed(uint64_t master_seed, int repeat, int fold);

// Leave-one-out cross-validation repeated `repeats` times: per (repeat,
// fold), the held-out row never reaches augmentation, transform fitting or
// model fitting; the confusion matrix pools all n*k trials and is
// normalized by n*k. Identical results for parallel and sequential
// execution and for any thread count.
EvaluationReport loocv_evaluate(const LabeledDataset& data, const EnsembleSpec& spec,
                                const EvalConfig& config,
                                const TransformFactory& factory = nullptr);

// --- regression ----------------------------------------------------------------

struct RegressionFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0; // 1 - SS_res / SS_tot
};

// Ordinary least squares of y on x. Requires n >= 3 and non-constant x
// (degenerate-fit error otherwise). R^2 is 1 when y is constant.
RegressionFit linear_regression(const std::vector<double>& x,
                                const std::vector<double>& y);

// Serialization of an evaluation: JSON summary and per-trial CSV.
void write_report_json(const EvaluationReport& r, const std::string& path);
void write_trials_csv(const EvaluationReport& r, const std::string& path);

} // namespace soilrf

#endif
