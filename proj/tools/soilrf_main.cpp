// SPDX-License-Identifier: MIT
//
// soilrf command-line front end. Thin shell over the C API: every subcommand
// maps to one pipeline stage, prints a one-line summary on success and the
// library error message on failure, and exits with the srf_status code.
#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "soilrf.h"

namespace {

int finish(const char* stage, srf_status status, const std::string& detail) {
    if (status == SRF_OK) {
        std::printf("%s: ok%s%s\n", stage, detail.empty() ? "" : " ", detail.c_str());
        return 0;
    }
    std::fprintf(stderr, "%s: error %d: %s\n", stage, static_cast<int>(status),
                 srf_last_error());
    return static_cast<int>(status);
}

std::string report_summary(const char* json_path) {
    srf_report* rep = nullptr;
    if (srf_report_open(json_path, &rep) != SRF_OK)
        return std::string("-> ") + json_path;
    double acc = 0.0, rec = 0.0;
    srf_report_accuracy(rep, &acc);
    srf_report_recall(rep, &rec);
    srf_report_close(rep);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "accuracy=%.4f recall=%.4f -> %s", acc, rec,
                  json_path);
    return buf;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"RF soil-contamination pipeline (simulate, sweep, featurize, "
                 "augment, train, evaluate, calibrate, regress)"};
    app.require_subcommand(1);

    // Shared option state; each subcommand binds the subset it uses.
    double pb = 0.0, nacl = 0.0, moisture = 0.20, noise = 0.0;
    double interval = 25.0, threshold = 200.0, sigma_max = 3.0;
    std::uint64_t seed = 0;
    int r = 200, repeats = 100, n_field = 22;
    bool parallel = false, controlled = false;
    int field_like = -1;
    std::string out, manifest, stem = "sample", scheme = "diffpair";
    std::string band = "both", space = "features", features_csv, trials;

    auto* sim = app.add_subcommand("simulate", "Simulate spectra with the bench model");
    sim->add_flag("--controlled", controlled,
                  "Generate the built-in 25-sample controlled spiking set");
    sim->add_option("--field-like", field_like,
                    "Generate a synthetic field-like set of N samples")
        ->expected(1);
    sim->add_option("--pb", pb, "Pb concentration, ppm (single sample mode)");
    sim->add_option("--nacl", nacl, "NaCl concentration, ppm (single sample mode)");
    sim->add_option("--moisture", moisture, "Volumetric moisture fraction");
    sim->add_option("--noise-sigma", noise, "Additive power noise sigma, dBm");
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_option("--stem", stem, "Output filename stem (single sample mode)");
    sim->add_option("--out", out, "Output directory")->required();

    auto* sweep = app.add_subcommand(
        "sweep", "Acquire spectra through the retry/skip sweep controller");
    sweep->add_option("--pb", pb, "Pb concentration, ppm");
    sweep->add_option("--nacl", nacl, "NaCl concentration, ppm");
    sweep->add_option("--moisture", moisture, "Volumetric moisture fraction");
    sweep->add_option("--noise-sigma", noise, "Per-sample stream noise sigma");
    sweep->add_option("--seed", seed, "RNG seed");
    sweep->add_option("--stem", stem, "Output filename stem");
    sweep->add_option("--out", out, "Output directory")->required();

    auto* feat = app.add_subcommand("featurize", "Extract features from a dataset");
    feat->add_option("--manifest", manifest, "Dataset manifest JSON")->required();
    feat->add_option("--scheme", scheme, "diffpair | hop | aggregate | weighted");
    feat->add_option("--interval-mhz", interval, "Window width for binned schemes");
    feat->add_option("--band", band, "low | high | both");
    feat->add_option("--out", out, "Output feature CSV")->required();

    auto* aug = app.add_subcommand("augment", "Gaussian-augment a feature CSV");
    aug->add_option("--features", features_csv, "Input feature CSV")->required();
    aug->add_option("--r", r, "Noisy copies of the table");
    aug->add_option("--sigma-max", sigma_max, "Upper bound of the per-copy sigma");
    aug->add_option("--seed", seed, "RNG seed");
    aug->add_option("--out", out, "Output feature CSV")->required();

    auto* train = app.add_subcommand(
        "train", "Fit the soft-voting ensemble on a full dataset");
    train->add_option("--manifest", manifest, "Dataset manifest JSON")->required();
    train->add_option("--scheme", scheme, "diffpair | hop | aggregate | weighted");
    train->add_option("--interval-mhz", interval, "Window width for binned schemes");
    train->add_option("--band", band, "low | high | both");
    train->add_option("--threshold-ppm", threshold, "Pb class threshold");
    train->add_option("--r", r, "Augmentation copies");
    train->add_option("--sigma-max", sigma_max, "Augmentation sigma upper bound");
    train->add_option("--seed", seed, "RNG seed");
    train->add_option("--out", out, "Output report JSON")->required();

    auto* eval = app.add_subcommand(
        "evaluate", "Repeated leave-one-out evaluation with in-fold augmentation");
    eval->add_option("--manifest", manifest, "Dataset manifest JSON")->required();
    eval->add_option("--scheme", scheme, "diffpair | hop | aggregate | weighted");
    eval->add_option("--interval-mhz", interval, "Window width for binned schemes");
    eval->add_option("--band", band, "low | high | both");
    eval->add_option("--threshold-ppm", threshold, "Pb class threshold");
    eval->add_option("--r", r, "Augmentation copies per fold");
    eval->add_option("--sigma-max", sigma_max, "Augmentation sigma upper bound");
    eval->add_option("--k", repeats, "Evaluation repeats");
    eval->add_option("--seed", seed, "Master RNG seed");
    eval->add_option("--space", space, "features | raw_spectra");
    eval->add_flag("--parallel", parallel, "Evaluate folds on a thread pool");
    eval->add_option("--trials", trials, "Optional per-trial CSV path");
    eval->add_option("--out", out, "Output report JSON")->required();

    auto* cal = app.add_subcommand(
        "calibrate", "Check/adjust the salt fixtures against the trend targets");
    cal->add_option("--out", out, "Output models JSON")->required();

    auto* reg = app.add_subcommand(
        "regress", "Concentration ~ difference-feature linear fits");
    reg->add_option("--manifest", manifest, "Dataset manifest JSON")->required();
    reg->add_option("--out", out, "Output regression JSON")->required();

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) {
        if (controlled && field_like >= 0) {
            std::fprintf(stderr, "simulate: choose one of --controlled/--field-like\n");
            return static_cast<int>(SRF_ERR_CONFIG);
        }
        if (controlled)
            return finish("simulate", srf_generate_controlled(seed, noise, out.c_str()),
                          "controlled set -> " + out);
        if (field_like >= 0) {
            n_field = field_like;
            return finish("simulate",
                          srf_generate_field_like(n_field, seed, noise, out.c_str()),
                          "field-like set (n=" + std::to_string(n_field) + ") -> " + out);
        }
        return finish("simulate",
                      srf_simulate_sample(pb, nacl, moisture, noise, seed, out.c_str(),
                                          stem.c_str()),
                      stem + "_{low,high}.csv -> " + out);
    }
    if (sweep->parsed())
        return finish("sweep",
                      srf_sweep_sample(pb, nacl, moisture, noise, seed, out.c_str(),
                                       stem.c_str()),
                      stem + " spectra+traces -> " + out);
    if (feat->parsed())
        return finish("featurize",
                      srf_featurize_manifest(manifest.c_str(), scheme.c_str(), interval,
                                             band.c_str(), out.c_str()),
                      scheme + "/" + band + " -> " + out);
    if (aug->parsed())
        return finish("augment",
                      srf_augment_features(features_csv.c_str(), r, sigma_max, seed,
                                           out.c_str()),
                      "r=" + std::to_string(r) + " -> " + out);
    if (train->parsed()) {
        srf_status st = srf_train_manifest(manifest.c_str(), scheme.c_str(), interval,
                                           band.c_str(), threshold, r, sigma_max, seed,
                                           out.c_str());
        return finish("train", st, st == SRF_OK ? report_summary(out.c_str()) : "");
    }
    if (eval->parsed()) {
        srf_status st = srf_evaluate_manifest(
            manifest.c_str(), scheme.c_str(), interval, band.c_str(), threshold, r,
            sigma_max, repeats, seed, space.c_str(), parallel ? 1 : 0, out.c_str(),
            trials.empty() ? nullptr : trials.c_str());
        return finish("evaluate", st, st == SRF_OK ? report_summary(out.c_str()) : "");
    }
    if (cal->parsed())
        return finish("calibrate", srf_calibrate_default(out.c_str()), "-> " + out);
    if (reg->parsed())
        return finish("regress", srf_regress_manifest(manifest.c_str(), out.c_str()),
                      "-> " + out);
    return static_cast<int>(SRF_ERR_CONFIG);
}
