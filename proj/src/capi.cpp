// SPDX-License-Identifier: MIT
#include "soilrf.h"

#include <cstring>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "soilrf/dataset.hpp"
#include "soilrf/error.hpp"
#include "soilrf/features.hpp"
#include "soilrf/learning.hpp"
#include "soilrf/propagation.hpp"
#include "soilrf/sweep.hpp"
#include "soilrf/util.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

thread_local std::string g_last_error;

srf_status status_of(soilrf::ErrorKind kind) {
    switch (kind) {
    case soilrf::ErrorKind::config: return SRF_ERR_CONFIG;
    case soilrf::ErrorKind::load: return SRF_ERR_LOAD;
    case soilrf::ErrorKind::numeric: return SRF_ERR_NUMERIC;
    case soilrf::ErrorKind::calibration: return SRF_ERR_CALIBRATION;
    case soilrf::ErrorKind::contract: return SRF_ERR_CONTRACT;
    }
    return SRF_ERR_CONTRACT;
}

template <typename Fn> srf_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return SRF_OK;
    } catch (const soilrf::Error& e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SRF_ERR_CONTRACT;
    } catch (...) {
        g_last_error = "unknown failure";
        return SRF_ERR_CONTRACT;
    }
}

srf_status config_error(const std::string& what) {
    g_last_error = what;
    return SRF_ERR_CONFIG;
}

bool bad(const void* p) { return p == nullptr; }

soilrf::FeatureScheme scheme_from(const char* scheme, double interval_mhz) {
    soilrf::FeatureScheme s;
    s.kind = soilrf::scheme_kind_from_name(scheme);
    if (interval_mhz > 0.0)
        s.interval_mhz = interval_mhz;
    return s;
}

soilrf::LabeledDataset
labeled_for_space(const soilrf::LoadedDataset& ds, const soilrf::FeatureScheme& scheme,
                  const std::string& band, double threshold, soilrf::AugmentSpace space,
                  soilrf::TransformFactory& factory) {
    if (space == soilrf::AugmentSpace::raw_spectra) {
        factory = soilrf::raw_row_transform_factory(ds, scheme, band);
        return soilrf::labeled_from(soilrf::dataset_raw_rows(ds, band), ds, threshold);
    }
    factory = nullptr;
    return soilrf::labeled_from(soilrf::dataset_features(ds, scheme, band), ds, threshold);
}

} // namespace

struct srf_spectrum {
    soilrf::Spectrum s;
};

struct srf_dataset {
    soilrf::LoadedDataset ds;
};

struct srf_report {
    double accuracy = 0.0;
    double recall = 0.0;
};

extern "C" {

const char* srf_version(void) { return "1.0.0"; }

const char* srf_last_error(void) { return g_last_error.c_str(); }

/* ---- spectrum ------------------------------------------------------------- */

srf_status srf_spectrum_open(const char* csv_path, srf_spectrum** out) {
    if (bad(csv_path) || bad(out))
        return config_error("srf_spectrum_open: path and out must not be NULL");
    return guarded([&] {
        auto handle = new srf_spectrum{soilrf::read_spectrum_csv(csv_path)};
        *out = handle;
    });
}

void srf_spectrum_close(srf_spectrum* s) { delete s; }

srf_status srf_spectrum_size(const srf_spectrum* s, size_t* out) {
    if (bad(s) || bad(out))
        return config_error("srf_spectrum_size: handle and out must not be NULL");
    *out = s->s.freqs_mhz.size();
    g_last_error.clear();
    return SRF_OK;
}

srf_status srf_spectrum_point(const srf_spectrum* s, size_t index, double* freq_mhz,
                              double* power_dbm) {
    if (bad(s) || bad(freq_mhz) || bad(power_dbm))
        return config_error("srf_spectrum_point: arguments must not be NULL");
    if (index >= s->s.freqs_mhz.size())
        return config_error("srf_spectrum_point: index out of range");
    *freq_mhz = s->s.freqs_mhz[index];
    *power_dbm = s->s.power_dbm[index];
    g_last_error.clear();
    return SRF_OK;
}

srf_status srf_spectrum_diff800(const srf_spectrum* s, double* out) {
    if (bad(s) || bad(out))
        return config_error("srf_spectrum_diff800: arguments must not be NULL");
    return guarded([&] { *out = soilrf::diff800(s->s); });
}

srf_status srf_spectrum_diff2300(const srf_spectrum* s, double* out) {
    if (bad(s) || bad(out))
        return config_error("srf_spectrum_diff2300: arguments must not be NULL");
    return guarded([&] { *out = soilrf::diff2300(s->s); });
}

srf_status srf_spectrum_save(const srf_spectrum* s, const char* csv_path) {
    if (bad(s) || bad(csv_path))
        return config_error("srf_spectrum_save: arguments must not be NULL");
    return guarded([&] { soilrf::write_spectrum_csv(s->s, csv_path, {}); });
}

/* ---- dataset -------------------------------------------------------------- */

srf_status srf_dataset_open(const char* manifest_path, srf_dataset** out) {
    if (bad(manifest_path) || bad(out))
        return config_error("srf_dataset_open: arguments must not be NULL");
    return guarded([&] {
        auto handle = new srf_dataset{soilrf::load_dataset(manifest_path)};
        *out = handle;
    });
}

void srf_dataset_close(srf_dataset* d) { delete d; }

srf_status srf_dataset_size(const srf_dataset* d, size_t* out) {
    if (bad(d) || bad(out))
        return config_error("srf_dataset_size: arguments must not be NULL");
    *out = d->ds.manifest.samples.size();
    g_last_error.clear();
    return SRF_OK;
}

srf_status srf_dataset_sample_id(const srf_dataset* d, size_t index, char* buf,
                                 size_t buf_len) {
    if (bad(d) || bad(buf) || buf_len == 0)
        return config_error("srf_dataset_sample_id: arguments must not be NULL/empty");
    if (index >= d->ds.manifest.samples.size())
        return config_error("srf_dataset_sample_id: index out of range");
    const std::string& id = d->ds.manifest.samples[index].id;
    if (id.size() + 1 > buf_len)
        return config_error("srf_dataset_sample_id: buffer too small");
    std::memcpy(buf, id.c_str(), id.size() + 1);
    g_last_error.clear();
    return SRF_OK;
}

srf_status srf_dataset_content_hash(const srf_dataset* d, uint64_t* out) {
    if (bad(d) || bad(out))
        return config_error("srf_dataset_content_hash: arguments must not be NULL");
    return guarded([&] { *out = soilrf::dataset_content_hash(d->ds); });
}

/* ---- report --------------------------------------------------------------- */

srf_status srf_report_open(const char* json_path, srf_report** out) {
    if (bad(json_path) || bad(out))
        return config_error("srf_report_open: arguments must not be NULL");
    return guarded([&] {
        json j;
        try {
            j = json::parse(soilrf::read_text_file(json_path));
        } catch (const json::exception& e) {
            soilrf::fail(soilrf::ErrorKind::load,
                         std::string("report is not valid JSON: ") + e.what());
        }
        if (!j.contains("accuracy") || !j.contains("recall"))
            soilrf::fail(soilrf::ErrorKind::load,
                         "report is missing accuracy/recall fields");
        auto handle = new srf_report{j["accuracy"].get<double>(), j["recall"].get<double>()};
        *out = handle;
    });
}

void srf_report_close(srf_report* r) { delete r; }

srf_status srf_report_accuracy(const srf_report* r, double* out) {
    if (bad(r) || bad(out))
        return config_error("srf_report_accuracy: arguments must not be NULL");
    *out = r->accuracy;
    g_last_error.clear();
    return SRF_OK;
}

srf_status srf_report_recall(const srf_report* r, double* out) {
    if (bad(r) || bad(out))
        return config_error("srf_report_recall: arguments must not be NULL");
    *out = r->recall;
    g_last_error.clear();
    return SRF_OK;
}

/* ---- pipeline stages -------------------------------------------------------- */

srf_status srf_simulate_sample(double pb_ppm, double nacl_ppm, double moisture,
                               double noise_sigma_dbm, uint64_t seed, const char* out_dir,
                               const char* stem) {
    if (bad(out_dir) || bad(stem))
        return config_error("srf_simulate_sample: out_dir and stem must not be NULL");
    return guarded([&] {
        soilrf::SimulationSetup setup = soilrf::default_setup();
        setup.noise.sigma_dbm = noise_sigma_dbm;
        auto spectra =
            soilrf::simulate_sample_spectra(pb_ppm, nacl_ppm, moisture, setup, seed);
        std::map<std::string, std::string> kv{
            {"pb_ppm", soilrf::format_double(pb_ppm)},
            {"nacl_ppm", soilrf::format_double(nacl_ppm)},
            {"moisture", soilrf::format_double(moisture)}};
        for (const auto& [band, s] : spectra) {
            fs::path path = fs::path(out_dir) / (std::string(stem) + "_" + band + ".csv");
            soilrf::write_spectrum_csv(s, path.string(), kv);
        }
    });
}

srf_status srf_generate_controlled(uint64_t seed, double noise_sigma_dbm,
                                   const char* out_dir) {
    if (bad(out_dir))
        return config_error("srf_generate_controlled: out_dir must not be NULL");
    return guarded([&] {
        soilrf::SimulationSetup setup = soilrf::default_setup();
        setup.noise.sigma_dbm = noise_sigma_dbm;
        soilrf::LoadedDataset ds =
            soilrf::generate_controlled_set(soilrf::controlled_design(), setup, seed);
        soilrf::save_dataset(ds, out_dir);
    });
}

srf_status srf_generate_field_like(int n, uint64_t seed, double noise_sigma_dbm,
                                   const char* out_dir) {
    if (bad(out_dir))
        return config_error("srf_generate_field_like: out_dir must not be NULL");
    return guarded([&] {
        soilrf::SimulationSetup setup = soilrf::default_setup();
        setup.noise.sigma_dbm = noise_sigma_dbm;
        soilrf::LoadedDataset ds = soilrf::generate_field_like_set(n, setup, seed);
        soilrf::save_dataset(ds, out_dir);
    });
}

srf_status srf_sweep_sample(double pb_ppm, double nacl_ppm, double moisture,
                            double noise_sigma_dbm, uint64_t seed, const char* out_dir,
                            const char* stem) {
    if (bad(out_dir) || bad(stem))
        return config_error("srf_sweep_sample: out_dir and stem must not be NULL");
    return guarded([&] {
        soilrf::SimulationSetup setup = soilrf::default_setup();
        soilrf::SoilSample sample;
        sample.moisture = moisture;
        sample.salts = {{soilrf::kNaclSaltKey, nacl_ppm}, {soilrf::kPbSaltKey, pb_ppm}};
        auto [path, media] = soilrf::standard_soil_path(sample, setup.salts,
                                                        setup.dielectric, setup.geometry);
        const soilrf::TransmitConfig* configs[2] = {&setup.low, &setup.high};
        for (int b = 0; b < 2; ++b) {
            soilrf::SweepConfig sweep;
            sweep.band = configs[b]->band;
            sweep.step_mhz = configs[b]->step_mhz;
            soilrf::SimulatedToneStream stream(
                *configs[b], path, media, noise_sigma_dbm,
                soilrf::mix64(seed, static_cast<uint64_t>(b)), sweep.fft_size);
            auto [spectrum, trace] = soilrf::run_sweep(stream, sweep, seed);
            std::map<std::string, std::string> kv{
                {"pb_ppm", soilrf::format_double(pb_ppm)},
                {"nacl_ppm", soilrf::format_double(nacl_ppm)},
                {"moisture", soilrf::format_double(moisture)},
                {"noise_sigma_dbm", soilrf::format_double(noise_sigma_dbm)}};
            std::string band = spectrum.band_label;
            fs::path base = fs::path(out_dir) / (std::string(stem) + "_" + band);
            soilrf::write_spectrum_csv(spectrum, base.string() + ".csv", kv);
            soilrf::write_trace_csv(trace, base.string() + "_trace.csv", kv);
        }
    });
}

srf_status srf_featurize_manifest(const char* manifest_path, const char* scheme,
                                  double interval_mhz, const char* band,
                                  const char* out_csv) {
    if (bad(manifest_path) || bad(scheme) || bad(band) || bad(out_csv))
        return config_error("srf_featurize_manifest: arguments must not be NULL");
    return guarded([&] {
        soilrf::LoadedDataset ds = soilrf::load_dataset(manifest_path);
        soilrf::FeatureScheme fs_ = scheme_from(scheme, interval_mhz);
        soilrf::FeatureMatrix m = soilrf::dataset_features(ds, fs_, band);
        std::map<std::string, std::string> kv{
            {"scheme", soilrf::scheme_kind_name(fs_.kind)},
            {"interval_mhz", soilrf::format_double(fs_.interval_mhz)},
            {"band", band}};
        soilrf::write_feature_csv(m, out_csv, kv);
    });
}

srf_status srf_augment_features(const char* features_csv, int r, double sigma_max,
                                uint64_t seed, const char* out_csv) {
    if (bad(features_csv) || bad(out_csv))
        return config_error("srf_augment_features: arguments must not be NULL");
    return guarded([&] {
        soilrf::FeatureMatrix m = soilrf::read_feature_csv(features_csv);
        soilrf::AugmentationConfig cfg{r, sigma_max, seed};
        soilrf::Matrix noisy = soilrf::augment_rows(m.x, cfg);
        soilrf::FeatureMatrix out;
        out.names = m.names;
        out.x = std::move(noisy);
        char suffix[32];
        for (int copy = 0; copy < r; ++copy) {
            std::snprintf(suffix, sizeof(suffix), "#a%03d", copy);
            for (const auto& id : m.sample_ids)
                out.sample_ids.push_back(id + suffix);
        }
        std::map<std::string, std::string> kv{
            {"augment_r", std::to_string(r)},
            {"augment_sigma_max", soilrf::format_double(sigma_max)},
            {"seed", std::to_string(seed)}};
        soilrf::write_feature_csv(out, out_csv, kv);
    });
}

srf_status srf_train_manifest(const char* manifest_path, const char* scheme,
                              double interval_mhz, const char* band, double threshold_ppm,
                              int r, double sigma_max, uint64_t seed,
                              const char* out_json) {
    if (bad(manifest_path) || bad(scheme) || bad(band) || bad(out_json))
        return config_error("srf_train_manifest: arguments must not be NULL");
    return guarded([&] {
        soilrf::LoadedDataset ds = soilrf::load_dataset(manifest_path);
        soilrf::FeatureScheme fs_ = scheme_from(scheme, interval_mhz);
        soilrf::LabeledDataset data =
            soilrf::labeled_from(soilrf::dataset_features(ds, fs_, band), ds,
                                 threshold_ppm);
        soilrf::AugmentationConfig cfg{r, sigma_max, seed};
        soilrf::LabeledDataset augmented = soilrf::augment(data, cfg);
        soilrf::EnsembleSpec spec;
        soilrf::Ensemble ensemble =
            soilrf::fit_ensemble(spec, augmented.x, augmented.labels);

        soilrf::EvaluationReport report;
        double tn = 0, fp = 0, fn = 0, tp = 0;
        for (size_t i = 0; i < data.x.rows; ++i) {
            auto pr = ensemble.soft_vote(data.x.row(i), data.x.cols);
            int predicted = pr[1] >= pr[0] ? 1 : 0;
            soilrf::TrialRecord t;
            t.repeat = 0;
            t.fold = static_cast<int>(i);
            t.sample_id = data.ids[i];
            t.label = data.labels[i];
            t.prob1 = pr[1];
            t.predicted = predicted;
            report.trials.push_back(std::move(t));
            if (data.labels[i] == 0)
                (predicted == 0 ? tn : fp) += 1.0;
            else
                (predicted == 1 ? tp : fn) += 1.0;
        }
        double n = static_cast<double>(data.x.rows);
        report.confusion = {tn / n, fp / n, fn / n, tp / n};
        soilrf::Metrics metrics = soilrf::report_metrics(report.confusion);
        report.accuracy = metrics.accuracy;
        report.recall = metrics.recall;
        report.config_echo["mode"] = "training_fit";
        report.config_echo["scheme"] = soilrf::scheme_kind_name(fs_.kind);
        report.config_echo["band"] = band;
        report.config_echo["threshold_ppm"] = soilrf::format_double(threshold_ppm);
        report.config_echo["augment_r"] = std::to_string(r);
        report.config_echo["augment_sigma_max"] = soilrf::format_double(sigma_max);
        report.config_echo["seed"] = std::to_string(seed);
        soilrf::write_report_json(report, out_json);
    });
}

srf_status srf_evaluate_manifest(const char* manifest_path, const char* scheme,
                                 double interval_mhz, const char* band,
                                 double threshold_ppm, int r, double sigma_max,
                                 int repeats, uint64_t seed, const char* space,
                                 int parallel, const char* out_json,
                                 const char* trials_csv) {
    if (bad(manifest_path) || bad(scheme) || bad(band) || bad(space) || bad(out_json))
        return config_error("srf_evaluate_manifest: arguments must not be NULL");
    return guarded([&] {
        soilrf::AugmentSpace aug_space;
        std::string space_s = space;
        if (space_s == "features")
            aug_space = soilrf::AugmentSpace::features;
        else if (space_s == "raw_spectra")
            aug_space = soilrf::AugmentSpace::raw_spectra;
        else
            soilrf::fail(soilrf::ErrorKind::config,
                         "space must be 'features' or 'raw_spectra', got '" + space_s + "'");

        soilrf::LoadedDataset ds = soilrf::load_dataset(manifest_path);
        soilrf::FeatureScheme fs_ = scheme_from(scheme, interval_mhz);
        soilrf::TransformFactory factory;
        soilrf::LabeledDataset data =
            labeled_for_space(ds, fs_, band, threshold_ppm, aug_space, factory);

        soilrf::EvalConfig config;
        config.aug.r = r;
        config.aug.sigma_max = sigma_max;
        config.repeats = repeats;
        config.seed = seed;
        config.space = aug_space;
        config.parallel = parallel != 0;
        soilrf::EnsembleSpec spec;
        soilrf::EvaluationReport report =
            soilrf::loocv_evaluate(data, spec, config, factory);
        report.config_echo["scheme"] = soilrf::scheme_kind_name(fs_.kind);
        report.config_echo["band"] = band;
        report.config_echo["threshold_ppm"] = soilrf::format_double(threshold_ppm);
        soilrf::write_report_json(report, out_json);
        if (trials_csv != nullptr)
            soilrf::write_trials_csv(report, trials_csv);
    });
}

srf_status srf_calibrate_default(const char* out_json) {
    if (bad(out_json))
        return config_error("srf_calibrate_default: out_json must not be NULL");
    return guarded([&] {
        soilrf::SimulationSetup setup = soilrf::default_setup();
        soilrf::CalibrationResult result =
            soilrf::calibrate_fixtures(soilrf::default_trend_spec(), setup);
        soilrf::write_salt_models_json(result.models, result.checks, out_json,
                                       {{"spec", "default"}});
    });
}

srf_status srf_regress_manifest(const char* manifest_path, const char* out_json) {
    if (bad(manifest_path) || bad(out_json))
        return config_error("srf_regress_manifest: arguments must not be NULL");
    return guarded([&] {
        soilrf::LoadedDataset ds = soilrf::load_dataset(manifest_path);
        std::vector<double> pb_x, pb_y, nacl_x, nacl_y;
        for (const auto& rec : ds.manifest.samples) {
            if (!(rec.moisture > 0.0))
                continue; // dry baseline is outside both series
            if (rec.nacl_ppm == 0.0) {
                const soilrf::Spectrum& low = ds.spectra.at(rec.id).at("low");
                pb_x.push_back(soilrf::diff800(low));
                pb_y.push_back(rec.pb_ppm);
            }
            if (rec.pb_ppm == 0.0) {
                const soilrf::Spectrum& high = ds.spectra.at(rec.id).at("high");
                nacl_x.push_back(soilrf::diff2300(high));
                nacl_y.push_back(rec.nacl_ppm);
            }
        }
        soilrf::RegressionFit pb_fit = soilrf::linear_regression(pb_x, pb_y);
        soilrf::RegressionFit nacl_fit = soilrf::linear_regression(nacl_x, nacl_y);
        json j;
        j["pb_diff800"] = {{"slope", pb_fit.slope},
                           {"intercept", pb_fit.intercept},
                           {"r2", pb_fit.r2},
                           {"n", pb_x.size()}};
        j["nacl_diff2300"] = {{"slope", nacl_fit.slope},
                              {"intercept", nacl_fit.intercept},
                              {"r2", nacl_fit.r2},
                              {"n", nacl_x.size()}};
        soilrf::atomic_write_text(out_json, j.dump(2) + "\n");
    });
}

srf_status srf_metrics(double tn, double fp, double fn, double tp, double* accuracy,
                       double* recall) {
    if (bad(accuracy) || bad(recall))
        return config_error("srf_metrics: out pointers must not be NULL");
    return guarded([&] {
        soilrf::Metrics m = soilrf::report_metrics({tn, fp, fn, tp});
        *accuracy = m.accuracy;
        *recall = m.recall;
    });
}

} // extern "C"
