// SPDX-License-Identifier: MIT
#include "soilrf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include <nlohmann/json.hpp>

#include "soilrf/error.hpp"
#include "soilrf/units.hpp"
#include "soilrf/util.hpp"

#include "rng.hpp"

namespace soilrf {

using nlohmann::json;

namespace fs = std::filesystem;

// --- manifest I/O ----------------------------------------------------------------

static std::map<std::string, std::string> string_map_from(const json& j,
                                                          const std::string& where) {
    std::map<std::string, std::string> out;
    if (j.is_null())
        return out;
    if (!j.is_object())
        fail(ErrorKind::load, where + " must be a JSON object of strings");
    for (const auto& [k, v] : j.items()) {
        if (v.is_string())
            out[k] = v.get<std::string>();
        else
            out[k] = v.dump();
    }
    return out;
}

DatasetManifest read_manifest(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        fail(ErrorKind::load, "manifest " + path + " is not valid JSON: " + e.what());
    }
    DatasetManifest m;
    if (!j.is_object())
        fail(ErrorKind::load, "manifest " + path + " must be a JSON object");
    m.schema_version = j.value("schema_version", 0);
    if (m.schema_version != 1)
        fail(ErrorKind::load, "manifest " + path + " has unsupported schema_version " +
                                  std::to_string(m.schema_version));
    if (!j.contains("step_mhz") || !j["step_mhz"].is_number())
        fail(ErrorKind::load, "manifest " + path + " is missing numeric step_mhz");
    m.step_mhz = j["step_mhz"].get<double>();
    m.config_echo = string_map_from(j.value("config", json()), path + " config");
    if (!j.contains("samples") || !j["samples"].is_array())
        fail(ErrorKind::load, "manifest " + path + " is missing a samples array");
    for (const auto& sj : j["samples"]) {
        SampleRecord rec;
        if (!sj.contains("id") || !sj["id"].is_string())
            fail(ErrorKind::load, "manifest " + path + ": every sample needs a string id");
        rec.id = sj["id"].get<std::string>();
        rec.pb_ppm = sj.value("pb_ppm", 0.0);
        rec.nacl_ppm = sj.value("nacl_ppm", 0.0);
        rec.moisture = sj.value("moisture", 0.0);
        if (!sj.contains("spectra") || !sj["spectra"].is_object() || sj["spectra"].empty())
            fail(ErrorKind::load,
                 "manifest " + path + ": sample '" + rec.id + "' lists no spectra");
        for (const auto& [band, rel] : sj["spectra"].items()) {
            if (!rel.is_string())
                fail(ErrorKind::load, "manifest " + path + ": sample '" + rec.id +
                                          "' band '" + band + "' path must be a string");
            rec.spectra[band] = rel.get<std::string>();
        }
        rec.metadata = string_map_from(sj.value("metadata", json()), path + " metadata");
        m.samples.push_back(std::move(rec));
    }
    if (m.samples.empty())
        fail(ErrorKind::load, "manifest " + path + " lists no samples");
    std::set<std::string> ids;
    for (const auto& rec : m.samples)
        if (!ids.insert(rec.id).second)
            fail(ErrorKind::load, "manifest " + path + ": duplicate sample id '" + rec.id + "'");
    return m;
}

void write_manifest(const DatasetManifest& m, const std::string& path) {
    json j;
    j["schema_version"] = m.schema_version;
    j["step_mhz"] = m.step_mhz;
    j["config"] = m.config_echo;
    j["samples"] = json::array();
    for (const auto& rec : m.samples) {
        json sj;
        sj["id"] = rec.id;
        sj["pb_ppm"] = rec.pb_ppm;
        sj["nacl_ppm"] = rec.nacl_ppm;
        sj["moisture"] = rec.moisture;
        sj["spectra"] = rec.spectra;
        sj["metadata"] = rec.metadata;
        j["samples"].push_back(std::move(sj));
    }
    atomic_write_text(path, j.dump(2) + "\n");
}

LoadedDataset load_dataset(const std::string& manifest_path) {
    LoadedDataset ds;
    ds.manifest = read_manifest(manifest_path);
    fs::path dir = fs::path(manifest_path).parent_path();
    for (const auto& rec : ds.manifest.samples) {
        for (const auto& [band, rel] : rec.spectra) {
            fs::path full = dir / rel;
            if (!file_exists(full.string()))
                fail(ErrorKind::load, "sample '" + rec.id + "': spectrum file missing: " +
                                          full.string());
            Spectrum s = read_spectrum_csv(full.string());
            if (s.band_label != band)
                fail(ErrorKind::load, "sample '" + rec.id + "': " + full.string() +
                                          " declares band '" + s.band_label +
                                          "' but the manifest says '" + band + "'");
            if (s.step_mhz != ds.manifest.step_mhz)
                fail(ErrorKind::load,
                     "sample '" + rec.id + "': " + full.string() + " uses a " +
                         format_double(s.step_mhz) + " MHz step, manifest says " +
                         format_double(ds.manifest.step_mhz) + " MHz");
            ds.spectra[rec.id][band] = std::move(s);
        }
    }
    return ds;
}

void save_dataset(const LoadedDataset& ds, const std::string& dir,
                  const std::string& manifest_name) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    for (const auto& rec : ds.manifest.samples) {
        auto sample_it = ds.spectra.find(rec.id);
        if (sample_it == ds.spectra.end())
            fail(ErrorKind::contract, "save: no spectra held for sample '" + rec.id + "'");
        for (const auto& [band, rel] : rec.spectra) {
            auto band_it = sample_it->second.find(band);
            if (band_it == sample_it->second.end())
                fail(ErrorKind::contract,
                     "save: sample '" + rec.id + "' misses band '" + band + "'");
            std::map<std::string, std::string> kv;
            kv["sample_id"] = rec.id;
            kv["pb_ppm"] = format_double(rec.pb_ppm);
            kv["nacl_ppm"] = format_double(rec.nacl_ppm);
            kv["moisture"] = format_double(rec.moisture);
            write_spectrum_csv(band_it->second, (fs::path(dir) / rel).string(), kv);
        }
    }
    write_manifest(ds.manifest, (fs::path(dir) / manifest_name).string());
}

uint64_t dataset_content_hash(const LoadedDataset& ds) {
    // XOR of per-sample hashes: invariant to manifest row order.
    uint64_t acc = 0;
    for (const auto& rec : ds.manifest.samples) {
        std::string ident = rec.id + "|" + format_double(rec.pb_ppm) + "|" +
                            format_double(rec.nacl_ppm) + "|" + format_double(rec.moisture);
        auto sample_it = ds.spectra.find(rec.id);
        if (sample_it != ds.spectra.end())
            for (const auto& [band, spec] : sample_it->second) // map: sorted band order
                ident += "|" + band + ":" + spectrum_content_hash(spec);
        acc ^= splitmix64(fnv1a64(ident));
    }
    return mix64(acc, ds.manifest.samples.size());
}

// --- built-in designs ---------------------------------------------------------------

void SpikingDesign::validate() const {
    if (rows.empty())
        fail(ErrorKind::config, "spiking design: no rows");
    if (moisture < 0.0 || moisture > 1.0)
        fail(ErrorKind::config, "spiking design: moisture must be in [0,1]");
    int expected_next = rows.front().id_first;
    for (const auto& row : rows) {
        if (row.id_first != expected_next)
            fail(ErrorKind::config, "spiking design: sample ids must be consecutive");
        if (row.nacl_ppm.empty() || row.pb_ppm.empty())
            fail(ErrorKind::config, "spiking design: empty concentration list");
        for (double v : row.nacl_ppm)
            if (v < 0.0)
                fail(ErrorKind::config, "spiking design: negative NaCl concentration");
        for (double v : row.pb_ppm)
            if (v < 0.0)
                fail(ErrorKind::config, "spiking design: negative Pb concentration");
        size_t span = static_cast<size_t>(row.id_last - row.id_first + 1);
        if (row.id_last < row.id_first ||
            span != row.nacl_ppm.size() * row.pb_ppm.size())
            fail(ErrorKind::config,
                 "spiking design: id range " + std::to_string(row.id_first) + "-" +
                     std::to_string(row.id_last) + " does not match the " +
                     std::to_string(row.nacl_ppm.size() * row.pb_ppm.size()) +
                     "-sample expansion of its concentration lists");
        if (!(row.base_mass_g > 0.0))
            fail(ErrorKind::config, "spiking design: base mass must be positive");
        expected_next = row.id_last + 1;
    }
}

SpikingDesign controlled_design() {
    const std::vector<double> ladder{0, 50, 100, 200, 400, 1000, 2000};
    const std::vector<double> mix{100, 400, 2000};
    SpikingDesign d;
    d.rows.push_back({1, 7, ladder, {0.0}, 1600.0});
    d.rows.push_back({8, 14, {0.0}, ladder, 1600.0});
    d.rows.push_back({15, 23, mix, mix, 1600.0});
    d.moisture = 0.20;
    d.validate();
    return d;
}

SaltModelMap default_salt_models() {
    SaltModelMap models;
    {
        SaltResponseModel m;
        m.sigma_per_ppm = 3.0e-6;
        m.eps_loss_per_ppm = -4.0e-4;
        m.freq_shape.knots_mhz = {{700, 4.5},  {780, 4.0},   {790, 3.809}, {810, 1.202},
                                  {818, 6.067}, {830, 9.0},  {900, 13.74}, {1000, 16.0},
                                  {2300, 18.0}, {2500, 70.0}};
        models[kNaclSaltKey] = std::move(m);
    }
    {
        SaltResponseModel m;
        m.sigma_per_ppm = 2.0e-6;
        m.eps_loss_per_ppm = -5.0e-4;
        m.freq_shape.knots_mhz = {{700, 8.0},  {780, 7.0},  {790, 6.8},  {810, 0.81},
                                  {820, 11.4}, {830, 16.0}, {900, 20.9}, {1000, 24.0},
                                  {2300, 38.5}, {2500, 38.5}};
        models[kPbSaltKey] = std::move(m);
    }
    return models;
}

SimulationSetup default_setup() {
    SimulationSetup s;
    s.low.band = kLowBand;
    s.low.step_mhz = kDefaultStepMhz;
    s.high.band = kHighBand;
    s.high.step_mhz = kDefaultStepMhz;
    s.salts = default_salt_models();
    return s;
}

namespace {

SoilSample make_sample(double pb_ppm, double nacl_ppm, double moisture,
                       double base_mass_g = 1600.0) {
    SoilSample sample;
    sample.base_mass_g = base_mass_g;
    sample.moisture = moisture;
    sample.salts = {{kNaclSaltKey, nacl_ppm}, {kPbSaltKey, pb_ppm}};
    return sample;
}

std::string spiked_id(int number) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%02d", number);
    return std::string(buf);
}

} // namespace

// Simulates the two band spectra of one sample and registers it in `ds`.
static void add_simulated_sample(LoadedDataset& ds, const std::string& id, double pb_ppm,
                                 double nacl_ppm, double moisture,
                                 const SimulationSetup& setup, uint64_t sample_seed,
                                 const std::map<std::string, std::string>& metadata) {
    SampleRecord rec;
    rec.id = id;
    rec.pb_ppm = pb_ppm;
    rec.nacl_ppm = nacl_ppm;
    rec.moisture = moisture;
    rec.metadata = metadata;
    for (auto& [band, s] :
         simulate_sample_spectra(pb_ppm, nacl_ppm, moisture, setup, sample_seed)) {
        rec.spectra[band] = id + "_" + band + ".csv";
        ds.spectra[id][band] = std::move(s);
    }
    ds.manifest.samples.push_back(std::move(rec));
}

std::map<std::string, Spectrum> simulate_sample_spectra(double pb_ppm, double nacl_ppm,
                                                        double moisture,
                                                        const SimulationSetup& setup,
                                                        uint64_t seed) {
    SoilSample sample = make_sample(pb_ppm, nacl_ppm, moisture);
    auto [path, media] = standard_soil_path(sample, setup.salts, setup.dielectric,
                                            setup.geometry);
    std::map<std::string, Spectrum> out;
    const TransmitConfig* configs[2] = {&setup.low, &setup.high};
    for (int b = 0; b < 2; ++b) {
        Spectrum s = simulate_spectrum(*configs[b], path, media, setup.noise,
                                       mix64(seed, static_cast<uint64_t>(b)));
        out[s.band_label] = std::move(s);
    }
    return out;
}

LoadedDataset generate_controlled_set(const SpikingDesign& design,
                                      const SimulationSetup& setup, uint64_t seed) {
    design.validate();
    LoadedDataset ds;
    ds.manifest.schema_version = 1;
    ds.manifest.step_mhz = setup.low.step_mhz;
    ds.manifest.config_echo["design"] = "controlled";
    ds.manifest.config_echo["seed"] = std::to_string(seed);
    ds.manifest.config_echo["noise_sigma_dbm"] = format_double(setup.noise.sigma_dbm);

    uint64_t index = 0;
    for (const auto& row : design.rows) {
        int id = row.id_first;
        for (double nacl : row.nacl_ppm) {
            for (double pb : row.pb_ppm) {
                std::map<std::string, std::string> meta{
                    {"base_mass_g", format_double(row.base_mass_g)}};
                add_simulated_sample(ds, spiked_id(id), pb, nacl, design.moisture, setup,
                                     mix64(seed, index), meta);
                ++id;
                ++index;
            }
        }
    }
    add_simulated_sample(ds, "base_dry", 0.0, 0.0, 0.0, setup, mix64(seed, index++),
                         {{"role", "baseline"}});
    add_simulated_sample(ds, "base_wet", 0.0, 0.0, design.moisture, setup,
                         mix64(seed, index++), {{"role", "baseline"}});
    return ds;
}

LoadedDataset generate_field_like_set(int n, const SimulationSetup& setup, uint64_t seed) {
    if (n < 2)
        fail(ErrorKind::config, "field-like set needs at least 2 samples");
    // Same below/at-or-above threshold balance as the 22-sample survey set
    // (12 below, 10 at or above), scaled and kept off the degenerate ends.
    int n_above = static_cast<int>(std::lround(static_cast<double>(n) * 10.0 / 22.0));
    n_above = std::clamp(n_above, 1, n - 1);

    LoadedDataset ds;
    ds.manifest.schema_version = 1;
    ds.manifest.step_mhz = setup.low.step_mhz;
    ds.manifest.config_echo["design"] = "field_like";
    ds.manifest.config_echo["seed"] = std::to_string(seed);
    ds.manifest.config_echo["noise_sigma_dbm"] = format_double(setup.noise.sigma_dbm);

    for (int i = 0; i < n; ++i) {
        Rng rng(mix64(seed, 0x11fe1dull + static_cast<uint64_t>(i)));
        bool above = i >= n - n_above;
        double pb = above ? rng.uniform(200.0, 1550.0) : rng.uniform(36.0, 200.0);
        double moisture = rng.uniform(0.01, 0.40);
        double organic_pct = rng.uniform(4.0, 26.0);
        double ph = rng.uniform(4.70, 7.07);
        double salt_g = rng.uniform(58.0, 710.0);
        double nacl_ppm = salt_g * 0.3;
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "f%02d", i + 1);
        std::map<std::string, std::string> meta{
            {"organic_pct", format_double(organic_pct)},
            {"ph", format_double(ph)},
            {"salt_g", format_double(salt_g)}};
        add_simulated_sample(ds, idbuf, pb, nacl_ppm, moisture, setup,
                             mix64(seed, static_cast<uint64_t>(i)), meta);
    }
    return ds;
}

// --- feature assembly ----------------------------------------------------------------

namespace {

std::vector<std::string> bands_for(const std::string& band) {
    if (band == "low" || band == "high")
        return {band};
    if (band == "both")
        return {"low", "high"};
    fail(ErrorKind::config, "band must be 'low', 'high' or 'both', got '" + band + "'");
}

const Spectrum& band_of(const LoadedDataset& ds, const std::string& id,
                        const std::string& band) {
    auto sit = ds.spectra.find(id);
    if (sit == ds.spectra.end())
        fail(ErrorKind::load, "no spectra loaded for sample '" + id + "'");
    auto bit = sit->second.find(band);
    if (bit == sit->second.end())
        fail(ErrorKind::load, "sample '" + id + "' has no '" + band + "' band spectrum");
    return bit->second;
}

} // namespace

FeatureMatrix dataset_features(const LoadedDataset& ds, const FeatureScheme& scheme,
                               const std::string& band) {
    std::vector<std::string> wanted = bands_for(band);

    if (scheme.kind == SchemeKind::weighted && scheme.weights.empty()) {
        // Fit per-band variance weights over the whole dataset's raw rows,
        // then assemble one band at a time and concatenate the columns.
        FeatureMatrix out;
        for (const auto& b : wanted) {
            FeatureMatrix raw = dataset_raw_rows(ds, b);
            FeatureScheme fitted = scheme;
            fitted.weights = variance_weights(raw.x);
            std::vector<std::pair<std::string, std::vector<const Spectrum*>>> samples;
            for (const auto& rec : ds.manifest.samples)
                samples.emplace_back(rec.id,
                                     std::vector<const Spectrum*>{&band_of(ds, rec.id, b)});
            FeatureMatrix part = feature_matrix(samples, fitted);
            if (out.sample_ids.empty()) {
                out = std::move(part);
            } else {
                Matrix joined(out.x.rows, out.x.cols + part.x.cols);
                for (size_t i = 0; i < out.x.rows; ++i) {
                    for (size_t j = 0; j < out.x.cols; ++j)
                        joined.at(i, j) = out.x.at(i, j);
                    for (size_t j = 0; j < part.x.cols; ++j)
                        joined.at(i, out.x.cols + j) = part.x.at(i, j);
                }
                out.x = std::move(joined);
                out.names.insert(out.names.end(), part.names.begin(), part.names.end());
            }
        }
        return out;
    }

    std::vector<std::pair<std::string, std::vector<const Spectrum*>>> samples;
    for (const auto& rec : ds.manifest.samples) {
        std::vector<const Spectrum*> spectra;
        for (const auto& b : wanted)
            spectra.push_back(&band_of(ds, rec.id, b));
        samples.emplace_back(rec.id, std::move(spectra));
    }
    return feature_matrix(samples, scheme);
}

FeatureMatrix dataset_raw_rows(const LoadedDataset& ds, const std::string& band) {
    std::vector<std::string> wanted = bands_for(band);
    if (ds.manifest.samples.empty())
        fail(ErrorKind::config, "raw rows: empty dataset");
    FeatureMatrix out;
    const std::string& first_id = ds.manifest.samples.front().id;
    for (const auto& b : wanted) {
        const Spectrum& ref = band_of(ds, first_id, b);
        for (double f : ref.freqs_mhz)
            out.names.push_back(b + "@" + format_double(f));
    }
    out.x = Matrix(ds.manifest.samples.size(), out.names.size());
    for (size_t i = 0; i < ds.manifest.samples.size(); ++i) {
        const auto& rec = ds.manifest.samples[i];
        size_t col = 0;
        for (const auto& b : wanted) {
            const Spectrum& ref = band_of(ds, first_id, b);
            const Spectrum& s = band_of(ds, rec.id, b);
            if (s.freqs_mhz != ref.freqs_mhz)
                fail(ErrorKind::numeric, "raw rows: sample '" + rec.id + "' band '" + b +
                                             "' is not on the common frequency grid");
            for (double v : s.power_dbm)
                out.x.at(i, col++) = v;
        }
        out.sample_ids.push_back(rec.id);
    }
    return out;
}

LabeledDataset labeled_from(const FeatureMatrix& features, const LoadedDataset& ds,
                            double threshold_ppm) {
    std::map<std::string, double> pb;
    for (const auto& rec : ds.manifest.samples)
        pb[rec.id] = rec.pb_ppm;
    LabeledDataset out;
    out.ids = features.sample_ids;
    out.x = features.x;
    for (const auto& id : features.sample_ids) {
        auto it = pb.find(id);
        if (it == pb.end())
            fail(ErrorKind::config, "labels: sample '" + id + "' is not in the manifest");
        out.pb_ppm.push_back(it->second);
        out.labels.push_back(encode_label(it->second, threshold_ppm));
    }
    out.validate();
    return out;
}

TransformFactory raw_row_transform_factory(const LoadedDataset& ds,
                                           const FeatureScheme& scheme,
                                           const std::string& band) {
    // Capture the per-band grid layout of the concatenated raw rows.
    struct BandLayout {
        std::string label;
        double start = 0.0;
        double step = 0.0;
        std::vector<double> freqs;
        size_t offset = 0;
    };
    std::vector<std::string> wanted = bands_for(band);
    if (ds.manifest.samples.empty())
        fail(ErrorKind::config, "transform factory: empty dataset");
    auto layouts = std::make_shared<std::vector<BandLayout>>();
    size_t offset = 0;
    const std::string& first_id = ds.manifest.samples.front().id;
    for (const auto& b : wanted) {
        const Spectrum& ref = band_of(ds, first_id, b);
        BandLayout l;
        l.label = b;
        l.start = ref.start_mhz;
        l.step = ref.step_mhz;
        l.freqs = ref.freqs_mhz;
        l.offset = offset;
        offset += ref.freqs_mhz.size();
        layouts->push_back(std::move(l));
    }
    size_t total_width = offset;

    FeatureScheme base_scheme = scheme;
    return [layouts, base_scheme, total_width](const Matrix& train_rows) -> RowTransform {
        if (train_rows.cols != total_width)
            fail(ErrorKind::contract, "transform factory: raw row width mismatch");
        // The weighted scheme is the one with fitted state: per-column
        // variance over the training rows only.
        std::shared_ptr<std::vector<double>> fitted;
        if (base_scheme.kind == SchemeKind::weighted && base_scheme.weights.empty())
            fitted = std::make_shared<std::vector<double>>(variance_weights(train_rows));
        return [layouts, base_scheme, fitted, total_width](const double* row,
                                                           size_t width) {
            if (width != total_width)
                fail(ErrorKind::contract, "transform: raw row width mismatch");
            std::vector<double> out;
            for (const auto& l : *layouts) {
                Spectrum s;
                s.band_label = l.label;
                s.start_mhz = l.start;
                s.step_mhz = l.step;
                s.freqs_mhz = l.freqs;
                s.power_dbm.assign(row + l.offset, row + l.offset + l.freqs.size());
                FeatureScheme scheme_b = base_scheme;
                if (fitted)
                    scheme_b.weights.assign(fitted->begin() + static_cast<long>(l.offset),
                                            fitted->begin() +
                                                static_cast<long>(l.offset + l.freqs.size()));
                FeatureVector fv = featurize(s, scheme_b);
                out.insert(out.end(), fv.values.begin(), fv.values.end());
            }
            return out;
        };
    };
}

// --- fixture calibration ----------------------------------------------------------------

std::string TrendConstraint::describe() const {
    switch (kind) {
    case Kind::power_slope_sign:
        return std::string("power ") + (sign > 0 ? "rises" : "falls") + " with " + salt +
               " concentration over " + format_double(f_lo_mhz) + "-" +
               format_double(f_hi_mhz) + " MHz";
    case Kind::slope_order:
        return "|d(power)/d(ppm)| of " + salt + " exceeds " + salt_b + " at " +
               format_double(f_lo_mhz) + " MHz";
    case Kind::diff_monotone:
        return diff_name + " is strictly " + (sign > 0 ? "increasing" : "decreasing") +
               " over the " + salt + " series";
    }
    fail(ErrorKind::contract, "unknown trend constraint kind");
}

TrendSpec default_trend_spec() {
    TrendSpec spec;
    auto slope = [](const std::string& salt, double lo, double hi, int sign) {
        TrendConstraint c;
        c.kind = TrendConstraint::Kind::power_slope_sign;
        c.salt = salt;
        c.f_lo_mhz = lo;
        c.f_hi_mhz = hi;
        c.sign = sign;
        return c;
    };
    for (const char* salt : {kNaclSaltKey, kPbSaltKey}) {
        spec.constraints.push_back(slope(salt, 780.0, 812.0, +1));
        spec.constraints.push_back(slope(salt, 828.0, 1000.0, -1));
        spec.constraints.push_back(slope(salt, 2380.0, 2420.0, -1));
    }
    {
        TrendConstraint c;
        c.kind = TrendConstraint::Kind::slope_order;
        c.salt = kNaclSaltKey;
        c.salt_b = kPbSaltKey;
        c.f_lo_mhz = 2400.0;
        spec.constraints.push_back(c);
    }
    {
        TrendConstraint c;
        c.kind = TrendConstraint::Kind::diff_monotone;
        c.salt = kPbSaltKey;
        c.diff_name = "diff800";
        c.sign = +1;
        spec.constraints.push_back(c);
    }
    {
        TrendConstraint c;
        c.kind = TrendConstraint::Kind::diff_monotone;
        c.salt = kNaclSaltKey;
        c.diff_name = "diff2300";
        c.sign = -1;
        spec.constraints.push_back(c);
    }
    return spec;
}

namespace {

// Noiseless received power for one single-salt sample at one frequency.
double series_power(const std::string& salt, double ppm, double f_mhz,
                    const SaltModelMap& models, const SimulationSetup& setup) {
    SoilSample sample;
    sample.moisture = 0.20;
    sample.salts = {{salt, ppm}};
    auto [path, media] = standard_soil_path(sample, models, setup.dielectric,
                                            setup.geometry);
    return received_power_dbm(setup.low, path, media, f_mhz);
}

const std::vector<double>& trend_ladder() {
    static const std::vector<double> ladder{0, 50, 100, 200, 400, 1000, 2000};
    return ladder;
}

double series_diff(const std::string& salt, double ppm, const std::string& diff_name,
                   const SaltModelMap& models, const SimulationSetup& setup) {
    // Probes evaluated at the 0.5 MHz grid points the features resolve onto.
    if (diff_name == "diff800")
        return series_power(salt, ppm, 810.0, models, setup) -
               series_power(salt, ppm, 790.0, models, setup);
    if (diff_name == "diff2300")
        return series_power(salt, ppm, 2408.5, models, setup) -
               series_power(salt, ppm, 2401.0, models, setup);
    fail(ErrorKind::config, "unknown difference feature '" + diff_name + "'");
}

TrendCheck evaluate_constraint(const TrendConstraint& c, const SaltModelMap& models,
                               const SimulationSetup& setup) {
    TrendCheck check;
    check.description = c.describe();
    double margin = 1e300;
    const auto& ladder = trend_ladder();
    switch (c.kind) {
    case TrendConstraint::Kind::power_slope_sign: {
        if (!(c.f_hi_mhz > c.f_lo_mhz))
            fail(ErrorKind::config, "trend constraint: empty frequency window");
        for (double f = c.f_lo_mhz; f <= c.f_hi_mhz + 1e-9; f += 2.0) {
            double prev = series_power(c.salt, ladder[0], f, models, setup);
            for (size_t k = 1; k < ladder.size(); ++k) {
                double cur = series_power(c.salt, ladder[k], f, models, setup);
                margin = std::min(margin, static_cast<double>(c.sign) * (cur - prev));
                prev = cur;
            }
        }
        break;
    }
    case TrendConstraint::Kind::slope_order: {
        double ref = ladder.back();
        double base_a = series_power(c.salt, 0.0, c.f_lo_mhz, models, setup);
        double base_b = series_power(c.salt_b, 0.0, c.f_lo_mhz, models, setup);
        double slope_a =
            std::abs(series_power(c.salt, ref, c.f_lo_mhz, models, setup) - base_a) / ref;
        double slope_b =
            std::abs(series_power(c.salt_b, ref, c.f_lo_mhz, models, setup) - base_b) / ref;
        margin = slope_a - slope_b;
        break;
    }
    case TrendConstraint::Kind::diff_monotone: {
        double prev = series_diff(c.salt, ladder[0], c.diff_name, models, setup);
        for (size_t k = 1; k < ladder.size(); ++k) {
            double cur = series_diff(c.salt, ladder[k], c.diff_name, models, setup);
            margin = std::min(margin, static_cast<double>(c.sign) * (cur - prev));
            prev = cur;
        }
        break;
    }
    }
    check.margin = margin;
    check.satisfied = margin > 0.0;
    return check;
}

std::vector<TrendCheck> evaluate_all(const TrendSpec& spec, const SaltModelMap& models,
                                     const SimulationSetup& setup) {
    std::vector<TrendCheck> checks;
    for (const auto& c : spec.constraints)
        checks.push_back(evaluate_constraint(c, models, setup));
    return checks;
}

double total_violation(const std::vector<TrendCheck>& checks) {
    double v = 0.0;
    for (const auto& c : checks)
        v += std::min(c.margin, 0.0);
    return v; // 0 when everything holds, negative otherwise
}

} // namespace

CalibrationResult calibrate_fixtures(const TrendSpec& spec, const SimulationSetup& setup) {
    CalibrationResult result;
    result.models = setup.salts;
    if (spec.constraints.empty())
        return result;
    for (const auto& c : spec.constraints) {
        if (result.models.find(c.salt) == result.models.end())
            fail(ErrorKind::config, "trend constraint names unknown salt '" + c.salt + "'");
        if (c.kind == TrendConstraint::Kind::slope_order &&
            result.models.find(c.salt_b) == result.models.end())
            fail(ErrorKind::config, "trend constraint names unknown salt '" + c.salt_b + "'");
    }

    result.checks = evaluate_all(spec, result.models, setup);
    if (total_violation(result.checks) == 0.0)
        return result;

    // Coordinate descent over every knot value (multiplicative steps) and the
    // per-ppm loss terms; accept a move whenever it lowers total violation.
    const double factors[2] = {1.3, 1.0 / 1.3};
    double best = total_violation(result.checks);
    for (int pass = 0; pass < 50 && best < 0.0; ++pass) {
        bool improved = false;
        for (auto& [name, model] : result.models) {
            for (size_t k = 0; k < model.freq_shape.knots_mhz.size(); ++k) {
                for (double f : factors) {
                    double saved = model.freq_shape.knots_mhz[k].second;
                    model.freq_shape.knots_mhz[k].second = saved * f;
                    double v = total_violation(evaluate_all(spec, result.models, setup));
                    if (v > best) {
                        best = v;
                        improved = true;
                    } else {
                        model.freq_shape.knots_mhz[k].second = saved;
                    }
                }
            }
            for (double f : {1.3, 1.0 / 1.3, -1.0}) {
                double saved = model.eps_loss_per_ppm;
                model.eps_loss_per_ppm = saved * f;
                double v = total_violation(evaluate_all(spec, result.models, setup));
                if (v > best) {
                    best = v;
                    improved = true;
                } else {
                    model.eps_loss_per_ppm = saved;
                }
            }
        }
        if (!improved)
            break;
    }

    result.checks = evaluate_all(spec, result.models, setup);
    if (total_violation(result.checks) < 0.0) {
        std::string what = "calibration cannot satisfy:";
        for (const auto& c : result.checks)
            if (!c.satisfied)
                what += "\n  - " + c.description + " (margin " + format_double(c.margin) + ")";
        fail(ErrorKind::calibration, what);
    }
    return result;
}

void write_salt_models_json(const SaltModelMap& models,
                            const std::vector<TrendCheck>& checks, const std::string& path,
                            const std::map<std::string, std::string>& config_echo) {
    json j;
    j["salts"] = json::object();
    for (const auto& [name, model] : models) {
        json mj;
        mj["sigma_per_ppm"] = model.sigma_per_ppm;
        mj["eps_loss_per_ppm"] = model.eps_loss_per_ppm;
        mj["freq_shape_knots"] = json::array();
        for (const auto& [f, v] : model.freq_shape.knots_mhz)
            mj["freq_shape_knots"].push_back({f, v});
        j["salts"][name] = std::move(mj);
    }
    j["checks"] = json::array();
    for (const auto& c : checks)
        j["checks"].push_back(
            {{"description", c.description}, {"satisfied", c.satisfied}, {"margin", c.margin}});
    j["config"] = config_echo;
    atomic_write_text(path, j.dump(2) + "\n");
}

SaltModelMap read_salt_models_json(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        fail(ErrorKind::load, "salt models " + path + " is not valid JSON: " + e.what());
    }
    if (!j.contains("salts") || !j["salts"].is_object())
        fail(ErrorKind::load, "salt models " + path + " is missing a salts object");
    SaltModelMap models;
    for (const auto& [name, mj] : j["salts"].items()) {
        SaltResponseModel m;
        m.sigma_per_ppm = mj.value("sigma_per_ppm", 0.0);
        m.eps_loss_per_ppm = mj.value("eps_loss_per_ppm", 0.0);
        if (!mj.contains("freq_shape_knots") || !mj["freq_shape_knots"].is_array())
            fail(ErrorKind::load,
                 "salt models " + path + ": '" + name + "' is missing freq_shape_knots");
        for (const auto& kj : mj["freq_shape_knots"]) {
            if (!kj.is_array() || kj.size() != 2)
                fail(ErrorKind::load,
                     "salt models " + path + ": knots must be [freq, value] pairs");
            m.freq_shape.knots_mhz.emplace_back(kj[0].get<double>(), kj[1].get<double>());
        }
        m.freq_shape.validate();
        models[name] = std::move(m);
    }
    if (models.empty())
        fail(ErrorKind::load, "salt models " + path + " lists no salts");
    return models;
}

} // namespace soilrf
