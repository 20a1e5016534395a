// SPDX-License-Identifier: MIT
//
// Dataset layer: the built-in spiking design and field-like generator,
// manifest save/load round trips with content hashing, feature assembly over
// loaded datasets, the fold-safe raw-row transform factory, and trend-target
// fixture calibration.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "soilrf/dataset.hpp"
#include "soilrf/error.hpp"

using namespace soilrf;
namespace fs = std::filesystem;

namespace {

template <typename Fn> ErrorKind error_kind_of(Fn&& fn, std::string* msg = nullptr) {
    try {
        fn();
    } catch (const Error& e) {
        if (msg)
            *msg = e.what();
        return e.kind();
    }
    FAIL("expected an Error to be thrown");
    return ErrorKind::contract;
}

fs::path temp_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() /
                   ("soilrf_ds_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const LoadedDataset& controlled_fixture() {
    static LoadedDataset ds =
        generate_controlled_set(controlled_design(), default_setup(), 42);
    return ds;
}

bool same_models(const SaltModelMap& a, const SaltModelMap& b) {
    if (a.size() != b.size())
        return false;
    for (const auto& [key, m] : a) {
        auto it = b.find(key);
        if (it == b.end())
            return false;
        if (m.sigma_per_ppm != it->second.sigma_per_ppm ||
            m.eps_loss_per_ppm != it->second.eps_loss_per_ppm ||
            m.freq_shape.knots_mhz != it->second.freq_shape.knots_mhz)
            return false;
    }
    return true;
}

} // namespace

TEST_CASE("the controlled spiking design") {
    SpikingDesign d = controlled_design();
    REQUIRE(d.rows.size() == 3);
    CHECK(d.rows[0].id_first == 1);
    CHECK(d.rows[0].id_last == 7);
    CHECK(d.rows[0].nacl_ppm ==
          std::vector<double>{0, 50, 100, 200, 400, 1000, 2000});
    CHECK(d.rows[0].pb_ppm == std::vector<double>{0.0});
    CHECK(d.rows[1].pb_ppm ==
          std::vector<double>{0, 50, 100, 200, 400, 1000, 2000});
    CHECK(d.rows[2].id_last == 23);
    CHECK(d.moisture == 0.20);

    SUBCASE("inconsistent expansions are rejected") {
        SpikingDesign bad = d;
        bad.rows[2].id_last = 22; // 3x3 mix cannot fit 8 ids
        CHECK(error_kind_of([&] { bad.validate(); }) == ErrorKind::config);
        SpikingDesign neg = d;
        neg.rows[0].nacl_ppm[1] = -5.0;
        CHECK(error_kind_of([&] { neg.validate(); }) == ErrorKind::config);
    }
}

TEST_CASE("controlled set generation: order, concentrations and grids") {
    const LoadedDataset& ds = controlled_fixture();
    REQUIRE(ds.manifest.samples.size() == 25);

    const std::vector<double> ladder{0, 50, 100, 200, 400, 1000, 2000};
    for (int i = 0; i < 7; ++i) {
        const SampleRecord& rec = ds.manifest.samples[static_cast<size_t>(i)];
        char expect[8];
        std::snprintf(expect, sizeof(expect), "s%02d", i + 1);
        CHECK(rec.id == expect);
        CHECK(rec.nacl_ppm == ladder[static_cast<size_t>(i)]);
        CHECK(rec.pb_ppm == 0.0);
        CHECK(rec.moisture == 0.20);
    }
    for (int i = 0; i < 7; ++i) {
        const SampleRecord& rec = ds.manifest.samples[static_cast<size_t>(7 + i)];
        CHECK(rec.pb_ppm == ladder[static_cast<size_t>(i)]);
        CHECK(rec.nacl_ppm == 0.0);
    }
    // The 3x3 mix runs NaCl-major: s15 = (100,100), s16 = (100,400), ...
    CHECK(ds.manifest.samples[14].nacl_ppm == 100.0);
    CHECK(ds.manifest.samples[14].pb_ppm == 100.0);
    CHECK(ds.manifest.samples[15].nacl_ppm == 100.0);
    CHECK(ds.manifest.samples[15].pb_ppm == 400.0);
    CHECK(ds.manifest.samples[22].nacl_ppm == 2000.0);
    CHECK(ds.manifest.samples[22].pb_ppm == 2000.0);

    CHECK(ds.manifest.samples[23].id == "base_dry");
    CHECK(ds.manifest.samples[23].moisture == 0.0);
    CHECK(ds.manifest.samples[24].id == "base_wet");
    CHECK(ds.manifest.samples[24].moisture == 0.20);
    CHECK(ds.manifest.config_echo.at("design") == "controlled");

    const auto& bands = ds.spectra.at("s01");
    REQUIRE(bands.count("low") == 1);
    REQUIRE(bands.count("high") == 1);
    CHECK(bands.at("low").freqs_mhz.size() == 601);
    CHECK(bands.at("high").freqs_mhz.size() == 401);
    CHECK(bands.at("low").freqs_mhz.front() == 700.0);
    CHECK(bands.at("high").freqs_mhz.back() == 2500.0);

    SUBCASE("generation is a pure function of design, setup and seed") {
        LoadedDataset again =
            generate_controlled_set(controlled_design(), default_setup(), 42);
        CHECK(dataset_content_hash(again) == dataset_content_hash(ds));
        LoadedDataset other =
            generate_controlled_set(controlled_design(), default_setup(), 43);
        // Noiseless simulation: different seeds still give identical spectra.
        CHECK(dataset_content_hash(other) == dataset_content_hash(ds));
        SimulationSetup noisy = default_setup();
        noisy.noise.sigma_dbm = 0.1;
        LoadedDataset n1 = generate_controlled_set(controlled_design(), noisy, 42);
        LoadedDataset n2 = generate_controlled_set(controlled_design(), noisy, 43);
        CHECK(dataset_content_hash(n1) != dataset_content_hash(n2));
    }
}

TEST_CASE("default fixtures") {
    SimulationSetup setup = default_setup();
    CHECK(setup.low.band.label == "low");
    CHECK(setup.low.band.start_mhz == 700.0);
    CHECK(setup.high.band.end_mhz == 2500.0);
    CHECK(setup.low.step_mhz == 0.5);
    CHECK(setup.low.gain_dbm == 6.0);
    CHECK(setup.noise.sigma_dbm == 0.0);

    SaltModelMap models = default_salt_models();
    REQUIRE(models.count(kNaclSaltKey) == 1);
    REQUIRE(models.count(kPbSaltKey) == 1);
    CHECK(models.at(kNaclSaltKey).sigma_per_ppm == 3.0e-6);
    CHECK(models.at(kPbSaltKey).sigma_per_ppm == 2.0e-6);
}

TEST_CASE("per-sample simulation is deterministic in its seed") {
    SimulationSetup setup = default_setup();
    setup.noise.sigma_dbm = 0.05;
    auto a = simulate_sample_spectra(300.0, 100.0, 0.2, setup, 7);
    auto b = simulate_sample_spectra(300.0, 100.0, 0.2, setup, 7);
    auto c = simulate_sample_spectra(300.0, 100.0, 0.2, setup, 8);
    REQUIRE(a.count("low") == 1);
    REQUIRE(a.count("high") == 1);
    CHECK(a.at("low").power_dbm == b.at("low").power_dbm);
    CHECK(a.at("high").power_dbm == b.at("high").power_dbm);
    CHECK(a.at("low").power_dbm != c.at("low").power_dbm);
    // Band sub-seeds differ, so the two bands see independent noise.
    CHECK(a.at("low").provenance.seed != a.at("high").provenance.seed);
}

TEST_CASE("save / load round trip preserves content") {
    const LoadedDataset& ds = controlled_fixture();
    fs::path dir = temp_dir("roundtrip");
    save_dataset(ds, dir.string());
    REQUIRE(fs::exists(dir / "manifest.json"));
    REQUIRE(fs::exists(dir / "s01_low.csv"));
    REQUIRE(fs::exists(dir / "base_wet_high.csv"));

    LoadedDataset back = load_dataset((dir / "manifest.json").string());
    REQUIRE(back.manifest.samples.size() == 25);
    CHECK(dataset_content_hash(back) == dataset_content_hash(ds));
    CHECK(back.spectra.at("s05").at("low").power_dbm ==
          ds.spectra.at("s05").at("low").power_dbm); // bitwise through CSV

    SUBCASE("the content hash ignores manifest row order") {
        LoadedDataset shuffled = back;
        std::reverse(shuffled.manifest.samples.begin(),
                     shuffled.manifest.samples.end());
        CHECK(dataset_content_hash(shuffled) == dataset_content_hash(back));
    }
    SUBCASE("the content hash sees label edits") {
        LoadedDataset edited = back;
        edited.manifest.samples[3].pb_ppm += 1.0;
        CHECK(dataset_content_hash(edited) != dataset_content_hash(back));
    }
    fs::remove_all(dir);
}

TEST_CASE("loading rejects broken inputs, naming the sample") {
    const LoadedDataset& ds = controlled_fixture();
    std::string msg;

    SUBCASE("missing spectrum file") {
        fs::path dir = temp_dir("missing");
        save_dataset(ds, dir.string());
        fs::remove(dir / "s03_high.csv");
        CHECK(error_kind_of(
                  [&] { load_dataset((dir / "manifest.json").string()); }, &msg) ==
              ErrorKind::load);
        CHECK(msg.find("s03") != std::string::npos);
        fs::remove_all(dir);
    }
    SUBCASE("tampered spectrum payload") {
        fs::path dir = temp_dir("tamper");
        save_dataset(ds, dir.string());
        fs::path target = dir / "s02_low.csv";
        std::string text;
        {
            std::ifstream in(target);
            std::string line;
            while (std::getline(in, line)) {
                if (line.find("700.5,") == 0)
                    line = "700.5,-1.0";
                text += line + "\n";
            }
        }
        std::ofstream(target, std::ios::trunc) << text;
        CHECK(error_kind_of(
                  [&] { load_dataset((dir / "manifest.json").string()); }, &msg) ==
              ErrorKind::load);
        CHECK(msg.find("hash") != std::string::npos);
        fs::remove_all(dir);
    }
    SUBCASE("duplicate sample ids") {
        fs::path dir = temp_dir("dup");
        LoadedDataset copy = ds;
        copy.manifest.samples.push_back(copy.manifest.samples[0]);
        save_dataset(copy, dir.string());
        CHECK(error_kind_of(
                  [&] { load_dataset((dir / "manifest.json").string()); }, &msg) ==
              ErrorKind::load);
        CHECK(msg.find("duplicate") != std::string::npos);
        fs::remove_all(dir);
    }
    SUBCASE("manifest step disagrees with the spectrum files") {
        fs::path dir = temp_dir("step");
        LoadedDataset copy = ds;
        copy.manifest.step_mhz = 0.25;
        save_dataset(copy, dir.string());
        CHECK(error_kind_of(
                  [&] { load_dataset((dir / "manifest.json").string()); }, &msg) ==
              ErrorKind::load);
        CHECK(msg.find("0.25") != std::string::npos);
        fs::remove_all(dir);
    }
}

TEST_CASE("field-like sets reproduce the survey label balance") {
    LoadedDataset ds = generate_field_like_set(22, default_setup(), 9);
    REQUIRE(ds.manifest.samples.size() == 22);
    int above = 0;
    for (const auto& rec : ds.manifest.samples) {
        above += rec.pb_ppm >= 200.0;
        CHECK(rec.pb_ppm >= 36.0);
        CHECK(rec.pb_ppm < 1550.0);
        CHECK(rec.moisture >= 0.01);
        CHECK(rec.moisture < 0.40);
        CHECK(rec.nacl_ppm == doctest::Approx(
                                  std::stod(rec.metadata.at("salt_g")) * 0.3));
        CHECK(rec.metadata.count("organic_pct") == 1);
        CHECK(rec.metadata.count("ph") == 1);
    }
    CHECK(above == 10);
    CHECK(ds.manifest.samples[0].id == "f01");
    CHECK(ds.manifest.samples[21].id == "f22");

    SUBCASE("the split scales with n") {
        LoadedDataset small = generate_field_like_set(5, default_setup(), 9);
        int up = 0;
        for (const auto& rec : small.manifest.samples)
            up += rec.pb_ppm >= 200.0;
        CHECK(up == 2);
    }
    SUBCASE("degenerate sizes are rejected") {
        CHECK(error_kind_of([] {
            generate_field_like_set(1, default_setup(), 0);
        }) == ErrorKind::config);
    }
}

TEST_CASE("feature assembly over a loaded dataset") {
    const LoadedDataset& ds = controlled_fixture();
    FeatureScheme diff;
    diff.kind = SchemeKind::diffpair;

    FeatureMatrix both = dataset_features(ds, diff, "both");
    REQUIRE(both.names == std::vector<std::string>{"diff800", "diff2300"});
    REQUIRE(both.sample_ids.size() == 25);
    REQUIRE(both.x.rows == 25);
    for (size_t i = 0; i < both.sample_ids.size(); ++i) {
        const auto& bands = ds.spectra.at(both.sample_ids[i]);
        CHECK(both.x.at(i, 0) == diff800(bands.at("low")));
        CHECK(both.x.at(i, 1) == diff2300(bands.at("high")));
    }

    FeatureMatrix low_only = dataset_features(ds, diff, "low");
    CHECK(low_only.names == std::vector<std::string>{"diff800"});

    SUBCASE("raw rows concatenate the band grids") {
        FeatureMatrix raw = dataset_raw_rows(ds, "both");
        CHECK(raw.x.cols == 601 + 401);
        FeatureMatrix raw_low = dataset_raw_rows(ds, "low");
        CHECK(raw_low.x.cols == 601);
        const Spectrum& s = ds.spectra.at(raw.sample_ids[0]).at("low");
        for (size_t j = 0; j < 601; ++j)
            CHECK(raw.x.at(0, j) == s.power_dbm[j]);
        std::string msg;
        CHECK(error_kind_of([&] { dataset_raw_rows(ds, "sideways"); }, &msg) ==
              ErrorKind::config);
        CHECK(msg.find("sideways") != std::string::npos);
    }
    SUBCASE("labels encode the threshold against manifest concentrations") {
        LabeledDataset labeled = labeled_from(both, ds, 200.0);
        REQUIRE(labeled.labels.size() == 25);
        for (size_t i = 0; i < both.sample_ids.size(); ++i) {
            const auto& recs = ds.manifest.samples;
            auto it = std::find_if(recs.begin(), recs.end(), [&](const auto& r) {
                return r.id == both.sample_ids[i];
            });
            REQUIRE(it != recs.end());
            CHECK(labeled.labels[i] == (it->pb_ppm >= 200.0 ? 1 : 0));
            CHECK(labeled.pb_ppm[i] == it->pb_ppm);
        }
    }
}

TEST_CASE("an empty weighted scheme fits variance weights per band") {
    const LoadedDataset& ds = controlled_fixture();
    FeatureScheme fitted;
    fitted.kind = SchemeKind::weighted;
    fitted.interval_mhz = 25.0;

    FeatureMatrix low_raw = dataset_raw_rows(ds, "low");
    FeatureScheme explicit_w = fitted;
    explicit_w.weights = variance_weights(low_raw.x);
    CHECK(dataset_features(ds, fitted, "low").x.d ==
          dataset_features(ds, explicit_w, "low").x.d);
}

TEST_CASE("the raw-row transform factory mirrors dataset_features") {
    const LoadedDataset& ds = controlled_fixture();
    for (SchemeKind kind : {SchemeKind::hop, SchemeKind::aggregate,
                            SchemeKind::weighted, SchemeKind::diffpair}) {
        FeatureScheme scheme;
        scheme.kind = kind;
        scheme.interval_mhz = 25.0;
        for (const std::string band : {"low", "both"}) {
            FeatureMatrix expect = dataset_features(ds, scheme, band);
            FeatureMatrix raw = dataset_raw_rows(ds, band);
            TransformFactory factory = raw_row_transform_factory(ds, scheme, band);
            RowTransform transform = factory(raw.x);
            for (size_t i = 0; i < raw.x.rows; ++i) {
                std::vector<double> row = transform(raw.x.row(i), raw.x.cols);
                REQUIRE(row.size() == expect.x.cols);
                for (size_t j = 0; j < row.size(); ++j)
                    CHECK(row[j] == expect.x.at(i, j));
            }
        }
    }
}

TEST_CASE("default trend targets hold for the default fixtures") {
    TrendSpec spec = default_trend_spec();
    CHECK(spec.constraints.size() == 9);
    for (const auto& c : spec.constraints)
        CHECK(!c.describe().empty());

    CalibrationResult result = calibrate_fixtures(spec, default_setup());
    REQUIRE(result.checks.size() == 9);
    for (const auto& check : result.checks) {
        CHECK(check.satisfied);
        CHECK(check.margin > 0.0);
    }
    // Already-satisfied targets leave the fixtures untouched.
    CHECK(same_models(result.models, default_salt_models()));

    SUBCASE("an empty constraint set is a no-op") {
        CalibrationResult id = calibrate_fixtures(TrendSpec{}, default_setup());
        CHECK(id.checks.empty());
        CHECK(same_models(id.models, default_salt_models()));
    }
}

TEST_CASE("contradictory trend targets raise a calibration error") {
    TrendSpec spec;
    TrendConstraint up;
    up.kind = TrendConstraint::Kind::power_slope_sign;
    up.salt = kNaclSaltKey;
    up.f_lo_mhz = 780.0;
    up.f_hi_mhz = 800.0;
    up.sign = +1;
    TrendConstraint down = up;
    down.sign = -1;
    spec.constraints = {up, down};
    std::string msg;
    CHECK(error_kind_of([&] { calibrate_fixtures(spec, default_setup()); }, &msg) ==
          ErrorKind::calibration);
    CHECK(!msg.empty());
}

TEST_CASE("calibration repairs a perturbed fixture") {
    // Drag the Pb response at 2.4 GHz above NaCl's: the slope-order and
    // falling-window targets break, and coordinate descent must restore them.
    SimulationSetup setup = default_setup();
    for (auto& knot : setup.salts[kPbSaltKey].freq_shape.knots_mhz)
        if (knot.first >= 2300.0)
            knot.second *= 2.0;

    TrendSpec spec = default_trend_spec();
    CalibrationResult result = calibrate_fixtures(spec, setup);
    REQUIRE(result.checks.size() == spec.constraints.size());
    for (const auto& check : result.checks)
        CHECK(check.satisfied);
    CHECK(!same_models(result.models, setup.salts)); // something actually moved

    // The repaired fixtures must hold on re-verification without descent.
    SimulationSetup repaired = setup;
    repaired.salts = result.models;
    CalibrationResult again = calibrate_fixtures(spec, repaired);
    CHECK(same_models(again.models, result.models));
}

TEST_CASE("salt fixtures round-trip through JSON") {
    fs::path dir = temp_dir("salts");
    fs::path path = dir / "salts.json";
    TrendSpec spec = default_trend_spec();
    CalibrationResult result = calibrate_fixtures(spec, default_setup());
    write_salt_models_json(result.models, result.checks, path.string(),
                           {{"spec", "default"}});
    SaltModelMap back = read_salt_models_json(path.string());
    CHECK(same_models(back, result.models));

    SUBCASE("unreadable fixture files are load errors") {
        std::ofstream(path, std::ios::trunc) << "{not json";
        CHECK(error_kind_of([&] { read_salt_models_json(path.string()); }) ==
              ErrorKind::load);
    }
    fs::remove_all(dir);
}
