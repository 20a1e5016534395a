// SPDX-License-Identifier: MIT
//
// Dataset plumbing: manifest-driven loading/saving of spectrum sets, the
// built-in controlled spiking design and a synthetic field-like set, default
// simulation fixtures, and trend-targeted fixture calibration.
#ifndef SOILRF_DATASET_HPP
#define SOILRF_DATASET_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "soilrf/features.hpp"
#include "soilrf/learning.hpp"
#include "soilrf/propagation.hpp"
#include "soilrf/sweep.hpp"

namespace soilrf {

struct SampleRecord {
    std::string id;
    std::map<std::string, std::string> spectra; // band label -> csv path (manifest-relative)
    double pb_ppm = 0.0;
    double nacl_ppm = 0.0;
    double moisture = 0.0;
    std::map<std::string, std::string> metadata;
};

struct DatasetManifest {
    int schema_version = 1;
    double step_mhz = kDefaultStepMhz;
    std::vector<SampleRecord> samples;
    std::map<std::string, std::string> config_echo;
};

struct LoadedDataset {
    DatasetManifest manifest;
    // id -> band label -> spectrum
    std::map<std::string, std::map<std::string, Spectrum>> spectra;
};

// Manifest JSON I/O. Loading validates schema version, unique ids, file
// existence and grid consistency with the declared step; error messages name
// the offending sample id and path.
DatasetManifest read_manifest(const std::string& path);
void write_manifest(const DatasetManifest& m, const std::string& path);
LoadedDataset load_dataset(const std::string& manifest_path);

// Writes every spectrum CSV plus the manifest into `dir`. Re-loading what was
// saved reproduces the same content hash.
void save_dataset(const LoadedDataset& ds, const std::string& dir,
                  const std::string& manifest_name = "manifest.json");

// Identity of the dataset content (ids, labels, spectra), independent of
// manifest row order.
uint64_t dataset_content_hash(const LoadedDataset& ds);

// --- built-in designs ---------------------------------------------------------

// One design row: consecutive sample ids spanning the cartesian product of
// the two concentration lists. Expansion size must equal the id range.
struct DesignRow {
    int id_first = 0;
    int id_last = 0;
    std::vector<double> nacl_ppm;
    std::vector<double> pb_ppm;
    double base_mass_g = 1600.0;
};

struct SpikingDesign {
    std::vector<DesignRow> rows;
    double moisture = 0.20; // spiked rows

    void validate() const; // non-negative ppm, consistent expansion
};

// The controlled bench design: a 7-step NaCl ladder, a 7-step Pb(NO3)2
// ladder, and the 3x3 cartesian mix of {100,400,2000} x {100,400,2000} ppm -
// 23 spiked samples (ids s01..s23) plus two baselines (dry base soil and
// base soil at 20% moisture) = 25 low/high spectrum pairs.
SpikingDesign controlled_design();

// Salt model keys used by the built-in designs and generators.
inline constexpr const char* kNaclSaltKey = "nacl";
inline constexpr const char* kPbSaltKey = "pb_nitrate";

// Everything needed to simulate a sample's two band spectra.
struct SimulationSetup {
    TransmitConfig low;
    TransmitConfig high;
    BenchGeometry geometry;
    SaltModelMap salts;
    DielectricModel dielectric;
    NoiseModel noise;
};

// Default fixtures: both transmit bands at 0.5 MHz step and 6 dBm, the
// standard bench geometry, the calibrated default salt models and base-soil
// dielectric, noiseless.
SimulationSetup default_setup();
SaltModelMap default_salt_models();

// Both band spectra of one sample, keyed by band label. Band sub-seeds
// derive from `seed`, so the pair is a pure function of its arguments.
std::map<std::string, Spectrum> simulate_sample_spectra(double pb_ppm, double nacl_ppm,
                                                        double moisture,
                                                        const SimulationSetup& setup,
                                                        uint64_t seed);

// Simulates the full design plus baselines into an in-memory dataset
// (manifest paths filled relative to a future save_dataset call).
LoadedDataset generate_controlled_set(const SpikingDesign& design,
                                      const SimulationSetup& setup, uint64_t seed);

// Synthetic field-like set: n samples with properties drawn uniformly within
// field survey ranges (Pb 36-1550 ppm, moisture 1-40%, organic matter 4-26%,
// pH 4.70-7.07, salt 58-710 g) except that the Pb draw enforces the
// documented 10-above / 12-below-threshold label split for n = 22 (scaled
// proportionally otherwise). Spectra are simulated with the setup's noise.
LoadedDataset generate_field_like_set(int n, const SimulationSetup& setup,
                                      uint64_t seed);

// Feature assembly over a loaded dataset. `band` is "low", "high" or "both".
// diffpair uses the per-band difference features; binned schemes concatenate
// per-band windows. A weighted scheme with an empty weight vector fits
// per-band variance weights over the whole dataset's raw rows (fold-blind
// fitting goes through raw_row_transform_factory instead). Raw mode returns
// the power rows themselves.
FeatureMatrix dataset_features(const LoadedDataset& ds, const FeatureScheme& scheme,
                               const std::string& band);
FeatureMatrix dataset_raw_rows(const LoadedDataset& ds, const std::string& band);
LabeledDataset labeled_from(const FeatureMatrix& features, const LoadedDataset& ds,
                            double threshold_ppm);

// Per-fold transform factory matching `scheme` over raw power rows laid out
// like dataset_raw_rows(ds, band): hop/aggregate are static window maps;
// weighted fits variance weights on the training rows it is given.
TransformFactory raw_row_transform_factory(const LoadedDataset& ds,
                                           const FeatureScheme& scheme,
                                           const std::string& band);

// --- fixture calibration --------------------------------------------------------

// Directional targets the calibrated salt fixtures must satisfy, evaluated
// on noiseless simulations of the controlled design's single-salt series.
struct TrendConstraint {
    enum class Kind {
        power_slope_sign, // sign of d(power)/d(concentration) over a window
        slope_order,      // |slope(salt_a)| > |slope(salt_b)| at a frequency
        diff_monotone,    // a difference feature strictly monotone in ppm
    };
    Kind kind = Kind::power_slope_sign;
    std::string salt;       // or salt_a for slope_order
    std::string salt_b;
    double f_lo_mhz = 0.0;  // window (power_slope_sign) or probe (slope_order)
    double f_hi_mhz = 0.0;
    int sign = -1;          // +1 rising, -1 falling
    std::string diff_name;  // "diff800" | "diff2300" for diff_monotone
    std::string describe() const;
};

struct TrendSpec {
    std::vector<TrendConstraint> constraints;
};

// The default targets: power rises with each salt's concentration in a
// sub-band near 800 MHz and falls above 825 MHz and around 2.4 GHz; NaCl
// attenuates more per ppm than Pb(NO3)2 at 2.4 GHz; diff800 is strictly
// monotone over the Pb series and diff2300 over the NaCl series.
TrendSpec default_trend_spec();

struct TrendCheck {
    std::string description;
    bool satisfied = false;
    double margin = 0.0; // smallest signed slack observed (dB)
};

struct CalibrationResult {
    SaltModelMap models;
    std::vector<TrendCheck> checks;
};

// Verifies the targets against `setup`'s salt models and, when violated,
// runs a coordinate descent over the frequency-shape knots (log domain) and
// the per-ppm loss terms until every target holds. An empty constraint set
// returns the models unchanged. Unsatisfiable targets raise
// Error{calibration} listing every unsatisfied check.
CalibrationResult calibrate_fixtures(const TrendSpec& spec, const SimulationSetup& setup);

// Fixture JSON I/O (calibrate artifact).
void write_salt_models_json(const SaltModelMap& models,
                            const std::vector<TrendCheck>& checks,
                            const std::string& path,
                            const std::map<std::string, std::string>& config_echo);
SaltModelMap read_salt_models_json(const std::string& path);

} // namespace soilrf

#endif
