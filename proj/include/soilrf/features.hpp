// SPDX-License-Identifier: MIT
//
// Spectral feature engineering: the two fixed band-difference features and
// interval-binned features (hop / aggregate / weighted) over a spectrum's
// frequency grid, tolerant of acquisition gaps.
#ifndef SOILRF_FEATURES_HPP
#define SOILRF_FEATURES_HPP

#include <string>
#include <vector>

#include "soilrf/matrix.hpp"
#include "soilrf/propagation.hpp"

namespace soilrf {

enum class SchemeKind { diffpair, hop, aggregate, weighted };

// Binned feature schemes partition a band into [start, start+interval)
// windows anchored at the band's first grid frequency; a trailing partial
// window is kept. Per window:
//   hop       -> the first present frequency's power
//   aggregate -> mean power over present frequencies
//   weighted  -> weighted mean with weights renormalized over the
//                frequencies actually present
// `weights` applies per frequency position and accepts two lengths: one
// weight per grid point of an interval (a template reused by every window;
// a one-hot first-position template reproduces hop) or one weight per grid
// point of the whole spectrum (e.g. a variance-fitted vector). Uniform
// weights reproduce plain aggregation. Windows with no present frequency
// (or zero total present weight) are dropped.
struct FeatureScheme {
    SchemeKind kind = SchemeKind::hop;
    double interval_mhz = 25.0;   // positive multiple of the grid step
    std::vector<double> weights;  // weighted only; entries >= 0, not all 0
};

SchemeKind scheme_kind_from_name(const std::string& name); // "hop"|"agg"|"weighted"|"diffpair"
const char* scheme_kind_name(SchemeKind kind);

struct FeatureVector {
    std::vector<std::string> names;
    std::vector<double> values;
    std::string source_hash; // content hash of the source spectrum
};

// The fixed difference-feature probe frequencies (MHz).
inline constexpr double kDiff800HiMhz = 810.1;
inline constexpr double kDiff800LoMhz = 790.1;
inline constexpr double kDiff2300HiMhz = 2408.6;
inline constexpr double kDiff2300LoMhz = 2401.1;

struct GridPointRef {
    size_t index = 0;
    double freq_mhz = 0.0; // the grid frequency actually used
};

// Nearest present grid point within half a step of the requested frequency;
// Error{numeric} naming the frequency when it is absent (skipped or out of
// band). The resolved frequency is reported so callers can log the mapping.
GridPointRef resolve_frequency(const Spectrum& s, double f_mhz);

// Power difference between two probe frequencies resolved onto the grid:
// diff800 = P(810.1) - P(790.1) on the low band, diff2300 = P(2408.6) -
// P(2401.1) on the high band. Invariant to constant power offsets.
double diff800(const Spectrum& low_band);
double diff2300(const Spectrum& high_band);

// Features of one spectrum under a scheme. diffpair yields the single
// difference feature this band supports. Error{numeric} when every window
// is empty.
FeatureVector featurize(const Spectrum& s, const FeatureScheme& scheme);

struct FeatureMatrix {
    std::vector<std::string> sample_ids;
    std::vector<std::string> names;
    Matrix x;
};

// One row per sample: concatenated features of that sample's spectra (one
// spectrum per band, low to high). Columns are the intersection of feature
// names across all samples, in canonical (band, window) order, so a window
// missing from any sample is dropped for every sample. Spectra of the same
// band must share the grid lattice; mismatches are an alignment error.
FeatureMatrix feature_matrix(
    const std::vector<std::pair<std::string, std::vector<const Spectrum*>>>& samples,
    const FeatureScheme& scheme);

// Per-column sample variance of a row set - the fitted weight vector for the
// weighted scheme. Fit this on training rows only and pass it through
// FeatureScheme::weights.
std::vector<double> variance_weights(const Matrix& rows);

// CSV "sample_id,<feature...>" with a "# key=value" reproducibility header.
void write_feature_csv(const FeatureMatrix& m, const std::string& path,
                       const std::map<std::string, std::string>& header_kv);
FeatureMatrix read_feature_csv(const std::string& path);

} // namespace soilrf

#endif
