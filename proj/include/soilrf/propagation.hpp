// SPDX-License-Identifier: MIT
//
// Multi-segment plane-wave propagation: a transmit tone crosses an ordered
// chain of media (air gaps, container walls, soil) and arrives attenuated by
// the product of per-segment decay factors. Spectra are swept over fixed
// frequency grids and serialized as CSV plus a JSON metadata sidecar.
#ifndef SOILRF_PROPAGATION_HPP
#define SOILRF_PROPAGATION_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "soilrf/medium.hpp"

namespace soilrf {

struct Band {
    std::string label;
    double start_mhz = 0.0;
    double end_mhz = 0.0;
};

// The two acquisition bands and the default grid step.
inline const Band kLowBand{"low", 700.0, 1000.0};
inline const Band kHighBand{"high", 2300.0, 2500.0};
inline constexpr double kDefaultStepMhz = 0.5;

struct TransmitConfig {
    double amplitude = 1.0; // source amplitude (linear)
    double phase_rad = 0.0;
    double gain_dbm = 6.0;      // transmit power
    double setup_loss_db = 0.0; // fixed spreading/coupling loss of the bench
    Band band = kLowBand;
    double step_mhz = kDefaultStepMhz;
};

struct PathSegment {
    std::string medium_id;
    double length_m = 0.0; // > 0
};

struct PathGeometry {
    std::vector<PathSegment> segments;
    double total_length_m() const;
};

// Where a spectrum came from; hashed into artifact headers.
struct Provenance {
    std::string kind; // "simulated" | "acquired" | "ingested" | "derived"
    uint64_t seed = 0;
    std::string config_hash;
    std::string note;
};

// Power spectrum on a constant-step frequency lattice. Frequencies are
// strictly increasing and every one lies on the lattice anchored at
// start_mhz, but gaps are allowed (skipped acquisition points).
struct Spectrum {
    std::string band_label;
    double start_mhz = 0.0;
    double step_mhz = kDefaultStepMhz;
    std::vector<double> freqs_mhz;
    std::vector<double> power_dbm;
    Provenance provenance;

    void validate() const; // throws Error{numeric} on lattice violations
};

// Resolves a medium id to frequency-dependent properties.
using MediumFn = std::function<MediumProperties(double f_mhz)>;
using MediumMap = std::map<std::string, MediumFn>;

// Additive Gaussian noise applied to simulated power, in dBm.
struct NoiseModel {
    double sigma_dbm = 0.0;
};

// The full set of grid frequencies of a band: start, start+step, ..., end.
std::vector<double> band_grid(const Band& band, double step_mhz);

// Received power after the tone crosses every path segment in order:
//   gain_dbm - setup_loss_db + 20*log10( prod_i exp(-alpha_i * d_i) ).
// Multiplication of decay factors makes the result invariant to segment
// order and to splitting a segment in two. Unknown medium ids are a
// configuration error.
double received_power_dbm(const TransmitConfig& config, const PathGeometry& path,
                          const MediumMap& media, double f_mhz);

// Sweeps received_power_dbm over the configured band grid. Noise is additive
// in dBm with a per-point RNG seeded from (seed, point index), so results are
// identical whether points are computed in any order; sigma == 0 bypasses the
// RNG entirely and the seed does not influence the output.
Spectrum simulate_spectrum(const TransmitConfig& config, const PathGeometry& path,
                           const MediumMap& media, const NoiseModel& noise,
                           uint64_t seed);

// Standard bench path for a soil sample: air gap, container wall, soil,
// wall, air gap (total 0.18 m), with the soil segment driven by the sample.
struct BenchGeometry {
    double air_front_m = 0.040;
    double wall_m = 0.001;
    double soil_m = 0.120;
    double air_back_m = 0.018;
    double wall_eps_real = 2.3;
    double wall_eps_loss = 0.02;
};

std::pair<PathGeometry, MediumMap>
standard_soil_path(const SoilSample& sample, const SaltModelMap& models,
                   const DielectricModel& dielectric, const BenchGeometry& geom);

// Point-wise dB difference measured - background. Grids must match exactly;
// the error names the first mismatching frequency.
Spectrum subtract_background(const Spectrum& measured, const Spectrum& background);

// Content identity of a spectrum (band, grid, powers), as a hex string.
std::string spectrum_content_hash(const Spectrum& s);

// CSV with header "freq_mhz,power_dbm" preceded by "# key=value" lines, plus
// a JSON sidecar at <path>.meta.json echoing grid, seed and provenance.
// Values round-trip exactly through read_spectrum_csv.
void write_spectrum_csv(const Spectrum& s, const std::string& path,
                        const std::map<std::string, std::string>& header_kv);
Spectrum read_spectrum_csv(const std::string& path);

} // namespace soilrf

#endif
