// SPDX-License-Identifier: MIT
//
// Electromagnetic description of salt-contaminated soil: complex-permittivity
// bookkeeping, conductivity superposition over per-salt response models, and
// the plane-wave attenuation/phase coefficients of the lossy medium.
#ifndef SOILRF_MEDIUM_HPP
#define SOILRF_MEDIUM_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace soilrf {

// One contaminant in a sample. `name` must match a SaltResponseModel key.
struct SaltSpec {
    std::string name;
    double concentration_ppm = 0.0; // mass ppm relative to dry soil, >= 0
};

struct SoilSample {
    double base_mass_g = 1600.0;
    double moisture = 0.0; // volumetric fraction in [0,1]
    std::vector<SaltSpec> salts;
    std::map<std::string, std::string> metadata;
};

// Piecewise-linear curve over frequency (MHz -> dimensionless multiplier).
// Knots must be strictly increasing in frequency with positive values;
// evaluation clamps to the end values outside the knot range.
struct FreqShape {
    std::vector<std::pair<double, double>> knots_mhz;

    double at(double f_mhz) const;
    void validate() const; // throws Error{config} on bad knots
};

// How one salt species loads the medium, per ppm of concentration. These
// parameters are calibrated fixtures tuned to reproduce observed spectral
// trends; they make no claim to ion-level physical accuracy.
struct SaltResponseModel {
    double sigma_per_ppm = 0.0;    // S/m contributed per ppm, scaled by freq_shape
    FreqShape freq_shape;          // frequency weighting of the conduction term
    double eps_loss_per_ppm = 0.0; // dielectric-loss (eps'') increment per ppm
};

using SaltModelMap = std::map<std::string, SaltResponseModel>;

// Base-soil dielectric behaviour: a dry-soil/water two-phase refractive mix
// for eps' and a linear mix for eps''. Water dominates both as moisture rises.
struct DielectricModel {
    double eps_dry = 3.5;    // relative permittivity of dry loamy sand
    double eps_water = 80.0; // relative permittivity of water
    double loss_dry = 0.05;  // eps'' of dry soil
    double loss_water = 10.0;
    double sigma_base_s_per_m = 0.0; // ionic conduction of the unspiked soil
};

// Everything downstream propagation needs about a medium at one frequency.
struct MediumProperties {
    double eps_real = 1.0;     // relative permittivity (real part), >= 1
    double eps_loss = 0.0;     // relative dielectric loss (imaginary part), >= 0
    double sigma = 0.0;        // conductivity, S/m, >= 0
    double loss_tangent = 0.0; // effective tan(delta) including conduction
    double alpha = 0.0;        // attenuation coefficient, Np/m
    double beta = 0.0;         // phase coefficient, rad/m
};

// Total conductivity at f: sigma_base plus the per-salt linear superposition
// concentration * sigma_per_ppm * freq_shape(f). Unknown salt names are a
// configuration error identifying the salt.
double conductivity(const SoilSample& sample, double f_mhz,
                    const SaltModelMap& models, double sigma_base_s_per_m = 0.0);

// Effective loss tangent (eps_loss + sigma/(2 pi f eps0)) / eps_real.
// Requires eps_real >= 1, eps_loss >= 0, sigma >= 0, f_hz > 0.
double loss_tangent(double eps_real, double eps_loss, double sigma, double f_hz);

// Plane-wave attenuation in a lossy dielectric:
//   alpha = (2 pi f / c) * sqrt( (eps_real/2) * (sqrt(1 + tan^2) - 1) )
// Zero exactly when the loss tangent is zero.
double attenuation_coefficient(double eps_real, double tan_delta, double f_hz);

// Companion phase coefficient (the "+1" branch of the same root); reduces to
// (2 pi f / c) * sqrt(eps_real) in the lossless limit.
double phase_coefficient(double eps_real, double tan_delta, double f_hz);

// Apparent permittivity from a propagation velocity: (c/v)^2, 0 < v <= c.
double apparent_permittivity(double velocity_m_per_s);

// Volumetric moisture from apparent permittivity via the standard empirical
// cubic used in time-domain reflectometry, clamped to [0,1]. eps_a >= 1.
double moisture_from_permittivity(double eps_apparent);

// Two-phase refractive mixing for eps' and linear mixing for eps''.
double mixed_permittivity(const DielectricModel& model, double moisture);
double mixed_loss(const DielectricModel& model, double moisture);

// Full evaluation of sample -> MediumProperties at one frequency. eps'' adds
// the salts' per-ppm increments and is floored at zero.
MediumProperties medium_properties(const SoilSample& sample, double f_mhz,
                                   const SaltModelMap& models,
                                   const DielectricModel& dielectric);

} // namespace soilrf

#endif
