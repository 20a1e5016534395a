// SPDX-License-Identifier: MIT
#include "soilrf/medium.hpp"

#include <algorithm>
#include <cmath>

#include "soilrf/error.hpp"
#include "soilrf/units.hpp"

namespace soilrf {

double FreqShape::at(double f_mhz) const {
    validate();
    const auto& k = knots_mhz;
    if (f_mhz <= k.front().first)
        return k.front().second;
    if (f_mhz >= k.back().first)
        return k.back().second;
    // first knot with frequency > f
    auto it = std::upper_bound(k.begin(), k.end(), f_mhz,
                               [](double f, const std::pair<double, double>& kn) {
                                   return f < kn.first;
                               });
    auto hi = *it;
    auto lo = *(it - 1);
    double t = (f_mhz - lo.first) / (hi.first - lo.first);
    return lo.second + t * (hi.second - lo.second);
}

void FreqShape::validate() const {
    if (knots_mhz.empty())
        fail(ErrorKind::config, "frequency shape needs at least one knot");
    for (size_t i = 0; i < knots_mhz.size(); ++i) {
        if (!(knots_mhz[i].second > 0.0))
            fail(ErrorKind::config, "frequency shape values must be positive");
        if (i > 0 && !(knots_mhz[i].first > knots_mhz[i - 1].first))
            fail(ErrorKind::config,
                 "frequency shape knots must be strictly increasing in frequency");
    }
}

double conductivity(const SoilSample& sample, double f_mhz, const SaltModelMap& models,
                    double sigma_base_s_per_m) {
    if (!(f_mhz > 0.0))
        fail(ErrorKind::numeric, "conductivity: frequency must be positive");
    if (sigma_base_s_per_m < 0.0)
        fail(ErrorKind::config, "conductivity: base conductivity must be >= 0");
    double sigma = sigma_base_s_per_m;
    for (const auto& salt : sample.salts) {
        if (salt.concentration_ppm < 0.0)
            fail(ErrorKind::config,
                 "conductivity: negative concentration for salt '" + salt.name + "'");
        auto it = models.find(salt.name);
        if (it == models.end())
            fail(ErrorKind::config, "unknown salt '" + salt.name + "' (no response model)");
        sigma += salt.concentration_ppm * it->second.sigma_per_ppm *
                 it->second.freq_shape.at(f_mhz);
    }
    return sigma;
}

double loss_tangent(double eps_real, double eps_loss, double sigma, double f_hz) {
    if (!(eps_real >= 1.0))
        fail(ErrorKind::numeric, "loss_tangent: eps_real must be >= 1");
    if (eps_loss < 0.0 || sigma < 0.0)
        fail(ErrorKind::numeric, "loss_tangent: eps_loss and sigma must be >= 0");
    if (!(f_hz > 0.0))
        fail(ErrorKind::numeric, "loss_tangent: frequency must be positive");
    double omega = 2.0 * M_PI * f_hz;
    return (eps_loss + sigma / (omega * kVacuumPermittivity)) / eps_real;
}

namespace {

// Common root of the lossy propagation constant:
// (2 pi f / c) * sqrt( (eps/2) * (sqrt(1 + tan^2) +/- 1) ).
double lossy_root(double eps_real, double tan_delta, double f_hz, double branch) {
    if (!(eps_real >= 1.0))
        fail(ErrorKind::numeric, "propagation constant: eps_real must be >= 1");
    if (tan_delta < 0.0)
        fail(ErrorKind::numeric, "propagation constant: loss tangent must be >= 0");
    if (!(f_hz > 0.0))
        fail(ErrorKind::numeric, "propagation constant: frequency must be positive");
    double k0 = 2.0 * M_PI * f_hz / kSpeedOfLight;
    double inner = std::sqrt(1.0 + tan_delta * tan_delta) + branch;
    return k0 * std::sqrt(0.5 * eps_real * std::max(inner, 0.0));
}

} // namespace

double attenuation_coefficient(double eps_real, double tan_delta, double f_hz) {
    return lossy_root(eps_real, tan_delta, f_hz, -1.0);
}

double phase_coefficient(double eps_real, double tan_delta, double f_hz) {
    return lossy_root(eps_real, tan_delta, f_hz, +1.0);
}

double apparent_permittivity(double velocity_m_per_s) {
    if (!(velocity_m_per_s > 0.0) || velocity_m_per_s > kSpeedOfLight)
        fail(ErrorKind::numeric,
             "apparent_permittivity: velocity must be in (0, c]");
    double ratio = kSpeedOfLight / velocity_m_per_s;
    return ratio * ratio;
}

double moisture_from_permittivity(double eps_apparent) {
    if (!(eps_apparent >= 1.0))
        fail(ErrorKind::numeric, "moisture_from_permittivity: eps must be >= 1");
    double e = eps_apparent;
    double theta = -5.3e-2 + 2.92e-2 * e - 5.5e-4 * e * e + 4.3e-6 * e * e * e;
    return std::clamp(theta, 0.0, 1.0);
}

double mixed_permittivity(const DielectricModel& model, double moisture) {
    if (moisture < 0.0 || moisture > 1.0)
        fail(ErrorKind::config, "mixed_permittivity: moisture must be in [0,1]");
    double n = (1.0 - moisture) * std::sqrt(model.eps_dry) +
               moisture * std::sqrt(model.eps_water);
    return n * n;
}

double mixed_loss(const DielectricModel& model, double moisture) {
    if (moisture < 0.0 || moisture > 1.0)
        fail(ErrorKind::config, "mixed_loss: moisture must be in [0,1]");
    return (1.0 - moisture) * model.loss_dry + moisture * model.loss_water;
}

MediumProperties medium_properties(const SoilSample& sample, double f_mhz,
                                   const SaltModelMap& models,
                                   const DielectricModel& dielectric) {
    double f_hz = mhz_to_hz(f_mhz);
    MediumProperties out;
    out.eps_real = mixed_permittivity(dielectric, sample.moisture);
    double eps_loss = mixed_loss(dielectric, sample.moisture);
    for (const auto& salt : sample.salts) {
        auto it = models.find(salt.name);
        if (it == models.end())
            fail(ErrorKind::config, "unknown salt '" + salt.name + "' (no response model)");
        eps_loss += salt.concentration_ppm * it->second.eps_loss_per_ppm;
    }
    out.eps_loss = std::max(eps_loss, 0.0);
    out.sigma = conductivity(sample, f_mhz, models, dielectric.sigma_base_s_per_m);
    out.loss_tangent = loss_tangent(out.eps_real, out.eps_loss, out.sigma, f_hz);
    out.alpha = attenuation_coefficient(out.eps_real, out.loss_tangent, f_hz);
    out.beta = phase_coefficient(out.eps_real, out.loss_tangent, f_hz);
    return out;
}

} // namespace soilrf
