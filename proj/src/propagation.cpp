// SPDX-License-Identifier: MIT
#include "soilrf/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include <nlohmann/json.hpp>

#include "soilrf/error.hpp"
#include "soilrf/units.hpp"
#include "soilrf/util.hpp"

#include "rng.hpp"

namespace soilrf {

using nlohmann::json;

double PathGeometry::total_length_m() const {
    double total = 0.0;
    for (const auto& seg : segments)
        total += seg.length_m;
    return total;
}

void Spectrum::validate() const {
    if (!(step_mhz > 0.0))
        fail(ErrorKind::numeric, "spectrum: grid step must be positive");
    if (freqs_mhz.size() != power_dbm.size())
        fail(ErrorKind::numeric, "spectrum: frequency/power length mismatch");
    double prev = -1.0;
    for (double f : freqs_mhz) {
        if (f <= prev)
            fail(ErrorKind::numeric, "spectrum: frequencies must be strictly increasing");
        double ticks = (f - start_mhz) / step_mhz;
        if (std::abs(ticks - std::round(ticks)) > 1e-6)
            fail(ErrorKind::numeric,
                 "spectrum: frequency " + format_double(f) + " MHz is off the " +
                     format_double(step_mhz) + " MHz lattice anchored at " +
                     format_double(start_mhz) + " MHz");
        prev = f;
    }
}

std::vector<double> band_grid(const Band& band, double step_mhz) {
    if (!(step_mhz > 0.0))
        fail(ErrorKind::config, "band grid: step must be positive");
    if (!(band.end_mhz > band.start_mhz))
        fail(ErrorKind::config, "band grid: band end must exceed band start");
    double span = band.end_mhz - band.start_mhz;
    double ticks = span / step_mhz;
    long n = std::lround(ticks);
    if (std::abs(ticks - static_cast<double>(n)) > 1e-9)
        fail(ErrorKind::config, "band grid: step does not divide the band span");
    std::vector<double> grid(static_cast<size_t>(n) + 1);
    for (long i = 0; i <= n; ++i)
        grid[static_cast<size_t>(i)] = band.start_mhz + static_cast<double>(i) * step_mhz;
    return grid;
}

double received_power_dbm(const TransmitConfig& config, const PathGeometry& path,
                          const MediumMap& media, double f_mhz) {
    if (!(f_mhz > 0.0))
        fail(ErrorKind::numeric, "received power: frequency must be positive");
    // 20*log10(prod_i exp(-alpha_i d_i)) accumulated per segment in dB, which
    // never underflows however strong the attenuation is.
    constexpr double kDbPerNeper = 20.0 / M_LN10;
    double path_db = 0.0;
    for (const auto& seg : path.segments) {
        if (!(seg.length_m > 0.0))
            fail(ErrorKind::config, "received power: segment lengths must be positive");
        auto it = media.find(seg.medium_id);
        if (it == media.end())
            fail(ErrorKind::config, "unknown medium '" + seg.medium_id + "' on the path");
        MediumProperties props = it->second(f_mhz);
        path_db -= kDbPerNeper * props.alpha * seg.length_m;
    }
    return config.gain_dbm - config.setup_loss_db + path_db;
}

Spectrum simulate_spectrum(const TransmitConfig& config, const PathGeometry& path,
                           const MediumMap& media, const NoiseModel& noise,
                           uint64_t seed) {
    if (noise.sigma_dbm < 0.0)
        fail(ErrorKind::config, "simulate: noise sigma must be >= 0");
    Spectrum s;
    s.band_label = config.band.label;
    s.start_mhz = config.band.start_mhz;
    s.step_mhz = config.step_mhz;
    s.freqs_mhz = band_grid(config.band, config.step_mhz);
    s.power_dbm.resize(s.freqs_mhz.size());
    for (size_t i = 0; i < s.freqs_mhz.size(); ++i) {
        double p = received_power_dbm(config, path, media, s.freqs_mhz[i]);
        if (noise.sigma_dbm > 0.0) {
            // Independent generator per point: the result is a pure function
            // of (seed, point index), whatever order points are evaluated in.
            Rng rng(mix64(seed, static_cast<uint64_t>(i)));
            p += noise.sigma_dbm * rng.gaussian();
        }
        s.power_dbm[i] = p;
    }
    s.provenance.kind = "simulated";
    s.provenance.seed = seed;
    s.provenance.config_hash = to_hex(fnv1a64(
        config.band.label + "|" + format_double(config.band.start_mhz) + "|" +
        format_double(config.band.end_mhz) + "|" + format_double(config.step_mhz) + "|" +
        format_double(config.gain_dbm) + "|" + format_double(noise.sigma_dbm)));
    s.validate();
    return s;
}

std::pair<PathGeometry, MediumMap>
standard_soil_path(const SoilSample& sample, const SaltModelMap& models,
                   const DielectricModel& dielectric, const BenchGeometry& geom) {
    PathGeometry path;
    path.segments = {{"air", geom.air_front_m},
                     {"wall", geom.wall_m},
                     {"soil", geom.soil_m},
                     {"wall", geom.wall_m},
                     {"air", geom.air_back_m}};

    MediumMap media;
    media["air"] = [](double f_mhz) {
        MediumProperties p;
        p.eps_real = 1.0;
        p.eps_loss = 0.0;
        p.sigma = 0.0;
        p.loss_tangent = 0.0;
        p.alpha = 0.0;
        p.beta = phase_coefficient(1.0, 0.0, mhz_to_hz(f_mhz));
        return p;
    };
    double wall_eps = geom.wall_eps_real;
    double wall_loss = geom.wall_eps_loss;
    media["wall"] = [wall_eps, wall_loss](double f_mhz) {
        double f_hz = mhz_to_hz(f_mhz);
        MediumProperties p;
        p.eps_real = wall_eps;
        p.eps_loss = wall_loss;
        p.sigma = 0.0;
        p.loss_tangent = loss_tangent(wall_eps, wall_loss, 0.0, f_hz);
        p.alpha = attenuation_coefficient(wall_eps, p.loss_tangent, f_hz);
        p.beta = phase_coefficient(wall_eps, p.loss_tangent, f_hz);
        return p;
    };
    media["soil"] = [sample, models, dielectric](double f_mhz) {
        return medium_properties(sample, f_mhz, models, dielectric);
    };
    return {path, media};
}

Spectrum subtract_background(const Spectrum& measured, const Spectrum& background) {
    measured.validate();
    background.validate();
    if (measured.freqs_mhz.size() != background.freqs_mhz.size())
        fail(ErrorKind::numeric,
             "background subtraction: spectra have different point counts (" +
                 std::to_string(measured.freqs_mhz.size()) + " vs " +
                 std::to_string(background.freqs_mhz.size()) + ")");
    for (size_t i = 0; i < measured.freqs_mhz.size(); ++i) {
        if (measured.freqs_mhz[i] != background.freqs_mhz[i])
            fail(ErrorKind::numeric,
                 "background subtraction: grids diverge at " +
                     format_double(measured.freqs_mhz[i]) + " MHz vs " +
                     format_double(background.freqs_mhz[i]) + " MHz");
    }
    Spectrum out = measured;
    for (size_t i = 0; i < out.power_dbm.size(); ++i)
        out.power_dbm[i] = measured.power_dbm[i] - background.power_dbm[i];
    out.provenance.kind = "derived";
    out.provenance.note = "background-subtracted";
    return out;
}

std::string spectrum_content_hash(const Spectrum& s) {
    uint64_t h = fnv1a64(s.band_label);
    auto mix_double = [&h](double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        h = fnv1a64(&bits, sizeof(bits), h);
    };
    mix_double(s.start_mhz);
    mix_double(s.step_mhz);
    for (double f : s.freqs_mhz)
        mix_double(f);
    for (double p : s.power_dbm)
        mix_double(p);
    return to_hex(h);
}

void write_spectrum_csv(const Spectrum& s, const std::string& path,
                        const std::map<std::string, std::string>& header_kv) {
    s.validate();
    std::map<std::string, std::string> kv = header_kv;
    kv["band_label"] = s.band_label;
    kv["start_mhz"] = format_double(s.start_mhz);
    kv["step_mhz"] = format_double(s.step_mhz);
    kv["provenance_kind"] = s.provenance.kind;
    kv["seed"] = std::to_string(s.provenance.seed);
    kv["config_hash"] = s.provenance.config_hash;
    kv["note"] = s.provenance.note;
    kv["content_hash"] = spectrum_content_hash(s);

    std::string text = kv_header(kv);
    text += "freq_mhz,power_dbm\n";
    for (size_t i = 0; i < s.freqs_mhz.size(); ++i) {
        text += format_double(s.freqs_mhz[i]);
        text += ",";
        text += format_double(s.power_dbm[i]);
        text += "\n";
    }
    atomic_write_text(path, text);

    json meta;
    meta["band_label"] = s.band_label;
    meta["start_mhz"] = s.start_mhz;
    meta["step_mhz"] = s.step_mhz;
    meta["n_points"] = s.freqs_mhz.size();
    meta["content_hash"] = kv["content_hash"];
    meta["provenance"] = {{"kind", s.provenance.kind},
                          {"seed", s.provenance.seed},
                          {"config_hash", s.provenance.config_hash},
                          {"note", s.provenance.note}};
    atomic_write_text(path + ".meta.json", meta.dump(2) + "\n");
}

Spectrum read_spectrum_csv(const std::string& path) {
    std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    std::map<std::string, std::string> kv;
    Spectrum s;
    bool saw_header_row = false;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            size_t start = body.find_first_not_of(' ');
            if (start == std::string::npos)
                continue;
            body = body.substr(start);
            size_t eq = body.find('=');
            if (eq != std::string::npos)
                kv[body.substr(0, eq)] = body.substr(eq + 1);
            continue;
        }
        if (!saw_header_row) {
            if (line != "freq_mhz,power_dbm")
                fail(ErrorKind::load, path + ": expected 'freq_mhz,power_dbm' header, got '" +
                                          line + "'");
            saw_header_row = true;
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != 2)
            fail(ErrorKind::load,
                 path + ": line " + std::to_string(line_no) + " has " +
                     std::to_string(fields.size()) + " fields, expected 2");
        s.freqs_mhz.push_back(parse_double(fields[0], path + " freq_mhz"));
        s.power_dbm.push_back(parse_double(fields[1], path + " power_dbm"));
    }
    if (!saw_header_row)
        fail(ErrorKind::load, path + ": missing 'freq_mhz,power_dbm' header");

    auto require = [&kv, &path](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end())
            fail(ErrorKind::load, path + ": missing '# " + key + "=' header line");
        return it->second;
    };
    s.band_label = require("band_label");
    s.start_mhz = parse_double(require("start_mhz"), path + " start_mhz");
    s.step_mhz = parse_double(require("step_mhz"), path + " step_mhz");
    if (auto it = kv.find("provenance_kind"); it != kv.end())
        s.provenance.kind = it->second;
    if (auto it = kv.find("seed"); it != kv.end())
        s.provenance.seed = static_cast<uint64_t>(std::stoull(it->second));
    if (auto it = kv.find("config_hash"); it != kv.end())
        s.provenance.config_hash = it->second;
    if (auto it = kv.find("note"); it != kv.end())
        s.provenance.note = it->second;
    s.validate();
    if (auto it = kv.find("content_hash"); it != kv.end()) {
        std::string actual = spectrum_content_hash(s);
        if (actual != it->second)
            fail(ErrorKind::load, path + ": content hash mismatch (file says " +
                                      it->second + ", data hashes to " + actual + ")");
    }
    return s;
}

} // namespace soilrf
