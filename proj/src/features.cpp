// SPDX-License-Identifier: MIT
#include "soilrf/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "soilrf/error.hpp"
#include "soilrf/util.hpp"

namespace soilrf {

SchemeKind scheme_kind_from_name(const std::string& name) {
    if (name == "hop")
        return SchemeKind::hop;
    if (name == "agg" || name == "aggregate")
        return SchemeKind::aggregate;
    if (name == "weighted")
        return SchemeKind::weighted;
    if (name == "diffpair")
        return SchemeKind::diffpair;
    fail(ErrorKind::config, "unknown feature scheme '" + name +
                                "' (expected diffpair, hop, aggregate or weighted)");
}

const char* scheme_kind_name(SchemeKind kind) {
    switch (kind) {
    case SchemeKind::diffpair: return "diffpair";
    case SchemeKind::hop: return "hop";
    case SchemeKind::aggregate: return "aggregate";
    case SchemeKind::weighted: return "weighted";
    }
    fail(ErrorKind::contract, "unknown scheme kind");
}

GridPointRef resolve_frequency(const Spectrum& s, double f_mhz) {
    if (s.freqs_mhz.empty())
        fail(ErrorKind::numeric, "cannot resolve " + format_double(f_mhz) +
                                     " MHz: spectrum is empty");
    auto it = std::lower_bound(s.freqs_mhz.begin(), s.freqs_mhz.end(), f_mhz);
    size_t best = 0;
    if (it == s.freqs_mhz.end()) {
        best = s.freqs_mhz.size() - 1;
    } else {
        best = static_cast<size_t>(it - s.freqs_mhz.begin());
        if (best > 0 &&
            std::abs(s.freqs_mhz[best - 1] - f_mhz) <= std::abs(s.freqs_mhz[best] - f_mhz))
            --best;
    }
    double dist = std::abs(s.freqs_mhz[best] - f_mhz);
    if (dist > s.step_mhz / 2.0 + 1e-9)
        fail(ErrorKind::numeric,
             "no grid point within half a step of " + format_double(f_mhz) +
                 " MHz (nearest present point is " + format_double(s.freqs_mhz[best]) +
                 " MHz)");
    return {best, s.freqs_mhz[best]};
}

double diff800(const Spectrum& low_band) {
    GridPointRef hi = resolve_frequency(low_band, kDiff800HiMhz);
    GridPointRef lo = resolve_frequency(low_band, kDiff800LoMhz);
    return low_band.power_dbm[hi.index] - low_band.power_dbm[lo.index];
}

double diff2300(const Spectrum& high_band) {
    GridPointRef hi = resolve_frequency(high_band, kDiff2300HiMhz);
    GridPointRef lo = resolve_frequency(high_band, kDiff2300LoMhz);
    return high_band.power_dbm[hi.index] - high_band.power_dbm[lo.index];
}

namespace {

void validate_scheme(const FeatureScheme& scheme, double step_mhz) {
    if (scheme.kind == SchemeKind::diffpair)
        return;
    if (!(scheme.interval_mhz > 0.0))
        fail(ErrorKind::config, "feature scheme: interval must be positive");
    double ratio = scheme.interval_mhz / step_mhz;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0)
        fail(ErrorKind::config, "feature scheme: interval (" +
                                    format_double(scheme.interval_mhz) +
                                    " MHz) must be a positive multiple of the grid step (" +
                                    format_double(step_mhz) + " MHz)");
    if (scheme.kind == SchemeKind::weighted) {
        if (scheme.weights.empty())
            fail(ErrorKind::config, "weighted scheme requires a weight vector");
        bool any_positive = false;
        for (double w : scheme.weights) {
            if (w < 0.0)
                fail(ErrorKind::config, "weighted scheme: weights must be >= 0");
            if (w > 0.0)
                any_positive = true;
        }
        if (!any_positive)
            fail(ErrorKind::config, "weighted scheme: weights must not all be zero");
    } else if (!scheme.weights.empty()) {
        fail(ErrorKind::config,
             "weights are only meaningful for the weighted scheme");
    }
}

std::string window_name(const std::string& band_label, size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_w%03zu", band_label.c_str(), index);
    return std::string(buf);
}

} // namespace

FeatureVector featurize(const Spectrum& s, const FeatureScheme& scheme) {
    s.validate();
    validate_scheme(scheme, s.step_mhz);
    FeatureVector out;
    out.source_hash = spectrum_content_hash(s);

    if (scheme.kind == SchemeKind::diffpair) {
        if (s.freqs_mhz.empty())
            fail(ErrorKind::numeric, "cannot featurize an empty spectrum");
        double lo = s.start_mhz, hi = s.freqs_mhz.back();
        if (kDiff800LoMhz >= lo && kDiff800HiMhz <= hi) {
            out.names.push_back("diff800");
            out.values.push_back(diff800(s));
        } else if (kDiff2300LoMhz >= lo && kDiff2300HiMhz <= hi) {
            out.names.push_back("diff2300");
            out.values.push_back(diff2300(s));
        } else {
            fail(ErrorKind::numeric,
                 "spectrum spans neither difference-feature probe pair");
        }
        return out;
    }

    size_t per_window = static_cast<size_t>(std::llround(scheme.interval_mhz / s.step_mhz));
    // Weight vector semantics: a per-window template (one weight per grid
    // position of a full interval) or one weight per lattice tick of the
    // whole spectrum.
    bool template_weights = false;
    if (scheme.kind == SchemeKind::weighted) {
        size_t max_tick = 0;
        for (double f : s.freqs_mhz)
            max_tick = std::max(
                max_tick, static_cast<size_t>(std::llround((f - s.start_mhz) / s.step_mhz)));
        if (scheme.weights.size() == per_window)
            template_weights = true;
        else if (scheme.weights.size() >= max_tick + 1)
            template_weights = false;
        else
            fail(ErrorKind::config,
                 "weighted scheme: weight vector length " +
                     std::to_string(scheme.weights.size()) + " matches neither one " +
                     "interval (" + std::to_string(per_window) +
                     ") nor the full grid (>= " + std::to_string(max_tick + 1) + ")");
    }

    // window index -> (sum of weights, weighted power sum, first present power)
    std::map<size_t, std::array<double, 3>> windows;
    for (size_t i = 0; i < s.freqs_mhz.size(); ++i) {
        double f = s.freqs_mhz[i];
        double rel = (f - s.start_mhz) / scheme.interval_mhz;
        size_t w = static_cast<size_t>(std::floor(rel + 1e-9));
        double weight = 1.0;
        if (scheme.kind == SchemeKind::weighted) {
            size_t tick = static_cast<size_t>(std::llround((f - s.start_mhz) / s.step_mhz));
            size_t pos = template_weights ? tick - w * per_window : tick;
            if (pos >= scheme.weights.size())
                fail(ErrorKind::contract, "weighted scheme: weight index out of range");
            weight = scheme.weights[pos];
        }
        auto [it, fresh] = windows.try_emplace(w, std::array<double, 3>{0.0, 0.0, 0.0});
        if (fresh)
            it->second[2] = s.power_dbm[i]; // first present frequency in the window
        it->second[0] += weight;
        it->second[1] += weight * s.power_dbm[i];
    }

    for (const auto& [w, acc] : windows) { // std::map: ascending window order
        double value = 0.0;
        if (scheme.kind == SchemeKind::hop) {
            value = acc[2];
        } else {
            if (acc[0] <= 0.0)
                continue; // zero present weight: window dropped
            value = acc[1] / acc[0];
        }
        out.names.push_back(window_name(s.band_label, w));
        out.values.push_back(value);
    }
    if (out.names.empty())
        fail(ErrorKind::numeric, "no feature window holds any spectrum point");
    return out;
}

FeatureMatrix feature_matrix(
    const std::vector<std::pair<std::string, std::vector<const Spectrum*>>>& samples,
    const FeatureScheme& scheme) {
    if (samples.empty())
        fail(ErrorKind::config, "feature matrix: no samples");

    // Per-band lattice consistency across samples.
    std::map<std::string, std::pair<double, double>> lattice; // band -> (start, step)
    std::set<std::string> ids;
    for (const auto& [id, spectra] : samples) {
        if (!ids.insert(id).second)
            fail(ErrorKind::config, "feature matrix: duplicate sample id '" + id + "'");
        if (spectra.empty())
            fail(ErrorKind::config, "feature matrix: sample '" + id + "' has no spectra");
        for (const Spectrum* s : spectra) {
            auto [it, fresh] =
                lattice.try_emplace(s->band_label, std::make_pair(s->start_mhz, s->step_mhz));
            if (!fresh && (it->second.first != s->start_mhz || it->second.second != s->step_mhz))
                fail(ErrorKind::numeric,
                     "feature matrix: band '" + s->band_label +
                         "' spectra do not share a grid lattice (sample '" + id + "')");
        }
    }

    // Featurize each sample with its spectra in ascending band order.
    std::vector<std::vector<std::string>> names(samples.size());
    std::vector<std::map<std::string, double>> values(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
        std::vector<const Spectrum*> ordered = samples[i].second;
        std::sort(ordered.begin(), ordered.end(),
                  [](const Spectrum* a, const Spectrum* b) {
                      return a->start_mhz < b->start_mhz;
                  });
        for (const Spectrum* s : ordered) {
            FeatureVector fv = featurize(*s, scheme);
            for (size_t j = 0; j < fv.names.size(); ++j) {
                if (!values[i].emplace(fv.names[j], fv.values[j]).second)
                    fail(ErrorKind::config, "feature matrix: sample '" + samples[i].first +
                                                "' produces feature '" + fv.names[j] +
                                                "' twice");
                names[i].push_back(fv.names[j]);
            }
        }
    }

    // Columns: intersection across samples, in the first sample's order.
    FeatureMatrix out;
    for (const std::string& name : names[0]) {
        bool everywhere = true;
        for (size_t i = 1; i < samples.size() && everywhere; ++i)
            everywhere = values[i].count(name) > 0;
        if (everywhere)
            out.names.push_back(name);
    }
    if (out.names.empty())
        fail(ErrorKind::numeric, "feature matrix: no feature is present in every sample");

    out.x = Matrix(samples.size(), out.names.size());
    for (size_t i = 0; i < samples.size(); ++i) {
        out.sample_ids.push_back(samples[i].first);
        for (size_t j = 0; j < out.names.size(); ++j)
            out.x.at(i, j) = values[i].at(out.names[j]);
    }
    return out;
}

std::vector<double> variance_weights(const Matrix& rows) {
    if (rows.rows < 2)
        fail(ErrorKind::config, "variance weights need at least two rows");
    std::vector<double> out(rows.cols, 0.0);
    for (size_t c = 0; c < rows.cols; ++c) {
        double mean = 0.0;
        for (size_t r = 0; r < rows.rows; ++r)
            mean += rows.at(r, c);
        mean /= static_cast<double>(rows.rows);
        double ss = 0.0;
        for (size_t r = 0; r < rows.rows; ++r) {
            double d = rows.at(r, c) - mean;
            ss += d * d;
        }
        out[c] = ss / static_cast<double>(rows.rows - 1);
    }
    return out;
}

FeatureMatrix read_feature_csv(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    FeatureMatrix m;
    bool saw_header = false;
    std::vector<std::vector<double>> rows;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        auto fields = split_csv_line(line);
        if (!saw_header) {
            if (fields.size() < 2 || fields[0] != "sample_id")
                fail(ErrorKind::load,
                     path + ": expected a 'sample_id,<feature...>' header row");
            m.names.assign(fields.begin() + 1, fields.end());
            saw_header = true;
            continue;
        }
        if (fields.size() != m.names.size() + 1)
            fail(ErrorKind::load, path + ": line " + std::to_string(line_no) + " has " +
                                      std::to_string(fields.size()) + " fields, expected " +
                                      std::to_string(m.names.size() + 1));
        m.sample_ids.push_back(fields[0]);
        std::vector<double> row(m.names.size());
        for (size_t j = 0; j < m.names.size(); ++j)
            row[j] = parse_double(fields[j + 1], path + " " + m.names[j]);
        rows.push_back(std::move(row));
    }
    if (!saw_header || rows.empty())
        fail(ErrorKind::load, path + ": no feature rows");
    m.x = Matrix(rows.size(), m.names.size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < m.names.size(); ++j)
            m.x.at(i, j) = rows[i][j];
    return m;
}

void write_feature_csv(const FeatureMatrix& m, const std::string& path,
                       const std::map<std::string, std::string>& header_kv) {
    if (m.sample_ids.size() != m.x.rows || m.names.size() != m.x.cols)
        fail(ErrorKind::contract, "feature csv: shape mismatch");
    std::string text = kv_header(header_kv);
    text += "sample_id";
    for (const auto& n : m.names) {
        text += ",";
        text += n;
    }
    text += "\n";
    for (size_t i = 0; i < m.x.rows; ++i) {
        text += m.sample_ids[i];
        for (size_t j = 0; j < m.x.cols; ++j) {
            text += ",";
            text += format_double(m.x.at(i, j));
        }
        text += "\n";
    }
    atomic_write_text(path, text);
}

} // namespace soilrf
