// SPDX-License-Identifier: MIT
#include "soilrf/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "soilrf/error.hpp"
#include "soilrf/units.hpp"
#include "soilrf/util.hpp"

#include "rng.hpp"

namespace soilrf {

const char* sweep_action_name(SweepAction a) {
    switch (a) {
    case SweepAction::collected: return "collected";
    case SweepAction::recollected: return "recollected";
    case SweepAction::skipped: return "skipped";
    }
    fail(ErrorKind::contract, "unknown sweep action");
}

namespace {

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey.
void fft_inplace(std::vector<std::complex<double>>& a) {
    size_t n = a.size();
    // bit-reversal permutation
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = -2.0 * M_PI / static_cast<double>(len);
        std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

size_t tone_bin_for(size_t fft_size) { return kToneBin % fft_size; }

void fill_tone_block(std::vector<std::complex<double>>& out, size_t n,
                     double amplitude, double noise_sigma, Rng* rng) {
    out.resize(n);
    size_t bin = tone_bin_for(n);
    double w = 2.0 * M_PI * static_cast<double>(bin) / static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
        double ph = w * static_cast<double>(i);
        std::complex<double> v(amplitude * std::cos(ph), amplitude * std::sin(ph));
        if (noise_sigma > 0.0 && rng) {
            double s = noise_sigma / std::sqrt(2.0);
            v += std::complex<double>(s * rng->gaussian(), s * rng->gaussian());
        }
        out[i] = v;
    }
}

} // namespace

double fft_power_estimate(const std::vector<std::complex<double>>& block,
                          size_t fft_size) {
    if (!is_pow2(fft_size) || fft_size < 2)
        fail(ErrorKind::contract, "fft: size must be a power of two >= 2");
    if (block.size() != fft_size)
        fail(ErrorKind::contract,
             "fft: block has " + std::to_string(block.size()) + " samples, expected " +
                 std::to_string(fft_size));
    std::vector<std::complex<double>> work = block;
    fft_inplace(work);
    double best = 0.0;
    for (const auto& v : work)
        best = std::max(best, std::norm(v));
    if (best <= 0.0)
        return kSilenceFloorDbm;
    // A bin-centered tone of amplitude a piles a*N into its bin; dividing by
    // N^2 recovers |a|^2, the tone power in mW (1.0 -> 0 dBm).
    double mw = best / (static_cast<double>(fft_size) * static_cast<double>(fft_size));
    return mw_to_dbm(mw);
}

PointEstimate estimate_point(SampleStream& stream, const SweepConfig& config) {
    if (config.avg_points < 2)
        fail(ErrorKind::config, "sweep: avg_points must be >= 2 for a spread estimate");
    std::vector<std::complex<double>> block;
    size_t n = config.avg_points;
    std::vector<double> powers(n);
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        stream.next_block(block, config.fft_size);
        powers[i] = fft_power_estimate(block, config.fft_size);
        sum += powers[i];
    }
    double mean = sum / static_cast<double>(n);
    // Two-pass variance: the one-pass form cancels catastrophically for a
    // steady tone and would report a phantom spread against the dB-scale
    // stability threshold.
    double ss = 0.0;
    for (double p : powers)
        ss += (p - mean) * (p - mean);
    PointEstimate out;
    out.power_dbm = mean;
    out.std_dbm = std::sqrt(ss / (static_cast<double>(n) - 1.0));
    return out;
}

std::pair<Spectrum, SweepTrace> run_sweep(SampleStream& stream, const SweepConfig& config,
                                          uint64_t seed) {
    if (config.max_retries < 1)
        fail(ErrorKind::config, "sweep: max_retries must be >= 1");
    Spectrum s;
    s.band_label = config.band.label;
    s.start_mhz = config.band.start_mhz;
    s.step_mhz = config.step_mhz;
    s.provenance.kind = "acquired";
    s.provenance.seed = seed;
    s.provenance.note = "threshold-gated sweep";
    s.provenance.config_hash = to_hex(fnv1a64(
        config.band.label + "|" + format_double(config.band.start_mhz) + "|" +
        format_double(config.band.end_mhz) + "|" + format_double(config.step_mhz) + "|" +
        std::to_string(config.fft_size) + "|" + std::to_string(config.avg_points) + "|" +
        format_double(config.std_threshold_dbm) + "|" + std::to_string(config.max_retries)));

    SweepTrace trace;
    for (double f : band_grid(config.band, config.step_mhz)) {
        stream.tune(f);
        int failures = 0;
        for (int attempt = 1;; ++attempt) {
            PointEstimate est = estimate_point(stream, config);
            if (est.std_dbm <= config.std_threshold_dbm) {
                trace.events.push_back(
                    {f, SweepAction::collected, attempt, est.power_dbm, est.std_dbm});
                s.freqs_mhz.push_back(f);
                s.power_dbm.push_back(est.power_dbm);
                break;
            }
            ++failures;
            if (failures >= config.max_retries) {
                // The final failed estimate is discarded along with the rest.
                trace.events.push_back({f, SweepAction::skipped, attempt, 0.0, 0.0});
                trace.skipped_freqs_mhz.push_back(f);
                break;
            }
            trace.events.push_back(
                {f, SweepAction::recollected, attempt, 0.0, est.std_dbm});
        }
    }
    s.validate();
    return {std::move(s), std::move(trace)};
}

SimulatedToneStream::SimulatedToneStream(const TransmitConfig& config,
                                         const PathGeometry& path, const MediumMap& media,
                                         double noise_sigma, uint64_t seed,
                                         size_t fft_size)
    : config_(config), path_(path), media_(media), noise_sigma_(noise_sigma),
      seed_(seed), fft_size_(fft_size) {
    if (noise_sigma < 0.0)
        fail(ErrorKind::config, "tone stream: noise sigma must be >= 0");
    if (!is_pow2(fft_size) || fft_size < 2)
        fail(ErrorKind::config, "tone stream: fft size must be a power of two >= 2");
}

void SimulatedToneStream::tune(double f_mhz) {
    double p_dbm = received_power_dbm(config_, path_, media_, f_mhz);
    amplitude_ = std::sqrt(dbm_to_mw(p_dbm));
    uint64_t bits;
    double f = f_mhz;
    std::memcpy(&bits, &f, sizeof(bits));
    freq_key_ = bits;
    block_index_ = 0;
}

void SimulatedToneStream::next_block(std::vector<std::complex<double>>& out, size_t n) {
    if (n != fft_size_)
        fail(ErrorKind::contract, "tone stream: block size mismatch");
    Rng rng(mix64(mix64(seed_, freq_key_), block_index_));
    fill_tone_block(out, n, amplitude_, noise_sigma_, noise_sigma_ > 0.0 ? &rng : nullptr);
    ++block_index_;
}

ScriptedStream::ScriptedStream(std::map<double, std::vector<Step>> script,
                               size_t avg_points)
    : script_(std::move(script)), avg_points_(avg_points) {
    if (avg_points_ < 1)
        fail(ErrorKind::config, "scripted stream: avg_points must be >= 1");
}

void ScriptedStream::tune(double f_mhz) {
    tuned_ = f_mhz;
    blocks_at_tuned_ = 0;
}

void ScriptedStream::next_block(std::vector<std::complex<double>>& out, size_t n) {
    auto it = script_.find(tuned_);
    if (it == script_.end())
        fail(ErrorKind::contract,
             "scripted stream: no script for " + format_double(tuned_) + " MHz");
    size_t step_index = blocks_at_tuned_ / avg_points_;
    if (step_index >= it->second.size())
        fail(ErrorKind::contract,
             "scripted stream: script exhausted at " + format_double(tuned_) + " MHz");
    const Step& step = it->second[step_index];
    double p_dbm = step.power_dbm;
    if (step.unstable)
        p_dbm += (blocks_at_tuned_ % 2 == 0) ? 1.0 : -1.0;
    fill_tone_block(out, n, std::sqrt(dbm_to_mw(p_dbm)), 0.0, nullptr);
    ++blocks_at_tuned_;
}

void write_trace_csv(const SweepTrace& trace, const std::string& path,
                     const std::map<std::string, std::string>& header_kv) {
    std::string text = kv_header(header_kv);
    text += "freq_mhz,action,attempt,power_dbm,std_dbm\n";
    for (const auto& e : trace.events) {
        text += format_double(e.freq_mhz);
        text += ",";
        text += sweep_action_name(e.action);
        text += ",";
        text += std::to_string(e.attempt);
        text += ",";
        if (e.action == SweepAction::collected)
            text += format_double(e.power_dbm);
        text += ",";
        if (e.action != SweepAction::skipped)
            text += format_double(e.std_dbm);
        text += "\n";
    }
    atomic_write_text(path, text);
}

} // namespace soilrf
