// SPDX-License-Identifier: MIT
//
// Frequency-sweep acquisition controller: at each grid frequency it averages
// FFT tone-power estimates over a fixed number of sample blocks, accepts the
// point when the estimate spread is below a stability threshold, retries
// otherwise, and skips the frequency after a run of consecutive failures.
#ifndef SOILRF_SWEEP_HPP
#define SOILRF_SWEEP_HPP

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "soilrf/propagation.hpp"

namespace soilrf {

struct SweepConfig {
    Band band = kLowBand;
    double step_mhz = kDefaultStepMhz;
    size_t fft_size = 1024;         // power of two
    size_t avg_points = 100;        // estimates averaged per point, >= 2
    double std_threshold_dbm = 0.02; // accept when sample std <= threshold
    int max_retries = 5;             // consecutive failures before skip
};

enum class SweepAction { collected, recollected, skipped };

const char* sweep_action_name(SweepAction a);

// One controller decision. `attempt` is the 1-based estimate index at that
// frequency. Power is only meaningful for collected events; std for
// collected and recollected ones.
struct SweepEvent {
    double freq_mhz = 0.0;
    SweepAction action = SweepAction::collected;
    int attempt = 0;
    double power_dbm = 0.0;
    double std_dbm = 0.0;
};

struct SweepTrace {
    std::vector<SweepEvent> events;
    std::vector<double> skipped_freqs_mhz;
};

// Source of complex baseband sample blocks for a tunable carrier.
class SampleStream {
public:
    virtual ~SampleStream() = default;
    virtual void tune(double f_mhz) = 0;
    // Fills exactly `n` samples. Throws Error{contract} when the stream
    // cannot produce another block (exhausted script, closed device).
    virtual void next_block(std::vector<std::complex<double>>& out, size_t n) = 0;
};

// Reported instead of -infinity when a block carries no energy at all.
inline constexpr double kSilenceFloorDbm = -300.0;

// FFT bin the simulated test tone is centered on (~100 kHz at 1 MS/s, 1024).
inline constexpr size_t kToneBin = 102;

// dBm of the strongest FFT bin of one block, normalized so that a pure
// unit-amplitude bin-centered tone reports its total signal power (1 mW ->
// 0 dBm). Block length must equal fft_size and be a power of two.
double fft_power_estimate(const std::vector<std::complex<double>>& block,
                          size_t fft_size);

struct PointEstimate {
    double power_dbm = 0.0;
    double std_dbm = 0.0; // sample standard deviation (n-1 denominator)
};

// Mean and spread of avg_points consecutive block estimates at the stream's
// current tuning.
PointEstimate estimate_point(SampleStream& stream, const SweepConfig& config);

// Full sweep over the band grid. Per frequency: estimate; spread above the
// threshold counts one failure (a `recollected` event) and the estimate is
// re-taken; the max_retries-th consecutive failure emits `skipped` instead
// and the frequency is dropped, partial estimates discarded. A success emits
// `collected`, resets the failure count and advances. The returned spectrum
// holds collected frequencies only.
std::pair<Spectrum, SweepTrace> run_sweep(SampleStream& stream,
                                          const SweepConfig& config,
                                          uint64_t seed);

// Deterministic synthetic stream: a complex tone at kToneBin whose amplitude
// at each tuned frequency matches a simulated received power, plus optional
// per-sample complex Gaussian noise. Blocks depend only on (seed, frequency,
// block index), so re-tuning to a frequency replays the same data.
class SimulatedToneStream : public SampleStream {
public:
    SimulatedToneStream(const TransmitConfig& config, const PathGeometry& path,
                        const MediumMap& media, double noise_sigma,
                        uint64_t seed, size_t fft_size);
    void tune(double f_mhz) override;
    void next_block(std::vector<std::complex<double>>& out, size_t n) override;

private:
    TransmitConfig config_;
    PathGeometry path_;
    MediumMap media_;
    double noise_sigma_;
    uint64_t seed_;
    size_t fft_size_;
    double amplitude_ = 0.0;
    uint64_t freq_key_ = 0;
    uint64_t block_index_ = 0;
};

// Test stream driven by a script: per frequency, a list of estimate steps,
// each either stable (constant tone) or unstable (tone power alternating
// +/-1 dB between blocks, which defeats any sub-dB stability threshold).
// The stream advances one step per estimate, i.e. every avg_points blocks.
class ScriptedStream : public SampleStream {
public:
    struct Step {
        double power_dbm = 0.0;
        bool unstable = false;
    };

    ScriptedStream(std::map<double, std::vector<Step>> script, size_t avg_points);
    void tune(double f_mhz) override;
    void next_block(std::vector<std::complex<double>>& out, size_t n) override;

private:
    std::map<double, std::vector<Step>> script_;
    size_t avg_points_;
    double tuned_ = 0.0;
    size_t blocks_at_tuned_ = 0;
};

// Trace log: CSV "freq_mhz,action,attempt,power_dbm,std_dbm" after "# k=v"
// header lines. Power/std cells are left empty where not meaningful.
void write_trace_csv(const SweepTrace& trace, const std::string& path,
                     const std::map<std::string, std::string>& header_kv);

} // namespace soilrf

#endif
