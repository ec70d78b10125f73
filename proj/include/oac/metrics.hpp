#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oac/channel.hpp"
#include "oac/estimators.hpp"
#include "oac/packet.hpp"

namespace oac {

// Mean squared error between two equal-length target vectors.
double mse(const TargetVector& a, const TargetVector& b);

// 10*log10(signal energy / error energy).  Equal vectors give +infinity;
// an all-zero truth is rejected.
double estimation_snr_db(const TargetVector& est, const TargetVector& truth);

struct TrialResult {
    std::string estimator;
    double snr_db = 0.0;
    int trial = 0;  // also the packet id within the sweep's packet list
    double mse = 0.0;
    std::chrono::nanoseconds elapsed{0};
    std::string error;  // nonempty when the estimator failed; mse is NaN
};

struct SweepSpec {
    ChannelConfig base;  // snr_db is overridden by each grid point
    std::vector<double> snr_grid_db;
    std::vector<std::string> estimators;
    int trials = 1;
    std::vector<SymbolBlock> packets;  // trial t uses packets[t % size]
    OacFunction func = OacFunction::Average;
    std::uint64_t seed = 0;
    std::optional<PriorStats> prior;  // default: empirical over packets
    std::optional<double> wiener_reg;
};

struct SweepResult {
    std::vector<TrialResult> rows;  // ordered by (estimator, snr, trial)
    PriorStats prior;               // the prior handed to lmmse
};

// Monte-Carlo sweep.  Noise draws depend only on (seed, trial), so every
// SNR point of a trial sees the same noise shape scaled to its level, and
// every estimator of a cell sees the same samples.  The parallel and serial
// versions fill identical result slots.
SweepResult run_sweep(const SweepSpec& spec);
SweepResult run_sweep_serial(const SweepSpec& spec);

struct AggregateRow {
    std::string estimator;
    double snr_db = 0.0;
    double mean_mse = 0.0;
    double se_mse = 0.0;
    double median_mse = 0.0;
    int trials_ok = 0;
    int trials_failed = 0;
};

// Per-cell mean, standard error of the mean, and median over the successful
// trials; failures are counted, never silently dropped.
std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& rows);

void write_results_csv(const std::vector<TrialResult>& rows,
                       const std::string& path);
void write_aggregate_csv(const std::vector<AggregateRow>& rows,
                         const std::string& path);

struct TimingPoint {
    int M = 0;
    int L = 0;
};

struct TimingRow {
    int M = 0;
    int L = 0;
    int reps = 0;             // measured repetitions (excluding warmup)
    double median_s = 0.0;
    double mean_s = 0.0;
    double bytes_per_s = 0.0;  // payload M*L*4 bytes over the median time
    std::string error;
};

// Times one estimator across a grid of problem sizes on synthetic packets.
// One warmup repetition is excluded; when a single repetition exceeds the
// per-point budget the measured repetition count shrinks (never below one)
// so that huge grid points stay runnable.
std::vector<TimingRow> time_estimator(const std::string& name,
                                      const std::vector<TimingPoint>& grid,
                                      int reps, std::uint64_t seed,
                                      double budget_s = 120.0);

void write_timing_csv(const std::vector<TimingRow>& rows,
                      const std::string& path);

// Least-squares slope of log(y) against log(x); NaN with fewer than two
// usable points.
double fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

}  // namespace oac
