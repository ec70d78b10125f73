#include "oac/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "oac/model.hpp"
#include "oac/parallel.hpp"
#include "oac/rng.hpp"

namespace oac {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void format_double(std::ofstream& out, double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

void check_spec(const SweepSpec& spec) {
    if (spec.trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
    if (spec.snr_grid_db.empty())
        throw std::invalid_argument("sweep: empty SNR grid");
    if (spec.estimators.empty())
        throw std::invalid_argument("sweep: empty estimator list");
    if (spec.packets.empty())
        throw std::invalid_argument("sweep: no packets to transmit");
    for (const SymbolBlock& p : spec.packets)
        if (p.sensors() != spec.base.M() || p.length() != spec.base.L())
            throw std::invalid_argument("sweep: packet does not match config");
    for (const std::string& name : spec.estimators) {
        if (std::find(estimator_names().begin(), estimator_names().end(),
                      name) == estimator_names().end())
            throw std::invalid_argument("sweep: unknown estimator \"" + name +
                                        "\"");
    }
}

SweepResult run_sweep_impl(const SweepSpec& spec, bool parallel) {
    check_spec(spec);
    PriorStats prior =
        spec.prior ? *spec.prior : empirical_prior(spec.packets);

    const int S = static_cast<int>(spec.snr_grid_db.size());
    const int T = spec.trials;
    const int E = static_cast<int>(spec.estimators.size());

    // One config per SNR point; tau and h stay fixed across the sweep.
    std::vector<ChannelConfig> cfgs;
    cfgs.reserve(S);
    for (double snr : spec.snr_grid_db)
        cfgs.emplace_back(spec.base.M(), spec.base.L(), spec.base.T(),
                          spec.base.tau(), spec.base.h(), snr);

    std::vector<TargetVector> truths;
    truths.reserve(spec.packets.size());
    for (const SymbolBlock& p : spec.packets)
        truths.push_back(sum_target(p, spec.func));

    SweepResult result;
    result.prior = prior;
    result.rows.resize(static_cast<std::size_t>(E) * S * T);

    EstimatorContext ctx;
    ctx.func = spec.func;
    ctx.prior = prior;
    ctx.wiener_reg = spec.wiener_reg;

    const int cells = S * T;
    #pragma omp parallel for num_threads(parallel ? worker_count() : 1) \
        schedule(dynamic)
    for (int cell = 0; cell < cells; ++cell) {
        const int s = cell / T;
        const int t = cell % T;
        const std::size_t packet_idx = t % spec.packets.size();
        const SymbolBlock& packet = spec.packets[packet_idx];
        const TargetVector& truth = truths[packet_idx];
        // Noise keyed by trial only: SNR points share the noise shape.
        const SampleVector y =
            apply_channel(cfgs[s], packet, derive_seed(spec.seed, t));

        for (int e = 0; e < E; ++e) {
            TrialResult& row =
                result.rows[(static_cast<std::size_t>(e) * S + s) * T + t];
            row.estimator = spec.estimators[e];
            row.snr_db = spec.snr_grid_db[s];
            row.trial = t;
            try {
                EstimatorOutput out =
                    run_estimator(spec.estimators[e], y, cfgs[s], ctx);
                row.mse = mse(out.s_plus_hat, truth);
                row.elapsed = out.elapsed;
            } catch (const EstimatorError& err) {
                row.mse = kNaN;
                row.error = err.what();
            } catch (const std::invalid_argument& err) {
                row.mse = kNaN;
                row.error = err.what();
            }
        }
    }
    return result;
}

}  // namespace

double mse(const TargetVector& a, const TargetVector& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("mse: length mismatch");
    if (a.size() == 0) throw std::invalid_argument("mse: empty vectors");
    return (a - b).squaredNorm() / static_cast<double>(a.size());
}

double estimation_snr_db(const TargetVector& est, const TargetVector& truth) {
    if (est.size() != truth.size())
        throw std::invalid_argument("estimation_snr_db: length mismatch");
    const double signal = truth.squaredNorm();
    if (signal == 0.0)
        throw std::invalid_argument("estimation_snr_db: all-zero truth");
    const double error = (est - truth).squaredNorm();
    if (error == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(signal / error);
}

SweepResult run_sweep(const SweepSpec& spec) {
    return run_sweep_impl(spec, true);
}

SweepResult run_sweep_serial(const SweepSpec& spec) {
    return run_sweep_impl(spec, false);
}

std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& rows) {
    // Cells appear in first-seen order, which for run_sweep output means
    // (estimator, snr) in the requested order.
    std::vector<AggregateRow> out;
    std::vector<std::vector<double>> values;
    for (const TrialResult& row : rows) {
        std::size_t idx = 0;
        for (; idx < out.size(); ++idx) {
            if (out[idx].estimator == row.estimator &&
                out[idx].snr_db == row.snr_db)
                break;
        }
        if (idx == out.size()) {
            AggregateRow agg;
            agg.estimator = row.estimator;
            agg.snr_db = row.snr_db;
            out.push_back(agg);
            values.emplace_back();
        }
        if (row.error.empty() && std::isfinite(row.mse)) {
            values[idx].push_back(row.mse);
            out[idx].trials_ok += 1;
        } else {
            out[idx].trials_failed += 1;
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::vector<double>& v = values[i];
        if (v.empty()) {
            out[i].mean_mse = kNaN;
            out[i].se_mse = kNaN;
            out[i].median_mse = kNaN;
            continue;
        }
        const double n = static_cast<double>(v.size());
        double sum = 0.0;
        for (double x : v) sum += x;
        const double mean = sum / n;
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        out[i].mean_mse = mean;
        out[i].se_mse = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
        std::sort(v.begin(), v.end());
        const std::size_t mid = v.size() / 2;
        out[i].median_mse = v.size() % 2 == 1
                                ? v[mid]
                                : 0.5 * (v[mid - 1] + v[mid]);
    }
    return out;
}

void write_results_csv(const std::vector<TrialResult>& rows,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "estimator,snr_db,trial,mse,elapsed_us\n";
    for (const TrialResult& row : rows) {
        out << row.estimator << ',';
        format_double(out, row.snr_db);
        out << ',' << row.trial << ',';
        format_double(out, row.mse);
        out << ',' << row.elapsed.count() / 1000 << '\n';
    }
}

void write_aggregate_csv(const std::vector<AggregateRow>& rows,
                         const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "estimator,snr_db,mean_mse,se_mse,median_mse\n";
    for (const AggregateRow& row : rows) {
        out << row.estimator << ',';
        format_double(out, row.snr_db);
        out << ',';
        format_double(out, row.mean_mse);
        out << ',';
        format_double(out, row.se_mse);
        out << ',';
        format_double(out, row.median_mse);
        out << '\n';
    }
}

std::vector<TimingRow> time_estimator(const std::string& name,
                                      const std::vector<TimingPoint>& grid,
                                      int reps, std::uint64_t seed,
                                      double budget_s) {
    if (reps < 1) throw std::invalid_argument("time_estimator: reps must be >= 1");
    if (grid.empty()) throw std::invalid_argument("time_estimator: empty grid");

    std::vector<TimingRow> table;
    table.reserve(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const int M = grid[g].M;
        const int L = grid[g].L;
        TimingRow row;
        row.M = M;
        row.L = L;

        // Deterministic synthetic round: evenly spaced delays, unit-modulus
        // gains with spread phases, uniform positive symbols.
        std::vector<double> tau(M);
        std::vector<std::complex<double>> h(M);
        for (int m = 0; m < M; ++m) {
            tau[m] = static_cast<double>(m) / M;
            const double phase = M > 1 ? M_PI * m / (2.0 * (M - 1)) : 0.0;
            h[m] = std::polar(1.0, phase);
        }
        ChannelConfig cfg(M, L, 1.0, std::move(tau), std::move(h), 10.0);

        Rng rng(derive_seed(seed, g));
        Eigen::MatrixXd values(M, L);
        for (int l = 0; l < L; ++l)
            for (int m = 0; m < M; ++m) values(m, l) = rng.uniform(0.0, 10.0);
        SymbolBlock packet(std::move(values));
        const SampleVector y =
            apply_channel(cfg, packet, derive_seed(seed, g, 1));

        EstimatorContext ctx;
        ctx.func = OacFunction::Average;
        ctx.prior = empirical_prior({packet});

        std::vector<double> times;
        try {
            // Warmup, excluded from the statistics unless it already blows
            // the budget (then it stands as the single measurement).
            EstimatorOutput warm = run_estimator(name, y, cfg, ctx);
            const double warm_s = std::chrono::duration<double>(warm.elapsed).count();
            if (warm_s > budget_s) {
                times.push_back(warm_s);
            } else {
                double total = 0.0;
                for (int r = 0; r < reps; ++r) {
                    EstimatorOutput out = run_estimator(name, y, cfg, ctx);
                    const double sec =
                        std::chrono::duration<double>(out.elapsed).count();
                    times.push_back(sec);
                    total += sec;
                    if (total > budget_s) break;
                }
            }
        } catch (const EstimatorError& err) {
            row.error = err.what();
        } catch (const std::invalid_argument& err) {
            row.error = err.what();
        }

        if (times.empty()) {
            row.median_s = kNaN;
            row.mean_s = kNaN;
            row.bytes_per_s = kNaN;
        } else {
            row.reps = static_cast<int>(times.size());
            double total = 0.0;
            for (double t : times) total += t;
            row.mean_s = total / times.size();
            std::sort(times.begin(), times.end());
            const std::size_t mid = times.size() / 2;
            row.median_s = times.size() % 2 == 1
                               ? times[mid]
                               : 0.5 * (times[mid - 1] + times[mid]);
            row.bytes_per_s = 4.0 * M * L / row.median_s;
        }
        table.push_back(std::move(row));
    }
    return table;
}

void write_timing_csv(const std::vector<TimingRow>& rows,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "M,L,reps,median_s,mean_s,bytes_per_s,error\n";
    for (const TimingRow& row : rows) {
        out << row.M << ',' << row.L << ',' << row.reps << ',';
        format_double(out, row.median_s);
        out << ',';
        format_double(out, row.mean_s);
        out << ',';
        format_double(out, row.bytes_per_s);
        std::string err = row.error;
        std::replace(err.begin(), err.end(), ',', ';');
        out << ',' << err << '\n';
    }
}

double fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (const auto& [x, y] : points) {
        if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
            continue;
        const double lx = std::log(x);
        const double ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return kNaN;
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return kNaN;
    return (n * sxy - sx * sy) / denom;
}

}  // namespace oac
