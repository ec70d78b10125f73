// Compares the OpenMP kernels against their serial reference twins:
// waveform synthesis, WMFS sampling, and a small Monte-Carlo sweep.
// Outputs are checked bitwise so a speedup never hides a divergence.

#include <chrono>
#include <cstdio>
#include <vector>

#include "oac/channel.hpp"
#include "oac/dataio.hpp"
#include "oac/metrics.hpp"
#include "oac/packet.hpp"
#include "oac/parallel.hpp"
#include "oac/rng.hpp"
#include "oac/waveform.hpp"

namespace {

double seconds(std::chrono::steady_clock::time_point t0,
               std::chrono::steady_clock::time_point t1) {
    return std::chrono::duration<double>(t1 - t0).count();
}

oac::ChannelConfig make_config(int M, int L) {
    std::vector<double> tau(M);
    std::vector<std::complex<double>> h(M);
    for (int m = 0; m < M; ++m) {
        tau[m] = static_cast<double>(m) / M;
        h[m] = std::polar(1.0, M > 1 ? M_PI * m / (2.0 * (M - 1)) : 0.0);
    }
    return oac::ChannelConfig(M, L, 1.0, tau, h, 10.0);
}

oac::SymbolBlock make_block(int M, int L, std::uint64_t seed) {
    Eigen::MatrixXd values(M, L);
    oac::Rng rng(seed);
    for (int m = 0; m < M; ++m)
        for (int l = 0; l < L; ++l) values(m, l) = rng.uniform(0.0, 10.0);
    return oac::SymbolBlock(values);
}

template <typename F>
double best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, seconds(t0, t1));
    }
    return best;
}

}  // namespace

int main() {
    std::printf("workers: %d\n\n", oac::worker_count());
    std::printf("%-14s %8s %8s %10s %10s %8s %s\n", "kernel", "M", "L",
                "serial_s", "omp_s", "speedup", "bitwise");

    const int M = 8;
    const int Q = 256;
    for (int L : {256, 1024, 4096}) {
        const oac::ChannelConfig cfg = make_config(M, L);
        const oac::SymbolBlock s = make_block(M, L, 42);

        oac::Waveform w_serial = oac::synthesize_serial(cfg, s, Q);
        oac::Waveform w_par = oac::synthesize(cfg, s, Q);
        const bool synth_same = w_serial.samples == w_par.samples;
        const double t_ser =
            best_of(3, [&] { w_serial = oac::synthesize_serial(cfg, s, Q); });
        const double t_par =
            best_of(3, [&] { w_par = oac::synthesize(cfg, s, Q); });
        std::printf("%-14s %8d %8d %10.4f %10.4f %8.2f %s\n", "synthesize", M,
                    L, t_ser, t_par, t_ser / t_par,
                    synth_same ? "yes" : "NO");

        oac::SampleVector y_serial = oac::wmfs_sample_serial(w_par, cfg);
        oac::SampleVector y_par = oac::wmfs_sample(w_par, cfg);
        const bool wmfs_same = y_serial == y_par;
        const double s_ser =
            best_of(3, [&] { y_serial = oac::wmfs_sample_serial(w_par, cfg); });
        const double s_par =
            best_of(3, [&] { y_par = oac::wmfs_sample(w_par, cfg); });
        std::printf("%-14s %8d %8d %10.4f %10.4f %8.2f %s\n", "wmfs_sample", M,
                    L, s_ser, s_par, s_ser / s_par, wmfs_same ? "yes" : "NO");
    }

    {
        const int m = 4, l = 32, trials = 64;
        std::vector<oac::SymbolBlock> packets;
        for (int i = 0; i < 8; ++i) packets.push_back(make_block(m, l, 100 + i));
        oac::SweepSpec spec{make_config(m, l),
                            {-10.0, 0.0, 10.0},
                            {"aligned", "wiener", "ls"},
                            trials,
                            packets,
                            oac::OacFunction::Average,
                            7,
                            std::nullopt,
                            std::nullopt};
        oac::SweepResult serial = oac::run_sweep_serial(spec);
        oac::SweepResult par = oac::run_sweep(spec);
        bool same = serial.rows.size() == par.rows.size();
        for (std::size_t i = 0; same && i < serial.rows.size(); ++i)
            same = serial.rows[i].mse == par.rows[i].mse ||
                   (std::isnan(serial.rows[i].mse) && std::isnan(par.rows[i].mse));
        const double t_ser = best_of(1, [&] { serial = oac::run_sweep_serial(spec); });
        const double t_par = best_of(1, [&] { par = oac::run_sweep(spec); });
        std::printf("%-14s %8d %8d %10.4f %10.4f %8.2f %s\n", "run_sweep", m,
                    l, t_ser, t_par, t_ser / t_par, same ? "yes" : "NO");
    }
    return 0;
}
