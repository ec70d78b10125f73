#include "oac/waveform.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "oac/parallel.hpp"
#include "oac/rng.hpp"

namespace oac {

namespace {

void check_waveform(const Waveform& w, const ChannelConfig& cfg) {
    const Eigen::Index expect =
        static_cast<Eigen::Index>(w.oversample) * (cfg.L() + 1);
    if (w.oversample < 1 || w.samples.size() != expect)
        throw std::invalid_argument("waveform does not match channel size");
}

Waveform synthesize_impl(const ChannelConfig& cfg, const SymbolBlock& block,
                         int Q, bool parallel) {
    if (block.sensors() != cfg.M() || block.length() != cfg.L())
        throw std::invalid_argument("symbol block does not match channel size");
    const std::vector<int> bins = delay_bins(cfg, Q);
    const int M = cfg.M();
    const int L = cfg.L();
    const Eigen::Index total = static_cast<Eigen::Index>(Q) * (L + 1);

    Waveform w;
    w.dt = cfg.T() / Q;
    w.oversample = Q;
    w.samples.resize(total);

    const Eigen::MatrixXd& s = block.values();
    const auto& h = cfg.h();
    // Per-bin accumulation in fixed sensor order keeps the serial and
    // parallel paths bitwise identical.
    #pragma omp parallel for num_threads(parallel ? worker_count() : 1) \
        schedule(static)
    for (Eigen::Index t = 0; t < total; ++t) {
        std::complex<double> acc = 0.0;
        for (int m = 0; m < M; ++m) {
            if (t < bins[m]) continue;
            const Eigen::Index l = (t - bins[m]) / Q;
            if (l < L) acc += h[m] * s(m, l);
        }
        w.samples[t] = acc;
    }
    return w;
}

SampleVector wmfs_impl(const Waveform& w, const ChannelConfig& cfg,
                       bool parallel) {
    check_waveform(w, cfg);
    const int Q = w.oversample;
    const std::vector<int> bins = delay_bins(cfg, Q);
    const int M = cfg.M();
    const int N = cfg.sample_count();

    SampleVector y(N);
    #pragma omp parallel for num_threads(parallel ? worker_count() : 1) \
        schedule(static)
    for (int idx = 0; idx < N; ++idx) {
        const int i = idx / M;
        const int m = idx % M;
        const Eigen::Index lo = static_cast<Eigen::Index>(i) * Q + bins[m];
        const Eigen::Index hi =
            static_cast<Eigen::Index>(i) * Q + (m + 1 < M ? bins[m + 1] : Q);
        std::complex<double> acc = 0.0;
        for (Eigen::Index t = lo; t < hi; ++t) acc += w.samples[t];
        y[idx] = acc / static_cast<double>(hi - lo);
    }
    return y;
}

}  // namespace

std::vector<int> delay_bins(const ChannelConfig& cfg, int oversample) {
    if (oversample < 1)
        throw std::invalid_argument("oversample factor must be positive");
    const double dt = cfg.T() / oversample;
    std::vector<int> bins(cfg.M());
    for (int m = 0; m < cfg.M(); ++m)
        bins[m] = static_cast<int>(std::llround(cfg.tau()[m] / dt));
    for (int m = 1; m < cfg.M(); ++m) {
        if (bins[m] <= bins[m - 1])
            throw std::invalid_argument(
                "oversample grid too coarse: two delays share a bin");
    }
    if (bins.back() >= oversample)
        throw std::invalid_argument(
            "oversample grid too coarse: last delay reaches the period end");
    return bins;
}

Waveform synthesize(const ChannelConfig& cfg, const SymbolBlock& block,
                    int oversample) {
    return synthesize_impl(cfg, block, oversample, true);
}

Waveform synthesize_serial(const ChannelConfig& cfg, const SymbolBlock& block,
                           int oversample) {
    return synthesize_impl(cfg, block, oversample, false);
}

SampleVector wmfs_sample(const Waveform& w, const ChannelConfig& cfg) {
    return wmfs_impl(w, cfg, true);
}

SampleVector wmfs_sample_serial(const Waveform& w, const ChannelConfig& cfg) {
    return wmfs_impl(w, cfg, false);
}

Waveform add_waveform_noise(const Waveform& w, double N0, std::uint64_t seed) {
    if (N0 < 0.0 || !std::isfinite(N0))
        throw std::invalid_argument("noise density must be finite and >= 0");
    Waveform noisy = w;
    if (N0 == 0.0) return noisy;
    if (w.dt <= 0.0) throw std::invalid_argument("waveform has no bin width");
    Rng rng(seed);
    const double sigma2 = N0 / w.dt;
    for (Eigen::Index t = 0; t < noisy.samples.size(); ++t)
        noisy.samples[t] += rng.complex_gaussian(sigma2);
    return noisy;
}

void write_waveform_csv(const Waveform& w, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "t,re,im\n";
    char buf[96];
    for (Eigen::Index t = 0; t < w.samples.size(); ++t) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", t * w.dt,
                      w.samples[t].real(), w.samples[t].imag());
        out << buf << '\n';
    }
}

}  // namespace oac
