#include "oac/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oac/rng.hpp"

namespace oac {

namespace {

void check_block(const ChannelConfig& cfg, const SymbolBlock& block) {
    if (block.sensors() != cfg.M() || block.length() != cfg.L())
        throw std::invalid_argument("symbol block does not match channel size");
}

}  // namespace

Eigen::MatrixXcd build_D(const ChannelConfig& cfg) {
    const int M = cfg.M();
    const int L = cfg.L();
    const int N = cfg.sample_count();
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(N, M * L);
    for (int i = 0; i <= L; ++i) {
        for (int m = 0; m < M; ++m) {
            const int row = i * M + m;
            if (row >= N) break;
            for (int k = 0; k < M; ++k) {
                const int l = i - (k > m ? 1 : 0);
                if (l < 0 || l >= L) continue;
                D(row, interleaved_index(k, l, M)) = cfg.h()[k];
            }
        }
    }
    return D;
}

ConvolutionalForm decompose_convolutional(const ChannelConfig& cfg) {
    const int M = cfg.M();
    const int L = cfg.L();
    ConvolutionalForm form;
    form.kernel = Eigen::VectorXd::Ones(M);
    form.gain_diag.resize(M * L);
    for (int l = 0; l < L; ++l)
        for (int k = 0; k < M; ++k)
            form.gain_diag[interleaved_index(k, l, M)] = cfg.h()[k];
    return form;
}

Eigen::VectorXcd convolve_ones(int M, const Eigen::VectorXcd& x) {
    if (M < 1) throw std::invalid_argument("convolve_ones: M must be positive");
    const Eigen::Index n = x.size();
    Eigen::VectorXcd out(n + M - 1);
    // Direct window sums: M is small, and re-summing each window avoids the
    // drift a running add/subtract accumulator picks up on long vectors.
    for (Eigen::Index r = 0; r < out.size(); ++r) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, r - M + 1);
        const Eigen::Index hi = std::min<Eigen::Index>(n - 1, r);
        std::complex<double> acc = 0.0;
        for (Eigen::Index j = lo; j <= hi; ++j) acc += x[j];
        out[r] = acc;
    }
    return out;
}

NoiseLevel noise_sigma(const ChannelConfig& cfg, const SymbolBlock& block) {
    check_block(cfg, block);
    NoiseLevel level;
    level.symbol_energy = block.values().array().square().mean();
    level.degenerate = false;
    if (cfg.noiseless()) {
        level.sigma2 = 0.0;
    } else if (level.symbol_energy == 0.0) {
        level.sigma2 = 0.0;
        level.degenerate = true;
    } else {
        level.sigma2 =
            level.symbol_energy / std::pow(10.0, cfg.snr_db() / 10.0);
    }
    return level;
}

SampleVector clean_channel_output(const ChannelConfig& cfg,
                                  const SymbolBlock& block) {
    check_block(cfg, block);
    ConvolutionalForm form = decompose_convolutional(cfg);
    Eigen::VectorXcd scaled =
        form.gain_diag.array() * flatten(block).array();
    return convolve_ones(cfg.M(), scaled);
}

SampleVector add_sample_noise(const SampleVector& clean, double sigma2,
                              std::uint64_t seed) {
    if (sigma2 < 0.0 || !std::isfinite(sigma2))
        throw std::invalid_argument("noise variance must be finite and >= 0");
    SampleVector y = clean;
    if (sigma2 == 0.0) return y;
    Rng rng(seed);
    const double scale = std::sqrt(sigma2);
    for (Eigen::Index i = 0; i < y.size(); ++i)
        y[i] += scale * rng.complex_gaussian(1.0);
    return y;
}

SampleVector apply_channel(const ChannelConfig& cfg, const SymbolBlock& block,
                           std::uint64_t seed) {
    const NoiseLevel level = noise_sigma(cfg, block);
    return add_sample_noise(clean_channel_output(cfg, block), level.sigma2,
                            seed);
}

}  // namespace oac
