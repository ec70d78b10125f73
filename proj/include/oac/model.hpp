#pragma once

#include <cstdint>

#include "oac/channel.hpp"
#include "oac/packet.hpp"

namespace oac {

// Mixing matrix of the sampled misaligned sum, size M(L+1)-1 by M*L.
// Row i*M + m holds gain h[k] at column (i - [k > m])*M + k whenever that
// symbol index lies in [0, L).  Dense; intended for the direct solvers and
// for oracle checks, not for large rounds.
Eigen::MatrixXcd build_D(const ChannelConfig& cfg);

// Equivalent factored form: D*s equals the linear convolution of the
// length-M all-ones kernel with the gain-scaled interleaved symbols.
struct ConvolutionalForm {
    Eigen::VectorXd kernel;      // length M, all ones
    Eigen::VectorXcd gain_diag;  // length M*L, h[k] at entry l*M + k
};

ConvolutionalForm decompose_convolutional(const ChannelConfig& cfg);

// Linear convolution with the length-M all-ones kernel; output length
// x.size() + M - 1.  Runs in O(output) via a sliding window sum.
Eigen::VectorXcd convolve_ones(int M, const Eigen::VectorXcd& x);

// Per-round noise power.  Symbol energy is the mean squared symbol over the
// whole block; sigma2 = energy / 10^(snr_db / 10).  An all-zero block under
// finite SNR has no defined scale: sigma2 is forced to 0 and the result is
// flagged degenerate.
struct NoiseLevel {
    double symbol_energy;
    double sigma2;
    bool degenerate;
};

NoiseLevel noise_sigma(const ChannelConfig& cfg, const SymbolBlock& block);

// D*s without noise, computed through the factored form.
SampleVector clean_channel_output(const ChannelConfig& cfg,
                                  const SymbolBlock& block);

// Adds iid circularly-symmetric complex Gaussian noise of variance sigma2
// per sample.  Unit draws are scaled afterwards, so callers that differ
// only in sigma2 see identically shaped noise.
SampleVector add_sample_noise(const SampleVector& clean, double sigma2,
                              std::uint64_t seed);

// Full channel: clean output plus sample noise at the level noise_sigma
// derives from the config and block.
SampleVector apply_channel(const ChannelConfig& cfg, const SymbolBlock& block,
                           std::uint64_t seed);

}  // namespace oac
