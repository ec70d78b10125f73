// Shared generators for property tests: random grid-aligned channel configs
// and random nonnegative symbol blocks.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "oac/channel.hpp"
#include "oac/packet.hpp"
#include "oac/rng.hpp"

namespace testutil {

// Delays sit exactly on the Q-grid so the continuous path is exact; the
// first delay is always 0 per the channel convention.  Bin gaps respect the
// channel's minimum delay spacing of T/1000 (>= ceil(Q/1000) bins).
inline oac::ChannelConfig random_config(oac::Rng& rng, int M, int L, int Q,
                                        double T = 1.0, double snr_db = 10.0,
                                        double phase_hi = 2.0 * M_PI) {
    const int gap = std::max(1, static_cast<int>(std::ceil(Q / 1000.0)));
    std::vector<int> bins;
    for (;;) {
        bins.assign(1, 0);
        for (int m = 1; m < M; ++m)
            bins.push_back(1 + static_cast<int>(rng.uniform() * (Q - gap - 1)));
        std::sort(bins.begin(), bins.end());
        bool ok = true;
        for (int m = 1; m < M && ok; ++m) ok = bins[m] - bins[m - 1] >= gap;
        if (ok && bins.back() <= Q - gap) break;
    }
    std::vector<double> tau(M);
    for (int m = 0; m < M; ++m) tau[m] = T * bins[m] / Q;
    std::vector<std::complex<double>> h(M);
    for (int m = 0; m < M; ++m)
        h[m] = std::polar(1.0, rng.uniform(0.0, phase_hi));
    return oac::ChannelConfig(M, L, T, std::move(tau), std::move(h), snr_db);
}

inline oac::SymbolBlock random_block(oac::Rng& rng, int M, int L,
                                     double lo = 0.0, double hi = 10.0) {
    Eigen::MatrixXd values(M, L);
    for (int m = 0; m < M; ++m)
        for (int l = 0; l < L; ++l) values(m, l) = rng.uniform(lo, hi);
    return oac::SymbolBlock(values);
}

inline double rel_err(const Eigen::VectorXcd& got, const Eigen::VectorXcd& want) {
    const double scale = std::max(want.cwiseAbs().maxCoeff(), 1e-300);
    return (got - want).cwiseAbs().maxCoeff() / scale;
}

inline double rel_err(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
    const double scale = std::max(want.cwiseAbs().maxCoeff(), 1e-300);
    return (got - want).cwiseAbs().maxCoeff() / scale;
}

}  // namespace testutil
