#pragma once

#include <Eigen/Dense>

namespace oac::fft {

// Unnormalized forward DFT of length x.size().
Eigen::VectorXcd forward(const Eigen::VectorXcd& x);

// Inverse DFT including the 1/N normalization, so inverse(forward(x)) == x
// up to roundoff.
Eigen::VectorXcd inverse(const Eigen::VectorXcd& X);

// N-point DFT of the length-M all-ones kernel zero-padded to N.  Cached per
// (M, N); safe to call concurrently.
const Eigen::VectorXcd& kernel_spectrum(int M, int N);

}  // namespace oac::fft
