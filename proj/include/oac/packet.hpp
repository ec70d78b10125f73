#pragma once

#include <Eigen/Dense>
#include <complex>

namespace oac {

// Interleaved symbol vector of length M*L: entry l*M + k holds sensor k's
// symbol at time l (0-based).  Complex-typed so channel gains can scale it
// in place.
using InterleavedSymbolVector = Eigen::VectorXcd;

// Misaligned-sum sample vector of length M(L+1) - 1: entry i*M + m holds the
// m-th matched-filter-bank output of interval i (0-based, the final interval
// only carries outputs m < M-1).
using SampleVector = Eigen::VectorXcd;

// Per-round estimation target of length L.
using TargetVector = Eigen::VectorXd;

// Whether the over-the-air function is the plain sum of the sensor symbols
// or their average (sum divided by M).
enum class OacFunction { Sum, Average };

inline int interleaved_index(int k, int l, int M) { return l * M + k; }
inline int sample_index(int m, int i, int M) { return i * M + m; }

// One packet round: M sensor rows by L symbol columns, entries real,
// nonnegative and finite.
class SymbolBlock {
  public:
    explicit SymbolBlock(Eigen::MatrixXd values);

    const Eigen::MatrixXd& values() const { return values_; }
    int sensors() const { return static_cast<int>(values_.rows()); }
    int length() const { return static_cast<int>(values_.cols()); }

  private:
    Eigen::MatrixXd values_;
};

// Column-major flattening of the block; exact inverse of unflatten.
InterleavedSymbolVector flatten(const SymbolBlock& block);

// Rebuilds a block from an interleaved vector.  Requires an exactly-real
// vector of length M*L whose entries satisfy the SymbolBlock invariants;
// estimator outputs (which may go negative) are reshaped by the estimators
// themselves, not through here.
SymbolBlock unflatten(const InterleavedSymbolVector& v, int M, int L);

// The function value the receiver must recover: column sums of the block,
// divided by M when averaging.
TargetVector sum_target(const SymbolBlock& block, OacFunction func);

}  // namespace oac
