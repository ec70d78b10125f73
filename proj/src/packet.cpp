#include "oac/packet.hpp"

#include <cmath>
#include <stdexcept>

namespace oac {

SymbolBlock::SymbolBlock(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() < 1 || values_.cols() < 1)
        throw std::invalid_argument(
            "symbol block: need at least 1 sensor and 1 symbol");
    for (int l = 0; l < values_.cols(); ++l) {
        for (int m = 0; m < values_.rows(); ++m) {
            const double v = values_(m, l);
            if (!std::isfinite(v) || v < 0.0)
                throw std::invalid_argument(
                    "symbol block: entries must be finite and nonnegative");
        }
    }
}

InterleavedSymbolVector flatten(const SymbolBlock& block) {
    const Eigen::MatrixXd& s = block.values();
    // Column-major storage already matches the interleaved order
    // (sensor index fastest, symbol index slowest).
    Eigen::Map<const Eigen::VectorXd> flat(s.data(), s.size());
    return flat.cast<std::complex<double>>();
}

SymbolBlock unflatten(const InterleavedSymbolVector& v, int M, int L) {
    if (v.size() != static_cast<Eigen::Index>(M) * L)
        throw std::invalid_argument("unflatten: vector length is not M*L");
    Eigen::MatrixXd s(M, L);
    for (int l = 0; l < L; ++l) {
        for (int m = 0; m < M; ++m) {
            const std::complex<double> z = v[interleaved_index(m, l, M)];
            if (z.imag() != 0.0)
                throw std::invalid_argument(
                    "unflatten: vector has a nonzero imaginary part");
            s(m, l) = z.real();
        }
    }
    return SymbolBlock(std::move(s));
}

TargetVector sum_target(const SymbolBlock& block, OacFunction func) {
    TargetVector t = block.values().colwise().sum().transpose();
    if (func == OacFunction::Average) t /= static_cast<double>(block.sensors());
    return t;
}

}  // namespace oac
