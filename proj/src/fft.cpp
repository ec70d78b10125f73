#include "oac/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace oac::fft {

namespace {

// Plans are created once per length and reused via the new-array execute
// interface.  FFTW_UNALIGNED keeps the plans free of alignment assumptions
// so they can run directly on Eigen-owned buffers; plan creation is the only
// step FFTW does not allow concurrently.
class PlanCache {
  public:
    fftw_plan get(int n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        Eigen::VectorXcd a(n), b(n);
        fftw_plan p = fftw_plan_dft_1d(
            n, reinterpret_cast<fftw_complex*>(a.data()),
            reinterpret_cast<fftw_complex*>(b.data()), sign,
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p) throw std::runtime_error("fft: plan creation failed");
        plans_.emplace(key, p);
        return p;
    }

  private:
    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

Eigen::VectorXcd transform(const Eigen::VectorXcd& x, int sign) {
    const int n = static_cast<int>(x.size());
    if (n <= 0) throw std::invalid_argument("fft: empty input");
    fftw_plan p = plan_cache().get(n, sign);
    Eigen::VectorXcd out(n);
    // Out-of-place c2c transforms leave the input untouched.
    fftw_execute_dft(
        p, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(
               x.data())),
        reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

}  // namespace

Eigen::VectorXcd forward(const Eigen::VectorXcd& x) {
    return transform(x, FFTW_FORWARD);
}

Eigen::VectorXcd inverse(const Eigen::VectorXcd& X) {
    Eigen::VectorXcd out = transform(X, FFTW_BACKWARD);
    out /= static_cast<double>(X.size());
    return out;
}

const Eigen::VectorXcd& kernel_spectrum(int M, int N) {
    if (M < 1 || N < M)
        throw std::invalid_argument("kernel_spectrum: need N >= M >= 1");
    static std::mutex mutex;
    static std::map<std::pair<int, int>, Eigen::VectorXcd> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto key = std::make_pair(M, N);
    auto it = cache.find(key);
    if (it == cache.end()) {
        Eigen::VectorXcd ones = Eigen::VectorXcd::Zero(N);
        ones.head(M).setOnes();
        it = cache.emplace(key, forward(ones)).first;
    }
    return it->second;
}

}  // namespace oac::fft
