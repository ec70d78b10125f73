#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace oac {

// Derives independent child seeds from a base seed and a salt.  Every
// randomized stage (noise, delays, gains, synthetic data) pulls its own
// child seed so that results do not depend on evaluation order or on the
// number of worker threads.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt1,
                                 std::uint64_t salt2) {
    return derive_seed(derive_seed(base, salt1), salt2);
}

// Deterministic random stream.  Gaussian variates use an explicit
// Box-Muller transform instead of std::normal_distribution because the
// standard does not pin the latter's sample sequence across library
// implementations; mt19937_64 itself is fully specified.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1).
    double uniform() {
        return std::ldexp(static_cast<double>(engine_() >> 11), -53);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; caches the second variate.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Circularly-symmetric complex Gaussian with total variance sigma2
    // (each component carries sigma2 / 2).
    std::complex<double> complex_gaussian(double sigma2) {
        const double s = std::sqrt(sigma2 / 2.0);
        const double re = gaussian();
        const double im = gaussian();
        return {s * re, s * im};
    }

    std::uint64_t raw() { return engine_(); }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace oac
