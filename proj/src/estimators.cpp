#include "oac/estimators.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "oac/fft.hpp"
#include "oac/model.hpp"

namespace oac {

namespace {

using Clock = std::chrono::steady_clock;

void check_input(const SampleVector& y, const ChannelConfig& cfg) {
    if (y.size() != cfg.sample_count())
        throw std::invalid_argument(
            "sample vector length does not match M(L+1)-1");
}

TargetVector reduce(const Eigen::MatrixXd& s_hat, OacFunction func) {
    TargetVector t = s_hat.colwise().sum().transpose();
    if (func == OacFunction::Average) t /= static_cast<double>(s_hat.rows());
    return t;
}

Eigen::MatrixXd real_unflatten(const Eigen::VectorXcd& x, int M, int L) {
    Eigen::MatrixXd s(M, L);
    for (int l = 0; l < L; ++l)
        for (int m = 0; m < M; ++m) s(m, l) = x[interleaved_index(m, l, M)].real();
    return s;
}

// Budget for the dense solvers.  OAC_SOLVER_MAX_BYTES overrides; otherwise
// MemAvailable from /proc/meminfo, with a conservative fallback.
std::size_t solver_budget_bytes() {
    if (const char* env = std::getenv("OAC_SOLVER_MAX_BYTES")) {
        try {
            const long long v = std::stoll(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (...) {
        }
    }
    std::ifstream in("/proc/meminfo");
    std::string key;
    long long kb = 0;
    while (in >> key >> kb) {
        std::string unit;
        std::getline(in, unit);
        if (key == "MemAvailable:")
            return static_cast<std::size_t>(kb) * 1024 * 8 / 10;
    }
    return static_cast<std::size_t>(2) << 30;
}

void check_solver_memory(const char* what, double required) {
    const double budget = static_cast<double>(solver_budget_bytes());
    if (required > budget) {
        std::ostringstream os;
        os << what << ": problem too large, needs about "
           << static_cast<long long>(required / (1 << 20)) << " MiB but only "
           << static_cast<long long>(budget / (1 << 20))
           << " MiB are budgeted";
        throw EstimatorError(os.str());
    }
}

double noise_power_from_prior(const ChannelConfig& cfg,
                              const PriorStats& prior) {
    if (cfg.noiseless()) return 0.0;
    const double second_moment =
        (prior.var.array() + prior.mean.array().square()).mean();
    return second_moment / std::pow(10.0, cfg.snr_db() / 10.0);
}

}  // namespace

void PriorStats::validate(int M) const {
    if (mean.size() != M || var.size() != M)
        throw std::invalid_argument("prior moments must have M entries");
    for (int m = 0; m < M; ++m) {
        if (!std::isfinite(mean[m]) || !std::isfinite(var[m]) || var[m] <= 0.0)
            throw std::invalid_argument(
                "prior moments must be finite with var > 0");
    }
}

WienerConfig WienerConfig::from_snr_db(double snr_db) {
    return {default_wiener_reg(snr_db)};
}

EstimatorOutput estimate_aligned(const SampleVector& y,
                                 const ChannelConfig& cfg, OacFunction func) {
    check_input(y, cfg);
    const auto t0 = Clock::now();
    const int M = cfg.M();
    const int L = cfg.L();
    EstimatorOutput out;
    out.name = "aligned";
    out.s_plus_hat.resize(L);
    for (int l = 0; l < L; ++l)
        out.s_plus_hat[l] = y[sample_index(M - 1, l, M)].real();
    if (func == OacFunction::Average) out.s_plus_hat /= static_cast<double>(M);
    out.elapsed =
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0);
    return out;
}

Eigen::VectorXcd ls_complex_solution(const SampleVector& y,
                                     const ChannelConfig& cfg,
                                     const Eigen::VectorXd& weights) {
    check_input(y, cfg);
    const lapack_int N = cfg.sample_count();
    const lapack_int cols = cfg.M() * cfg.L();
    const bool weighted = weights.size() != 0;
    if (weighted) {
        if (weights.size() != N)
            throw std::invalid_argument("weights must have one entry per sample");
        for (lapack_int r = 0; r < N; ++r)
            if (!(weights[r] > 0.0) || !std::isfinite(weights[r]))
                throw std::invalid_argument("weights must be positive and finite");
    }
    check_solver_memory(
        "ls", 16.0 * (static_cast<double>(N) * cols + 2.0 * N + cols) * 1.2);

    Eigen::MatrixXcd A = build_D(cfg);
    Eigen::VectorXcd b = y;
    if (weighted) {
        const Eigen::VectorXd root = weights.array().sqrt();
        A.array().colwise() *= root.array().cast<std::complex<double>>();
        b.array() *= root.array().cast<std::complex<double>>();
    }

    Eigen::VectorXcd tau(cols);
    lapack_int info = LAPACKE_zgeqrf(LAPACK_COL_MAJOR, N, cols, A.data(), N,
                                     tau.data());
    if (info != 0) throw EstimatorError("ls: QR factorization failed");

    double rcond = 0.0;
    info = LAPACKE_ztrcon(LAPACK_COL_MAJOR, '1', 'U', 'N', cols, A.data(), N,
                          &rcond);
    if (info != 0) throw EstimatorError("ls: condition estimate failed");
    if (rcond < 1e-12) {
        std::ostringstream os;
        os << "ls: system is ill-conditioned (estimated condition "
           << (rcond > 0.0 ? 1.0 / rcond
                           : std::numeric_limits<double>::infinity())
           << ")";
        throw EstimatorError(os.str());
    }

    info = LAPACKE_zunmqr(LAPACK_COL_MAJOR, 'L', 'C', N, 1, cols, A.data(), N,
                          tau.data(), b.data(), N);
    if (info != 0) throw EstimatorError("ls: applying Q^H failed");
    info = LAPACKE_ztrtrs(LAPACK_COL_MAJOR, 'U', 'N', 'N', cols, 1, A.data(),
                          N, b.data(), N);
    if (info != 0) throw EstimatorError("ls: triangular solve failed");
    return b.head(cols);
}

EstimatorOutput estimate_ls(const SampleVector& y, const ChannelConfig& cfg,
                            OacFunction func, const Eigen::VectorXd& weights) {
    const auto t0 = Clock::now();
    Eigen::VectorXcd x = ls_complex_solution(y, cfg, weights);
    EstimatorOutput out;
    out.name = "ls";
    out.s_hat = real_unflatten(x, cfg.M(), cfg.L());
    out.s_plus_hat = reduce(out.s_hat, func);
    out.elapsed =
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0);
    return out;
}

EstimatorOutput estimate_lmmse(const SampleVector& y, const ChannelConfig& cfg,
                               const PriorStats& prior, double sigma2,
                               OacFunction func) {
    check_input(y, cfg);
    prior.validate(cfg.M());
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
        throw EstimatorError(
            "lmmse: needs positive finite noise power (use ls when noiseless)");
    const int M = cfg.M();
    const int L = cfg.L();
    const double N = cfg.sample_count();
    const double cols = static_cast<double>(M) * L;
    check_solver_memory("lmmse", 16.0 * (3.0 * N * N + 2.0 * N * cols) * 1.1);

    const auto t0 = Clock::now();
    Eigen::MatrixXcd D = build_D(cfg);

    Eigen::VectorXcd mu_s(M * L);
    Eigen::VectorXd var_s(M * L);
    for (int l = 0; l < L; ++l) {
        for (int m = 0; m < M; ++m) {
            mu_s[interleaved_index(m, l, M)] = prior.mean[m];
            var_s[interleaved_index(m, l, M)] = prior.var[m];
        }
    }

    // Innovation form: s_hat = mu + C_s D^H (D C_s D^H + sigma2 I)^{-1}
    // (y - D mu).
    Eigen::MatrixXcd cross =
        var_s.cast<std::complex<double>>().asDiagonal() * D.adjoint();
    Eigen::MatrixXcd cov = D * cross;
    cov.diagonal().array() += sigma2;
    Eigen::VectorXcd innovation = y - D * mu_s;
    Eigen::LDLT<Eigen::MatrixXcd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw EstimatorError("lmmse: covariance factorization failed");
    Eigen::VectorXcd s_c = mu_s + cross * solver.solve(innovation);
    if (!s_c.allFinite())
        throw EstimatorError("lmmse: innovation solve produced non-finite values");

    EstimatorOutput out;
    out.name = "lmmse";
    out.s_hat = real_unflatten(s_c, M, L);
    out.s_plus_hat = reduce(out.s_hat, func);
    out.elapsed =
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0);
    return out;
}

EstimatorOutput estimate_lmmse(const SampleVector& y, const ChannelConfig& cfg,
                               const PriorStats& prior, OacFunction func) {
    prior.validate(cfg.M());
    const double sigma2 = noise_power_from_prior(cfg, prior);
    if (sigma2 == 0.0)
        throw EstimatorError(
            "lmmse: needs positive finite noise power (use ls when noiseless)");
    return estimate_lmmse(y, cfg, prior, sigma2, func);
}

Eigen::MatrixXcd wiener_initial_estimate(const SampleVector& y,
                                         const ChannelConfig& cfg, double reg) {
    check_input(y, cfg);
    if (reg < 0.0 || !std::isfinite(reg))
        throw std::invalid_argument("wiener: reg must be finite and >= 0");
    const int M = cfg.M();
    const int L = cfg.L();
    const int N = cfg.sample_count();

    const Eigen::VectorXcd& K = fft::kernel_spectrum(M, N);
    Eigen::VectorXcd Y = fft::forward(y);
    Eigen::VectorXcd S(N);
    for (int k = 0; k < N; ++k) {
        const double denom = std::norm(K[k]) + reg;
        // gcd(M, N) == 1 keeps the kernel spectrum zero-free, so denom > 0
        // whenever reg == 0; the branch is a pseudo-inverse safety net only.
        S[k] = denom > 0.0 ? std::conj(K[k]) * Y[k] / denom
                           : std::complex<double>(0.0, 0.0);
    }
    Eigen::VectorXcd padded = fft::inverse(S);

    Eigen::MatrixXcd stilde(M, L);
    for (int l = 0; l < L; ++l)
        for (int m = 0; m < M; ++m)
            stilde(m, l) = padded[interleaved_index(m, l, M)] / cfg.h()[m];
    return stilde;
}

EstimatorOutput estimate_wiener(const SampleVector& y,
                                const ChannelConfig& cfg, WienerConfig wcfg,
                                OacFunction func) {
    const auto t0 = Clock::now();
    Eigen::MatrixXcd stilde = wiener_initial_estimate(y, cfg, wcfg.reg);
    EstimatorOutput out;
    out.name = "wiener";
    out.s_hat = stilde.real();
    out.s_plus_hat = reduce(out.s_hat, func);
    out.elapsed =
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0);
    return out;
}

double default_wiener_reg(double snr_db) {
    if (snr_db == std::numeric_limits<double>::infinity()) return 0.0;
    return std::pow(10.0, -snr_db / 10.0);
}

const std::vector<std::string>& estimator_names() {
    static const std::vector<std::string> names = {"aligned", "ls", "lmmse",
                                                   "wiener"};
    return names;
}

EstimatorOutput run_estimator(const std::string& name, const SampleVector& y,
                              const ChannelConfig& cfg,
                              const EstimatorContext& ctx) {
    if (name == "aligned") return estimate_aligned(y, cfg, ctx.func);
    if (name == "ls") return estimate_ls(y, cfg, ctx.func);
    if (name == "lmmse") {
        if (!ctx.prior)
            throw std::invalid_argument("lmmse needs prior statistics");
        return estimate_lmmse(y, cfg, *ctx.prior, ctx.func);
    }
    if (name == "wiener") {
        WienerConfig wcfg = WienerConfig::from_snr_db(cfg.snr_db());
        if (ctx.wiener_reg) wcfg.reg = *ctx.wiener_reg;
        return estimate_wiener(y, cfg, wcfg, ctx.func);
    }
    throw std::invalid_argument("unknown estimator \"" + name + "\"");
}

PriorStats empirical_prior(const std::vector<SymbolBlock>& packets) {
    if (packets.empty())
        throw std::invalid_argument("empirical_prior: no packets");
    const int M = packets.front().sensors();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(M);
    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(M);
    long long count = 0;
    for (const SymbolBlock& p : packets) {
        if (p.sensors() != M)
            throw std::invalid_argument(
                "empirical_prior: packets disagree on sensor count");
        sum += p.values().rowwise().sum();
        sumsq += p.values().array().square().matrix().rowwise().sum();
        count += p.length();
    }
    PriorStats prior;
    prior.mean = sum / static_cast<double>(count);
    prior.var =
        sumsq / static_cast<double>(count) - prior.mean.array().square().matrix();
    prior.var = prior.var.cwiseMax(0.0);
    return prior;
}

}  // namespace oac
