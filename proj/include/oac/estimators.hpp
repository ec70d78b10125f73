#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oac/channel.hpp"
#include "oac/packet.hpp"

namespace oac {

// Per-sensor prior moments used by the LMMSE estimator.
struct PriorStats {
    Eigen::VectorXd mean;  // length M
    Eigen::VectorXd var;   // length M, entries > 0

    void validate(int M) const;
};

// Spectral regularizer of the deconvolution stage: the constant ratio
// standing in for the noise-to-signal spectrum.  Zero gives the pure
// inverse filter.
struct WienerConfig {
    double reg = 0.0;

    static WienerConfig from_snr_db(double snr_db);
};

struct EstimatorOutput {
    std::string name;
    // Per-sensor symbol estimates, M x L.  Empty for the aligned estimator,
    // which only recovers the function value.
    Eigen::MatrixXd s_hat;
    TargetVector s_plus_hat;  // length L
    std::chrono::nanoseconds elapsed{0};
};

// Raised when an estimator cannot produce a result for a valid input
// (ill-conditioned system, missing noise power, problem too large for
// memory).  Distinct from std::invalid_argument, which flags caller bugs.
struct EstimatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Reads the final filter-bank output of each interval, where all sensors
// align on the same symbol; no matrix work at all.
EstimatorOutput estimate_aligned(const SampleVector& y,
                                 const ChannelConfig& cfg, OacFunction func);

// Dense complex least squares through a QR factorization.  Rejects systems
// whose triangular factor has an estimated condition number above 1e12 and
// problems whose matrices would not fit in memory.  Optional per-sample
// positive weights turn it into diagonally weighted least squares.
EstimatorOutput estimate_ls(const SampleVector& y, const ChannelConfig& cfg,
                            OacFunction func,
                            const Eigen::VectorXd& weights = {});

// The complex minimizer of ||y - D s||, interleaved order, before the real
// part is taken; exposed so the residual-orthogonality property can be
// checked against the solver actually in use.
Eigen::VectorXcd ls_complex_solution(const SampleVector& y,
                                     const ChannelConfig& cfg,
                                     const Eigen::VectorXd& weights = {});

// Linear MMSE under the per-sensor prior; the noise power is derived from
// the prior second moment and the configured SNR.  Requires positive noise
// power (use ls on a noiseless channel).
EstimatorOutput estimate_lmmse(const SampleVector& y, const ChannelConfig& cfg,
                               const PriorStats& prior, OacFunction func);

// Same, with the noise variance supplied explicitly.
EstimatorOutput estimate_lmmse(const SampleVector& y, const ChannelConfig& cfg,
                               const PriorStats& prior, double sigma2,
                               OacFunction func);

// Frequency-domain deconvolution of the all-ones mixing kernel with the
// constant regularizer, then per-sensor gain removal.  Returns the complex
// initial estimate, interleaved order unpacked to M x L.
Eigen::MatrixXcd wiener_initial_estimate(const SampleVector& y,
                                         const ChannelConfig& cfg, double reg);

EstimatorOutput estimate_wiener(const SampleVector& y,
                                const ChannelConfig& cfg, WienerConfig wcfg,
                                OacFunction func);

// Default regularizer 10^(-snr_db / 10); zero on a noiseless channel.
double default_wiener_reg(double snr_db);

// Per-sensor sample mean and population variance pooled over the packets;
// the estimation-time prior the sweeps hand to lmmse.
PriorStats empirical_prior(const std::vector<SymbolBlock>& packets);

// Name-based dispatch for sweeps and the command line.
struct EstimatorContext {
    OacFunction func = OacFunction::Average;
    std::optional<PriorStats> prior;       // required by lmmse
    std::optional<double> wiener_reg;      // wiener; defaults from snr_db
};

const std::vector<std::string>& estimator_names();

EstimatorOutput run_estimator(const std::string& name, const SampleVector& y,
                              const ChannelConfig& cfg,
                              const EstimatorContext& ctx);

}  // namespace oac
