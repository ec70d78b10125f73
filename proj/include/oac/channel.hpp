#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace oac {

// Immutable description of one multi-sensor transmission round: M sensors,
// packets of L symbols, symbol duration T, per-sensor delays tau and complex
// gains h, and the channel SNR in dB (+infinity means noiseless).
//
// Invariants enforced at construction:
//   M >= 1, L >= 1, T > 0
//   tau[0] == 0, tau strictly increasing, consecutive gaps >= T/1000,
//   tau[M-1] <= T - T/1000
//   |h[m]| > 0 for all m
//   snr_db is not NaN and not -infinity
class ChannelConfig {
  public:
    ChannelConfig(int M, int L, double T, std::vector<double> tau,
                  std::vector<std::complex<double>> h, double snr_db);

    int M() const { return M_; }
    int L() const { return L_; }
    double T() const { return T_; }
    const std::vector<double>& tau() const { return tau_; }
    const std::vector<std::complex<double>>& h() const { return h_; }
    double snr_db() const { return snr_db_; }

    // Minimum admissible spacing between consecutive delays.
    double epsilon_tau() const { return T_ / 1000.0; }

    bool noiseless() const;

    // Number of misaligned-sum samples produced per round: M(L+1) - 1.
    int sample_count() const { return M_ * (L_ + 1) - 1; }

    nlohmann::json to_json() const;
    static ChannelConfig from_json(const nlohmann::json& j);

    static ChannelConfig load(const std::string& path);
    void save(const std::string& path) const;

  private:
    int M_;
    int L_;
    double T_;
    std::vector<double> tau_;
    std::vector<std::complex<double>> h_;
    double snr_db_;
};

}  // namespace oac
