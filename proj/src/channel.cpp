#include "oac/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace oac {

namespace {

[[noreturn]] void fail(const std::string& msg) {
    throw std::invalid_argument("channel config: " + msg);
}

}  // namespace

ChannelConfig::ChannelConfig(int M, int L, double T, std::vector<double> tau,
                             std::vector<std::complex<double>> h, double snr_db)
    : M_(M), L_(L), T_(T), tau_(std::move(tau)), h_(std::move(h)),
      snr_db_(snr_db) {
    if (M_ < 1) fail("M must be at least 1");
    if (L_ < 1) fail("L must be at least 1");
    if (!(T_ > 0.0) || !std::isfinite(T_)) fail("T must be positive and finite");
    if (static_cast<int>(tau_.size()) != M_)
        fail("tau must hold exactly M entries");
    if (static_cast<int>(h_.size()) != M_) fail("h must hold exactly M entries");

    const double eps = T_ / 1000.0;
    if (tau_[0] != 0.0) fail("tau[0] must be exactly 0");
    for (int m = 0; m < M_; ++m) {
        if (!std::isfinite(tau_[m])) fail("delays must be finite");
        if (m > 0 && tau_[m] - tau_[m - 1] < eps) {
            std::ostringstream os;
            os << "delays " << m - 1 << " and " << m
               << " closer than the minimum spacing " << eps;
            fail(os.str());
        }
    }
    if (tau_[M_ - 1] > T_ - eps)
        fail("last delay leaves less than the minimum spacing before T");

    for (int m = 0; m < M_; ++m) {
        const double mag = std::abs(h_[m]);
        if (!(mag > 0.0) || !std::isfinite(mag))
            fail("gains must be nonzero and finite");
    }

    if (std::isnan(snr_db_)) fail("snr_db must not be NaN");
    if (snr_db_ == -std::numeric_limits<double>::infinity())
        fail("snr_db must not be -infinity");
}

bool ChannelConfig::noiseless() const {
    return snr_db_ == std::numeric_limits<double>::infinity();
}

nlohmann::json ChannelConfig::to_json() const {
    nlohmann::json j;
    j["M"] = M_;
    j["L"] = L_;
    j["T"] = T_;
    j["tau"] = tau_;
    std::vector<double> re(M_), im(M_);
    for (int m = 0; m < M_; ++m) {
        re[m] = h_[m].real();
        im[m] = h_[m].imag();
    }
    j["h_re"] = re;
    j["h_im"] = im;
    // nlohmann serializes +inf as null; from_json restores it below.
    j["snr_db"] = snr_db_;
    return j;
}

ChannelConfig ChannelConfig::from_json(const nlohmann::json& j) {
    static const std::vector<std::string> known = {"M",    "L",    "T",     "tau",
                                                   "h_re", "h_im", "snr_db"};
    for (const std::string& key : known)
        if (!j.contains(key)) fail("missing key \"" + key + "\"");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            fail("unknown key \"" + it.key() + "\"");
    }
    const int M = j.at("M").get<int>();
    const int L = j.at("L").get<int>();
    const double T = j.at("T").get<double>();
    auto tau = j.at("tau").get<std::vector<double>>();
    auto re = j.at("h_re").get<std::vector<double>>();
    auto im = j.at("h_im").get<std::vector<double>>();
    if (re.size() != im.size()) fail("h_re and h_im must have equal length");
    std::vector<std::complex<double>> h(re.size());
    for (std::size_t m = 0; m < re.size(); ++m) h[m] = {re[m], im[m]};
    double snr_db;
    if (j.at("snr_db").is_null())
        snr_db = std::numeric_limits<double>::infinity();
    else
        snr_db = j.at("snr_db").get<double>();
    return ChannelConfig(M, L, T, std::move(tau), std::move(h), snr_db);
}

ChannelConfig ChannelConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(path + ": " + e.what());
    }
    return from_json(j);
}

void ChannelConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) fail("cannot write " + path);
    out << to_json().dump(2) << '\n';
}

}  // namespace oac
