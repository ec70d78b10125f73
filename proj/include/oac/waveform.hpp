#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oac/channel.hpp"
#include "oac/packet.hpp"

namespace oac {

// Continuous-time transmit waveform sampled on a uniform grid of
// oversample bins per symbol period; covers [0, (L+1)T) so the latest
// sensor's final symbol fits.
struct Waveform {
    Eigen::VectorXcd samples;
    double dt = 0.0;
    int oversample = 0;
};

// Snaps each delay to the bin grid (nearest bin).  Throws if the grid is too
// coarse to separate the delays: two delays landing in the same bin, or the
// last delay reaching the end of the period.
std::vector<int> delay_bins(const ChannelConfig& cfg, int oversample);

// Sum of the delayed, gain-scaled rectangular pulse trains of all sensors.
// Sensor m contributes h[m] * s_m[l] on [tau_m + l*T, tau_m + (l+1)*T).
Waveform synthesize(const ChannelConfig& cfg, const SymbolBlock& block,
                    int oversample);
Waveform synthesize_serial(const ChannelConfig& cfg, const SymbolBlock& block,
                           int oversample);

// Matched-filter-bank receiver: output i*M + m is the mean of the waveform
// over [i*T + tau_m, i*T + tau_{m+1}), with tau_M standing for T.  On a
// noiseless synthesized waveform this reproduces the sampled model exactly.
SampleVector wmfs_sample(const Waveform& w, const ChannelConfig& cfg);
SampleVector wmfs_sample_serial(const Waveform& w, const ChannelConfig& cfg);

// Adds iid circularly-symmetric complex Gaussian noise of variance N0 / dt
// to every bin (white noise of spectral density N0), so a filter-bank output
// averaging n bins carries noise variance N0 / (n * dt).
Waveform add_waveform_noise(const Waveform& w, double N0, std::uint64_t seed);

// CSV dump with columns t, re, im, one row per bin.
void write_waveform_csv(const Waveform& w, const std::string& path);

}  // namespace oac
