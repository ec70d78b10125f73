#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oac/packet.hpp"

namespace oac {

// Ingested sensor table: one row per sensor, one column per time step.
struct SensorSeries {
    Eigen::MatrixXd readings;
    std::vector<std::string> labels;
};

struct CsvLoadResult {
    SensorSeries series;
    int dropped_rows = 0;
};

// Reads a decimal CSV with a header row.  columns selects and orders the
// sensor columns by name (empty = all, file order).  Rows with missing or
// non-numeric cells are dropped and counted; zero usable rows is an error.
CsvLoadResult load_csv(const std::string& path,
                       const std::vector<std::string>& columns = {});

// Packets carved from a series, plus the provenance needed to trace them
// back: the starting column of each packet and the uniform nonnegativity
// shift that was added to every value.
struct PacketSet {
    std::vector<SymbolBlock> packets;
    std::vector<int> offsets;
    double shift = 0.0;
};

// Carves contiguous length-L windows every `stride` steps.  Uses the first
// M sensor rows unless `sensors` lists row indices (exactly M of them).
// A series containing negatives is shifted up by -min so the symbol
// nonnegativity invariant holds; the shift is recorded.
PacketSet packetize(const SensorSeries& series, int M, int L, int stride,
                    const std::vector<int>& sensors = {});

// Synthetic correlated-sensor source: a shared AR(1) component (weight
// rho_s) plus per-sensor AR(1) components, both with lag-1 coefficient
// rho_t, scaled and clamped into [0, 10].  Deterministic per seed.
PacketSet gen_synthetic(int M, int L, int count, double rho_t, double rho_s,
                        std::uint64_t seed);

// One training example for the denoiser stage.  x holds the four channels
// [Re(stilde), Im(stilde), Re(y'), Im(y')] flattened channel-major, then
// sensor-major, then time: x[(c*M + m)*L + l].  y' is the sample vector
// reshaped to M x L via y'[m][l] = y[l*M + m], dropping the final M-1
// samples.  target_s is flattened sensor-major; target_splus has length L.
struct InterchangeRecord {
    int M = 0;
    int L = 0;
    std::int64_t id = 0;
    double snr_db = 0.0;
    std::vector<float> x;             // 4*M*L
    std::vector<float> target_s;      // M*L
    std::vector<float> target_splus;  // L

    std::size_t payload_floats() const {
        return static_cast<std::size_t>(M) * L * 5 + L;
    }
};

InterchangeRecord make_interchange_record(
    std::int64_t id, const Eigen::MatrixXcd& stilde, const SampleVector& y,
    const SymbolBlock& s, OacFunction func, double snr_db);

// Directory layout: manifest.json plus data.bin holding `count` fixed-size
// little-endian float32 records.  Round-trips bit-exactly.
void write_records(const std::vector<InterchangeRecord>& records,
                   const std::string& dir);
std::vector<InterchangeRecord> read_records(const std::string& dir);

}  // namespace oac
