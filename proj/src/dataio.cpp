#include "oac/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "oac/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "interchange files are little-endian; big-endian hosts need a "
              "byte-swapping port");

namespace oac {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kChannels = {"re_stilde", "im_stilde", "re_y",
                                            "im_y"};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

bool parse_cell(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || errno == ERANGE) return false;
    if (!std::isfinite(v)) return false;
    out = v;
    return true;
}

// Stationary AR(1) with lag-1 coefficient rho and unit marginal variance.
Eigen::VectorXd ar1_series(Rng& rng, int L, double rho) {
    Eigen::VectorXd u(L);
    u[0] = rng.gaussian();
    const double innov = std::sqrt(1.0 - rho * rho);
    for (int t = 1; t < L; ++t) u[t] = rho * u[t - 1] + innov * rng.gaussian();
    return u;
}

void atomic_write(const fs::path& target, const std::string& bytes) {
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace

CsvLoadResult load_csv(const std::string& path,
                       const std::vector<std::string>& columns) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path + ": zero usable rows");
    const std::vector<std::string> header = split_csv_line(line);

    std::vector<int> picks;
    std::vector<std::string> labels;
    if (columns.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c)
            picks.push_back(static_cast<int>(c));
        labels = header;
    } else {
        for (const std::string& want : columns) {
            auto it = std::find(header.begin(), header.end(), want);
            if (it == header.end())
                throw std::invalid_argument(path + ": column \"" + want +
                                            "\" not found");
            picks.push_back(static_cast<int>(it - header.begin()));
            labels.push_back(want);
        }
    }

    std::vector<std::vector<double>> rows;
    int dropped = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        std::vector<double> row(picks.size());
        bool ok = cells.size() >= header.size();
        for (std::size_t i = 0; ok && i < picks.size(); ++i)
            ok = parse_cell(cells[picks[i]], row[i]);
        if (ok)
            rows.push_back(std::move(row));
        else
            ++dropped;
    }
    if (rows.empty()) throw std::runtime_error(path + ": zero usable rows");

    CsvLoadResult result;
    result.dropped_rows = dropped;
    result.series.labels = std::move(labels);
    // Sensors are rows of the series: transpose file rows (time) against
    // columns (sensors).
    result.series.readings.resize(picks.size(), rows.size());
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t m = 0; m < picks.size(); ++m)
            result.series.readings(m, t) = rows[t][m];
    return result;
}

PacketSet packetize(const SensorSeries& series, int M, int L, int stride,
                    const std::vector<int>& sensors) {
    if (M < 1 || L < 1 || stride < 1)
        throw std::invalid_argument("packetize: M, L, stride must be positive");
    const int rows = static_cast<int>(series.readings.rows());
    const int steps = static_cast<int>(series.readings.cols());

    std::vector<int> use;
    if (sensors.empty()) {
        if (rows < M)
            throw std::invalid_argument("packetize: series has fewer than M sensors");
        for (int m = 0; m < M; ++m) use.push_back(m);
    } else {
        if (static_cast<int>(sensors.size()) != M)
            throw std::invalid_argument("packetize: sensor selection must list M rows");
        for (int idx : sensors) {
            if (idx < 0 || idx >= rows)
                throw std::invalid_argument("packetize: sensor index out of range");
            use.push_back(idx);
        }
    }
    if (steps < L)
        throw std::invalid_argument("packetize: series shorter than L steps");

    double lowest = 0.0;
    for (int m : use) lowest = std::min(lowest, series.readings.row(m).minCoeff());
    const double shift = lowest < 0.0 ? -lowest : 0.0;

    PacketSet set;
    set.shift = shift;
    for (int offset = 0; offset + L <= steps; offset += stride) {
        Eigen::MatrixXd values(M, L);
        for (int m = 0; m < M; ++m)
            values.row(m) =
                series.readings.row(use[m]).segment(offset, L).array() + shift;
        set.packets.emplace_back(std::move(values));
        set.offsets.push_back(offset);
    }
    if (set.packets.empty())
        throw std::invalid_argument("packetize: no full packet fits");
    return set;
}

PacketSet gen_synthetic(int M, int L, int count, double rho_t, double rho_s,
                        std::uint64_t seed) {
    if (M < 1 || L < 1 || count < 1)
        throw std::invalid_argument("gen_synthetic: M, L, count must be positive");
    if (!(std::abs(rho_t) < 1.0))
        throw std::invalid_argument("gen_synthetic: need |rho_t| < 1");
    if (!(rho_s >= 0.0 && rho_s < 1.0))
        throw std::invalid_argument("gen_synthetic: need rho_s in [0, 1)");

    const double w_shared = std::sqrt(rho_s);
    const double w_own = std::sqrt(1.0 - rho_s);

    PacketSet set;
    set.shift = 0.0;
    for (int p = 0; p < count; ++p) {
        Rng rng(derive_seed(seed, p));
        const Eigen::VectorXd shared = ar1_series(rng, L, rho_t);
        Eigen::MatrixXd values(M, L);
        for (int m = 0; m < M; ++m) {
            const Eigen::VectorXd own = ar1_series(rng, L, rho_t);
            for (int l = 0; l < L; ++l) {
                const double z = w_shared * shared[l] + w_own * own[l];
                values(m, l) =
                    std::clamp(5.0 + (5.0 / 3.0) * z, 0.0, 10.0);
            }
        }
        set.packets.emplace_back(std::move(values));
        set.offsets.push_back(p);
    }
    return set;
}

InterchangeRecord make_interchange_record(
    std::int64_t id, const Eigen::MatrixXcd& stilde, const SampleVector& y,
    const SymbolBlock& s, OacFunction func, double snr_db) {
    const int M = s.sensors();
    const int L = s.length();
    if (stilde.rows() != M || stilde.cols() != L)
        throw std::invalid_argument("interchange: stilde shape mismatch");
    if (y.size() != static_cast<Eigen::Index>(M) * (L + 1) - 1)
        throw std::invalid_argument("interchange: sample vector length mismatch");

    InterchangeRecord rec;
    rec.M = M;
    rec.L = L;
    rec.id = id;
    rec.snr_db = snr_db;
    rec.x.resize(static_cast<std::size_t>(4) * M * L);
    rec.target_s.resize(static_cast<std::size_t>(M) * L);
    rec.target_splus.resize(L);

    auto xcell = [&](int c, int m, int l) -> float& {
        return rec.x[(static_cast<std::size_t>(c) * M + m) * L + l];
    };
    for (int m = 0; m < M; ++m) {
        for (int l = 0; l < L; ++l) {
            const std::complex<double> yv = y[sample_index(m, l, M)];
            xcell(0, m, l) = static_cast<float>(stilde(m, l).real());
            xcell(1, m, l) = static_cast<float>(stilde(m, l).imag());
            xcell(2, m, l) = static_cast<float>(yv.real());
            xcell(3, m, l) = static_cast<float>(yv.imag());
            rec.target_s[static_cast<std::size_t>(m) * L + l] =
                static_cast<float>(s.values()(m, l));
        }
    }
    const TargetVector splus = sum_target(s, func);
    for (int l = 0; l < L; ++l)
        rec.target_splus[l] = static_cast<float>(splus[l]);
    return rec;
}

void write_records(const std::vector<InterchangeRecord>& records,
                   const std::string& dir) {
    if (records.empty())
        throw std::invalid_argument("write_records: nothing to write");
    const int M = records.front().M;
    const int L = records.front().L;
    for (const InterchangeRecord& rec : records) {
        if (rec.M != M || rec.L != L)
            throw std::invalid_argument("write_records: records disagree on shape");
        if (rec.x.size() != static_cast<std::size_t>(4) * M * L ||
            rec.target_s.size() != static_cast<std::size_t>(M) * L ||
            rec.target_splus.size() != static_cast<std::size_t>(L))
            throw std::invalid_argument("write_records: record fields mis-sized");
    }

    fs::create_directories(dir);

    std::string blob;
    blob.reserve(records.size() * records.front().payload_floats() * 4);
    auto append = [&blob](const std::vector<float>& v) {
        const char* bytes = reinterpret_cast<const char*>(v.data());
        blob.append(bytes, v.size() * sizeof(float));
    };
    nlohmann::json snrs = nlohmann::json::array();
    for (const InterchangeRecord& rec : records) {
        append(rec.x);
        append(rec.target_s);
        append(rec.target_splus);
        snrs.push_back(rec.snr_db);
    }

    nlohmann::json manifest;
    manifest["version"] = 1;
    manifest["M"] = M;
    manifest["L"] = L;
    manifest["count"] = static_cast<int>(records.size());
    manifest["dtype"] = "f32le";
    manifest["channels"] = kChannels;
    manifest["snr_db"] = snrs;

    atomic_write(fs::path(dir) / "data.bin", blob);
    atomic_write(fs::path(dir) / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<InterchangeRecord> read_records(const std::string& dir) {
    const fs::path mpath = fs::path(dir) / "manifest.json";
    std::ifstream min(mpath);
    if (!min) throw std::runtime_error("cannot open " + mpath.string());
    nlohmann::json manifest;
    try {
        min >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(mpath.string() + ": " + e.what());
    }

    for (const char* key :
         {"version", "M", "L", "count", "dtype", "channels", "snr_db"}) {
        if (!manifest.contains(key))
            throw std::runtime_error(mpath.string() + ": missing key \"" +
                                     key + "\"");
    }
    if (manifest["version"].get<int>() != 1)
        throw std::runtime_error(mpath.string() + ": unsupported version");
    if (manifest["dtype"].get<std::string>() != "f32le")
        throw std::runtime_error(mpath.string() +
                                 ": endianness marker mismatch (want f32le)");
    if (manifest["channels"].get<std::vector<std::string>>() != kChannels)
        throw std::runtime_error(mpath.string() + ": unexpected channel list");
    const int M = manifest["M"].get<int>();
    const int L = manifest["L"].get<int>();
    const int count = manifest["count"].get<int>();
    if (M < 1 || L < 1 || count < 0)
        throw std::runtime_error(mpath.string() + ": invalid shape");
    const auto snrs = manifest["snr_db"].get<std::vector<double>>();
    if (static_cast<int>(snrs.size()) != count)
        throw std::runtime_error(mpath.string() +
                                 ": snr_db length disagrees with count");

    const fs::path dpath = fs::path(dir) / "data.bin";
    std::ifstream din(dpath, std::ios::binary);
    if (!din) throw std::runtime_error("cannot open " + dpath.string());
    din.seekg(0, std::ios::end);
    const std::streamoff actual = din.tellg();
    din.seekg(0, std::ios::beg);

    const std::size_t per_record =
        (static_cast<std::size_t>(M) * L * 5 + L) * sizeof(float);
    const std::streamoff expected =
        static_cast<std::streamoff>(per_record) * count;
    if (actual != expected) {
        std::ostringstream os;
        os << dpath.string() << ": truncated data or shape mismatch (have "
           << actual << " bytes, manifest implies " << expected << ")";
        throw std::runtime_error(os.str());
    }

    std::vector<InterchangeRecord> records(count);
    for (int i = 0; i < count; ++i) {
        InterchangeRecord& rec = records[i];
        rec.M = M;
        rec.L = L;
        rec.id = i;
        rec.snr_db = snrs[i];
        rec.x.resize(static_cast<std::size_t>(4) * M * L);
        rec.target_s.resize(static_cast<std::size_t>(M) * L);
        rec.target_splus.resize(L);
        auto read_block = [&din, &dpath](std::vector<float>& v) {
            din.read(reinterpret_cast<char*>(v.data()),
                     static_cast<std::streamsize>(v.size() * sizeof(float)));
            if (!din)
                throw std::runtime_error(dpath.string() + ": truncated data");
        };
        read_block(rec.x);
        read_block(rec.target_s);
        read_block(rec.target_splus);
    }
    return records;
}

}  // namespace oac
