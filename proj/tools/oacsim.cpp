// oacsim: simulate misaligned over-the-air rounds, run estimators, sweep
// SNR grids, benchmark timing, and export denoiser training corpora.
//
// Exit codes: 0 success, 2 validation failure, 3 runtime/numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "oac/channel.hpp"
#include "oac/dataio.hpp"
#include "oac/estimators.hpp"
#include "oac/metrics.hpp"
#include "oac/model.hpp"
#include "oac/packet.hpp"
#include "oac/rng.hpp"
#include "oac/version.hpp"
#include "oac/waveform.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSaltData = 1;
constexpr std::uint64_t kSaltChannel = 2;
constexpr std::uint64_t kSaltNoise = 3;

[[noreturn]] void invalid(const std::string& msg) {
    throw std::invalid_argument(msg);
}

double parse_double(const std::string& text, const char* what) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || text.empty() || errno == ERANGE)
        invalid(std::string("cannot parse ") + what + " \"" + text + "\"");
    return v;
}

// "lo:hi:step" inclusive grid, or a single value; "inf" allowed.
std::vector<double> parse_snr_grid(const std::string& text) {
    const std::size_t c1 = text.find(':');
    if (c1 == std::string::npos) return {parse_double(text, "snr")};
    const std::size_t c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos)
        invalid("snr grid must be a single value or lo:hi:step");
    const double lo = parse_double(text.substr(0, c1), "snr grid lo");
    const double hi = parse_double(text.substr(c1 + 1, c2 - c1 - 1), "snr grid hi");
    const double step = parse_double(text.substr(c2 + 1), "snr grid step");
    if (!(step > 0.0)) invalid("snr grid step must be positive");
    if (hi < lo) invalid("snr grid needs hi >= lo");
    std::vector<double> grid;
    for (double v = lo; v <= hi + 1e-9 * step; v += step) grid.push_back(v);
    return grid;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : text) {
        if (ch == ',') {
            if (!cur.empty()) parts.push_back(cur);
            cur.clear();
        } else if (!isspace(static_cast<unsigned char>(ch))) {
            cur += ch;
        }
    }
    if (!cur.empty()) parts.push_back(cur);
    return parts;
}

struct SyntheticSpec {
    int M = 0;
    int L = 0;
    int count = 0;
};

SyntheticSpec parse_synthetic(const std::string& text) {
    SyntheticSpec spec;
    for (const std::string& item : split_list(text)) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos)
            invalid("synthetic spec entries look like key=value, got \"" + item +
                    "\"");
        const std::string key = item.substr(0, eq);
        const int value =
            static_cast<int>(parse_double(item.substr(eq + 1), key.c_str()));
        if (key == "M")
            spec.M = value;
        else if (key == "L")
            spec.L = value;
        else if (key == "count")
            spec.count = value;
        else
            invalid("synthetic spec knows M, L, count; got \"" + key + "\"");
    }
    if (spec.M < 1 || spec.L < 1 || spec.count < 1)
        invalid("synthetic spec needs M, L, count all >= 1");
    return spec;
}

void write_text_atomic(const fs::path& target, const std::string& text) {
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

void write_json_atomic(const fs::path& target, const json& j) {
    write_text_atomic(target, j.dump(2) + "\n");
}

void write_doubles_atomic(const fs::path& target,
                          const std::vector<double>& values) {
    std::string bytes(reinterpret_cast<const char*>(values.data()),
                      values.size() * sizeof(double));
    write_text_atomic(target, bytes);
}

std::vector<double> read_doubles(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const std::streamoff bytes = in.tellg();
    in.seekg(0, std::ios::beg);
    if (bytes % sizeof(double) != 0)
        throw std::runtime_error(path.string() + ": truncated data");
    std::vector<double> values(bytes / sizeof(double));
    in.read(reinterpret_cast<char*>(values.data()), bytes);
    if (!in) throw std::runtime_error(path.string() + ": truncated data");
    return values;
}

std::string format_g(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Common channel/data options shared by the generating subcommands.
struct SourceOpts {
    std::string config_path;
    int M = 0;
    int L = 0;
    double T = 1.0;
    std::string snr;  // empty = keep config / default 10 dB
    std::string synthetic;
    std::string data_path;
    std::string columns;
    int stride = 0;
    double rho_t = 0.9;
    double rho_s = 0.5;
    bool sum_mode = false;
    std::uint64_t seed = 0;
};

void add_source_flags(CLI::App* cmd, SourceOpts& o, bool with_snr = true) {
    cmd->add_option("--config", o.config_path, "channel config JSON path");
    cmd->add_option("--M", o.M, "sensor count (when no --config)");
    cmd->add_option("--L", o.L, "packet length (when no --config)");
    cmd->add_option("--T", o.T, "symbol period (when no --config)")
        ->capture_default_str();
    if (with_snr)
        cmd->add_option("--snr", o.snr, "channel SNR in dB (overrides config)");
    cmd->add_option("--synthetic", o.synthetic,
                    "synthetic source spec M=..,L=..,count=..");
    cmd->add_option("--data", o.data_path, "sensor CSV to ingest");
    cmd->add_option("--columns", o.columns, "CSV columns to use (names)");
    cmd->add_option("--stride", o.stride, "packetization stride (default L)");
    cmd->add_option("--rho-t", o.rho_t, "synthetic temporal correlation")
        ->capture_default_str();
    cmd->add_option("--rho-s", o.rho_s, "synthetic cross-sensor correlation")
        ->capture_default_str();
    cmd->add_flag("--sum", o.sum_mode,
                  "aggregate with a plain sum instead of the average");
    cmd->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
}

int reconcile_dim(const char* what, int flag_value, int spec_value) {
    if (flag_value > 0 && spec_value > 0 && flag_value != spec_value)
        invalid(std::string(what) + " given twice with different values");
    const int v = flag_value > 0 ? flag_value : spec_value;
    if (v < 1) invalid(std::string("missing ") + what);
    return v;
}

// Channel resolution: --config wins; otherwise evenly spaced delays and
// unit-modulus gains with phases drawn uniformly from [0, pi].
oac::ChannelConfig resolve_channel(const SourceOpts& o, int M, int L) {
    if (!o.config_path.empty()) {
        oac::ChannelConfig cfg = oac::ChannelConfig::load(o.config_path);
        if (M > 0 && cfg.M() != M) invalid("config M disagrees with data source");
        if (L > 0 && cfg.L() != L) invalid("config L disagrees with data source");
        if (!o.snr.empty()) {
            const double snr = parse_double(o.snr, "snr");
            return oac::ChannelConfig(cfg.M(), cfg.L(), cfg.T(), cfg.tau(),
                                      cfg.h(), snr);
        }
        return cfg;
    }
    const double snr = o.snr.empty() ? 10.0 : parse_double(o.snr, "snr");
    std::vector<double> tau(M);
    for (int m = 0; m < M; ++m) tau[m] = o.T * m / M;
    oac::Rng rng(oac::derive_seed(o.seed, kSaltChannel));
    std::vector<std::complex<double>> h(M);
    for (int m = 0; m < M; ++m) h[m] = std::polar(1.0, rng.uniform(0.0, M_PI));
    return oac::ChannelConfig(M, L, o.T, std::move(tau), std::move(h), snr);
}

oac::PacketSet load_packets(const SourceOpts& o, int M, int L) {
    const bool synth = !o.synthetic.empty();
    const bool ingest = !o.data_path.empty();
    if (synth == ingest)
        invalid("choose exactly one data source: --synthetic or --data");
    if (synth) {
        const SyntheticSpec spec = parse_synthetic(o.synthetic);
        const int m = reconcile_dim("M", M, spec.M);
        const int l = reconcile_dim("L", L, spec.L);
        return oac::gen_synthetic(m, l, spec.count, o.rho_t, o.rho_s,
                                  oac::derive_seed(o.seed, kSaltData));
    }
    oac::CsvLoadResult loaded = oac::load_csv(o.data_path, split_list(o.columns));
    if (loaded.dropped_rows > 0)
        std::cerr << "note: dropped " << loaded.dropped_rows
                  << " unusable CSV rows\n";
    const int m =
        M > 0 ? M : static_cast<int>(loaded.series.readings.rows());
    if (L < 1) invalid("--L is required with --data");
    const int stride = o.stride > 0 ? o.stride : L;
    return oac::packetize(loaded.series, m, L, stride);
}

json source_manifest(const SourceOpts& o, const oac::ChannelConfig& cfg) {
    json j;
    j["tool"] = "oacsim";
    j["version"] = oac::kVersion;
    j["seed"] = o.seed;
    j["channel"] = cfg.to_json();
    j["func"] = o.sum_mode ? "sum" : "average";
    if (!o.synthetic.empty()) {
        j["source"] = {{"kind", "synthetic"},
                       {"spec", o.synthetic},
                       {"rho_t", o.rho_t},
                       {"rho_s", o.rho_s}};
    } else if (!o.data_path.empty()) {
        j["source"] = {{"kind", "csv"},
                       {"path", o.data_path},
                       {"columns", o.columns},
                       {"stride", o.stride}};
    }
    return j;
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
    SourceOpts src;
    std::string out;
    int oversample = 256;
    bool oracle = false;
    std::string dump_waveform;
};

int cmd_simulate(const SimulateOpts& o) {
    oac::PacketSet packets = load_packets(o.src, o.src.M, o.src.L);
    const int M = packets.packets.front().sensors();
    const int L = packets.packets.front().length();
    const oac::ChannelConfig cfg = resolve_channel(o.src, M, L);
    const oac::OacFunction func =
        o.src.sum_mode ? oac::OacFunction::Sum : oac::OacFunction::Average;

    const int count = static_cast<int>(packets.packets.size());
    const int N = cfg.sample_count();
    std::vector<double> samples;
    std::vector<double> truth_s;
    std::vector<double> truth_splus;
    samples.reserve(static_cast<std::size_t>(count) * N * 2);
    truth_s.reserve(static_cast<std::size_t>(count) * M * L);
    truth_splus.reserve(static_cast<std::size_t>(count) * L);

    for (int i = 0; i < count; ++i) {
        const oac::SymbolBlock& s = packets.packets[i];
        oac::SampleVector clean;
        if (o.oracle) {
            const oac::Waveform w = oac::synthesize(cfg, s, o.oversample);
            clean = oac::wmfs_sample(w, cfg);
        } else {
            clean = oac::clean_channel_output(cfg, s);
        }
        const oac::NoiseLevel level = oac::noise_sigma(cfg, s);
        if (level.degenerate)
            std::cerr << "note: packet " << i
                      << " is all-zero; no noise scale defined\n";
        const oac::SampleVector y = oac::add_sample_noise(
            clean, level.sigma2, oac::derive_seed(o.src.seed, kSaltNoise, i));
        for (int n = 0; n < N; ++n) {
            samples.push_back(y[n].real());
            samples.push_back(y[n].imag());
        }
        for (int m = 0; m < M; ++m)
            for (int l = 0; l < L; ++l) truth_s.push_back(s.values()(m, l));
        const oac::TargetVector splus = oac::sum_target(s, func);
        for (int l = 0; l < L; ++l) truth_splus.push_back(splus[l]);
    }

    fs::create_directories(o.out);
    if (!o.dump_waveform.empty()) {
        const oac::Waveform w =
            oac::synthesize(cfg, packets.packets.front(), o.oversample);
        oac::write_waveform_csv(w, o.dump_waveform);
    }

    write_json_atomic(fs::path(o.out) / "channel.json", cfg.to_json());
    json sim;
    sim["count"] = count;
    sim["M"] = M;
    sim["L"] = L;
    sim["N"] = N;
    sim["func"] = o.src.sum_mode ? "sum" : "average";
    sim["oracle"] = o.oracle;
    sim["oversample"] = o.oversample;
    sim["seed"] = o.src.seed;
    write_json_atomic(fs::path(o.out) / "sim.json", sim);
    write_doubles_atomic(fs::path(o.out) / "samples.bin", samples);
    write_doubles_atomic(fs::path(o.out) / "truth_s.bin", truth_s);
    write_doubles_atomic(fs::path(o.out) / "truth_splus.bin", truth_splus);

    json manifest = source_manifest(o.src, cfg);
    manifest["command"] = "simulate";
    manifest["oracle"] = o.oracle;
    manifest["oversample"] = o.oversample;
    manifest["count"] = count;
    write_json_atomic(fs::path(o.out) / "run_manifest.json", manifest);

    std::cout << "wrote " << count << " rounds to " << o.out << "\n";
    return 0;
}

// ---------------------------------------------------------------- estimate

struct EstimateOpts {
    std::string in;
    std::string estimator = "wiener";
    std::string out;
    std::string reg;  // optional wiener regularizer override
};

struct SimDir {
    oac::ChannelConfig cfg;
    oac::OacFunction func;
    int count;
    std::vector<oac::SampleVector> samples;
    std::vector<Eigen::MatrixXd> truth_s;     // may be empty
    std::vector<oac::TargetVector> truth_splus;  // may be empty
};

SimDir read_sim_dir(const std::string& dir) {
    std::ifstream sin(fs::path(dir) / "sim.json");
    if (!sin) invalid("cannot open " + dir + "/sim.json");
    json sim;
    sin >> sim;
    const int count = sim.at("count").get<int>();
    const int M = sim.at("M").get<int>();
    const int L = sim.at("L").get<int>();
    const int N = sim.at("N").get<int>();
    const std::string func_name = sim.at("func").get<std::string>();

    SimDir d{oac::ChannelConfig::load((fs::path(dir) / "channel.json").string()),
             func_name == "sum" ? oac::OacFunction::Sum
                                : oac::OacFunction::Average,
             count,
             {},
             {},
             {}};
    if (d.cfg.M() != M || d.cfg.L() != L || d.cfg.sample_count() != N)
        invalid(dir + ": sim.json disagrees with channel.json");

    const std::vector<double> raw =
        read_doubles(fs::path(dir) / "samples.bin");
    if (raw.size() != static_cast<std::size_t>(count) * N * 2)
        throw std::runtime_error(dir + "/samples.bin: truncated data");
    d.samples.resize(count);
    for (int i = 0; i < count; ++i) {
        d.samples[i].resize(N);
        for (int n = 0; n < N; ++n)
            d.samples[i][n] = {raw[(static_cast<std::size_t>(i) * N + n) * 2],
                               raw[(static_cast<std::size_t>(i) * N + n) * 2 + 1]};
    }

    if (fs::exists(fs::path(dir) / "truth_s.bin")) {
        const std::vector<double> ts = read_doubles(fs::path(dir) / "truth_s.bin");
        if (ts.size() != static_cast<std::size_t>(count) * M * L)
            throw std::runtime_error(dir + "/truth_s.bin: truncated data");
        d.truth_s.resize(count);
        for (int i = 0; i < count; ++i) {
            d.truth_s[i].resize(M, L);
            for (int m = 0; m < M; ++m)
                for (int l = 0; l < L; ++l)
                    d.truth_s[i](m, l) =
                        ts[(static_cast<std::size_t>(i) * M + m) * L + l];
        }
    }
    if (fs::exists(fs::path(dir) / "truth_splus.bin")) {
        const std::vector<double> tp =
            read_doubles(fs::path(dir) / "truth_splus.bin");
        if (tp.size() != static_cast<std::size_t>(count) * L)
            throw std::runtime_error(dir + "/truth_splus.bin: truncated data");
        d.truth_splus.resize(count);
        for (int i = 0; i < count; ++i) {
            d.truth_splus[i].resize(L);
            for (int l = 0; l < L; ++l)
                d.truth_splus[i][l] = tp[static_cast<std::size_t>(i) * L + l];
        }
    }
    return d;
}

int cmd_estimate(const EstimateOpts& o) {
    const SimDir d = read_sim_dir(o.in);

    if (o.estimator == "wiener+denoiser") {
        // Boundary contract: emit the interchange corpus and name the
        // handoff directory; the denoiser component picks it up from there.
        if (d.truth_s.empty())
            invalid("wiener+denoiser export needs truth_s.bin in the input");
        const double reg = o.reg.empty()
                               ? oac::default_wiener_reg(d.cfg.snr_db())
                               : parse_double(o.reg, "reg");
        std::vector<oac::InterchangeRecord> records;
        records.reserve(d.count);
        for (int i = 0; i < d.count; ++i) {
            const Eigen::MatrixXcd stilde =
                oac::wiener_initial_estimate(d.samples[i], d.cfg, reg);
            records.push_back(oac::make_interchange_record(
                i, stilde, d.samples[i], oac::SymbolBlock(d.truth_s[i]),
                d.func, d.cfg.snr_db()));
        }
        oac::write_records(records, o.out);
        json manifest;
        manifest["tool"] = "oacsim";
        manifest["version"] = oac::kVersion;
        manifest["command"] = "estimate";
        manifest["estimator"] = o.estimator;
        manifest["in"] = o.in;
        manifest["records"] = d.count;
        write_json_atomic(fs::path(o.out) / "run_manifest.json", manifest);
        std::cout << "handoff: " << o.out << "\n";
        return 0;
    }

    const auto& names = oac::estimator_names();
    if (std::find(names.begin(), names.end(), o.estimator) == names.end()) {
        std::ostringstream os;
        os << "unknown estimator \"" << o.estimator << "\"; valid:";
        for (const std::string& n : names) os << " " << n;
        os << " wiener+denoiser";
        invalid(os.str());
    }

    oac::EstimatorContext ctx;
    ctx.func = d.func;
    if (!o.reg.empty()) ctx.wiener_reg = parse_double(o.reg, "reg");
    if (o.estimator == "lmmse") {
        if (d.truth_s.empty())
            invalid("lmmse needs truth_s.bin in the input for its prior");
        std::vector<oac::SymbolBlock> blocks;
        blocks.reserve(d.count);
        for (const Eigen::MatrixXd& s : d.truth_s) blocks.emplace_back(s);
        ctx.prior = oac::empirical_prior(blocks);
    }

    const bool have_truth = !d.truth_splus.empty();
    std::ostringstream csv;
    csv << (have_truth ? "packet,estimator,mse,elapsed_us\n"
                       : "packet,estimator,elapsed_us\n");
    for (int i = 0; i < d.count; ++i) {
        const oac::EstimatorOutput out =
            oac::run_estimator(o.estimator, d.samples[i], d.cfg, ctx);
        csv << i << ',' << o.estimator << ',';
        if (have_truth) csv << format_g(oac::mse(out.s_plus_hat, d.truth_splus[i])) << ',';
        csv << out.elapsed.count() / 1000 << '\n';
    }
    write_text_atomic(o.out, csv.str());

    json manifest;
    manifest["tool"] = "oacsim";
    manifest["version"] = oac::kVersion;
    manifest["command"] = "estimate";
    manifest["estimator"] = o.estimator;
    manifest["in"] = o.in;
    manifest["out"] = o.out;
    if (!o.reg.empty()) manifest["reg"] = parse_double(o.reg, "reg");
    write_json_atomic(o.out + ".manifest.json", manifest);
    std::cout << "wrote " << o.out << "\n";
    return 0;
}

// ------------------------------------------------------------------- sweep

struct SweepOpts {
    SourceOpts src;
    std::string snr = "-20:20:10";
    std::string estimators = "aligned,ls,lmmse,wiener";
    int trials = 100;
    std::string out;
    std::string reg;
    bool bench = false;
    std::string bench_L = "64,256,1024,4096";
    int bench_M = 8;
    int reps = 10;
    double budget_s = 120.0;
};

int cmd_sweep(const SweepOpts& o) {
    if (o.bench) {
        std::vector<oac::TimingPoint> grid;
        for (const std::string& item : split_list(o.bench_L))
            grid.push_back({o.bench_M,
                            static_cast<int>(parse_double(item, "bench L"))});
        std::ostringstream csv;
        csv << "estimator,M,L,reps,median_s,mean_s,bytes_per_s,error\n";
        if (split_list(o.estimators).empty()) invalid("no estimators given");
        for (const std::string& name : split_list(o.estimators)) {
            const std::vector<oac::TimingRow> rows = oac::time_estimator(
                name, grid, o.reps, o.src.seed, o.budget_s);
            for (const oac::TimingRow& row : rows) {
                std::string err = row.error;
                std::replace(err.begin(), err.end(), ',', ';');
                csv << name << ',' << row.M << ',' << row.L << ','
                    << row.reps << ',' << format_g(row.median_s) << ','
                    << format_g(row.mean_s) << ',' << format_g(row.bytes_per_s)
                    << ',' << err << '\n';
            }
        }
        fs::create_directories(o.out);
        write_text_atomic(fs::path(o.out) / "bench.csv", csv.str());
        json manifest;
        manifest["tool"] = "oacsim";
        manifest["version"] = oac::kVersion;
        manifest["command"] = "sweep --bench";
        manifest["estimators"] = o.estimators;
        manifest["L"] = o.bench_L;
        manifest["M"] = o.bench_M;
        manifest["reps"] = o.reps;
        manifest["seed"] = o.src.seed;
        write_json_atomic(fs::path(o.out) / "run_manifest.json", manifest);
        std::cout << "wrote " << (fs::path(o.out) / "bench.csv").string()
                  << "\n";
        return 0;
    }

    SourceOpts src = o.src;
    int M = src.M;
    int L = src.L;
    if (src.synthetic.empty() && src.data_path.empty()) {
        // Default source: synthetic, one fresh packet per trial.
        if (!src.config_path.empty()) {
            const oac::ChannelConfig peek =
                oac::ChannelConfig::load(src.config_path);
            M = peek.M();
            L = peek.L();
        }
        if (M < 1 || L < 1)
            invalid("sweep needs --M/--L (or --config or a data source)");
        std::ostringstream spec;
        spec << "M=" << M << ",L=" << L << ",count=" << o.trials;
        src.synthetic = spec.str();
    }
    oac::PacketSet packets = load_packets(src, M, L);
    M = packets.packets.front().sensors();
    L = packets.packets.front().length();

    oac::SweepSpec spec{resolve_channel(src, M, L),
                        parse_snr_grid(o.snr),
                        split_list(o.estimators),
                        o.trials,
                        std::move(packets.packets),
                        src.sum_mode ? oac::OacFunction::Sum
                                     : oac::OacFunction::Average,
                        src.seed,
                        std::nullopt,
                        std::nullopt};
    if (!o.reg.empty()) spec.wiener_reg = parse_double(o.reg, "reg");

    const oac::SweepResult result = oac::run_sweep(spec);
    fs::create_directories(o.out);
    oac::write_results_csv(result.rows, (fs::path(o.out) / "results.csv").string());
    oac::write_aggregate_csv(oac::aggregate(result.rows),
                             (fs::path(o.out) / "aggregate.csv").string());

    json manifest = source_manifest(src, spec.base);
    manifest["command"] = "sweep";
    manifest["snr_grid"] = spec.snr_grid_db;
    manifest["estimators"] = spec.estimators;
    manifest["trials"] = o.trials;
    int failed = 0;
    json failures = json::array();
    for (const oac::TrialResult& row : result.rows) {
        if (!row.error.empty()) {
            ++failed;
            if (failures.size() < 8)
                failures.push_back({{"estimator", row.estimator},
                                    {"snr_db", row.snr_db},
                                    {"trial", row.trial},
                                    {"error", row.error}});
        }
    }
    manifest["failed_trials"] = failed;
    manifest["failure_samples"] = failures;
    write_json_atomic(fs::path(o.out) / "run_manifest.json", manifest);

    std::cout << "wrote " << (fs::path(o.out) / "aggregate.csv").string()
              << "\n";
    return 0;
}

// --------------------------------------------------------- export-training

struct ExportOpts {
    SourceOpts src;
    std::string out;
    double snr_lo = -20.0;
    double snr_hi = 20.0;
};

int cmd_export_training(const ExportOpts& o) {
    oac::PacketSet packets = load_packets(o.src, o.src.M, o.src.L);
    const int M = packets.packets.front().sensors();
    const int L = packets.packets.front().length();
    const double T = o.src.T;
    const oac::OacFunction func =
        o.src.sum_mode ? oac::OacFunction::Sum : oac::OacFunction::Average;
    if (o.snr_hi < o.snr_lo) invalid("need snr-hi >= snr-lo");

    const int count = static_cast<int>(packets.packets.size());
    const double eps = T / 1000.0;
    std::vector<oac::InterchangeRecord> records;
    records.reserve(count);
    json channels = json::array();
    std::vector<double> raw_samples;

    for (int i = 0; i < count; ++i) {
        oac::Rng rng(oac::derive_seed(o.src.seed, kSaltChannel, i));
        // Per-record channel draw: tau_1 = 0, remaining delays are sorted
        // uniforms re-drawn until the spacing invariants hold.
        std::vector<double> tau;
        for (int attempt = 0;; ++attempt) {
            if (attempt > 1000)
                throw std::runtime_error(
                    "could not draw admissible delays; M too large for T?");
            tau.assign(1, 0.0);
            for (int m = 1; m < M; ++m) tau.push_back(rng.uniform(0.0, T));
            std::sort(tau.begin(), tau.end());
            bool ok = tau.back() <= T - eps;
            for (int m = 1; ok && m < M; ++m)
                ok = tau[m] - tau[m - 1] >= eps;
            if (ok) break;
        }
        std::vector<std::complex<double>> h(M);
        for (int m = 0; m < M; ++m)
            h[m] = std::polar(1.0, rng.uniform(0.0, M_PI));
        const double snr = rng.uniform(o.snr_lo, o.snr_hi);
        const oac::ChannelConfig cfg(M, L, T, tau, h, snr);

        const oac::SymbolBlock& s = packets.packets[i];
        const oac::SampleVector y = oac::apply_channel(
            cfg, s, oac::derive_seed(o.src.seed, kSaltNoise, i));
        const Eigen::MatrixXcd stilde = oac::wiener_initial_estimate(
            y, cfg, oac::default_wiener_reg(snr));
        records.push_back(
            oac::make_interchange_record(i, stilde, y, s, func, snr));

        channels.push_back({{"record", i}, {"channel", cfg.to_json()}});
        for (int n = 0; n < cfg.sample_count(); ++n) {
            raw_samples.push_back(y[n].real());
            raw_samples.push_back(y[n].imag());
        }
    }

    oac::write_records(records, o.out);
    // Sidecars: full channel draws and the untruncated sample vectors, so
    // the stored Wiener channels can be recomputed and audited exactly.
    write_json_atomic(fs::path(o.out) / "channels.json", channels);
    write_doubles_atomic(fs::path(o.out) / "samples.bin", raw_samples);

    json manifest = source_manifest(o.src, oac::ChannelConfig(
        M, L, T, [&] {
            std::vector<double> t(M);
            for (int m = 0; m < M; ++m) t[m] = T * m / M;
            return t;
        }(), std::vector<std::complex<double>>(M, {1.0, 0.0}), 10.0));
    manifest["command"] = "export-training";
    manifest["count"] = count;
    manifest["snr_range"] = {o.snr_lo, o.snr_hi};
    manifest["note"] =
        "channel field shows placeholder; per-record draws in channels.json";
    write_json_atomic(fs::path(o.out) / "run_manifest.json", manifest);

    std::cout << "wrote " << count << " records to " << o.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"misaligned over-the-air computation simulator"};
    app.require_subcommand(1);

    SimulateOpts sim;
    CLI::App* c_sim = app.add_subcommand("simulate",
                                         "generate packets and channel samples");
    add_source_flags(c_sim, sim.src);
    c_sim->add_option("--out", sim.out, "output directory")->required();
    c_sim->add_option("--oversample", sim.oversample,
                      "bins per symbol period for the continuous path")
        ->capture_default_str();
    c_sim->add_flag("--oracle", sim.oracle,
                    "route the signal through the continuous-time path");
    c_sim->add_option("--dump-waveform", sim.dump_waveform,
                      "debug CSV of the first packet's waveform");

    EstimateOpts est;
    CLI::App* c_est = app.add_subcommand("estimate", "run one estimator on a "
                                                     "simulate output directory");
    c_est->add_option("--in", est.in, "simulate output directory")->required();
    c_est->add_option("--estimator", est.estimator,
                      "aligned | ls | lmmse | wiener | wiener+denoiser")
        ->capture_default_str();
    c_est->add_option("--out", est.out,
                      "estimates CSV (or handoff directory for "
                      "wiener+denoiser)")
        ->required();
    c_est->add_option("--reg", est.reg, "wiener regularizer override");

    SweepOpts sw;
    CLI::App* c_sw = app.add_subcommand("sweep",
                                        "Monte-Carlo MSE sweep or --bench timing");
    add_source_flags(c_sw, sw.src, false);
    c_sw->add_option("--snr", sw.snr, "SNR grid lo:hi:step or single value")
        ->capture_default_str();
    c_sw->add_option("--estimators", sw.estimators, "comma list")
        ->capture_default_str();
    c_sw->add_option("--trials", sw.trials, "trials per grid point")
        ->capture_default_str();
    c_sw->add_option("--out", sw.out, "output directory")->required();
    c_sw->add_option("--reg", sw.reg, "wiener regularizer override");
    c_sw->add_flag("--bench", sw.bench, "measure runtimes instead of MSE");
    c_sw->add_option("--bench-L", sw.bench_L, "packet lengths for --bench")
        ->capture_default_str();
    c_sw->add_option("--bench-M", sw.bench_M, "sensor count for --bench")
        ->capture_default_str();
    c_sw->add_option("--reps", sw.reps, "repetitions per timing point")
        ->capture_default_str();
    c_sw->add_option("--budget-s", sw.budget_s,
                     "per-point timing budget in seconds")
        ->capture_default_str();

    ExportOpts ex;
    CLI::App* c_ex = app.add_subcommand(
        "export-training", "emit an interchange corpus with per-record "
                           "randomized channels");
    add_source_flags(c_ex, ex.src, false);
    c_ex->add_option("--out", ex.out, "corpus directory")->required();
    c_ex->add_option("--snr-lo", ex.snr_lo, "SNR draw lower bound (dB)")
        ->capture_default_str();
    c_ex->add_option("--snr-hi", ex.snr_hi, "SNR draw upper bound (dB)")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (c_sim->parsed()) return cmd_simulate(sim);
        if (c_est->parsed()) return cmd_estimate(est);
        if (c_sw->parsed()) return cmd_sweep(sw);
        if (c_ex->parsed()) return cmd_export_training(ex);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const oac::EstimatorError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
