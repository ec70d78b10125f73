#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "oac/channel.hpp"
#include "oac/model.hpp"
#include "oac/packet.hpp"
#include "oac/rng.hpp"

using namespace oac;
using Catch = std::invalid_argument;

namespace {

ChannelConfig two_sensor_example(double snr = 10.0) {
    return ChannelConfig(2, 2, 1.0, {0.0, 0.5},
                         {{1.0, 0.0}, {0.0, 1.0}}, snr);
}

SymbolBlock example_block() {
    Eigen::MatrixXd v(2, 2);
    v << 1, 3, 2, 4;
    return SymbolBlock(v);
}

}  // namespace

TEST_CASE("derive_seed decorrelates and is deterministic") {
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
    CHECK(derive_seed(0, 0) != 0);
}

TEST_CASE("rng streams are deterministic and well-scaled") {
    Rng a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
    Rng r(11);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    double mean = 0.0, sq = 0.0;
    const int n = 200000;
    Rng g(13);
    for (int i = 0; i < n; ++i) {
        const double x = g.gaussian();
        mean += x;
        sq += x * x;
    }
    mean /= n;
    sq /= n;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(sq - 1.0) < 0.03);

    Rng c(17);
    double cmean = 0.0;
    const double sigma2 = 2.5;
    for (int i = 0; i < n; ++i) cmean += std::norm(c.complex_gaussian(sigma2));
    CHECK(std::abs(cmean / n - sigma2) < 0.08);
}

TEST_CASE("channel config validates its invariants") {
    CHECK_NOTHROW(two_sensor_example());
    CHECK_NOTHROW(ChannelConfig(1, 3, 1.0, {0.0}, {{1.0, 0.0}}, 0.0));

    // M and dimension agreement
    CHECK_THROWS_AS(ChannelConfig(0, 2, 1.0, {}, {}, 0.0), Catch);
    CHECK_THROWS_AS(ChannelConfig(2, 0, 1.0, {0.0, 0.5},
                                  {{1, 0}, {1, 0}}, 0.0), Catch);
    CHECK_THROWS_AS(ChannelConfig(2, 2, 1.0, {0.0}, {{1, 0}, {1, 0}}, 0.0),
                    Catch);
    // delay reference, ordering, minimum gap, room before the period end
    CHECK_THROWS_AS(ChannelConfig(2, 2, 1.0, {0.1, 0.5}, {{1, 0}, {1, 0}}, 0.0),
                    Catch);
    CHECK_THROWS_AS(ChannelConfig(2, 2, 1.0, {0.0, 0.5e-4},
                                  {{1, 0}, {1, 0}}, 0.0), Catch);
    CHECK_THROWS_AS(ChannelConfig(2, 2, 1.0, {0.0, 0.9999},
                                  {{1, 0}, {1, 0}}, 0.0), Catch);
    CHECK_THROWS_AS(ChannelConfig(2, 2, 1.0, {0.5, 0.0}, {{1, 0}, {1, 0}}, 0.0),
                    Catch);
    // gains nonzero and finite
    CHECK_THROWS_AS(ChannelConfig(2, 2, 1.0, {0.0, 0.5}, {{0, 0}, {1, 0}}, 0.0),
                    Catch);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(ChannelConfig(2, 2, 1.0, {0.0, 0.5}, {{inf, 0}, {1, 0}},
                                  0.0), Catch);
    // period and snr
    CHECK_THROWS_AS(ChannelConfig(2, 2, 0.0, {0.0, 0.5}, {{1, 0}, {1, 0}}, 0.0),
                    Catch);
    CHECK_THROWS_AS(ChannelConfig(2, 2, 1.0, {0.0, 0.5}, {{1, 0}, {1, 0}},
                                  std::nan("")), Catch);
    CHECK_THROWS_AS(ChannelConfig(2, 2, 1.0, {0.0, 0.5}, {{1, 0}, {1, 0}},
                                  -inf), Catch);
    // +inf snr is the noiseless sentinel
    const ChannelConfig noiseless(2, 2, 1.0, {0.0, 0.5}, {{1, 0}, {1, 0}}, inf);
    CHECK(noiseless.noiseless());
    CHECK_FALSE(two_sensor_example().noiseless());
}

TEST_CASE("channel config derived quantities") {
    const ChannelConfig cfg = two_sensor_example();
    CHECK(cfg.sample_count() == 5);  // M(L+1)-1
    CHECK(cfg.epsilon_tau() == doctest::Approx(1e-3));
    CHECK(ChannelConfig(1, 3, 1.0, {0.0}, {{1, 0}}, 0.0).sample_count() == 3);
}

TEST_CASE("channel config json round-trip") {
    const ChannelConfig cfg = two_sensor_example(7.5);
    const ChannelConfig back = ChannelConfig::from_json(cfg.to_json());
    CHECK(back.M() == cfg.M());
    CHECK(back.L() == cfg.L());
    CHECK(back.T() == cfg.T());
    CHECK(back.tau() == cfg.tau());
    CHECK(back.h() == cfg.h());
    CHECK(back.snr_db() == cfg.snr_db());

    // the +inf sentinel survives JSON (stored as null)
    const double inf = std::numeric_limits<double>::infinity();
    const ChannelConfig quiet(2, 2, 1.0, {0.0, 0.5}, {{1, 0}, {1, 0}}, inf);
    CHECK(ChannelConfig::from_json(quiet.to_json()).noiseless());

    auto j = cfg.to_json();
    j.erase("tau");
    CHECK_THROWS_AS(ChannelConfig::from_json(j), Catch);
    auto j2 = cfg.to_json();
    j2["bogus"] = 1;
    CHECK_THROWS_AS(ChannelConfig::from_json(j2), Catch);

    const std::string path = "/tmp/oac_test_channel.json";
    cfg.save(path);
    const ChannelConfig loaded = ChannelConfig::load(path);
    CHECK(loaded.h() == cfg.h());
    std::filesystem::remove(path);
}

TEST_CASE("index helpers match the interleaving conventions") {
    // s vector: l*M + k; y vector: i*M + m (all zero-based)
    CHECK(interleaved_index(0, 0, 2) == 0);
    CHECK(interleaved_index(1, 0, 2) == 1);
    CHECK(interleaved_index(0, 1, 2) == 2);
    CHECK(interleaved_index(1, 1, 2) == 3);
    CHECK(sample_index(0, 0, 2) == 0);
    CHECK(sample_index(1, 2, 2) == 5);
}

TEST_CASE("symbol block validation and flatten round-trip") {
    CHECK_THROWS_AS(SymbolBlock(Eigen::MatrixXd(0, 2)), Catch);
    Eigen::MatrixXd neg(1, 2);
    neg << 1, -0.5;
    CHECK_THROWS_AS(SymbolBlock{neg}, Catch);
    Eigen::MatrixXd nan(1, 1);
    nan << std::nan("");
    CHECK_THROWS_AS(SymbolBlock{nan}, Catch);

    const SymbolBlock s = example_block();
    const InterleavedSymbolVector flat = flatten(s);
    REQUIRE(flat.size() == 4);
    CHECK(flat[0] == std::complex<double>(1, 0));
    CHECK(flat[1] == std::complex<double>(2, 0));
    CHECK(flat[2] == std::complex<double>(3, 0));
    CHECK(flat[3] == std::complex<double>(4, 0));

    const SymbolBlock back = unflatten(flat, 2, 2);
    CHECK(back.values() == s.values());

    InterleavedSymbolVector complex_flat = flat;
    complex_flat[1] += std::complex<double>(0, 1e-9);
    CHECK_THROWS_AS(unflatten(complex_flat, 2, 2), Catch);
}

TEST_CASE("sum_target sums columns and optionally averages") {
    const SymbolBlock s = example_block();
    const TargetVector summed = sum_target(s, OacFunction::Sum);
    CHECK(summed[0] == 3.0);
    CHECK(summed[1] == 7.0);
    const TargetVector avg = sum_target(s, OacFunction::Average);
    CHECK(avg[0] == 1.5);
    CHECK(avg[1] == 3.5);

    Eigen::MatrixXd one(1, 3);
    one << 2, 4, 6;
    const TargetVector same = sum_target(SymbolBlock(one), OacFunction::Sum);
    CHECK(same[0] == 2.0);
    CHECK(same[2] == 6.0);
}

TEST_CASE("build_D matches the hand-expanded staircase") {
    const Eigen::MatrixXcd D = build_D(two_sensor_example());
    REQUIRE(D.rows() == 5);
    REQUIRE(D.cols() == 4);
    const std::complex<double> h1(1, 0), h2(0, 1), z(0, 0);
    Eigen::MatrixXcd want(5, 4);
    want << h1, z, z, z,
            h1, h2, z, z,
            z, h2, h1, z,
            z, z, h1, h2,
            z, z, z, h2;
    CHECK((D - want).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_D single sensor is the gain-scaled identity") {
    const ChannelConfig cfg(1, 3, 1.0, {0.0}, {{1.0, 0.0}}, 10.0);
    const Eigen::MatrixXcd D = build_D(cfg);
    CHECK(D.isApprox(Eigen::MatrixXcd::Identity(3, 3)));
}

TEST_CASE("build_D agrees with the direct double-loop sum") {
    // Independent oracle: y_m[i] = sum_k h_k s_k[i - [k>m]] with one-based
    // symbol indices; out-of-range symbols are zero.
    Rng rng(21);
    const int M = 3, L = 4;
    const ChannelConfig cfg = testutil::random_config(rng, M, L, 64);
    const SymbolBlock s = testutil::random_block(rng, M, L);
    const InterleavedSymbolVector flat = flatten(s);
    const Eigen::VectorXcd got = build_D(cfg) * flat;

    for (int i = 1; i <= L + 1; ++i) {
        for (int m = 1; m <= M; ++m) {
            const int row = (i - 1) * M + m - 1;
            if (row >= cfg.sample_count()) continue;
            std::complex<double> want(0, 0);
            for (int k = 1; k <= M; ++k) {
                const int l = i - (k > m ? 1 : 0);
                if (l >= 1 && l <= L)
                    want += cfg.h()[k - 1] * s.values()(k - 1, l - 1);
            }
            CHECK(std::abs(got[row] - want) <= 1e-12);
        }
    }
}

TEST_CASE("build_D staircase support: M nonzeros inside, fewer at the ends") {
    Rng rng(33);
    const ChannelConfig cfg = testutil::random_config(rng, 4, 6, 64);
    const Eigen::MatrixXcd D = build_D(cfg);
    const int M = 4;
    for (int r = 0; r < D.rows(); ++r) {
        int nz = 0;
        for (int c = 0; c < D.cols(); ++c)
            if (D(r, c) != std::complex<double>(0, 0)) ++nz;
        if (r >= M - 1 && r < D.rows() - (M - 1))
            CHECK(nz == M);
        else
            CHECK(nz < M);
    }
}

TEST_CASE("build_D has full column rank") {
    Rng rng(55);
    for (int rep = 0; rep < 5; ++rep) {
        const int M = 1 + static_cast<int>(rng.uniform() * 5);
        const int L = 1 + static_cast<int>(rng.uniform() * 8);
        const ChannelConfig cfg = testutil::random_config(rng, M, L, 128);
        const Eigen::MatrixXcd D = build_D(cfg);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(D);
        CHECK(qr.rank() == M * L);
    }
}

TEST_CASE("decompose_convolutional exposes the all-ones kernel") {
    Rng rng(66);
    const ChannelConfig cfg3 = testutil::random_config(rng, 3, 4, 64);
    const ConvolutionalForm f3 = decompose_convolutional(cfg3);
    REQUIRE(f3.kernel.size() == 3);
    CHECK(f3.kernel == Eigen::VectorXd::Ones(3));
    for (int l = 0; l < 4; ++l)
        for (int k = 0; k < 3; ++k)
            CHECK(f3.gain_diag[l * 3 + k] == cfg3.h()[k]);

    const ChannelConfig cfg1(1, 2, 1.0, {0.0}, {{2.0, 0.0}}, 10.0);
    const ConvolutionalForm f1 = decompose_convolutional(cfg1);
    REQUIRE(f1.kernel.size() == 1);
    CHECK(f1.kernel[0] == 1.0);
    Eigen::VectorXcd x(2);
    x << std::complex<double>(3, 1), std::complex<double>(5, 0);
    CHECK(convolve_ones(1, x) == x);
}

TEST_CASE("convolution of the example matches the hand result") {
    Eigen::VectorXcd gx(4);
    gx << std::complex<double>(1, 0), std::complex<double>(0, 2),
          std::complex<double>(3, 0), std::complex<double>(0, 4);
    const Eigen::VectorXcd y = convolve_ones(2, gx);
    REQUIRE(y.size() == 5);
    CHECK(y[0] == std::complex<double>(1, 0));
    CHECK(y[1] == std::complex<double>(1, 2));
    CHECK(y[2] == std::complex<double>(3, 2));
    CHECK(y[3] == std::complex<double>(3, 4));
    CHECK(y[4] == std::complex<double>(0, 4));
}

TEST_CASE("matrix and convolution routes agree everywhere") {
    Rng rng(77);
    for (int rep = 0; rep < 50; ++rep) {
        const int M = 1 + static_cast<int>(rng.uniform() * 6);
        const int L = 1 + static_cast<int>(rng.uniform() * 16);
        const ChannelConfig cfg = testutil::random_config(rng, M, L, 256);
        const SymbolBlock s = testutil::random_block(rng, M, L);
        const InterleavedSymbolVector flat = flatten(s);
        const Eigen::VectorXcd via_matrix = build_D(cfg) * flat;
        const ConvolutionalForm form = decompose_convolutional(cfg);
        const Eigen::VectorXcd via_conv =
            convolve_ones(M, form.gain_diag.cwiseProduct(flat));
        REQUIRE(via_matrix.size() == via_conv.size());
        CHECK((via_matrix - via_conv).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("noise_sigma implements the Es/N0 convention") {
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(2, 2);
    const ChannelConfig at0 = two_sensor_example(0.0);
    CHECK(noise_sigma(at0, SymbolBlock(ones)).sigma2 == doctest::Approx(1.0));
    const ChannelConfig at20 = two_sensor_example(20.0);
    CHECK(noise_sigma(at20, SymbolBlock(ones)).sigma2 ==
          doctest::Approx(0.01));
    CHECK(noise_sigma(at0, example_block()).sigma2 == doctest::Approx(7.5));
    CHECK(noise_sigma(at0, example_block()).symbol_energy ==
          doctest::Approx(7.5));

    // degenerate all-zero packet: zero sigma plus the warning flag
    const NoiseLevel level =
        noise_sigma(at0, SymbolBlock(Eigen::MatrixXd::Zero(2, 2)));
    CHECK(level.sigma2 == 0.0);
    CHECK(level.degenerate);
    CHECK_FALSE(noise_sigma(at0, example_block()).degenerate);

    const double inf = std::numeric_limits<double>::infinity();
    const ChannelConfig quiet(2, 2, 1.0, {0.0, 0.5}, {{1, 0}, {0, 1}}, inf);
    CHECK(noise_sigma(quiet, example_block()).sigma2 == 0.0);
}

TEST_CASE("apply_channel noiseless equals the convolution example") {
    const double inf = std::numeric_limits<double>::infinity();
    const ChannelConfig cfg(2, 2, 1.0, {0.0, 0.5}, {{1, 0}, {0, 1}}, inf);
    const SampleVector y = apply_channel(cfg, example_block(), 1);
    REQUIRE(y.size() == 5);
    CHECK(std::abs(y[0] - std::complex<double>(1, 0)) <= 1e-15);
    CHECK(std::abs(y[1] - std::complex<double>(1, 2)) <= 1e-15);
    CHECK(std::abs(y[2] - std::complex<double>(3, 2)) <= 1e-15);
    CHECK(std::abs(y[3] - std::complex<double>(3, 4)) <= 1e-15);
    CHECK(std::abs(y[4] - std::complex<double>(0, 4)) <= 1e-15);
}

TEST_CASE("apply_channel single sensor with unit gain is the identity") {
    const double inf = std::numeric_limits<double>::infinity();
    const ChannelConfig cfg(1, 2, 1.0, {0.0}, {{1, 0}}, inf);
    Eigen::MatrixXd v(1, 2);
    v << 4, 9;
    const SampleVector y = apply_channel(cfg, SymbolBlock(v), 0);
    CHECK(y[0] == std::complex<double>(4, 0));
    CHECK(y[1] == std::complex<double>(9, 0));
}

TEST_CASE("apply_channel is deterministic in the seed") {
    const ChannelConfig cfg = two_sensor_example(0.0);
    const SampleVector a = apply_channel(cfg, example_block(), 42);
    const SampleVector b = apply_channel(cfg, example_block(), 42);
    CHECK(a == b);
    const SampleVector c = apply_channel(cfg, example_block(), 43);
    CHECK(a != c);
}

TEST_CASE("add_sample_noise injects the requested variance") {
    const SampleVector clean = SampleVector::Zero(2000);
    CHECK(add_sample_noise(clean, 0.0, 5) == clean);
    CHECK_THROWS_AS(add_sample_noise(clean, -1.0, 5), Catch);

    const double sigma2 = 3.0;
    const SampleVector noisy = add_sample_noise(clean, sigma2, 5);
    double power = 0.0;
    for (int i = 0; i < noisy.size(); ++i) power += std::norm(noisy[i]);
    CHECK(power / noisy.size() == doctest::Approx(sigma2).epsilon(0.1));
}
