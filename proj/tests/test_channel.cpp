#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "simosec/channel.hpp"
#include "simosec/rng.hpp"

using namespace simosec;
using namespace simosec::channel;

TEST_CASE("steering at broadside is uniform 1/sqrt(N)") {
    const auto g = steering(6, 0.0, 0.5);
    REQUIRE(g.size() == 6);
    for (const cdouble &v : g) {
        CHECK_THAT(v.real(), Catch::Matchers::WithinAbs(1.0 / std::sqrt(6.0), 1e-15));
        CHECK_THAT(v.imag(), Catch::Matchers::WithinAbs(0.0, 1e-15));
    }
}

TEST_CASE("steering vectors have unit norm for random sizes and angles") {
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + rng.uniform_int(16);
        const double phi = rng.uniform(-std::numbers::pi / 2, std::numbers::pi / 2);
        const auto g = steering(n, phi, 0.5);
        double norm = 0.0;
        for (const cdouble &v : g)
            norm += std::norm(v);
        CHECK_THAT(norm, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
    CHECK_THROWS_AS(steering(0, 0.0, 0.5), std::invalid_argument);
}

TEST_CASE("steering endfire with half-wavelength spacing alternates sign") {
    const auto g = steering(2, std::numbers::pi / 2, 0.5);
    const double v = 1.0 / std::sqrt(2.0);
    CHECK_THAT(g[0].real(), Catch::Matchers::WithinAbs(v, 1e-12));
    CHECK_THAT(g[1].real(), Catch::Matchers::WithinAbs(-v, 1e-12));
    CHECK_THAT(g[1].imag(), Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("single-path channels are scaled steering vectors") {
    ChannelConfig cfg;
    cfg.n_paths = 1;
    Rng rng(9);
    const SimoChannel ch = gen_channel(cfg, rng);
    REQUIRE(ch.h.size() == 6);
    const double mag = std::abs(ch.h[0]);
    for (const cdouble &v : ch.h)
        CHECK_THAT(std::abs(v), Catch::Matchers::WithinAbs(mag, 1e-12));
}

TEST_CASE("channels reconstruct from their stored paths") {
    ChannelConfig cfg;
    Rng rng(10);
    for (int trial = 0; trial < 50; ++trial) {
        const SimoChannel ch = gen_channel(cfg, rng);
        std::vector<cdouble> rebuilt(cfg.n_rx, {0.0, 0.0});
        for (const PathComponent &p : ch.paths) {
            const auto g = steering(cfg.n_rx, p.aoa_rad, cfg.spacing_ratio);
            for (int i = 0; i < cfg.n_rx; ++i)
                rebuilt[i] += p.gain * g[i];
        }
        for (int i = 0; i < cfg.n_rx; ++i)
            CHECK(std::abs(rebuilt[i] - ch.h[i]) < 1e-12);
    }
}

TEST_CASE("same seed reproduces the channel draw") {
    ChannelConfig cfg;
    Rng a(33), b(33);
    const SimoChannel ca = gen_channel(cfg, a);
    const SimoChannel cb = gen_channel(cfg, b);
    for (int i = 0; i < cfg.n_rx; ++i)
        CHECK(ca.h[i] == cb.h[i]);
}

TEST_CASE("mean channel energy equals the path count") {
    ChannelConfig cfg; // L = 3
    Rng rng(55);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        sum += gen_channel(cfg, rng).norm_sq();
    CHECK(std::abs(sum / n / 3.0 - 1.0) < 0.02);
}

TEST_CASE("iid profile draws unit-variance entries") {
    ChannelConfig cfg;
    cfg.profile = Profile::iid_rayleigh;
    Rng rng(56);
    double sum = 0.0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
        const SimoChannel ch = gen_channel(cfg, rng);
        CHECK(ch.paths.empty());
        sum += ch.norm_sq();
    }
    CHECK(std::abs(sum / n / 6.0 - 1.0) < 0.02);
}

TEST_CASE("snr_to_sigma2 arithmetic") {
    CHECK_THAT(snr_to_sigma2(0.0, 1.0), Catch::Matchers::WithinAbs(1.0, 1e-15));
    CHECK_THAT(snr_to_sigma2(10.0, 1.0), Catch::Matchers::WithinAbs(0.1, 1e-15));
    CHECK_THAT(snr_to_sigma2(18.0, 1.0), Catch::Matchers::WithinAbs(0.015848931924611134, 1e-15));
    CHECK_THROWS_AS(snr_to_sigma2(10.0, 0.0), std::invalid_argument);
}

TEST_CASE("noiseless transmit is the exact channel product") {
    ChannelConfig cfg;
    Rng rng(60);
    const SimoChannel ch = gen_channel(cfg, rng);
    const cdouble x{0.7, -0.3};
    const auto y = transmit(x, ch, {0.0}, rng);
    for (int i = 0; i < cfg.n_rx; ++i)
        CHECK(y[i] == ch.h[i] * x);
}

TEST_CASE("noise power calibrates to sigma2 per antenna") {
    ChannelConfig cfg;
    cfg.n_rx = 4;
    Rng rng(61);
    const SimoChannel ch = gen_channel(cfg, rng);
    const double sigma2 = 0.37;
    double sum = 0.0;
    const int n = 25000; // 4 antennas -> 1e5 noise draws
    for (int i = 0; i < n; ++i) {
        const auto y = transmit({0.0, 0.0}, ch, {sigma2}, rng);
        for (const cdouble &v : y)
            sum += std::norm(v);
    }
    CHECK(std::abs(sum / (n * 4) / sigma2 - 1.0) < 0.02);
}

TEST_CASE("transmit is linear given a shared noise seed") {
    ChannelConfig cfg;
    Rng rng(62);
    const SimoChannel ch = gen_channel(cfg, rng);
    const cdouble x{0.5, 0.25};
    const cdouble a{2.0, 0.0};
    Rng n1(99), n2(99);
    const auto y1 = transmit(x, ch, {0.2}, n1);
    const auto y2 = transmit(a * x, ch, {0.2}, n2);
    for (int i = 0; i < cfg.n_rx; ++i) {
        const cdouble noise1 = y1[i] - ch.h[i] * x;
        const cdouble noise2 = y2[i] - ch.h[i] * (a * x);
        CHECK(std::abs(noise1 - noise2) < 1e-15);
    }
}

TEST_CASE("legitimate and eavesdropper channels from split streams are uncorrelated") {
    ChannelConfig cfg;
    Rng master(70);
    Rng rng_r = master.split(1);
    Rng rng_e = master.split(2);
    cdouble acc{0.0, 0.0};
    double pow_r = 0.0, pow_e = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const SimoChannel hr = gen_channel(cfg, rng_r);
        const SimoChannel he = gen_channel(cfg, rng_e);
        for (int k = 0; k < cfg.n_rx; ++k) {
            acc += hr.h[k] * std::conj(he.h[k]);
            pow_r += std::norm(hr.h[k]);
            pow_e += std::norm(he.h[k]);
        }
    }
    const double corr = std::abs(acc) / std::sqrt(pow_r * pow_e);
    CHECK(corr < 0.02);
}
