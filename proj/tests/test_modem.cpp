#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "simosec/modem.hpp"
#include "simosec/rng.hpp"

using namespace simosec;
using namespace simosec::modem;

TEST_CASE("build_qam rejects unsupported orders") {
    CHECK_THROWS_AS(build_qam(5), std::invalid_argument);
    CHECK_THROWS_AS(build_qam(8), std::invalid_argument);
    CHECK_THROWS_AS(build_qam(0), std::invalid_argument);
    CHECK_THROWS_AS(build_qam(-16), std::invalid_argument);
    CHECK_THROWS_AS(build_qam(256), std::invalid_argument);
}

TEST_CASE("QPSK constellation is the four half-sqrt2 corners") {
    const Constellation c = build_qam(4);
    REQUIRE(c.points.size() == 4);
    const double v = 1.0 / std::sqrt(2.0);
    std::set<std::pair<double, double>> expected{{v, v}, {v, -v}, {-v, v}, {-v, -v}};
    for (const cdouble &p : c.points) {
        bool found = false;
        for (const auto &[re, im] : expected)
            if (std::abs(p.real() - re) < 1e-12 && std::abs(p.imag() - im) < 1e-12)
                found = true;
        CHECK(found);
        CHECK(std::abs(std::abs(p) - 1.0) < 1e-12);
    }
}

TEST_CASE("constellations are unit average energy with distinct grid points") {
    for (const int m : {4, 16, 64}) {
        const Constellation c = build_qam(m);
        REQUIRE(static_cast<int>(c.points.size()) == m);
        double energy = 0.0;
        std::set<std::pair<long, long>> distinct;
        for (const cdouble &p : c.points) {
            energy += std::norm(p);
            distinct.insert({std::lround(p.real() * 1e9), std::lround(p.imag() * 1e9)});
        }
        CHECK(std::abs(energy / m - 1.0) < 1e-12);
        CHECK(static_cast<int>(distinct.size()) == m);
    }
}

TEST_CASE("16-QAM grid levels are +-1,+-3 over sqrt(10)") {
    const Constellation c = build_qam(16);
    const double s = 1.0 / std::sqrt(10.0);
    for (const cdouble &p : c.points) {
        const double li = p.real() / s, lq = p.imag() / s;
        CHECK(std::abs(std::abs(li) - 1.0) * std::abs(std::abs(li) - 3.0) < 1e-9);
        CHECK(std::abs(std::abs(lq) - 1.0) * std::abs(std::abs(lq) - 3.0) < 1e-9);
    }
}

TEST_CASE("Gray property: grid neighbors differ in exactly one bit") {
    for (const int m : {4, 16, 64}) {
        const Constellation c = build_qam(m);
        const double step = 2.0 / std::sqrt(2.0 * (m - 1) / 3.0);
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) {
                const cdouble d = c.points[a] - c.points[b];
                const bool adjacent = (std::abs(std::abs(d.real()) - step) < 1e-9 &&
                                       std::abs(d.imag()) < 1e-9) ||
                                      (std::abs(std::abs(d.imag()) - step) < 1e-9 &&
                                       std::abs(d.real()) < 1e-9);
                if (adjacent)
                    CHECK(bit_errors(a, b) == 1);
            }
        }
    }
}

TEST_CASE("bits_to_symbols maps the zero pattern and rejects bad lengths") {
    const Constellation c = build_qam(16);
    CHECK(bits_to_symbols({0, 0, 0, 0}, c) == std::vector<SymbolIndex>{0});
    CHECK(bits_to_symbols({1, 0, 0, 1}, c) == std::vector<SymbolIndex>{9});
    CHECK_THROWS_AS(bits_to_symbols({0, 0, 0}, c), std::invalid_argument);
}

TEST_CASE("bit round trip through symbols is the identity") {
    Rng rng(42);
    for (const int m : {4, 16, 64}) {
        const Constellation c = build_qam(m);
        std::vector<int> bits(4096 / 4 * c.bits_per_symbol);
        for (int &b : bits)
            b = rng.uniform_int(2);
        const auto symbols = bits_to_symbols(bits, c);
        CHECK(symbols_to_bits(symbols, c) == bits);
    }
}

TEST_CASE("map returns the stored point and validates the index") {
    const Constellation c = build_qam(4);
    for (int s = 0; s < 4; ++s)
        CHECK(map(c, s) == c.points[s]);
    CHECK_THROWS_AS(map(c, 4), std::invalid_argument);
    CHECK_THROWS_AS(map(c, -1), std::invalid_argument);
}

TEST_CASE("mapped uniform symbols have unit energy in the mean") {
    Rng rng(7);
    const Constellation c = build_qam(16);
    double energy = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        energy += std::norm(map(c, rng.uniform_int(16)));
    CHECK(std::abs(energy / n - 1.0) < 0.01);
}

TEST_CASE("demap_nearest recovers exact points and tolerates small noise") {
    Rng rng(3);
    for (const int m : {4, 16, 64}) {
        const Constellation c = build_qam(m);
        // half minimum distance of the square grid
        const double half_dmin = 1.0 / std::sqrt(2.0 * (m - 1) / 3.0);
        for (int s = 0; s < m; ++s) {
            CHECK(demap_nearest(c.points[s], c) == s);
            const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double rad = rng.uniform(0.0, 0.95 * half_dmin);
            const cdouble y = c.points[s] + cdouble{rad * std::cos(ang), rad * std::sin(ang)};
            CHECK(demap_nearest(y, c) == s);
        }
    }
}

TEST_CASE("demap_nearest ties break to the lowest index") {
    // the origin ties all four QPSK points exactly (squares kill the signs)
    const Constellation q = build_qam(4);
    CHECK(demap_nearest({0.0, 0.0}, q) == 0);

    // midpoints of mirror-image pairs have a zero coordinate, so the two
    // distances are bit-identical; enumerate the full argmin with the tie
    // rule as the oracle
    const Constellation c = build_qam(16);
    const auto oracle = [&](cdouble y) {
        double best = std::norm(y - c.points[0]);
        for (int s = 1; s < 16; ++s)
            best = std::min(best, std::norm(y - c.points[s]));
        for (int s = 0; s < 16; ++s)
            if (std::norm(y - c.points[s]) == best)
                return s;
        return -1;
    };
    int exact_ties = 0;
    for (int a = 0; a < 16; ++a) {
        for (int b = a + 1; b < 16; ++b) {
            const cdouble pa = c.points[a], pb = c.points[b];
            const bool mirror = (pa.real() == -pb.real() && pa.imag() == pb.imag()) ||
                                (pa.imag() == -pb.imag() && pa.real() == pb.real());
            if (!mirror)
                continue;
            const cdouble mid = 0.5 * (pa + pb);
            REQUIRE(std::norm(mid - pa) == std::norm(mid - pb));
            CHECK(demap_nearest(mid, c) == oracle(mid));
            ++exact_ties;
        }
    }
    CHECK(exact_ties > 0);
}

TEST_CASE("demap_nearest rejects non-finite input") {
    const Constellation c = build_qam(16);
    CHECK_THROWS_AS(demap_nearest({std::nan(""), 0.0}, c), std::invalid_argument);
    CHECK_THROWS_AS(demap_nearest({0.0, 1.0 / 0.0}, c), std::invalid_argument);
}

TEST_CASE("noiseless modulate-demodulate round trip over random messages") {
    Rng rng(11);
    for (const int m : {4, 16, 64}) {
        const Constellation c = build_qam(m);
        for (int i = 0; i < 10000; ++i) {
            const int s = rng.uniform_int(m);
            REQUIRE(demap_nearest(map(c, s), c) == s);
        }
    }
}
