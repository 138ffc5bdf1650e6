// Deterministic random number utilities.
//
// All stochastic code in the library draws through Rng so that a run is
// reproducible bit-for-bit from a single master seed. std::mt19937_64 is
// bit-exact across implementations; the uniform/gaussian mappings below are
// written out explicitly instead of using std::*_distribution, whose output
// is implementation-defined.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string_view>

namespace simosec {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    int uniform_int(int n) {
        if (n <= 0)
            throw std::invalid_argument("uniform_int: n must be positive");
        // rejection sampling keeps the draw unbiased
        const std::uint64_t un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
        std::uint64_t v = eng_();
        while (v >= limit)
            v = eng_();
        return static_cast<int>(v % un);
    }

    /// Standard normal via Box-Muller; second value of each pair is cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
    std::complex<double> cgaussian(double variance) {
        const double s = std::sqrt(variance * 0.5);
        return {s * gaussian(), s * gaussian()};
    }

    /// Derive an independent child stream. Never shares state with the parent.
    Rng split(std::uint64_t stream_id) { return Rng(mix(eng_(), stream_id)); }

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        // splitmix64 finalizer over the combined words
        std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Stable seed for an independent job, derived from the master seed and a
/// textual tag (e.g. "sweep/clean/ml/12"). FNV-1a over the tag, mixed with
/// the master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return Rng::mix(master, h);
}

} // namespace simosec
