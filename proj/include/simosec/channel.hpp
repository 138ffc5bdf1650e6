// Geometric multipath SIMO channels and the received-signal model
// y = h x + n for the legitimate and wiretap links.
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "simosec/iq.hpp"
#include "simosec/rng.hpp"

namespace simosec::channel {

enum class Profile {
    geometric,    // sum of L plane-wave paths with steering vectors
    iid_rayleigh, // h entries i.i.d. CN(0,1); used for analytic-oracle checks
};

struct ChannelConfig {
    int n_rx = 6;               // antennas at each receiver
    int n_paths = 3;            // L
    double spacing_ratio = 0.5; // antenna spacing / carrier wavelength
    Profile profile = Profile::geometric;

    void validate() const {
        if (n_rx < 1 || n_paths < 1 || spacing_ratio <= 0.0)
            throw std::invalid_argument("ChannelConfig: invalid parameters");
    }
};

struct PathComponent {
    cdouble gain;   // complex path gain, CN(0,1)
    double aoa_rad; // angle of arrival
};

struct SimoChannel {
    std::vector<cdouble> h;
    std::vector<PathComponent> paths; // empty for the iid profile

    double norm_sq() const {
        double s = 0.0;
        for (const cdouble &v : h)
            s += std::norm(v);
        return s;
    }
};

struct NoiseConfig {
    double sigma2 = 0.0; // E|n_i|^2 per receive antenna

    void validate() const {
        if (sigma2 < 0.0)
            throw std::invalid_argument("NoiseConfig: negative variance");
    }
};

/// Uniform-linear-array response, unit norm:
/// g(phi) = (1/sqrt(N)) [1, e^{-j 2 pi d sin(phi)}, ..., e^{-j 2 pi (N-1) d sin(phi)}]
inline std::vector<cdouble> steering(int n, double phi_rad, double spacing_ratio) {
    if (n < 1)
        throw std::invalid_argument("steering: n must be >= 1");
    const double alpha = -2.0 * std::numbers::pi * spacing_ratio * std::sin(phi_rad);
    const cdouble step{std::cos(alpha), std::sin(alpha)};
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<cdouble> g(n);
    cdouble cur{1.0, 0.0};
    for (int i = 0; i < n; ++i) {
        g[i] = scale * cur;
        cur *= step;
    }
    return g;
}

/// Draw one channel. Geometric profile: h = sum_l gain_l * g(aoa_l) with
/// gains CN(0,1) and AoAs uniform over (-pi/2, pi/2); the transmit steering
/// factor is the scalar 1 for a single transmit antenna.
inline SimoChannel gen_channel(const ChannelConfig &cfg, Rng &rng) {
    cfg.validate();
    SimoChannel ch;
    ch.h.assign(cfg.n_rx, cdouble{0.0, 0.0});
    if (cfg.profile == Profile::iid_rayleigh) {
        for (int i = 0; i < cfg.n_rx; ++i)
            ch.h[i] = rng.cgaussian(1.0);
        return ch;
    }
    ch.paths.reserve(cfg.n_paths);
    for (int l = 0; l < cfg.n_paths; ++l) {
        PathComponent p;
        p.gain = rng.cgaussian(1.0);
        p.aoa_rad = rng.uniform(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
        const std::vector<cdouble> g = steering(cfg.n_rx, p.aoa_rad, cfg.spacing_ratio);
        for (int i = 0; i < cfg.n_rx; ++i)
            ch.h[i] += p.gain * g[i];
        ch.paths.push_back(p);
    }
    return ch;
}

/// Noise variance for a per-antenna SNR: sigma^2 = Es / 10^(dB/10).
inline double snr_to_sigma2(double snr_db, double symbol_energy) {
    if (symbol_energy <= 0.0)
        throw std::invalid_argument("snr_to_sigma2: symbol energy must be positive");
    return symbol_energy / std::pow(10.0, snr_db / 10.0);
}

/// y = h x + n with n circularly-symmetric complex Gaussian, E|n_i|^2 = sigma2.
inline std::vector<cdouble> transmit(cdouble x, const SimoChannel &ch, const NoiseConfig &noise, Rng &rng) {
    noise.validate();
    std::vector<cdouble> y(ch.h.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = ch.h[i] * x + (noise.sigma2 > 0.0 ? rng.cgaussian(noise.sigma2) : cdouble{0.0, 0.0});
    return y;
}

} // namespace simosec::channel
