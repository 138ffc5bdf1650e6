// Transmitter RF chain: DAC polynomial nonlinearity, IQ-imbalanced mixer with
// CFO and phase noise, VCO second-stage up-conversion, Saleh power amplifier.
//
// Everything runs on the complex-baseband equivalent: the deterministic
// carriers are dropped and only residual CFO and phase noise rotate the
// signal. Each stage is analytically differentiable, so a trainable system
// can backpropagate through the whole chain via chain_jacobian().
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "simosec/iq.hpp"
#include "simosec/rng.hpp"

namespace simosec::impair {

inline double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }
inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Maximum |CFO| permitted by the oscillator's frequency stability.
inline double cfo_bound(double f_ppm, double f_c0_hz) {
    if (f_ppm < 0.0 || f_c0_hz < 0.0)
        throw std::invalid_argument("cfo_bound: negative argument");
    return f_ppm * f_c0_hz / 1.0e6;
}

struct DacConfig {
    // rho[k-1] is the k-th order Taylor coefficient, k = 1..k_max
    std::vector<double> rho{1.0, 0.0, -0.05};

    void validate() const {
        if (rho.empty() || rho[0] == 0.0)
            throw std::invalid_argument("DacConfig: first-order coefficient must be nonzero");
        for (const double r : rho)
            if (!std::isfinite(r))
                throw std::invalid_argument("DacConfig: non-finite coefficient");
    }
};

struct MixerConfig {
    double gain_imbalance_db = 0.0; // g_T = 10^(dB/20), applied to the Q branch
    double phase_error_deg = 0.0;
    double cfo_hz = 0.0;
    double f_ppm = 10.0;
    double f_c0_hz = 2.0e9;
    double pn_variance_per_sample = 0.0; // Wiener increment variance, rad^2

    void validate() const {
        if (gain_imbalance_db < -1.0 || gain_imbalance_db > 1.0)
            throw std::invalid_argument("MixerConfig: gain imbalance outside [-1, 1] dB");
        if (phase_error_deg < -5.0 || phase_error_deg > 5.0)
            throw std::invalid_argument("MixerConfig: phase error outside [-5, 5] deg");
        if (std::abs(cfo_hz) > cfo_bound(f_ppm, f_c0_hz))
            throw std::invalid_argument("MixerConfig: CFO " + std::to_string(cfo_hz) +
                                        " Hz outside ppm bound " +
                                        std::to_string(cfo_bound(f_ppm, f_c0_hz)) + " Hz");
        if (pn_variance_per_sample < 0.0)
            throw std::invalid_argument("MixerConfig: negative phase-noise variance");
    }
};

struct VcoConfig {
    double gain_imbalance_db = 0.0;
    double phase_error_deg = 0.0;
    double k_vco = 100.0;  // frequency sensitivity, Hz/V (metadata in baseband model)
    double v_vco = 0.1;    // control voltage, V
    double f_vco0_hz = 2.0e9;
    double pn_variance_per_sample = 0.0;

    void validate() const {
        if (pn_variance_per_sample < 0.0)
            throw std::invalid_argument("VcoConfig: negative phase-noise variance");
    }
};

struct SalehConfig {
    double alpha_a = 2.1587;
    double beta_a = 1.1517;
    double alpha_p = 4.0033;
    double beta_p = 9.1040;
    double input_backoff = 1.0; // drive-level scale applied before the PA

    void validate() const {
        if (alpha_a <= 0.0 || beta_a <= 0.0 || beta_p <= 0.0)
            throw std::invalid_argument("SalehConfig: alpha_a, beta_a, beta_p must be positive");
    }

    double am_am(double r) const { return alpha_a * r / (1.0 + beta_a * r * r); }
    double am_pm(double r) const { return alpha_p * r * r / (1.0 + beta_p * r * r); }
};

struct StageEnables {
    bool dac = true;
    bool mixer = true;
    bool vco = true;
    bool pa = true;

    bool any() const { return dac || mixer || vco || pa; }
};

struct ImpairmentConfig {
    DacConfig dac;
    MixerConfig mixer;
    VcoConfig vco;
    SalehConfig pa;
    StageEnables enabled;
    double sample_rate_hz = 1.0e6;
    // Samples per acquisition frame: the CFO ramp and both phase-noise walks
    // restart at each frame boundary. <= 0 treats the whole stream as one frame.
    int frame_len = 16;

    void validate() const {
        if (sample_rate_hz <= 0.0)
            throw std::invalid_argument("ImpairmentConfig: sample rate must be positive");
        dac.validate();
        mixer.validate();
        vco.validate();
        pa.validate();
    }
};

/// Per-transmitter impairment draw: IQ imbalances uniform over their allowed
/// ranges, remaining values at their defaults. The draw happens once here and
/// is frozen in the returned config.
inline ImpairmentConfig default_impairments(Rng &rng) {
    ImpairmentConfig cfg;
    cfg.mixer.gain_imbalance_db = rng.uniform(-1.0, 1.0);
    cfg.mixer.phase_error_deg = rng.uniform(-5.0, 5.0);
    cfg.mixer.cfo_hz = 1000.0;
    cfg.mixer.pn_variance_per_sample = 1.0e-4;
    cfg.vco.gain_imbalance_db = rng.uniform(-1.0, 1.0);
    cfg.vco.phase_error_deg = rng.uniform(-5.0, 5.0);
    cfg.vco.pn_variance_per_sample = 1.0e-4;
    return cfg;
}

// ---------------------------------------------------------------------------
// Stage kernels (single sample)
// ---------------------------------------------------------------------------

inline double dac_poly(double x, const std::vector<double> &rho) {
    // sum_k rho_k x^k = x (rho_1 + x (rho_2 + x (...)))
    double acc = 0.0;
    for (std::size_t k = rho.size(); k-- > 0;)
        acc = rho[k] + x * acc;
    return x * acc;
}

inline double dac_poly_derivative(double x, const std::vector<double> &rho) {
    double acc = 0.0;
    for (std::size_t k = rho.size(); k-- > 0;)
        acc = (k + 1) * rho[k] + x * acc;
    return acc;
}

inline cdouble dac_kernel(cdouble x, const DacConfig &cfg) {
    return {dac_poly(x.real(), cfg.rho), dac_poly(x.imag(), cfg.rho)};
}

/// u = x_I e^{j theta} + j g x_Q e^{-j theta}
inline cdouble iq_imbalance_kernel(cdouble x, double gain, double theta_rad) {
    const double c = std::cos(theta_rad), s = std::sin(theta_rad);
    return {x.real() * c + gain * x.imag() * s, x.real() * s + gain * x.imag() * c};
}

inline cdouble rotate(cdouble x, double phase_rad) {
    return x * cdouble{std::cos(phase_rad), std::sin(phase_rad)};
}

inline cdouble saleh_kernel(cdouble x, const SalehConfig &cfg) {
    const cdouble z = cfg.input_backoff * x;
    const double s = std::norm(z);
    const double gain = cfg.alpha_a / (1.0 + cfg.beta_a * s);       // A(r)/r, smooth at 0
    const double phase = cfg.alpha_p * s / (1.0 + cfg.beta_p * s);  // Phi(r), Phi(0) = 0
    return rotate(z * gain, phase);
}

// ---------------------------------------------------------------------------
// Streaming operations
// ---------------------------------------------------------------------------

inline IqStream dac_convert(const IqStream &x, const DacConfig &cfg) {
    cfg.validate();
    IqStream out = x;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = dac_kernel(x[i], cfg);
        if (!std::isfinite(out[i].real()) || !std::isfinite(out[i].imag()))
            throw std::runtime_error("dac_convert: non-finite output at sample " + std::to_string(i));
    }
    return out;
}

/// Wiener phase-noise path: psi[0] = 0, psi[i] = psi[i-1] + N(0, variance).
inline std::vector<double> sample_phase_noise(std::size_t n, double variance, Rng &rng) {
    if (variance < 0.0)
        throw std::invalid_argument("sample_phase_noise: negative variance");
    std::vector<double> psi(n, 0.0);
    if (n == 0 || variance == 0.0)
        return psi;
    const double stddev = std::sqrt(variance);
    for (std::size_t i = 1; i < n; ++i)
        psi[i] = psi[i - 1] + stddev * rng.gaussian();
    return psi;
}

/// First up-conversion as one continuous stream: IQ imbalance, then rotation
/// by the residual CFO ramp plus a Wiener phase-noise path.
inline IqStream mixer_upconvert(const IqStream &x, const MixerConfig &cfg, Rng &rng) {
    cfg.validate();
    const double g = db_to_amplitude(cfg.gain_imbalance_db);
    const double theta = deg_to_rad(cfg.phase_error_deg);
    const double dphi = 2.0 * std::numbers::pi * cfg.cfo_hz / x.sample_rate_hz;
    const std::vector<double> psi = sample_phase_noise(x.size(), cfg.pn_variance_per_sample, rng);

    IqStream out = x;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = rotate(iq_imbalance_kernel(x[i], g, theta), dphi * static_cast<double>(i) + psi[i]);
    return out;
}

/// Second up-conversion: VCO IQ imbalance plus its own phase-noise rotation.
inline IqStream vco_upconvert(const IqStream &x, const VcoConfig &cfg, Rng &rng) {
    cfg.validate();
    const double g = db_to_amplitude(cfg.gain_imbalance_db);
    const double theta = deg_to_rad(cfg.phase_error_deg);
    const std::vector<double> psi = sample_phase_noise(x.size(), cfg.pn_variance_per_sample, rng);

    IqStream out = x;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = rotate(iq_imbalance_kernel(x[i], g, theta), psi[i]);
    return out;
}

inline IqStream saleh_pa(const IqStream &x, const SalehConfig &cfg) {
    cfg.validate();
    IqStream out = x;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = saleh_kernel(x[i], cfg);
    return out;
}

// ---------------------------------------------------------------------------
// Frozen per-sample realization and the composed chain
// ---------------------------------------------------------------------------

/// The stochastic part of one sample's trip through the chain: the total
/// rotation angle applied at the mixer (CFO ramp + phase noise) and at the
/// VCO (phase noise). Freezing these makes the chain a deterministic,
/// differentiable map per sample.
struct ChainNoise {
    double mixer_phase = 0.0;
    double vco_phase = 0.0;
};

/// Draw rotation angles for n samples, restarting the CFO ramp and both
/// Wiener walks at every frame boundary. Mixer angles for the whole stream
/// are drawn before VCO angles.
inline std::vector<ChainNoise> draw_chain_noise(std::size_t n, const ImpairmentConfig &cfg, Rng &rng) {
    std::vector<ChainNoise> noise(n);
    if (n == 0)
        return noise;
    const std::size_t frame = cfg.frame_len > 0 ? static_cast<std::size_t>(cfg.frame_len) : n;
    if (cfg.enabled.mixer) {
        const double dphi = 2.0 * std::numbers::pi * cfg.mixer.cfo_hz / cfg.sample_rate_hz;
        for (std::size_t f0 = 0; f0 < n; f0 += frame) {
            const std::size_t len = std::min(frame, n - f0);
            const std::vector<double> psi = sample_phase_noise(len, cfg.mixer.pn_variance_per_sample, rng);
            for (std::size_t i = 0; i < len; ++i)
                noise[f0 + i].mixer_phase = dphi * static_cast<double>(i) + psi[i];
        }
    }
    if (cfg.enabled.vco) {
        for (std::size_t f0 = 0; f0 < n; f0 += frame) {
            const std::size_t len = std::min(frame, n - f0);
            const std::vector<double> psi = sample_phase_noise(len, cfg.vco.pn_variance_per_sample, rng);
            for (std::size_t i = 0; i < len; ++i)
                noise[f0 + i].vco_phase = psi[i];
        }
    }
    return noise;
}

/// Per-stage taps for one sample: {digital, post-DAC, post-mixer, post-VCO,
/// post-PA}. A disabled stage passes its input through.
inline std::array<cdouble, 5> chain_stages(cdouble x, const ImpairmentConfig &cfg, const ChainNoise &noise) {
    std::array<cdouble, 5> tap;
    tap[0] = x;
    tap[1] = cfg.enabled.dac ? dac_kernel(x, cfg.dac) : x;
    tap[2] = cfg.enabled.mixer
                 ? rotate(iq_imbalance_kernel(tap[1], db_to_amplitude(cfg.mixer.gain_imbalance_db),
                                              deg_to_rad(cfg.mixer.phase_error_deg)),
                          noise.mixer_phase)
                 : tap[1];
    tap[3] = cfg.enabled.vco
                 ? rotate(iq_imbalance_kernel(tap[2], db_to_amplitude(cfg.vco.gain_imbalance_db),
                                              deg_to_rad(cfg.vco.phase_error_deg)),
                          noise.vco_phase)
                 : tap[2];
    tap[4] = cfg.enabled.pa ? saleh_kernel(tap[3], cfg.pa) : tap[3];
    return tap;
}

inline cdouble chain_apply(cdouble x, const ImpairmentConfig &cfg, const ChainNoise &noise) {
    return chain_stages(x, cfg, noise)[4];
}

/// 2x2 real matrix, row-major. Used for per-sample Jacobians d(out)/d(in).
struct Mat2 {
    double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;

    static Mat2 identity() { return {}; }
    static Mat2 rotation(double phi) {
        const double c = std::cos(phi), s = std::sin(phi);
        return {c, -s, s, c};
    }
    static Mat2 diagonal(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }

    Mat2 operator*(const Mat2 &o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    double det() const { return a11 * a22 - a12 * a21; }

    /// M^T g — how a loss gradient pulls back through this stage.
    cdouble transpose_apply(cdouble g) const {
        return {a11 * g.real() + a21 * g.imag(), a12 * g.real() + a22 * g.imag()};
    }
};

inline Mat2 iq_imbalance_jacobian(double gain, double theta_rad) {
    const double c = std::cos(theta_rad), s = std::sin(theta_rad);
    return {c, gain * s, s, gain * c};
}

inline Mat2 saleh_jacobian(cdouble x, const SalehConfig &cfg) {
    const double b = cfg.input_backoff;
    const cdouble z = b * x;
    const double zi = z.real(), zq = z.imag();
    const double s = zi * zi + zq * zq;
    const double da = 1.0 + cfg.beta_a * s;
    const double dp = 1.0 + cfg.beta_p * s;
    const double gain = cfg.alpha_a / da;
    const double phase = cfg.alpha_p * s / dp;
    const double dgain = -cfg.alpha_a * cfg.beta_a / (da * da); // d(gain)/ds
    const double dphase = cfg.alpha_p / (dp * dp);              // d(phase)/ds
    const double cp = std::cos(phase), sp = std::sin(phase);
    const double C = gain * cp, S = gain * sp;
    const double Cd = dgain * cp - gain * sp * dphase;
    const double Sd = dgain * sp + gain * cp * dphase;
    Mat2 j{C + 2.0 * zi * (zi * Cd - zq * Sd), -S + 2.0 * zq * (zi * Cd - zq * Sd),
           S + 2.0 * zi * (zi * Sd + zq * Cd), C + 2.0 * zq * (zi * Sd + zq * Cd)};
    // account for the back-off scale on the way in
    return {j.a11 * b, j.a12 * b, j.a21 * b, j.a22 * b};
}

/// d(out_I, out_Q)/d(in_I, in_Q) of the whole enabled chain at a fixed noise
/// realization, chained analytically through every stage.
inline Mat2 chain_jacobian(cdouble x, const ImpairmentConfig &cfg, const ChainNoise &noise) {
    const std::array<cdouble, 5> tap = chain_stages(x, cfg, noise);
    Mat2 j = Mat2::identity();
    if (cfg.enabled.dac)
        j = Mat2::diagonal(dac_poly_derivative(tap[0].real(), cfg.dac.rho),
                           dac_poly_derivative(tap[0].imag(), cfg.dac.rho)) *
            j;
    if (cfg.enabled.mixer)
        j = Mat2::rotation(noise.mixer_phase) *
            iq_imbalance_jacobian(db_to_amplitude(cfg.mixer.gain_imbalance_db),
                                  deg_to_rad(cfg.mixer.phase_error_deg)) *
            j;
    if (cfg.enabled.vco)
        j = Mat2::rotation(noise.vco_phase) *
            iq_imbalance_jacobian(db_to_amplitude(cfg.vco.gain_imbalance_db),
                                  deg_to_rad(cfg.vco.phase_error_deg)) *
            j;
    if (cfg.enabled.pa)
        j = saleh_jacobian(tap[3], cfg.pa) * j;
    return j;
}

/// Full chain over a stream: draws the frame-structured noise realization,
/// then maps every sample. Identical seeds and configs reproduce the output
/// bit for bit.
inline IqStream rf_chain(const IqStream &x, const ImpairmentConfig &cfg, Rng &rng) {
    cfg.validate();
    const std::vector<ChainNoise> noise = draw_chain_noise(x.size(), cfg, rng);
    IqStream out = x;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = chain_apply(x[i], cfg, noise[i]);
        if (!std::isfinite(out[i].real()) || !std::isfinite(out[i].imag()))
            throw std::runtime_error("rf_chain: non-finite output at sample " + std::to_string(i));
    }
    return out;
}

/// Like rf_chain but keeps every stage tap, for constellation dumps.
inline std::array<IqStream, 5> rf_chain_taps(const IqStream &x, const ImpairmentConfig &cfg, Rng &rng) {
    cfg.validate();
    const std::vector<ChainNoise> noise = draw_chain_noise(x.size(), cfg, rng);
    std::array<IqStream, 5> taps;
    for (auto &t : taps) {
        t.samples.resize(x.size());
        t.sample_rate_hz = x.sample_rate_hz;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::array<cdouble, 5> tap = chain_stages(x[i], cfg, noise[i]);
        for (std::size_t k = 0; k < 5; ++k)
            taps[k][i] = tap[k];
    }
    return taps;
}

inline const std::array<const char *, 5> kStageNames = {"digital", "post_dac", "post_mixer",
                                                        "post_vco", "post_pa"};

} // namespace simosec::impair
