// Classical receivers for the single-stream SIMO link: zero-forcing, LMMSE
// and exhaustive maximum likelihood, plus the closed-form Gray-QAM error
// rate used as an analytic reference at a given post-combining SNR.
#pragma once

#include <bit>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "simosec/iq.hpp"
#include "simosec/modem.hpp"

namespace simosec::equalize {

enum class DecoderKind { zf, lmmse, ml };

inline double q_func(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

inline cdouble matched_filter(const std::vector<cdouble> &y, const std::vector<cdouble> &h) {
    if (y.size() != h.size())
        throw std::invalid_argument("equalize: y and h length mismatch");
    cdouble acc{0.0, 0.0};
    for (std::size_t i = 0; i < y.size(); ++i)
        acc += std::conj(h[i]) * y[i];
    return acc;
}

inline double norm_sq(const std::vector<cdouble> &h) {
    double s = 0.0;
    for (const cdouble &v : h)
        s += std::norm(v);
    return s;
}

/// Unbiased matched-filter estimate h^H y / ||h||^2.
inline cdouble zf_equalize(const std::vector<cdouble> &y, const std::vector<cdouble> &h) {
    const double hh = norm_sq(h);
    if (hh <= 0.0)
        throw std::invalid_argument("zf_equalize: zero channel vector");
    return matched_filter(y, h) / hh;
}

/// Wiener-scaled estimate Es h^H y / (Es ||h||^2 + sigma^2). Reduces to ZF
/// as sigma^2 -> 0.
inline cdouble lmmse_equalize(const std::vector<cdouble> &y, const std::vector<cdouble> &h,
                              double sigma2, double es) {
    if (sigma2 < 0.0)
        throw std::invalid_argument("lmmse_equalize: negative noise variance");
    return es * matched_filter(y, h) / (es * norm_sq(h) + sigma2);
}

/// argmin_s ||y - h map(s)||^2, ties to the lowest index.
inline modem::SymbolIndex ml_decode(const std::vector<cdouble> &y, const std::vector<cdouble> &h,
                                    const modem::Constellation &c) {
    modem::SymbolIndex best = 0;
    double best_d = 0.0;
    for (int s = 0; s < c.order; ++s) {
        double d = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
            d += std::norm(y[i] - h[i] * c.points[s]);
        if (s == 0 || d < best_d) {
            best_d = d;
            best = s;
        }
    }
    return best;
}

/// Exact bit error rate of Gray-labeled square M-QAM on an AWGN link at the
/// given post-combining SNR (Es/sigma^2 in dB). Enumerates the per-axis PAM
/// decision regions, so mislabeling across several boundaries is counted
/// with its true bit weight. Fading averages are taken by the caller over
/// channel draws.
inline double mrc_qam_ber_oracle(double snr_db_effective, int m_order) {
    if (m_order != 4 && m_order != 16 && m_order != 64)
        throw std::invalid_argument("mrc_qam_ber_oracle: unsupported order");
    const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m_order))));
    const double gamma = std::pow(10.0, snr_db_effective / 10.0);
    const double sigma_axis = std::sqrt(1.0 / (2.0 * gamma)); // Es = 1
    const double scale = 1.0 / std::sqrt(2.0 * (m_order - 1) / 3.0);

    const auto level = [&](int i) { return (2.0 * i - (m - 1)) * scale; };
    const auto gray = [](unsigned v) { return v ^ (v >> 1); };
    const auto cdf = [&](double x) { return 0.5 * std::erfc(-x / (sigma_axis * std::sqrt(2.0))); };

    double expected_bit_errors_axis = 0.0;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double lo = (j == 0) ? -1.0 / 0.0 : (level(j - 1) + level(j)) / 2.0;
            const double hi = (j == m - 1) ? 1.0 / 0.0 : (level(j) + level(j + 1)) / 2.0;
            const double p = cdf(hi - level(i)) - cdf(lo - level(i));
            const int dbits = std::popcount(gray(static_cast<unsigned>(i)) ^ gray(static_cast<unsigned>(j)));
            expected_bit_errors_axis += p * dbits;
        }
    }
    expected_bit_errors_axis /= m;

    const double bits_per_symbol = std::log2(static_cast<double>(m_order));
    return 2.0 * expected_bit_errors_axis / bits_per_symbol;
}

} // namespace simosec::equalize
