// Square-QAM constellations with per-axis reflected Gray labeling.
//
// The symbol index doubles as the transmitted bit pattern: the high half of
// the index selects the I level, the low half the Q level, each through a
// reflected Gray code. Grid-adjacent points therefore differ in exactly one
// index bit, and bit error counts are popcounts of index XORs.
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "simosec/iq.hpp"

namespace simosec::modem {

using SymbolIndex = int;

struct Constellation {
    std::vector<cdouble> points; // points[s], s == Gray bit label of the symbol
    int order = 0;               // M
    int bits_per_symbol = 0;     // log2 M

    int side() const { return 1 << (bits_per_symbol / 2); }
};

inline unsigned gray_encode(unsigned v) { return v ^ (v >> 1); }

inline unsigned gray_decode(unsigned g) {
    unsigned v = 0;
    for (; g; g >>= 1)
        v ^= g;
    return v;
}

/// Gray-coded square QAM normalized to unit average symbol energy.
/// Supported orders: 4, 16, 64.
inline Constellation build_qam(int m_order) {
    if (m_order != 4 && m_order != 16 && m_order != 64)
        throw std::invalid_argument("build_qam: unsupported order " + std::to_string(m_order));

    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m_order))));
    const int bits_axis = std::countr_zero(static_cast<unsigned>(side));
    const double scale = 1.0 / std::sqrt(2.0 * (m_order - 1) / 3.0);

    Constellation c;
    c.order = m_order;
    c.bits_per_symbol = 2 * bits_axis;
    c.points.resize(m_order);
    for (int s = 0; s < m_order; ++s) {
        const unsigned i_bits = static_cast<unsigned>(s) >> bits_axis;
        const unsigned q_bits = static_cast<unsigned>(s) & (static_cast<unsigned>(side) - 1);
        const int li = static_cast<int>(gray_decode(i_bits));
        const int lq = static_cast<int>(gray_decode(q_bits));
        c.points[s] = {(2 * li - (side - 1)) * scale, (2 * lq - (side - 1)) * scale};
    }
    return c;
}

/// Consecutive groups of bits_per_symbol bits, MSB first, become indices.
inline std::vector<SymbolIndex> bits_to_symbols(const std::vector<int> &bits, const Constellation &c) {
    if (bits.size() % static_cast<std::size_t>(c.bits_per_symbol) != 0)
        throw std::invalid_argument("bits_to_symbols: bit count " + std::to_string(bits.size()) +
                                    " not divisible by " + std::to_string(c.bits_per_symbol));
    std::vector<SymbolIndex> out;
    out.reserve(bits.size() / c.bits_per_symbol);
    for (std::size_t i = 0; i < bits.size(); i += c.bits_per_symbol) {
        int s = 0;
        for (int b = 0; b < c.bits_per_symbol; ++b)
            s = (s << 1) | (bits[i + b] ? 1 : 0);
        out.push_back(s);
    }
    return out;
}

inline std::vector<int> symbols_to_bits(const std::vector<SymbolIndex> &symbols, const Constellation &c) {
    std::vector<int> bits;
    bits.reserve(symbols.size() * c.bits_per_symbol);
    for (const SymbolIndex s : symbols)
        for (int b = c.bits_per_symbol - 1; b >= 0; --b)
            bits.push_back((s >> b) & 1);
    return bits;
}

inline cdouble map(const Constellation &c, SymbolIndex s) {
    if (s < 0 || s >= c.order)
        throw std::invalid_argument("map: symbol index out of range");
    return c.points[s];
}

/// Minimum-distance slicer. Ties go to the lowest index.
inline SymbolIndex demap_nearest(cdouble y_eq, const Constellation &c) {
    if (!std::isfinite(y_eq.real()) || !std::isfinite(y_eq.imag()))
        throw std::invalid_argument("demap_nearest: non-finite input");
    SymbolIndex best = 0;
    double best_d = std::norm(y_eq - c.points[0]);
    for (int s = 1; s < c.order; ++s) {
        const double d = std::norm(y_eq - c.points[s]);
        if (d < best_d) {
            best_d = d;
            best = s;
        }
    }
    return best;
}

/// Hamming distance between the bit labels of two symbol indices.
inline int bit_errors(SymbolIndex a, SymbolIndex b) {
    return std::popcount(static_cast<unsigned>(a) ^ static_cast<unsigned>(b));
}

} // namespace simosec::modem
