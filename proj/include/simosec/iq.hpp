#pragma once

#include <complex>
#include <vector>

namespace simosec {

using cdouble = std::complex<double>;

/// A run of complex baseband samples plus the rate they were taken at.
/// One sample per symbol everywhere in this library.
struct IqStream {
    std::vector<cdouble> samples;
    double sample_rate_hz = 1.0e6;

    IqStream() = default;
    IqStream(std::vector<cdouble> s, double fs) : samples(std::move(s)), sample_rate_hz(fs) {}

    std::size_t size() const { return samples.size(); }
    cdouble &operator[](std::size_t i) { return samples[i]; }
    const cdouble &operator[](std::size_t i) const { return samples[i]; }
};

} // namespace simosec
