// Result records and CSV emission. All floats use shortest round-trip
// formatting and lines end in LF, so identical inputs produce byte-identical
// files.
#pragma once

#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "simosec/config.hpp"
#include "simosec/iq.hpp"

namespace simosec::harness {

struct BerRecord {
    std::string scenario;
    std::string decoder;
    double snr_db = 0.0;
    long long bit_errors = 0;
    long long bits_total = 0;
    long long symbol_errors = 0;
    long long symbols_total = 0;
    double ber = 0.0;
    double ser = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

/// 95% Wilson score interval for k successes out of n.
inline std::pair<double, double> wilson_interval(long long k, long long n, double z = 1.959963984540054) {
    if (n <= 0)
        return {0.0, 1.0};
    const double p = static_cast<double>(k) / static_cast<double>(n);
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = (z / denom) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    const double lo = k == 0 ? 0.0 : std::max(0.0, center - half);
    const double hi = k == n ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

inline const char *kBerCsvHeader = "scenario,decoder,snr_db,bit_errors,bits_total,ber,ser,ci_low,ci_high";

inline void write_ber_csv(std::ostream &os, const std::vector<BerRecord> &records) {
    os << kBerCsvHeader << "\n";
    for (const BerRecord &r : records) {
        os << r.scenario << ',' << r.decoder << ',' << format_double(r.snr_db) << ','
           << r.bit_errors << ',' << r.bits_total << ',' << format_double(r.ber) << ','
           << format_double(r.ser) << ',' << format_double(r.ci_low) << ','
           << format_double(r.ci_high) << "\n";
    }
}

inline void write_ber_csv_file(const std::string &path, const std::vector<BerRecord> &records) {
    std::ofstream os(path, std::ios::binary); // binary keeps LF endings everywhere
    if (!os)
        throw std::runtime_error("cannot open for writing: " + path);
    write_ber_csv(os, records);
    if (!os)
        throw std::runtime_error("write failed: " + path);
}

inline std::vector<BerRecord> read_ber_csv(std::istream &is) {
    std::vector<BerRecord> records;
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("BER csv: empty file");
    if (trim(line) != kBerCsvHeader)
        throw std::runtime_error("BER csv: unexpected header: " + line);
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ','))
            fields.push_back(field);
        if (fields.size() != 9)
            throw std::runtime_error("BER csv line " + std::to_string(lineno) + ": bad field count");
        BerRecord r;
        r.scenario = fields[0];
        r.decoder = fields[1];
        try {
            r.snr_db = std::stod(fields[2]);
            r.bit_errors = std::stoll(fields[3]);
            r.bits_total = std::stoll(fields[4]);
            r.ber = std::stod(fields[5]);
            r.ser = std::stod(fields[6]);
            r.ci_low = std::stod(fields[7]);
            r.ci_high = std::stod(fields[8]);
        } catch (...) {
            throw std::runtime_error("BER csv line " + std::to_string(lineno) + ": parse error");
        }
        records.push_back(std::move(r));
    }
    return records;
}

inline std::vector<BerRecord> read_ber_csv_file(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open: " + path);
    return read_ber_csv(is);
}

/// Scatter dump for one chain tap: columns stage,sample_index,i,q.
inline void write_scatter_csv(std::ostream &os, const std::string &stage, const IqStream &tap) {
    os << "stage,sample_index,i,q\n";
    for (std::size_t i = 0; i < tap.size(); ++i)
        os << stage << ',' << i << ',' << format_double(tap[i].real()) << ','
           << format_double(tap[i].imag()) << "\n";
}

inline void write_scatter_csv_file(const std::string &path, const std::string &stage,
                                   const IqStream &tap) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open for writing: " + path);
    write_scatter_csv(os, stage, tap);
    if (!os)
        throw std::runtime_error("write failed: " + path);
}

/// Channel realization dump for debugging: one row per antenna.
inline void write_channel_csv(std::ostream &os, const std::string &link,
                              const std::vector<cdouble> &h, bool header = true) {
    if (header)
        os << "link,antenna,re,im\n";
    for (std::size_t i = 0; i < h.size(); ++i)
        os << link << ',' << i << ',' << format_double(h[i].real()) << ','
           << format_double(h[i].imag()) << "\n";
}

/// Message datasets: one symbol index per line.
inline void write_messages_file(const std::string &path, const std::vector<int> &messages) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open for writing: " + path);
    os << "message\n";
    for (const int m : messages)
        os << m << "\n";
    if (!os)
        throw std::runtime_error("write failed: " + path);
}

inline std::vector<int> read_messages_file(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(is, line) || trim(line) != "message")
        throw std::runtime_error("message file: unexpected header in " + path);
    std::vector<int> messages;
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty())
            continue;
        messages.push_back(std::stoi(line));
    }
    return messages;
}

} // namespace simosec::harness
