// Self-contained SVG line charts for BER sweeps: log-scale y, one file per
// scenario, one series per decoder. Output is a pure function of the input
// records, so repeated runs produce byte-identical files.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "simosec/csv.hpp"

namespace simosec::harness {

namespace detail {
inline const std::vector<std::string> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                  "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
}

/// Render one scenario's records. Zero-BER points are clamped to the bottom
/// decade of the axis and called out in an annotation.
inline std::string render_ber_svg(const std::string &scenario, const std::vector<BerRecord> &records) {
    if (records.empty())
        throw std::invalid_argument("render_ber_svg: no records");

    std::map<std::string, std::vector<const BerRecord *>> series;
    double snr_lo = records.front().snr_db, snr_hi = records.front().snr_db;
    double min_pos_ber = 1.0;
    bool any_zero = false;
    for (const BerRecord &r : records) {
        series[r.decoder].push_back(&r);
        snr_lo = std::min(snr_lo, r.snr_db);
        snr_hi = std::max(snr_hi, r.snr_db);
        if (r.ber > 0.0)
            min_pos_ber = std::min(min_pos_ber, r.ber);
        else
            any_zero = true;
    }
    for (auto &[name, pts] : series)
        std::sort(pts.begin(), pts.end(),
                  [](const BerRecord *a, const BerRecord *b) { return a->snr_db < b->snr_db; });
    if (snr_hi == snr_lo)
        snr_hi = snr_lo + 1.0;

    const int floor_exp = std::max(-8, static_cast<int>(std::floor(std::log10(min_pos_ber))) - (any_zero ? 1 : 0));
    const double w = 760.0, h = 540.0;
    const double ml = 70.0, mr = 180.0, mt = 45.0, mb = 55.0;
    const double pw = w - ml - mr, ph = h - mt - mb;

    const auto xs = [&](double snr) { return ml + (snr - snr_lo) / (snr_hi - snr_lo) * pw; };
    const auto ys = [&](double ber) {
        const double lg = std::log10(std::max(ber, std::pow(10.0, floor_exp)));
        return mt + (0.0 - lg) / (0.0 - floor_exp) * ph;
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    os << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << ml << "\" y=\"25\" font-family=\"sans-serif\" font-size=\"16\">"
       << "Bit error rate vs SNR (" << scenario << ")</text>\n";

    // y gridlines per decade
    for (int e = 0; e >= floor_exp; --e) {
        const double y = ys(std::pow(10.0, e));
        os << "<line x1=\"" << ml << "\" y1=\"" << format_double(y) << "\" x2=\"" << ml + pw
           << "\" y2=\"" << format_double(y) << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << ml - 8 << "\" y=\"" << format_double(y + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << e
           << "</text>\n";
    }
    // x ticks at every distinct SNR
    std::set<double> snrs;
    for (const BerRecord &r : records)
        snrs.insert(r.snr_db);
    for (const double s : snrs) {
        const double x = xs(s);
        os << "<line x1=\"" << format_double(x) << "\" y1=\"" << mt + ph << "\" x2=\""
           << format_double(x) << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"#333333\"/>\n";
        os << "<text x=\"" << format_double(x) << "\" y=\"" << mt + ph + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
           << format_double(s) << "</text>\n";
    }
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << h - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">SNR [dB]</text>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"#333333\"/>\n";

    int idx = 0;
    for (const auto &[name, pts] : series) {
        const std::string &color = detail::kPalette[idx % detail::kPalette.size()];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const BerRecord *p : pts)
            os << format_double(xs(p->snr_db)) << "," << format_double(ys(p->ber)) << " ";
        os << "\"/>\n";
        for (const BerRecord *p : pts)
            os << "<circle cx=\"" << format_double(xs(p->snr_db)) << "\" cy=\""
               << format_double(ys(p->ber)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        const double ly = mt + 16.0 * idx;
        os << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << format_double(ly + 4) << "\" x2=\""
           << ml + pw + 34 << "\" y2=\"" << format_double(ly + 4) << "\" stroke=\"" << color
           << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << ml + pw + 40 << "\" y=\"" << format_double(ly + 8)
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << name << "</text>\n";
        ++idx;
    }
    if (any_zero)
        os << "<text x=\"" << ml << "\" y=\"" << h - 30
           << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#777777\">"
           << "zero-BER points clamped to 1e" << floor_exp << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

/// One SVG per scenario, written as ber_<scenario>.svg under out_dir.
/// Returns the file paths in scenario-sorted order.
inline std::vector<std::string> emit_plots(const std::vector<BerRecord> &records,
                                           const std::string &out_dir) {
    if (records.empty())
        throw std::invalid_argument("emit_plots: no records");
    std::map<std::string, std::vector<BerRecord>> by_scenario;
    for (const BerRecord &r : records)
        by_scenario[r.scenario].push_back(r);
    std::vector<std::string> paths;
    for (const auto &[scenario, recs] : by_scenario) {
        const std::string path = out_dir + "/ber_" + scenario + ".svg";
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot open for writing: " + path);
        os << render_ber_svg(scenario, recs);
        if (!os)
            throw std::runtime_error("write failed: " + path);
        paths.push_back(path);
    }
    return paths;
}

} // namespace simosec::harness
