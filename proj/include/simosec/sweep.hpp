// Experiment orchestration: dataset generation, the BER sweep over
// (scenario x decoder x SNR) with a bounded worker pool, and per-stage
// constellation dumps with the scatter statistics the checks assert on.
//
// Every sweep point owns an independent seed derived from the master seed
// and its (scenario, decoder, SNR) tag, so results do not depend on worker
// count or scheduling, and two runs with the same master seed emit
// byte-identical CSV files.
#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "simosec/autoenc.hpp"
#include "simosec/channel.hpp"
#include "simosec/config.hpp"
#include "simosec/csv.hpp"
#include "simosec/equalize.hpp"
#include "simosec/impair.hpp"
#include "simosec/modem.hpp"

namespace simosec::harness {

/// Uniform random message indices, split train/test.
inline std::pair<std::vector<int>, std::vector<int>> generate_dataset(const ExperimentConfig &cfg,
                                                                      Rng &rng) {
    std::vector<int> train(cfg.n_train), test(cfg.n_test);
    for (int &m : train)
        m = rng.uniform_int(cfg.m_order);
    for (int &m : test)
        m = rng.uniform_int(cfg.m_order);
    return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// Scatter statistics
// ---------------------------------------------------------------------------

/// LO phase error estimated from the quadrature cross-moment of a scatter:
/// theta = asin(2 E[u_I u_Q] / E[|u|^2]) / 2. Exact for the IQ-imbalance
/// transform at unit gain imbalance on a symmetric constellation; the net
/// scatter rotation of that transform is identically zero, so this is the
/// statistic that actually recovers the configured phase error.
inline double estimate_iq_phase_error_rad(const IqStream &tap) {
    double cross = 0.0, power = 0.0;
    for (const cdouble &u : tap.samples) {
        cross += u.real() * u.imag();
        power += std::norm(u);
    }
    if (power <= 0.0)
        throw std::invalid_argument("estimate_iq_phase_error: zero-power scatter");
    const double s = std::clamp(2.0 * cross / power, -1.0, 1.0);
    return 0.5 * std::asin(s);
}

/// Mean signed angle between tap samples and their reference samples,
/// wrapped to (-pi, pi]. Reference samples below the magnitude floor are
/// skipped.
inline double mean_scatter_rotation_rad(const IqStream &tap, const IqStream &ref) {
    if (tap.size() != ref.size())
        throw std::invalid_argument("mean_scatter_rotation: size mismatch");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < tap.size(); ++i) {
        if (std::abs(ref[i]) < 1.0e-12 || std::abs(tap[i]) < 1.0e-12)
            continue;
        double d = std::arg(tap[i]) - std::arg(ref[i]);
        while (d > std::numbers::pi)
            d -= 2.0 * std::numbers::pi;
        while (d <= -std::numbers::pi)
            d += 2.0 * std::numbers::pi;
        sum += d;
        ++count;
    }
    if (count == 0)
        throw std::invalid_argument("mean_scatter_rotation: no usable samples");
    return sum / static_cast<double>(count);
}

/// Mean |tap|/|ref| over the samples whose reference modulus is the smallest
/// (.first) and the largest (.second) distinct radius in the reference grid.
inline std::pair<double, double> modulus_ratio_by_radius(const IqStream &tap, const IqStream &ref) {
    if (tap.size() != ref.size() || tap.size() == 0)
        throw std::invalid_argument("modulus_ratio_by_radius: bad sizes");
    double rmin = 1.0 / 0.0, rmax = 0.0;
    for (const cdouble &v : ref.samples) {
        const double r = std::abs(v);
        if (r < 1.0e-12)
            continue;
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    double inner_sum = 0.0, outer_sum = 0.0;
    std::size_t inner_n = 0, outer_n = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double r = std::abs(ref[i]);
        if (std::abs(r - rmin) < 1.0e-9 * rmin) {
            inner_sum += std::abs(tap[i]) / r;
            ++inner_n;
        } else if (std::abs(r - rmax) < 1.0e-9 * rmax) {
            outer_sum += std::abs(tap[i]) / r;
            ++outer_n;
        }
    }
    if (inner_n == 0 || outer_n == 0)
        throw std::invalid_argument("modulus_ratio_by_radius: radius classes empty");
    return {inner_sum / inner_n, outer_sum / outer_n};
}

// ---------------------------------------------------------------------------
// Constellation dumps
// ---------------------------------------------------------------------------

/// Per-stage taps for n random QAM symbols through the configured chain.
inline std::array<IqStream, 5> constellation_taps(const impair::ImpairmentConfig &imp, int n,
                                                  int m_order, std::uint64_t seed) {
    if (n < 1)
        throw std::invalid_argument("constellation_taps: n must be >= 1");
    Rng rng(seed);
    const modem::Constellation c = modem::build_qam(m_order);
    IqStream x;
    x.sample_rate_hz = imp.sample_rate_hz;
    x.samples.resize(n);
    for (int i = 0; i < n; ++i)
        x.samples[i] = c.points[rng.uniform_int(m_order)];
    return impair::rf_chain_taps(x, imp, rng);
}

/// Writes constellation_<stage>.csv for all five taps; returns the taps.
inline std::array<IqStream, 5> dump_constellations(const impair::ImpairmentConfig &imp, int n,
                                                   int m_order, std::uint64_t seed,
                                                   const std::string &out_dir) {
    const std::array<IqStream, 5> taps = constellation_taps(imp, n, m_order, seed);
    for (std::size_t k = 0; k < taps.size(); ++k)
        write_scatter_csv_file(out_dir + "/constellation_" + impair::kStageNames[k] + ".csv",
                               impair::kStageNames[k], taps[k]);
    return taps;
}

// ---------------------------------------------------------------------------
// BER sweep
// ---------------------------------------------------------------------------

inline bool is_ae_decoder(const std::string &d) { return d == "ae-legit" || d == "ae-eve"; }

namespace detail {

struct SweepJob {
    std::string scenario;
    bool impaired = false;
    std::string decoder;
    double snr_db = 0.0;
};

inline BerRecord run_sweep_point(const ExperimentConfig &cfg, const SweepJob &job,
                                 const std::vector<int> &test_messages,
                                 const autoenc::Model *model) {
    const std::string tag =
        "sweep/" + job.scenario + "/" + job.decoder + "/" + format_double(job.snr_db);
    Rng rng(derive_seed(cfg.master_seed, tag));
    const autoenc::SystemConfig sys = cfg.system(job.impaired);
    const modem::Constellation con = modem::build_qam(cfg.m_order);
    const double sigma2 = channel::snr_to_sigma2(job.snr_db, 1.0);
    const channel::NoiseConfig noise{sigma2};
    const int bps = con.bits_per_symbol;

    long long bit_errors = 0, symbols = 0, symbol_errors = 0;
    const int chunk = 512;
    std::size_t test_pos = 0;
    std::vector<int> msgs(chunk);

    const auto need_more = [&]() {
        if (symbols >= cfg.max_symbols)
            return false;
        return symbols < cfg.n_test || bit_errors < cfg.min_bit_errors;
    };

    while (need_more()) {
        const int b = static_cast<int>(std::min<long long>(chunk, cfg.max_symbols - symbols));
        msgs.resize(b);
        for (int i = 0; i < b; ++i) {
            if (test_pos < test_messages.size())
                msgs[i] = test_messages[test_pos++];
            else
                msgs[i] = rng.uniform_int(cfg.m_order);
        }

        if (is_ae_decoder(job.decoder)) {
            const autoenc::ForwardCache fc = autoenc::forward_batch(
                *model, msgs, sys, job.snr_db, job.snr_db, rng, /*train_mode=*/false);
            const autoenc::Mat &probs = job.decoder == "ae-legit" ? fc.legit_cache.acts.back()
                                                                  : fc.eve_cache.acts.back();
            for (int i = 0; i < b; ++i) {
                const int dec = autoenc::hard_decision(probs.row(i), cfg.m_order);
                const int be = modem::bit_errors(msgs[i], dec);
                bit_errors += be;
                symbol_errors += be > 0 ? 1 : 0;
            }
        } else {
            IqStream x;
            x.sample_rate_hz = sys.imp.sample_rate_hz;
            x.samples.resize(b);
            for (int i = 0; i < b; ++i)
                x.samples[i] = con.points[msgs[i]];
            if (sys.imp.enabled.any())
                x = impair::rf_chain(x, sys.imp, rng);
            for (int i = 0; i < b; ++i) {
                const channel::SimoChannel ch = channel::gen_channel(sys.ch, rng);
                const std::vector<cdouble> y = channel::transmit(x[i], ch, noise, rng);
                int dec;
                if (job.decoder == "zf")
                    dec = modem::demap_nearest(equalize::zf_equalize(y, ch.h), con);
                else if (job.decoder == "lmmse")
                    dec = modem::demap_nearest(equalize::lmmse_equalize(y, ch.h, sigma2, 1.0), con);
                else if (job.decoder == "ml")
                    dec = equalize::ml_decode(y, ch.h, con);
                else
                    throw std::invalid_argument("run_ber_sweep: unknown decoder " + job.decoder);
                const int be = modem::bit_errors(msgs[i], dec);
                bit_errors += be;
                symbol_errors += be > 0 ? 1 : 0;
            }
        }
        symbols += b;
    }

    BerRecord r;
    r.scenario = job.scenario;
    r.decoder = job.decoder;
    r.snr_db = job.snr_db;
    r.bit_errors = bit_errors;
    r.bits_total = symbols * bps;
    r.symbol_errors = symbol_errors;
    r.symbols_total = symbols;
    r.ber = static_cast<double>(bit_errors) / static_cast<double>(r.bits_total);
    r.ser = static_cast<double>(symbol_errors) / static_cast<double>(symbols);
    std::tie(r.ci_low, r.ci_high) = wilson_interval(bit_errors, r.bits_total);
    if (!std::isfinite(r.ber) || !std::isfinite(r.ser))
        throw std::runtime_error("run_ber_sweep: non-finite error rate at " + tag);
    return r;
}

} // namespace detail

/// Monte Carlo BER over the configured grid. model_clean / model_impaired
/// back the AE decoders in the matching scenario; a scenario that requests
/// AE decoders without a model is an error. Records come back sorted by
/// (scenario, decoder, snr).
inline std::vector<BerRecord> run_ber_sweep(const ExperimentConfig &cfg,
                                            const std::vector<int> &test_messages,
                                            const autoenc::Model *model_clean = nullptr,
                                            const autoenc::Model *model_impaired = nullptr) {
    std::vector<detail::SweepJob> jobs;
    for (const std::string &scenario : cfg.scenarios) {
        if (scenario != "clean" && scenario != "impaired")
            throw std::invalid_argument("run_ber_sweep: unknown scenario " + scenario);
        const bool impaired = scenario == "impaired";
        for (const std::string &decoder : cfg.decoders) {
            if (is_ae_decoder(decoder) && (impaired ? model_impaired : model_clean) == nullptr)
                throw std::invalid_argument("run_ber_sweep: decoder " + decoder + " in scenario " +
                                            scenario + " requires a model checkpoint");
            for (const double snr : cfg.snr_grid())
                jobs.push_back({scenario, impaired, decoder, snr});
        }
    }
    if (jobs.empty())
        throw std::invalid_argument("run_ber_sweep: empty job set");

    std::vector<BerRecord> records(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_workers =
        std::min<std::size_t>(jobs.size(), cfg.workers > 0 ? static_cast<unsigned>(cfg.workers) : hw);

    const auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size())
                return;
            try {
                const autoenc::Model *model =
                    jobs[i].impaired ? model_impaired : model_clean;
                records[i] = detail::run_sweep_point(cfg, jobs[i], test_messages, model);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                    first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < n_workers; ++w)
        pool.emplace_back(worker);
    worker();
    for (std::thread &t : pool)
        t.join();
    if (first_error)
        std::rethrow_exception(first_error);

    std::sort(records.begin(), records.end(), [](const BerRecord &a, const BerRecord &b) {
        if (a.scenario != b.scenario)
            return a.scenario < b.scenario;
        if (a.decoder != b.decoder)
            return a.decoder < b.decoder;
        return a.snr_db < b.snr_db;
    });
    return records;
}

} // namespace simosec::harness
