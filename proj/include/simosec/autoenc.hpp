// End-to-end learned transceiver for the SIMO wiretap link.
//
// An encoder network maps a message index to one complex symbol under a
// batch power constraint. The symbol passes through the (optional) RF
// impairment chain and two independent SIMO channels; a legitimate decoder
// and an eavesdropper decoder map (y, h) to message probabilities. Training
// minimizes  alpha * L_r + (1 - alpha) * L_e,  cross-entropy at the intended
// receiver against output entropy at the eavesdropper, with all stochastic
// draws (channels, noise, oscillator phases) sampled in the forward pass and
// held fixed in the backward pass.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "simosec/channel.hpp"
#include "simosec/impair.hpp"
#include "simosec/modem.hpp"
#include "simosec/net.hpp"
#include "simosec/rng.hpp"

namespace simosec::autoenc {

constexpr double kProbFloor = 1.0e-12;

struct SoftOutput {
    std::vector<double> probs;
};

/// Legitimate-receiver loss: -log2 of the probability assigned to the label.
inline double loss_r(const SoftOutput &out, int label) {
    if (label < 0 || label >= static_cast<int>(out.probs.size()))
        throw std::invalid_argument("loss_r: label out of range");
    const double p = std::max(out.probs[label], kProbFloor);
    return -std::log2(p);
}

/// Eavesdropper loss: sum_i P_i ln P_i, minimized by a uniform output.
inline double loss_e(const SoftOutput &out) {
    double acc = 0.0;
    for (const double p : out.probs)
        acc += p * std::log(std::max(p, kProbFloor));
    return acc;
}

inline double loss_total(double lr_val, double le_val, double alpha) {
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("loss_total: alpha outside [0, 1]");
    return alpha * lr_val + (1.0 - alpha) * le_val;
}

struct TrainConfig {
    double alpha = 0.5;
    int batch_size = 256;
    int epochs = 100;
    double lr0 = 3.0e-4;
    double lr_decay = 0.65;  // applied after lr_patience epochs without improvement
    int lr_patience = 3;
    double snr_min_db = 0.0;
    double snr_max_db = 18.0;
    double power_limit = 1.0; // P_T
    std::uint64_t seed = 1;

    void validate() const {
        if (alpha < 0.0 || alpha > 1.0 || batch_size <= 0 || epochs <= 0 || lr0 <= 0.0 ||
            lr_decay <= 0.0 || lr_decay > 1.0 || power_limit <= 0.0 || snr_max_db < snr_min_db)
            throw std::invalid_argument("TrainConfig: invalid parameters");
    }
};

/// Everything the transmit path needs besides the networks.
struct SystemConfig {
    int m_order = 16;             // message alphabet size
    impair::ImpairmentConfig imp; // enable flags select clean vs impaired
    channel::ChannelConfig ch;
};

struct Model {
    int m_order = 16;
    int n_rx = 6;
    Net encoder;
    Net dec_legit;
    Net dec_eve;
    double eval_norm_scale = 1.0; // frozen power normalization for single-symbol encoding
    std::uint32_t trained_with_impairments = 0;
    TrainConfig tcfg;

    int decoder_input_dim() const { return 4 * n_rx; }
};

inline Model make_model(int m_order, int n_rx, Rng &rng) {
    Model m;
    m.m_order = m_order;
    m.n_rx = n_rx;
    m.encoder = Net::make({{m_order, 64, Activation::rectifier},
                           {64, 64, Activation::rectifier},
                           {64, 2, Activation::identity}},
                          rng);
    const int din = 4 * n_rx;
    m.dec_legit = Net::make({{din, 128, Activation::rectifier},
                             {128, 128, Activation::rectifier},
                             {128, m_order, Activation::softmax_final}},
                            rng);
    m.dec_eve = Net::make({{din, 128, Activation::rectifier},
                           {128, 128, Activation::rectifier},
                           {128, m_order, Activation::softmax_final}},
                          rng);
    return m;
}

// ---------------------------------------------------------------------------
// Forward / backward over one batch
// ---------------------------------------------------------------------------

/// Stochastic draws for one batch, frozen so the backward pass (and finite
/// differences) see the chain, channels and noise as constants.
struct BatchRealization {
    std::vector<impair::ChainNoise> chain;
    std::vector<std::vector<cdouble>> h_legit, h_eve;
    std::vector<std::vector<cdouble>> noise_legit, noise_eve;
    std::vector<double> sigma2;
};

/// Draw order: chain rotations for the whole batch, then per sample the
/// legitimate channel, the eavesdropper channel, the SNR, and both noise
/// vectors.
inline BatchRealization draw_realization(std::size_t n, const SystemConfig &sys, double snr_min_db,
                                         double snr_max_db, Rng &rng) {
    BatchRealization r;
    r.chain = impair::draw_chain_noise(n, sys.imp, rng);
    r.h_legit.resize(n);
    r.h_eve.resize(n);
    r.noise_legit.resize(n);
    r.noise_eve.resize(n);
    r.sigma2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.h_legit[i] = channel::gen_channel(sys.ch, rng).h;
        r.h_eve[i] = channel::gen_channel(sys.ch, rng).h;
        const double snr_db = snr_min_db == snr_max_db ? snr_min_db : rng.uniform(snr_min_db, snr_max_db);
        r.sigma2[i] = channel::snr_to_sigma2(snr_db, 1.0);
        r.noise_legit[i].resize(sys.ch.n_rx);
        r.noise_eve[i].resize(sys.ch.n_rx);
        for (int k = 0; k < sys.ch.n_rx; ++k)
            r.noise_legit[i][k] = rng.cgaussian(r.sigma2[i]);
        for (int k = 0; k < sys.ch.n_rx; ++k)
            r.noise_eve[i][k] = rng.cgaussian(r.sigma2[i]);
    }
    return r;
}

struct ForwardCache {
    std::vector<int> messages;
    BatchRealization real;
    bool train_mode = true;
    Mat onehot;
    NetCache enc_cache;
    std::vector<cdouble> z;     // raw encoder outputs
    std::vector<cdouble> x;     // power-normalized symbols
    std::vector<cdouble> x_imp; // after the impairment chain
    double sum_sq = 0.0;        // batch sum |z|^2 (floored)
    double norm_scale = 1.0;    // c with x = c z
    bool sum_sq_floored = false;
    Mat in_legit, in_eve;
    NetCache legit_cache, eve_cache;
};

inline Mat one_hot(const std::vector<int> &messages, int m_order) {
    Mat m(static_cast<int>(messages.size()), m_order);
    for (std::size_t i = 0; i < messages.size(); ++i) {
        if (messages[i] < 0 || messages[i] >= m_order)
            throw std::invalid_argument("one_hot: message out of range");
        m(static_cast<int>(i), messages[i]) = 1.0;
    }
    return m;
}

/// Decoder input row: [Re y | Im y | Re h | Im h].
inline void fill_decoder_row(Mat &in, int row, const std::vector<cdouble> &y,
                             const std::vector<cdouble> &h) {
    const int n = static_cast<int>(y.size());
    double *r = in.row(row);
    for (int k = 0; k < n; ++k) {
        r[k] = y[k].real();
        r[n + k] = y[k].imag();
        r[2 * n + k] = h[k].real();
        r[3 * n + k] = h[k].imag();
    }
}

inline ForwardCache forward_batch_frozen(const Model &model, const std::vector<int> &messages,
                                         const SystemConfig &sys, const BatchRealization &real,
                                         bool train_mode, double power_limit) {
    const std::size_t n = messages.size();
    if (real.h_legit.size() != n)
        throw std::invalid_argument("forward_batch: realization size mismatch");

    ForwardCache c;
    c.messages = messages;
    c.real = real;
    c.train_mode = train_mode;
    c.onehot = one_hot(messages, model.m_order);
    c.enc_cache = model.encoder.forward(c.onehot);
    const Mat &enc_out = c.enc_cache.acts.back();

    c.z.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        c.z[i] = {enc_out(static_cast<int>(i), 0), enc_out(static_cast<int>(i), 1)};

    if (train_mode) {
        double s = 0.0;
        for (const cdouble &z : c.z)
            s += std::norm(z);
        c.sum_sq_floored = s < 1.0e-30;
        c.sum_sq = std::max(s, 1.0e-30);
        c.norm_scale = std::sqrt(power_limit * static_cast<double>(n) / c.sum_sq);
    } else {
        c.norm_scale = model.eval_norm_scale;
    }
    c.x.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        c.x[i] = c.norm_scale * c.z[i];

    c.x_imp.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        c.x_imp[i] = impair::chain_apply(c.x[i], sys.imp, real.chain[i]);
        if (!std::isfinite(c.x_imp[i].real()) || !std::isfinite(c.x_imp[i].imag()))
            throw std::runtime_error("forward_batch: non-finite chain output at sample " +
                                     std::to_string(i));
    }

    const int nb = static_cast<int>(n);
    c.in_legit = Mat(nb, model.decoder_input_dim());
    c.in_eve = Mat(nb, model.decoder_input_dim());
    std::vector<cdouble> y(sys.ch.n_rx);
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < sys.ch.n_rx; ++k)
            y[k] = real.h_legit[i][k] * c.x_imp[i] + real.noise_legit[i][k];
        fill_decoder_row(c.in_legit, static_cast<int>(i), y, real.h_legit[i]);
        for (int k = 0; k < sys.ch.n_rx; ++k)
            y[k] = real.h_eve[i][k] * c.x_imp[i] + real.noise_eve[i][k];
        fill_decoder_row(c.in_eve, static_cast<int>(i), y, real.h_eve[i]);
    }
    c.legit_cache = model.dec_legit.forward(c.in_legit);
    c.eve_cache = model.dec_eve.forward(c.in_eve);
    return c;
}

inline ForwardCache forward_batch(const Model &model, const std::vector<int> &messages,
                                  const SystemConfig &sys, double snr_min_db, double snr_max_db,
                                  Rng &rng, bool train_mode = true, double power_limit = 1.0) {
    const BatchRealization real = draw_realization(messages.size(), sys, snr_min_db, snr_max_db, rng);
    return forward_batch_frozen(model, messages, sys, real, train_mode, power_limit);
}

struct BatchLosses {
    double lr_val = 0.0; // mean -log2 P_label at the legitimate decoder
    double le_val = 0.0; // mean sum P ln P at the eavesdropper decoder
    double total(double alpha) const { return loss_total(lr_val, le_val, alpha); }
};

inline BatchLosses batch_losses(const ForwardCache &c) {
    const Mat &pl = c.legit_cache.acts.back();
    const Mat &pe = c.eve_cache.acts.back();
    BatchLosses l;
    for (int i = 0; i < pl.rows; ++i) {
        l.lr_val += -std::log2(std::max(pl(i, c.messages[i]), kProbFloor));
        const double *per = pe.row(i);
        double ent = 0.0;
        for (int j = 0; j < pe.cols; ++j)
            ent += per[j] * std::log(std::max(per[j], kProbFloor));
        l.le_val += ent;
    }
    l.lr_val /= pl.rows;
    l.le_val /= pe.rows;
    return l;
}

/// Gradients of the batch-mean total loss with respect to every encoder and
/// decoder parameter, accumulated into the networks' gradient buffers.
/// Channels, noise and oscillator phases are treated as constants.
inline void backward_batch(Model &model, const ForwardCache &c, const SystemConfig &sys, double alpha) {
    if (!c.train_mode)
        throw std::invalid_argument("backward_batch: cache was built in eval mode");
    const int n = static_cast<int>(c.messages.size());
    const double inv_n = 1.0 / n;
    const double inv_ln2 = 1.0 / std::log(2.0);

    model.encoder.zero_grad();
    model.dec_legit.zero_grad();
    model.dec_eve.zero_grad();

    // d L / d logits for the legitimate decoder: alpha (P - onehot) / (n ln 2)
    const Mat &pl = c.legit_cache.acts.back();
    Mat dlogit_l(n, pl.cols);
    for (int i = 0; i < n; ++i) {
        const double *p = pl.row(i);
        double *d = dlogit_l.row(i);
        for (int j = 0; j < pl.cols; ++j)
            d[j] = alpha * inv_n * inv_ln2 * p[j];
        d[c.messages[i]] -= alpha * inv_n * inv_ln2;
    }

    // d L / d logits for the eavesdropper: (1-alpha) P_j (ln P_j - L_e,row) / n
    const Mat &pe = c.eve_cache.acts.back();
    Mat dlogit_e(n, pe.cols);
    for (int i = 0; i < n; ++i) {
        const double *p = pe.row(i);
        double *d = dlogit_e.row(i);
        double row_le = 0.0;
        for (int j = 0; j < pe.cols; ++j)
            row_le += p[j] * std::log(std::max(p[j], kProbFloor));
        for (int j = 0; j < pe.cols; ++j)
            d[j] = (1.0 - alpha) * inv_n * p[j] * (std::log(std::max(p[j], kProbFloor)) - row_le);
    }

    const Mat din_l = model.dec_legit.backward(c.legit_cache, dlogit_l);
    const Mat din_e = model.dec_eve.backward(c.eve_cache, dlogit_e);

    // pull the y-part gradients back through the channels and the chain
    const int nrx = sys.ch.n_rx;
    std::vector<cdouble> dz(n);
    for (int i = 0; i < n; ++i) {
        cdouble dximp{0.0, 0.0};
        const double *dl = din_l.row(i);
        const double *de = din_e.row(i);
        for (int k = 0; k < nrx; ++k) {
            dximp += std::conj(c.real.h_legit[i][k]) * cdouble{dl[k], dl[nrx + k]};
            dximp += std::conj(c.real.h_eve[i][k]) * cdouble{de[k], de[nrx + k]};
        }
        const impair::Mat2 j = impair::chain_jacobian(c.x[i], sys.imp, c.real.chain[i]);
        dz[i] = j.transpose_apply(dximp);
    }

    // power-normalization backward: x_b = c(z) z_b couples the whole batch
    Mat denc(n, 2);
    if (c.sum_sq_floored) {
        for (int i = 0; i < n; ++i) {
            denc(i, 0) = c.norm_scale * dz[i].real();
            denc(i, 1) = c.norm_scale * dz[i].imag();
        }
    } else {
        double inner = 0.0; // sum over batch of <dx, z> in R^2
        for (int i = 0; i < n; ++i)
            inner += dz[i].real() * c.z[i].real() + dz[i].imag() * c.z[i].imag();
        const double k = inner / c.sum_sq;
        for (int i = 0; i < n; ++i) {
            denc(i, 0) = c.norm_scale * (dz[i].real() - c.z[i].real() * k);
            denc(i, 1) = c.norm_scale * (dz[i].imag() - c.z[i].imag() * k);
        }
    }
    model.encoder.backward(c.enc_cache, denc);

    if (!model.encoder.grads_finite() || !model.dec_legit.grads_finite() ||
        !model.dec_eve.grads_finite())
        throw std::runtime_error("backward_batch: non-finite gradients");
}

// ---------------------------------------------------------------------------
// Single-symbol interfaces
// ---------------------------------------------------------------------------

/// Evaluation-mode encoding of one message with the frozen normalization.
inline cdouble encode(const Model &model, int message) {
    const Mat in = one_hot({message}, model.m_order);
    const NetCache cache = model.encoder.forward(in);
    const Mat &out = cache.acts.back();
    return model.eval_norm_scale * cdouble{out(0, 0), out(0, 1)};
}

inline SoftOutput decode(const Net &decoder, const std::vector<cdouble> &y,
                         const std::vector<cdouble> &h) {
    if (4 * y.size() != static_cast<std::size_t>(decoder.input_dim()) || y.size() != h.size())
        throw std::invalid_argument("decode: dimension mismatch");
    Mat in(1, decoder.input_dim());
    fill_decoder_row(in, 0, y, h);
    const NetCache cache = decoder.forward(in);
    const Mat &probs = cache.acts.back();
    SoftOutput out;
    out.probs.assign(probs.row(0), probs.row(0) + probs.cols);
    return out;
}

/// Hard decision: argmax probability, exact ties to the lowest index.
inline int hard_decision(const double *probs, int m) {
    int best = 0;
    for (int j = 1; j < m; ++j)
        if (probs[j] > probs[best])
            best = j;
    return best;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct EpochStats {
    int epoch = 0;
    double lr = 0.0;
    double loss_total = 0.0;
    double loss_r = 0.0;
    double loss_e = 0.0;
    double val_ber_legit = 0.0;
    double val_ber_eve = 0.0;
};

using History = std::vector<EpochStats>;

/// Refresh the frozen evaluation-mode normalization constant from a
/// calibration batch.
inline void calibrate_eval_scale(Model &model, const std::vector<int> &calib, double power_limit) {
    const Mat in = one_hot(calib, model.m_order);
    const NetCache cache = model.encoder.forward(in);
    const Mat &out = cache.acts.back();
    double s = 0.0;
    for (int i = 0; i < out.rows; ++i)
        s += out(i, 0) * out(i, 0) + out(i, 1) * out(i, 1);
    s = std::max(s, 1.0e-30);
    model.eval_norm_scale = std::sqrt(power_limit * out.rows / s);
}

struct BerCount {
    long long bit_errors = 0;
    long long bits = 0;
    long long symbol_errors = 0;
    long long symbols = 0;

    double ber() const { return bits > 0 ? static_cast<double>(bit_errors) / bits : 0.0; }
    double ser() const { return symbols > 0 ? static_cast<double>(symbol_errors) / symbols : 0.0; }
};

enum class Receiver { legit, eve };

/// Evaluation-mode Monte Carlo BER at one SNR point.
inline BerCount evaluate_ber(const Model &model, Receiver which, const SystemConfig &sys,
                             double snr_db, long long n_symbols, Rng &rng) {
    BerCount count;
    const int chunk = 512;
    const int bps = static_cast<int>(std::lround(std::log2(model.m_order)));
    while (count.symbols < n_symbols) {
        const int b = static_cast<int>(std::min<long long>(chunk, n_symbols - count.symbols));
        std::vector<int> msgs(b);
        for (int i = 0; i < b; ++i)
            msgs[i] = rng.uniform_int(model.m_order);
        const ForwardCache c =
            forward_batch(model, msgs, sys, snr_db, snr_db, rng, /*train_mode=*/false);
        const Mat &probs =
            which == Receiver::legit ? c.legit_cache.acts.back() : c.eve_cache.acts.back();
        for (int i = 0; i < b; ++i) {
            const int dec = hard_decision(probs.row(i), model.m_order);
            const int be = modem::bit_errors(msgs[i], dec);
            count.bit_errors += be;
            count.symbol_errors += be > 0 ? 1 : 0;
        }
        count.symbols += b;
        count.bits += static_cast<long long>(b) * bps;
    }
    return count;
}

/// Full joint training run. Returns the trained model and per-epoch history.
inline std::pair<Model, History> train(const std::vector<int> &train_messages,
                                       const TrainConfig &tcfg, const SystemConfig &sys) {
    tcfg.validate();
    sys.imp.validate();
    sys.ch.validate();
    if (train_messages.empty())
        throw std::invalid_argument("train: empty message stream");

    Rng root(tcfg.seed);
    Rng rng_init = root.split(1);
    Rng rng_data = root.split(2);
    Rng rng_noise = root.split(3);
    Rng rng_val = root.split(4);

    Model model = make_model(sys.m_order, sys.ch.n_rx, rng_init);
    model.tcfg = tcfg;
    model.trained_with_impairments = sys.imp.enabled.any() ? 1 : 0;

    std::vector<int> calib(4096);
    for (int &m : calib)
        m = rng_val.uniform_int(model.m_order);

    History history;
    double lr = tcfg.lr0;
    double best_loss = std::numeric_limits<double>::infinity();
    int stale_epochs = 0;

    std::vector<std::size_t> order(train_messages.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        // deterministic Fisher-Yates shuffle
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[static_cast<std::size_t>(rng_data.uniform_int(static_cast<int>(i)))]);

        double sum_total = 0.0, sum_lr = 0.0, sum_le = 0.0;
        int n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + tcfg.batch_size);
            std::vector<int> batch(end - start);
            for (std::size_t i = start; i < end; ++i)
                batch[i - start] = train_messages[order[i]];

            const ForwardCache cache = forward_batch(model, batch, sys, tcfg.snr_min_db,
                                                     tcfg.snr_max_db, rng_noise,
                                                     /*train_mode=*/true, tcfg.power_limit);
            const BatchLosses losses = batch_losses(cache);
            const double total = losses.total(tcfg.alpha);
            if (!std::isfinite(total))
                throw std::runtime_error("train: loss diverged to non-finite at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(n_batches));
            backward_batch(model, cache, sys, tcfg.alpha);
            model.encoder.adam_step(lr);
            model.dec_legit.adam_step(lr);
            model.dec_eve.adam_step(lr);

            sum_total += total;
            sum_lr += losses.lr_val;
            sum_le += losses.le_val;
            ++n_batches;
        }

        const double epoch_loss = sum_total / n_batches;
        if (epoch_loss < best_loss) {
            best_loss = epoch_loss;
            stale_epochs = 0;
        } else if (++stale_epochs >= tcfg.lr_patience) {
            lr *= tcfg.lr_decay;
            stale_epochs = 0;
        }

        calibrate_eval_scale(model, calib, tcfg.power_limit);

        EpochStats st;
        st.epoch = epoch;
        st.lr = lr;
        st.loss_total = epoch_loss;
        st.loss_r = sum_lr / n_batches;
        st.loss_e = sum_le / n_batches;
        Rng rng_epoch_val = rng_val.split(static_cast<std::uint64_t>(epoch) + 100);
        st.val_ber_legit =
            evaluate_ber(model, Receiver::legit, sys, tcfg.snr_max_db, 2048, rng_epoch_val).ber();
        st.val_ber_eve =
            evaluate_ber(model, Receiver::eve, sys, tcfg.snr_max_db, 2048, rng_epoch_val).ber();
        history.push_back(st);
    }
    return {std::move(model), std::move(history)};
}

/// Honest security margin: retrain a fresh eavesdropper decoder against the
/// frozen encoder with a pure cross-entropy objective and the same budget.
inline std::pair<Model, History> eve_best_response(const Model &trained, const TrainConfig &tcfg,
                                                   const SystemConfig &sys,
                                                   int samples_per_epoch = 35000) {
    tcfg.validate();
    Rng root(Rng::mix(tcfg.seed, 0xe5ebULL));
    Rng rng_init = root.split(1);
    Rng rng_data = root.split(2);
    Rng rng_noise = root.split(3);

    Model model = trained;
    const int din = model.decoder_input_dim();
    model.dec_eve = Net::make({{din, 128, Activation::rectifier},
                               {128, 128, Activation::rectifier},
                               {128, model.m_order, Activation::softmax_final}},
                              rng_init);

    History history;
    double lr = tcfg.lr0;
    double best_loss = std::numeric_limits<double>::infinity();
    int stale_epochs = 0;
    const int batches_per_epoch = std::max(1, samples_per_epoch / tcfg.batch_size);

    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        double sum_ce = 0.0;
        for (int bi = 0; bi < batches_per_epoch; ++bi) {
            std::vector<int> batch(tcfg.batch_size);
            for (int &m : batch)
                m = rng_data.uniform_int(model.m_order);
            const ForwardCache cache = forward_batch(model, batch, sys, tcfg.snr_min_db,
                                                     tcfg.snr_max_db, rng_noise,
                                                     /*train_mode=*/false);
            const Mat &pe = cache.eve_cache.acts.back();
            const int n = pe.rows;
            Mat dlogit(n, pe.cols);
            double ce = 0.0;
            const double inv = 1.0 / (n * std::log(2.0));
            for (int i = 0; i < n; ++i) {
                const double *p = pe.row(i);
                double *d = dlogit.row(i);
                for (int j = 0; j < pe.cols; ++j)
                    d[j] = inv * p[j];
                d[batch[i]] -= inv;
                ce += -std::log2(std::max(p[batch[i]], kProbFloor));
            }
            ce /= n;
            if (!std::isfinite(ce))
                throw std::runtime_error("eve_best_response: loss diverged at epoch " +
                                         std::to_string(epoch));
            model.dec_eve.zero_grad();
            model.dec_eve.backward(cache.eve_cache, dlogit);
            model.dec_eve.adam_step(lr);
            sum_ce += ce;
        }
        const double epoch_loss = sum_ce / batches_per_epoch;
        if (epoch_loss < best_loss) {
            best_loss = epoch_loss;
            stale_epochs = 0;
        } else if (++stale_epochs >= tcfg.lr_patience) {
            lr *= tcfg.lr_decay;
            stale_epochs = 0;
        }
        EpochStats st;
        st.epoch = epoch;
        st.lr = lr;
        st.loss_total = epoch_loss;
        st.loss_r = epoch_loss;
        history.push_back(st);
    }
    return {std::move(model), std::move(history)};
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

constexpr char kModelMagic[9] = "SSAEMDL1";

inline void save_model(const std::string &path, const Model &model) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("save_model: cannot open " + path);
    os.write(kModelMagic, 8);
    const std::int32_t m = model.m_order, nrx = model.n_rx;
    write_pod(os, &m, sizeof m);
    write_pod(os, &nrx, sizeof nrx);
    write_pod(os, &model.trained_with_impairments, sizeof model.trained_with_impairments);
    write_pod(os, &model.eval_norm_scale, sizeof model.eval_norm_scale);
    const TrainConfig &t = model.tcfg;
    write_pod(os, &t.alpha, sizeof t.alpha);
    const std::int32_t bs = t.batch_size, ep = t.epochs, pat = t.lr_patience;
    write_pod(os, &bs, sizeof bs);
    write_pod(os, &ep, sizeof ep);
    write_pod(os, &pat, sizeof pat);
    write_pod(os, &t.lr0, sizeof t.lr0);
    write_pod(os, &t.lr_decay, sizeof t.lr_decay);
    write_pod(os, &t.snr_min_db, sizeof t.snr_min_db);
    write_pod(os, &t.snr_max_db, sizeof t.snr_max_db);
    write_pod(os, &t.power_limit, sizeof t.power_limit);
    write_pod(os, &t.seed, sizeof t.seed);
    save_net(os, model.encoder);
    save_net(os, model.dec_legit);
    save_net(os, model.dec_eve);
    if (!os)
        throw std::runtime_error("save_model: write failed for " + path);
}

inline Model load_model(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("load_model: cannot open " + path);
    char magic[8];
    read_pod(is, magic, 8);
    if (std::string(magic, 8) != std::string(kModelMagic, 8))
        throw std::runtime_error("load_model: not a model checkpoint: " + path);
    Model model;
    std::int32_t m = 0, nrx = 0;
    read_pod(is, &m, sizeof m);
    read_pod(is, &nrx, sizeof nrx);
    read_pod(is, &model.trained_with_impairments, sizeof model.trained_with_impairments);
    read_pod(is, &model.eval_norm_scale, sizeof model.eval_norm_scale);
    TrainConfig &t = model.tcfg;
    std::int32_t bs = 0, ep = 0, pat = 0;
    read_pod(is, &t.alpha, sizeof t.alpha);
    read_pod(is, &bs, sizeof bs);
    read_pod(is, &ep, sizeof ep);
    read_pod(is, &pat, sizeof pat);
    read_pod(is, &t.lr0, sizeof t.lr0);
    read_pod(is, &t.lr_decay, sizeof t.lr_decay);
    read_pod(is, &t.snr_min_db, sizeof t.snr_min_db);
    read_pod(is, &t.snr_max_db, sizeof t.snr_max_db);
    read_pod(is, &t.power_limit, sizeof t.power_limit);
    read_pod(is, &t.seed, sizeof t.seed);
    t.batch_size = bs;
    t.epochs = ep;
    t.lr_patience = pat;
    model.m_order = m;
    model.n_rx = nrx;
    model.encoder = load_net(is);
    model.dec_legit = load_net(is);
    model.dec_eve = load_net(is);
    return model;
}

} // namespace simosec::autoenc
