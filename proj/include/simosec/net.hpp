// Minimal dense network with explicit gradients: batched affine layers,
// rectifier activations, optional softmax output, and an adaptive-moment
// optimizer. Everything is double precision and deterministic given an Rng.
#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "simosec/rng.hpp"

namespace simosec::autoenc {

enum class Activation : std::uint32_t { rectifier = 0, identity = 1, softmax_final = 2 };

struct LayerSpec {
    int fan_in = 0;
    int fan_out = 0;
    Activation activation = Activation::identity;
};

/// Row-major matrix; rows index batch samples.
struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double *row(int i) { return a.data() + static_cast<std::size_t>(i) * cols; }
    const double *row(int i) const { return a.data() + static_cast<std::size_t>(i) * cols; }
    double &operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
    void zero() { a.assign(a.size(), 0.0); }
};

// Y = X W + 1 b^T   (X: B x K, W: K x N)
inline void affine_forward(const Mat &x, const Mat &w, const std::vector<double> &b, Mat &y) {
    y = Mat(x.rows, w.cols);
    for (int i = 0; i < x.rows; ++i) {
        double *yr = y.row(i);
        for (int j = 0; j < w.cols; ++j)
            yr[j] = b[j];
        const double *xr = x.row(i);
        for (int k = 0; k < x.cols; ++k) {
            const double xv = xr[k];
            const double *wr = w.row(k);
            for (int j = 0; j < w.cols; ++j)
                yr[j] += xv * wr[j];
        }
    }
}

struct DenseLayer {
    LayerSpec spec;
    Mat w;                  // fan_in x fan_out
    std::vector<double> b;  // fan_out
    Mat gw;                 // gradient buffers, same shapes
    std::vector<double> gb;
    Mat mw, vw;             // optimizer moments
    std::vector<double> mb, vb;

    void init(Rng &rng) {
        w = Mat(spec.fan_in, spec.fan_out);
        b.assign(spec.fan_out, 0.0);
        const double limit = std::sqrt(6.0 / (spec.fan_in + spec.fan_out));
        for (double &v : w.a)
            v = rng.uniform(-limit, limit);
        gw = Mat(spec.fan_in, spec.fan_out);
        gb.assign(spec.fan_out, 0.0);
        mw = Mat(spec.fan_in, spec.fan_out);
        vw = Mat(spec.fan_in, spec.fan_out);
        mb.assign(spec.fan_out, 0.0);
        vb.assign(spec.fan_out, 0.0);
    }
};

/// Post-activation values of every layer; acts[0] is the network input.
/// For a softmax_final layer, acts.back() holds the probabilities and
/// logits holds the final pre-activation row scores.
struct NetCache {
    std::vector<Mat> acts;
    Mat logits;
};

inline void softmax_rows(const Mat &logits, Mat &probs) {
    probs = Mat(logits.rows, logits.cols);
    for (int i = 0; i < logits.rows; ++i) {
        const double *lr = logits.row(i);
        double *pr = probs.row(i);
        double mx = lr[0];
        for (int j = 1; j < logits.cols; ++j)
            mx = std::max(mx, lr[j]);
        double sum = 0.0;
        for (int j = 0; j < logits.cols; ++j) {
            pr[j] = std::exp(lr[j] - mx);
            sum += pr[j];
        }
        for (int j = 0; j < logits.cols; ++j)
            pr[j] /= sum;
    }
}

struct Net {
    std::vector<DenseLayer> layers;
    std::int64_t adam_step_count = 0;

    static Net make(const std::vector<LayerSpec> &specs, Rng &rng) {
        Net net;
        for (std::size_t i = 0; i + 1 < specs.size(); ++i)
            if (specs[i].fan_out != specs[i + 1].fan_in)
                throw std::invalid_argument("Net: inconsistent layer shapes");
        for (const LayerSpec &s : specs) {
            if (s.fan_in <= 0 || s.fan_out <= 0)
                throw std::invalid_argument("Net: non-positive layer dimension");
            DenseLayer l;
            l.spec = s;
            l.init(rng);
            net.layers.push_back(std::move(l));
        }
        return net;
    }

    int input_dim() const { return layers.front().spec.fan_in; }
    int output_dim() const { return layers.back().spec.fan_out; }

    NetCache forward(const Mat &input) const {
        NetCache cache;
        cache.acts.reserve(layers.size() + 1);
        cache.acts.push_back(input);
        for (const DenseLayer &l : layers) {
            Mat z;
            affine_forward(cache.acts.back(), l.w, l.b, z);
            switch (l.spec.activation) {
            case Activation::rectifier:
                for (double &v : z.a)
                    v = v > 0.0 ? v : 0.0;
                cache.acts.push_back(std::move(z));
                break;
            case Activation::identity:
                cache.acts.push_back(std::move(z));
                break;
            case Activation::softmax_final: {
                Mat probs;
                softmax_rows(z, probs);
                cache.logits = std::move(z);
                cache.acts.push_back(std::move(probs));
                break;
            }
            }
        }
        return cache;
    }

    const Mat &output(const NetCache &cache) const { return cache.acts.back(); }

    /// Accumulate parameter gradients. d_final is the gradient with respect
    /// to the final pre-activation (the logits for a softmax net, the output
    /// otherwise). Returns the gradient with respect to the network input.
    Mat backward(const NetCache &cache, const Mat &d_final) {
        Mat dz = d_final;
        for (int li = static_cast<int>(layers.size()) - 1; li >= 0; --li) {
            DenseLayer &l = layers[li];
            const Mat &a_prev = cache.acts[li];
            // gw += a_prev^T dz, gb += column sums of dz
            for (int i = 0; i < dz.rows; ++i) {
                const double *dzr = dz.row(i);
                for (int j = 0; j < dz.cols; ++j)
                    l.gb[j] += dzr[j];
                const double *ar = a_prev.row(i);
                for (int k = 0; k < a_prev.cols; ++k) {
                    const double av = ar[k];
                    if (av == 0.0)
                        continue;
                    double *gwr = l.gw.row(k);
                    for (int j = 0; j < dz.cols; ++j)
                        gwr[j] += av * dzr[j];
                }
            }
            // da_prev = dz W^T
            Mat da(dz.rows, l.spec.fan_in);
            for (int i = 0; i < dz.rows; ++i) {
                const double *dzr = dz.row(i);
                double *dar = da.row(i);
                for (int k = 0; k < l.spec.fan_in; ++k) {
                    const double *wr = l.w.row(k);
                    double acc = 0.0;
                    for (int j = 0; j < dz.cols; ++j)
                        acc += dzr[j] * wr[j];
                    dar[k] = acc;
                }
            }
            if (li > 0) {
                // previous layer's activation mask (rectifier gates the gradient)
                if (layers[li - 1].spec.activation == Activation::rectifier) {
                    const Mat &a = cache.acts[li];
                    for (std::size_t i = 0; i < da.a.size(); ++i)
                        if (a.a[i] <= 0.0)
                            da.a[i] = 0.0;
                }
            }
            dz = std::move(da);
        }
        return dz;
    }

    void zero_grad() {
        for (DenseLayer &l : layers) {
            l.gw.zero();
            l.gb.assign(l.gb.size(), 0.0);
        }
    }

    void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1.0e-8) {
        ++adam_step_count;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_step_count));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_step_count));
        for (DenseLayer &l : layers) {
            for (std::size_t i = 0; i < l.w.a.size(); ++i) {
                const double g = l.gw.a[i];
                l.mw.a[i] = beta1 * l.mw.a[i] + (1.0 - beta1) * g;
                l.vw.a[i] = beta2 * l.vw.a[i] + (1.0 - beta2) * g * g;
                l.w.a[i] -= lr * (l.mw.a[i] / bc1) / (std::sqrt(l.vw.a[i] / bc2) + eps);
            }
            for (std::size_t i = 0; i < l.b.size(); ++i) {
                const double g = l.gb[i];
                l.mb[i] = beta1 * l.mb[i] + (1.0 - beta1) * g;
                l.vb[i] = beta2 * l.vb[i] + (1.0 - beta2) * g * g;
                l.b[i] -= lr * (l.mb[i] / bc1) / (std::sqrt(l.vb[i] / bc2) + eps);
            }
        }
    }

    bool grads_finite() const {
        for (const DenseLayer &l : layers) {
            for (const double g : l.gw.a)
                if (!std::isfinite(g))
                    return false;
            for (const double g : l.gb)
                if (!std::isfinite(g))
                    return false;
        }
        return true;
    }
};

// -- serialization ----------------------------------------------------------

inline void write_pod(std::ostream &os, const void *p, std::size_t n) {
    os.write(static_cast<const char *>(p), static_cast<std::streamsize>(n));
}

inline void read_pod(std::istream &is, void *p, std::size_t n) {
    is.read(static_cast<char *>(p), static_cast<std::streamsize>(n));
    if (!is)
        throw std::runtime_error("model file: truncated read");
}

inline void save_net(std::ostream &os, const Net &net) {
    const std::uint32_t n_layers = static_cast<std::uint32_t>(net.layers.size());
    write_pod(os, &n_layers, sizeof n_layers);
    for (const DenseLayer &l : net.layers) {
        const std::int32_t fi = l.spec.fan_in, fo = l.spec.fan_out;
        const std::uint32_t act = static_cast<std::uint32_t>(l.spec.activation);
        write_pod(os, &fi, sizeof fi);
        write_pod(os, &fo, sizeof fo);
        write_pod(os, &act, sizeof act);
        write_pod(os, l.w.a.data(), l.w.a.size() * sizeof(double));
        write_pod(os, l.b.data(), l.b.size() * sizeof(double));
    }
}

inline Net load_net(std::istream &is) {
    std::uint32_t n_layers = 0;
    read_pod(is, &n_layers, sizeof n_layers);
    if (n_layers == 0 || n_layers > 64)
        throw std::runtime_error("model file: implausible layer count");
    Net net;
    for (std::uint32_t li = 0; li < n_layers; ++li) {
        std::int32_t fi = 0, fo = 0;
        std::uint32_t act = 0;
        read_pod(is, &fi, sizeof fi);
        read_pod(is, &fo, sizeof fo);
        read_pod(is, &act, sizeof act);
        if (fi <= 0 || fo <= 0 || act > 2)
            throw std::runtime_error("model file: invalid layer header");
        DenseLayer l;
        l.spec = {fi, fo, static_cast<Activation>(act)};
        l.w = Mat(fi, fo);
        l.b.assign(static_cast<std::size_t>(fo), 0.0);
        read_pod(is, l.w.a.data(), l.w.a.size() * sizeof(double));
        read_pod(is, l.b.data(), l.b.size() * sizeof(double));
        l.gw = Mat(fi, fo);
        l.gb.assign(l.b.size(), 0.0);
        l.mw = Mat(fi, fo);
        l.vw = Mat(fi, fo);
        l.mb.assign(l.b.size(), 0.0);
        l.vb.assign(l.b.size(), 0.0);
        net.layers.push_back(std::move(l));
    }
    return net;
}

} // namespace simosec::autoenc
