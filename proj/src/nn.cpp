#include "nn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"
#include "rng.hpp"

namespace hycard {

Tensor Tensor::zeros(std::vector<size_t> shape) {
    Tensor t;
    size_t n = 1;
    for (size_t s : shape) n *= s;
    t.shape = std::move(shape);
    t.v.assign(n, 0.0);
    return t;
}

LayerSpec LayerSpec::dense(size_t in, size_t out) {
    LayerSpec s;
    s.kind = Kind::Dense;
    s.in = in;
    s.out = out;
    return s;
}
LayerSpec LayerSpec::conv1d(size_t in_ch, size_t out_ch, size_t kernel) {
    LayerSpec s;
    s.kind = Kind::Conv1D;
    s.in = in_ch;
    s.out = out_ch;
    s.kernel = kernel;
    return s;
}
LayerSpec LayerSpec::lstm(size_t in, size_t hidden, bool return_sequences) {
    LayerSpec s;
    s.kind = Kind::Lstm;
    s.in = in;
    s.out = hidden;
    s.return_sequences = return_sequences;
    return s;
}
LayerSpec LayerSpec::activation(Activation a) {
    LayerSpec s;
    s.kind = Kind::Act;
    s.act = a;
    return s;
}
LayerSpec LayerSpec::global_avg_pool() {
    LayerSpec s;
    s.kind = Kind::GlobalAvgPool;
    return s;
}
LayerSpec LayerSpec::output_sigmoid() {
    LayerSpec s;
    s.kind = Kind::Output;
    return s;
}

long long param_count(const std::vector<LayerSpec>& stack) {
    long long total = 0;
    for (const auto& s : stack) {
        switch (s.kind) {
            case LayerSpec::Kind::Dense:
                total += static_cast<long long>(s.in) * s.out + s.out;
                break;
            case LayerSpec::Kind::Conv1D:
                total += static_cast<long long>(s.in) * s.out * s.kernel + s.out;
                break;
            case LayerSpec::Kind::Lstm:
                total += 4LL * (s.in + s.out + 1) * s.out;
                break;
            default:
                break;
        }
    }
    return total;
}

void Layer::zero_grads() {
    for (auto& p : params()) std::fill(p.grad->v.begin(), p.grad->v.end(), 0.0);
}

namespace {

double glorot_limit(size_t fan_in, size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void init_uniform(Tensor& t, Rng& rng, double limit) {
    for (double& v : t.v) v = rng.uniform(-limit, limit);
}

// ---------------------------------------------------------------------------

class DenseLayer final : public Layer {
public:
    DenseLayer(size_t in, size_t out, Rng& rng) : in_(in), out_(out) {
        w_ = Tensor::zeros({out, in});
        b_ = Tensor::zeros({out});
        dw_ = Tensor::zeros({out, in});
        db_ = Tensor::zeros({out});
        init_uniform(w_, rng, glorot_limit(in, out));
    }

    LayerSpec spec() const override { return LayerSpec::dense(in_, out_); }

    Batch forward(const Batch& x, bool keep_cache) override {
        Batch y;
        y.count = x.count;
        y.ch = out_;
        y.v.assign(x.count * out_, 0.0);
        for (size_t n = 0; n < x.count; ++n) {
            const double* xr = x.v.data() + n * in_;
            double* yr = y.v.data() + n * out_;
            for (size_t o = 0; o < out_; ++o) {
                const double* wr = w_.v.data() + o * in_;
                double acc = b_.v[o];
                for (size_t i = 0; i < in_; ++i) acc += wr[i] * xr[i];
                yr[o] = acc;
            }
        }
        if (keep_cache) cache_ = x;
        return y;
    }

    Batch backward(const Batch& dy) override {
        const Batch& x = cache_;
        Batch dx;
        dx.count = x.count;
        dx.ch = in_;
        dx.v.assign(x.count * in_, 0.0);
        for (size_t n = 0; n < x.count; ++n) {
            const double* xr = x.v.data() + n * in_;
            const double* gr = dy.v.data() + n * out_;
            double* dxr = dx.v.data() + n * in_;
            for (size_t o = 0; o < out_; ++o) {
                const double g = gr[o];
                if (g == 0.0) continue;
                double* dwr = dw_.v.data() + o * in_;
                const double* wr = w_.v.data() + o * in_;
                for (size_t i = 0; i < in_; ++i) {
                    dwr[i] += g * xr[i];
                    dxr[i] += g * wr[i];
                }
                db_.v[o] += g;
            }
        }
        return dx;
    }

    std::vector<ParamRef> params() override { return {{&w_, &dw_}, {&b_, &db_}}; }

private:
    size_t in_, out_;
    Tensor w_, b_, dw_, db_;
    Batch cache_;
};

// ---------------------------------------------------------------------------

class Conv1DLayer final : public Layer {
public:
    Conv1DLayer(size_t in_ch, size_t out_ch, size_t kernel, Rng& rng)
        : in_(in_ch), out_(out_ch), k_(kernel) {
        w_ = Tensor::zeros({out_ch, kernel, in_ch});
        b_ = Tensor::zeros({out_ch});
        dw_ = Tensor::zeros({out_ch, kernel, in_ch});
        db_ = Tensor::zeros({out_ch});
        init_uniform(w_, rng, glorot_limit(in_ch * kernel, out_ch * kernel));
    }

    LayerSpec spec() const override { return LayerSpec::conv1d(in_, out_, k_); }

    Batch forward(const Batch& x, bool keep_cache) override {
        const size_t L = x.len;
        const size_t pad = (k_ - 1) / 2;
        Batch y;
        y.count = x.count;
        y.len = L;
        y.ch = out_;
        y.v.assign(x.count * L * out_, 0.0);
        for (size_t n = 0; n < x.count; ++n) {
            const double* xs = x.v.data() + n * L * in_;
            double* ys = y.v.data() + n * L * out_;
            for (size_t t = 0; t < L; ++t) {
                for (size_t o = 0; o < out_; ++o) {
                    double acc = b_.v[o];
                    const double* wo = w_.v.data() + o * k_ * in_;
                    for (size_t kk = 0; kk < k_; ++kk) {
                        const long s = static_cast<long>(t + kk) - static_cast<long>(pad);
                        if (s < 0 || s >= static_cast<long>(L)) continue;
                        const double* xr = xs + static_cast<size_t>(s) * in_;
                        const double* wr = wo + kk * in_;
                        for (size_t ci = 0; ci < in_; ++ci) acc += wr[ci] * xr[ci];
                    }
                    ys[t * out_ + o] = acc;
                }
            }
        }
        if (keep_cache) cache_ = x;
        return y;
    }

    Batch backward(const Batch& dy) override {
        const Batch& x = cache_;
        const size_t L = x.len;
        const size_t pad = (k_ - 1) / 2;
        Batch dx;
        dx.count = x.count;
        dx.len = L;
        dx.ch = in_;
        dx.v.assign(x.v.size(), 0.0);
        for (size_t n = 0; n < x.count; ++n) {
            const double* xs = x.v.data() + n * L * in_;
            const double* gs = dy.v.data() + n * L * out_;
            double* dxs = dx.v.data() + n * L * in_;
            for (size_t t = 0; t < L; ++t) {
                for (size_t o = 0; o < out_; ++o) {
                    const double g = gs[t * out_ + o];
                    if (g == 0.0) continue;
                    db_.v[o] += g;
                    const double* wo = w_.v.data() + o * k_ * in_;
                    double* dwo = dw_.v.data() + o * k_ * in_;
                    for (size_t kk = 0; kk < k_; ++kk) {
                        const long s = static_cast<long>(t + kk) - static_cast<long>(pad);
                        if (s < 0 || s >= static_cast<long>(L)) continue;
                        const double* xr = xs + static_cast<size_t>(s) * in_;
                        double* dxr = dxs + static_cast<size_t>(s) * in_;
                        const double* wr = wo + kk * in_;
                        double* dwr = dwo + kk * in_;
                        for (size_t ci = 0; ci < in_; ++ci) {
                            dwr[ci] += g * xr[ci];
                            dxr[ci] += g * wr[ci];
                        }
                    }
                }
            }
        }
        return dx;
    }

    std::vector<ParamRef> params() override { return {{&w_, &dw_}, {&b_, &db_}}; }

private:
    size_t in_, out_, k_;
    Tensor w_, b_, dw_, db_;
    Batch cache_;
};

// ---------------------------------------------------------------------------

class ActLayer final : public Layer {
public:
    explicit ActLayer(Activation a) : act_(a) {}

    LayerSpec spec() const override { return LayerSpec::activation(act_); }

    Batch forward(const Batch& x, bool keep_cache) override {
        Batch y = x;
        switch (act_) {
            case Activation::Relu:
                for (double& v : y.v) v = v > 0.0 ? v : 0.0;
                break;
            case Activation::Sigmoid:
                for (double& v : y.v) v = 1.0 / (1.0 + std::exp(-v));
                break;
            case Activation::Tanh:
                for (double& v : y.v) v = std::tanh(v);
                break;
        }
        if (keep_cache) {
            in_cache_ = x;
            out_cache_ = y;
        }
        return y;
    }

    Batch backward(const Batch& dy) override {
        Batch dx = dy;
        switch (act_) {
            case Activation::Relu:
                for (size_t i = 0; i < dx.v.size(); ++i)
                    if (in_cache_.v[i] <= 0.0) dx.v[i] = 0.0;
                break;
            case Activation::Sigmoid:
                for (size_t i = 0; i < dx.v.size(); ++i) {
                    const double y = out_cache_.v[i];
                    dx.v[i] *= y * (1.0 - y);
                }
                break;
            case Activation::Tanh:
                for (size_t i = 0; i < dx.v.size(); ++i) {
                    const double y = out_cache_.v[i];
                    dx.v[i] *= 1.0 - y * y;
                }
                break;
        }
        return dx;
    }

private:
    Activation act_;
    Batch in_cache_, out_cache_;
};

// ---------------------------------------------------------------------------

class GlobalAvgPoolLayer final : public Layer {
public:
    LayerSpec spec() const override { return LayerSpec::global_avg_pool(); }

    Batch forward(const Batch& x, bool keep_cache) override {
        Batch y;
        y.count = x.count;
        y.ch = x.ch;
        y.v.assign(x.count * x.ch, 0.0);
        const double inv = 1.0 / static_cast<double>(x.len);
        for (size_t n = 0; n < x.count; ++n) {
            const double* xs = x.v.data() + n * x.len * x.ch;
            double* yr = y.v.data() + n * x.ch;
            for (size_t t = 0; t < x.len; ++t)
                for (size_t c = 0; c < x.ch; ++c) yr[c] += xs[t * x.ch + c];
            for (size_t c = 0; c < x.ch; ++c) yr[c] *= inv;
        }
        if (keep_cache) {
            len_ = x.len;
            ch_ = x.ch;
        }
        return y;
    }

    Batch backward(const Batch& dy) override {
        Batch dx;
        dx.count = dy.count;
        dx.len = len_;
        dx.ch = ch_;
        dx.v.assign(dy.count * len_ * ch_, 0.0);
        const double inv = 1.0 / static_cast<double>(len_);
        for (size_t n = 0; n < dy.count; ++n) {
            const double* gr = dy.v.data() + n * ch_;
            double* dxs = dx.v.data() + n * len_ * ch_;
            for (size_t t = 0; t < len_; ++t)
                for (size_t c = 0; c < ch_; ++c) dxs[t * ch_ + c] = gr[c] * inv;
        }
        return dx;
    }

private:
    size_t len_ = 0, ch_ = 0;
};

// ---------------------------------------------------------------------------

// Gate order in the stacked weight matrices: input, forget, cell, output.
class LstmLayer final : public Layer {
public:
    LstmLayer(size_t in, size_t hidden, bool return_sequences, Rng& rng)
        : in_(in), h_(hidden), return_seq_(return_sequences) {
        w_ = Tensor::zeros({4 * h_, in_});
        u_ = Tensor::zeros({4 * h_, h_});
        b_ = Tensor::zeros({4 * h_});
        dw_ = Tensor::zeros({4 * h_, in_});
        du_ = Tensor::zeros({4 * h_, h_});
        db_ = Tensor::zeros({4 * h_});
        init_uniform(w_, rng, glorot_limit(in_, h_));
        init_uniform(u_, rng, glorot_limit(h_, h_));
        for (size_t i = h_; i < 2 * h_; ++i) b_.v[i] = 1.0;  // forget gate
    }

    LayerSpec spec() const override { return LayerSpec::lstm(in_, h_, return_seq_); }

    Batch forward(const Batch& x, bool keep_cache) override {
        const size_t L = x.len;
        const size_t B = x.count;
        gates_.assign(B * L * 4 * h_, 0.0);
        cells_.assign(B * (L + 1) * h_, 0.0);
        hidden_.assign(B * (L + 1) * h_, 0.0);
        tanhc_.assign(B * L * h_, 0.0);

        std::vector<double> z(4 * h_);
        for (size_t n = 0; n < B; ++n) {
            const double* xs = x.v.data() + n * L * in_;
            for (size_t t = 0; t < L; ++t) {
                const double* xt = xs + t * in_;
                const double* h_prev = hidden_.data() + (n * (L + 1) + t) * h_;
                const double* c_prev = cells_.data() + (n * (L + 1) + t) * h_;
                for (size_t g = 0; g < 4 * h_; ++g) {
                    const double* wr = w_.v.data() + g * in_;
                    const double* ur = u_.v.data() + g * h_;
                    double acc = b_.v[g];
                    for (size_t i = 0; i < in_; ++i) acc += wr[i] * xt[i];
                    for (size_t j = 0; j < h_; ++j) acc += ur[j] * h_prev[j];
                    z[g] = acc;
                }
                double* gate = gates_.data() + (n * L + t) * 4 * h_;
                double* c_cur = cells_.data() + (n * (L + 1) + t + 1) * h_;
                double* h_cur = hidden_.data() + (n * (L + 1) + t + 1) * h_;
                double* tc = tanhc_.data() + (n * L + t) * h_;
                for (size_t j = 0; j < h_; ++j) {
                    const double ig = 1.0 / (1.0 + std::exp(-z[j]));
                    const double fg = 1.0 / (1.0 + std::exp(-z[h_ + j]));
                    const double gg = std::tanh(z[2 * h_ + j]);
                    const double og = 1.0 / (1.0 + std::exp(-z[3 * h_ + j]));
                    gate[j] = ig;
                    gate[h_ + j] = fg;
                    gate[2 * h_ + j] = gg;
                    gate[3 * h_ + j] = og;
                    const double c = fg * c_prev[j] + ig * gg;
                    c_cur[j] = c;
                    const double th = std::tanh(c);
                    tc[j] = th;
                    h_cur[j] = og * th;
                }
            }
        }

        Batch y;
        y.count = B;
        if (return_seq_) {
            y.len = L;
            y.ch = h_;
            y.v.assign(B * L * h_, 0.0);
            for (size_t n = 0; n < B; ++n)
                for (size_t t = 0; t < L; ++t)
                    std::memcpy(y.v.data() + (n * L + t) * h_,
                                hidden_.data() + (n * (L + 1) + t + 1) * h_, h_ * sizeof(double));
        } else {
            y.ch = h_;
            y.v.assign(B * h_, 0.0);
            for (size_t n = 0; n < B; ++n)
                std::memcpy(y.v.data() + n * h_, hidden_.data() + (n * (L + 1) + L) * h_,
                            h_ * sizeof(double));
        }
        if (keep_cache) {
            cache_ = x;
            cached_len_ = L;
        }
        return y;
    }

    Batch backward(const Batch& dy) override {
        const Batch& x = cache_;
        const size_t L = cached_len_;
        const size_t B = x.count;

        Batch dx;
        dx.count = B;
        dx.len = L;
        dx.ch = in_;
        dx.v.assign(B * L * in_, 0.0);

        std::vector<double> dh(h_), dc(h_), dz(4 * h_);
        for (size_t n = 0; n < B; ++n) {
            std::fill(dh.begin(), dh.end(), 0.0);
            std::fill(dc.begin(), dc.end(), 0.0);
            const double* xs = x.v.data() + n * L * in_;
            for (size_t t = L; t-- > 0;) {
                if (return_seq_) {
                    const double* g = dy.v.data() + (n * L + t) * h_;
                    for (size_t j = 0; j < h_; ++j) dh[j] += g[j];
                } else if (t == L - 1) {
                    const double* g = dy.v.data() + n * h_;
                    for (size_t j = 0; j < h_; ++j) dh[j] += g[j];
                }
                const double* gate = gates_.data() + (n * L + t) * 4 * h_;
                const double* tc = tanhc_.data() + (n * L + t) * h_;
                const double* c_prev = cells_.data() + (n * (L + 1) + t) * h_;
                const double* h_prev = hidden_.data() + (n * (L + 1) + t) * h_;
                for (size_t j = 0; j < h_; ++j) {
                    const double ig = gate[j], fg = gate[h_ + j], gg = gate[2 * h_ + j],
                                 og = gate[3 * h_ + j];
                    const double dch = dc[j] + dh[j] * og * (1.0 - tc[j] * tc[j]);
                    const double dog = dh[j] * tc[j];
                    const double dig = dch * gg;
                    const double dgg = dch * ig;
                    const double dfg = dch * c_prev[j];
                    dz[j] = dig * ig * (1.0 - ig);
                    dz[h_ + j] = dfg * fg * (1.0 - fg);
                    dz[2 * h_ + j] = dgg * (1.0 - gg * gg);
                    dz[3 * h_ + j] = dog * og * (1.0 - og);
                    dc[j] = dch * fg;
                }
                const double* xt = xs + t * in_;
                double* dxt = dx.v.data() + (n * L + t) * in_;
                std::fill(dh.begin(), dh.end(), 0.0);
                for (size_t g = 0; g < 4 * h_; ++g) {
                    const double gz = dz[g];
                    if (gz == 0.0) continue;
                    double* dwr = dw_.v.data() + g * in_;
                    double* dur = du_.v.data() + g * h_;
                    const double* wr = w_.v.data() + g * in_;
                    const double* ur = u_.v.data() + g * h_;
                    for (size_t i = 0; i < in_; ++i) {
                        dwr[i] += gz * xt[i];
                        dxt[i] += gz * wr[i];
                    }
                    for (size_t j = 0; j < h_; ++j) {
                        dur[j] += gz * h_prev[j];
                        dh[j] += gz * ur[j];
                    }
                    db_.v[g] += gz;
                }
            }
        }
        return dx;
    }

    std::vector<ParamRef> params() override { return {{&w_, &dw_}, {&u_, &du_}, {&b_, &db_}}; }

private:
    size_t in_, h_;
    bool return_seq_;
    Tensor w_, u_, b_, dw_, du_, db_;
    Batch cache_;
    size_t cached_len_ = 0;
    // forward intermediates, per (sample, timestep)
    std::vector<double> gates_, cells_, hidden_, tanhc_;
};

// ---------------------------------------------------------------------------

class OutputLayer final : public Layer {
public:
    LayerSpec spec() const override { return LayerSpec::output_sigmoid(); }

    Batch forward(const Batch& x, bool) override {
        logits.assign(x.count, 0.0);
        for (size_t n = 0; n < x.count; ++n) logits[n] = x.v[n];
        Batch y;
        y.count = x.count;
        y.ch = 1;
        y.v.resize(x.count);
        for (size_t n = 0; n < x.count; ++n) y.v[n] = 1.0 / (1.0 + std::exp(-logits[n]));
        return y;
    }

    // The network seeds backward with dL/dlogit directly.
    Batch backward(const Batch& dz) override { return dz; }

    std::vector<double> logits;
};

std::string kind_label(LayerSpec::Kind k) {
    switch (k) {
        case LayerSpec::Kind::Dense: return "dense";
        case LayerSpec::Kind::Conv1D: return "conv1d";
        case LayerSpec::Kind::Lstm: return "lstm";
        case LayerSpec::Kind::Act: return "act";
        case LayerSpec::Kind::GlobalAvgPool: return "gap";
        case LayerSpec::Kind::Output: return "output";
    }
    return "?";
}

std::string shape_label(bool seq, size_t len, size_t ch) {
    std::ostringstream os;
    if (seq)
        os << "sequence " << len << "x" << ch;
    else
        os << "vector of width " << ch;
    return os.str();
}

}  // namespace

Network::Network(std::vector<LayerSpec> stack, size_t input_len, size_t input_ch, uint64_t seed)
    : stack_(std::move(stack)), input_len_(input_len), input_ch_(input_ch) {
    if (stack_.empty()) throw ConfigError("network stack is empty");
    if (input_ch_ == 0) throw ConfigError("network input width must be positive");

    Rng rng(splitmix64(seed ^ 0x9ee7a11ull));
    bool seq = input_len_ > 0;
    size_t len = input_len_, ch = input_ch_;

    for (size_t li = 0; li < stack_.size(); ++li) {
        const LayerSpec& s = stack_[li];
        auto fail = [&](const std::string& what) {
            std::ostringstream os;
            os << "layer " << li << " (" << kind_label(s.kind) << "): " << what << ", got "
               << shape_label(seq, len, ch);
            throw ConfigError(os.str());
        };
        switch (s.kind) {
            case LayerSpec::Kind::Dense:
                if (seq) fail("expected vector input of width " + std::to_string(s.in));
                if (ch != s.in) fail("expected vector input of width " + std::to_string(s.in));
                layers_.push_back(std::make_unique<DenseLayer>(s.in, s.out, rng));
                ch = s.out;
                break;
            case LayerSpec::Kind::Conv1D:
                if (s.kernel == 0) throw ConfigError("conv1d kernel must be positive");
                if (!seq || ch != s.in)
                    fail("expected sequence input with " + std::to_string(s.in) + " channels");
                layers_.push_back(std::make_unique<Conv1DLayer>(s.in, s.out, s.kernel, rng));
                ch = s.out;
                break;
            case LayerSpec::Kind::Lstm:
                if (!seq || ch != s.in)
                    fail("expected sequence input with " + std::to_string(s.in) + " channels");
                layers_.push_back(std::make_unique<LstmLayer>(s.in, s.out, s.return_sequences, rng));
                ch = s.out;
                if (!s.return_sequences) {
                    seq = false;
                    len = 0;
                }
                break;
            case LayerSpec::Kind::Act:
                layers_.push_back(std::make_unique<ActLayer>(s.act));
                break;
            case LayerSpec::Kind::GlobalAvgPool:
                if (!seq) fail("expected sequence input");
                layers_.push_back(std::make_unique<GlobalAvgPoolLayer>());
                seq = false;
                len = 0;
                break;
            case LayerSpec::Kind::Output:
                if (li + 1 != stack_.size())
                    throw ConfigError("output layer must be the last layer");
                if (seq || ch != 1) fail("expected a single logit");
                layers_.push_back(std::make_unique<OutputLayer>());
                break;
        }
    }
    if (stack_.back().kind != LayerSpec::Kind::Output)
        throw ConfigError("network must end with an output layer");
}

Batch Network::make_batch(const double* rows, size_t count) const {
    Batch b;
    b.count = count;
    b.len = input_len_;
    b.ch = input_ch_;
    b.v.assign(rows, rows + count * b.row_elems());
    return b;
}

std::vector<double> Network::forward(const double* rows, size_t count, bool keep_cache) {
    Batch cur = make_batch(rows, count);
    for (auto& layer : layers_) cur = layer->forward(cur, keep_cache);
    auto* out = static_cast<OutputLayer*>(layers_.back().get());
    logits_ = out->logits;
    probs_ = cur.v;
    return probs_;
}

double Network::bce_from_logit(double z, int y) {
    // log(1 + e^-|z|) + max(z,0) - z*y, stable for large |z|
    const double zy = z * static_cast<double>(y);
    return std::max(z, 0.0) - zy + std::log1p(std::exp(-std::fabs(z)));
}

double Network::loss(const double* rows, const int* labels, size_t count) {
    forward(rows, count, false);
    double total = 0.0;
    for (size_t n = 0; n < count; ++n) total += bce_from_logit(logits_[n], labels[n]);
    return total / static_cast<double>(count);
}

double Network::backprop(const double* rows, const int* labels, size_t count) {
    for (auto& layer : layers_) layer->zero_grads();
    forward(rows, count, true);

    double total = 0.0;
    Batch dz;
    dz.count = count;
    dz.ch = 1;
    dz.v.resize(count);
    for (size_t n = 0; n < count; ++n) {
        total += bce_from_logit(logits_[n], labels[n]);
        dz.v[n] = (probs_[n] - static_cast<double>(labels[n])) / static_cast<double>(count);
    }
    Batch cur = std::move(dz);
    for (size_t li = layers_.size(); li-- > 0;) cur = layers_[li]->backward(cur);
    return total / static_cast<double>(count);
}

std::vector<Layer::ParamRef> Network::params() {
    std::vector<Layer::ParamRef> all;
    for (auto& layer : layers_)
        for (auto& p : layer->params()) all.push_back(p);
    return all;
}

long long Network::parameter_count() const { return param_count(stack_); }

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

TrainInfo train_network(Network& net, const double* rows, const int* labels, size_t count,
                        const TrainConfig& config) {
    if (config.epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (config.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (!(config.learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
    if (count < config.batch_size)
        throw ConfigError("train: need at least batch_size (" +
                          std::to_string(config.batch_size) + ") rows, got " +
                          std::to_string(count));

    auto params = net.params();
    std::vector<std::vector<double>> adam_m, adam_v;
    if (config.optimizer == TrainConfig::Optimizer::Adam) {
        for (auto& p : params) {
            adam_m.emplace_back(p.value->size(), 0.0);
            adam_v.emplace_back(p.value->size(), 0.0);
        }
    }

    const size_t row_elems = net.input_len() > 0 ? net.input_len() * net.input_ch() : net.input_ch();
    Rng rng(derive_seed(config.seed, 0x7ea1u));
    std::vector<size_t> order(count);
    for (size_t i = 0; i < count; ++i) order[i] = i;

    std::vector<double> batch_rows(config.batch_size * row_elems);
    std::vector<int> batch_labels(config.batch_size);

    TrainInfo info;
    size_t step = 0;
    for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        size_t seen = 0;
        size_t batch_index = 0;
        for (size_t start = 0; start < count; start += config.batch_size, ++batch_index) {
            const size_t bn = std::min(config.batch_size, count - start);
            for (size_t i = 0; i < bn; ++i) {
                std::memcpy(batch_rows.data() + i * row_elems, rows + order[start + i] * row_elems,
                            row_elems * sizeof(double));
                batch_labels[i] = labels[order[start + i]];
            }
            const double loss = net.backprop(batch_rows.data(), batch_labels.data(), bn);
            if (!std::isfinite(loss))
                throw NumericError("training loss is not finite at epoch " +
                                   std::to_string(epoch + 1) + ", batch " +
                                   std::to_string(batch_index + 1));
            epoch_loss += loss * static_cast<double>(bn);
            seen += bn;
            ++step;

            if (config.optimizer == TrainConfig::Optimizer::Adam) {
                const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
                const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
                for (size_t pi = 0; pi < params.size(); ++pi) {
                    auto& value = params[pi].value->v;
                    auto& grad = params[pi].grad->v;
                    auto& m = adam_m[pi];
                    auto& v = adam_v[pi];
                    for (size_t i = 0; i < value.size(); ++i) {
                        m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
                        v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
                        const double mh = m[i] / bc1;
                        const double vh = v[i] / bc2;
                        value[i] -= config.learning_rate * mh / (std::sqrt(vh) + config.eps);
                    }
                }
            } else {
                for (auto& p : params) {
                    auto& value = p.value->v;
                    auto& grad = p.grad->v;
                    for (size_t i = 0; i < value.size(); ++i)
                        value[i] -= config.learning_rate * grad[i];
                }
            }
        }
        info.final_loss = epoch_loss / static_cast<double>(seen);
    }
    info.steps = step;
    return info;
}

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------

namespace {

// Independent re-evaluation of the stack in extended precision for finite
// differencing. Written separately from the Layer classes on purpose: the
// numeric side of the check must not share the code path it is checking, and
// double-precision differencing drowns coordinates whose true gradient is
// ~1e-7 in cancellation noise.
class ExtendedEval {
public:
    ExtendedEval(const std::vector<LayerSpec>& stack, std::vector<Layer::ParamRef> params,
                 size_t input_len, size_t input_ch)
        : stack_(stack), params_(std::move(params)), input_len_(input_len), input_ch_(input_ch) {}

    // Mean BCE over the batch with flat parameter (tensor, offset) shifted by
    // delta.
    long double loss(const double* rows, const int* labels, size_t count, size_t tensor,
                     size_t offset, long double delta) const {
        long double total = 0.0L;
        const size_t row_elems = input_len_ > 0 ? input_len_ * input_ch_ : input_ch_;
        for (size_t n = 0; n < count; ++n) {
            const long double z = logit(rows + n * row_elems, tensor, offset, delta);
            const long double zy = z * static_cast<long double>(labels[n]);
            total += (z > 0.0L ? z : 0.0L) - zy + log1pl(expl(-fabsl(z)));
        }
        return total / static_cast<long double>(count);
    }

private:
    long double p(size_t tensor, size_t i, size_t pt, size_t po, long double delta) const {
        long double v = params_[tensor].value->v[i];
        if (tensor == pt && i == po) v += delta;
        return v;
    }

    long double logit(const double* row, size_t pt, size_t po, long double delta) const {
        std::vector<long double> cur;
        size_t len = input_len_, ch = input_ch_;
        const size_t row_elems = len > 0 ? len * ch : ch;
        cur.assign(row, row + row_elems);

        size_t ti = 0;  // parameter tensor cursor
        for (const auto& s : stack_) {
            switch (s.kind) {
                case LayerSpec::Kind::Dense: {
                    const size_t w = ti, b = ti + 1;
                    ti += 2;
                    std::vector<long double> y(s.out);
                    for (size_t o = 0; o < s.out; ++o) {
                        long double acc = p(b, o, pt, po, delta);
                        for (size_t i = 0; i < s.in; ++i)
                            acc += p(w, o * s.in + i, pt, po, delta) * cur[i];
                        y[o] = acc;
                    }
                    cur = std::move(y);
                    ch = s.out;
                    break;
                }
                case LayerSpec::Kind::Conv1D: {
                    const size_t w = ti, b = ti + 1;
                    ti += 2;
                    const size_t pad = (s.kernel - 1) / 2;
                    std::vector<long double> y(len * s.out);
                    for (size_t t = 0; t < len; ++t) {
                        for (size_t o = 0; o < s.out; ++o) {
                            long double acc = p(b, o, pt, po, delta);
                            for (size_t kk = 0; kk < s.kernel; ++kk) {
                                const long pos =
                                    static_cast<long>(t + kk) - static_cast<long>(pad);
                                if (pos < 0 || pos >= static_cast<long>(len)) continue;
                                for (size_t ci = 0; ci < s.in; ++ci)
                                    acc += p(w, (o * s.kernel + kk) * s.in + ci, pt, po, delta) *
                                           cur[static_cast<size_t>(pos) * s.in + ci];
                            }
                            y[t * s.out + o] = acc;
                        }
                    }
                    cur = std::move(y);
                    ch = s.out;
                    break;
                }
                case LayerSpec::Kind::Lstm: {
                    const size_t w = ti, u = ti + 1, b = ti + 2;
                    ti += 3;
                    const size_t H = s.out;
                    std::vector<long double> h_state(H, 0.0L), c_state(H, 0.0L);
                    std::vector<long double> seq_out(s.return_sequences ? len * H : 0);
                    std::vector<long double> z(4 * H);
                    for (size_t t = 0; t < len; ++t) {
                        for (size_t g = 0; g < 4 * H; ++g) {
                            long double acc = p(b, g, pt, po, delta);
                            for (size_t i = 0; i < s.in; ++i)
                                acc += p(w, g * s.in + i, pt, po, delta) * cur[t * s.in + i];
                            for (size_t jj = 0; jj < H; ++jj)
                                acc += p(u, g * H + jj, pt, po, delta) * h_state[jj];
                            z[g] = acc;
                        }
                        for (size_t jj = 0; jj < H; ++jj) {
                            const long double ig = 1.0L / (1.0L + expl(-z[jj]));
                            const long double fg = 1.0L / (1.0L + expl(-z[H + jj]));
                            const long double gg = tanhl(z[2 * H + jj]);
                            const long double og = 1.0L / (1.0L + expl(-z[3 * H + jj]));
                            c_state[jj] = fg * c_state[jj] + ig * gg;
                            h_state[jj] = og * tanhl(c_state[jj]);
                            if (s.return_sequences) seq_out[t * H + jj] = h_state[jj];
                        }
                    }
                    if (s.return_sequences) {
                        cur = std::move(seq_out);
                    } else {
                        cur = std::move(h_state);
                        len = 0;
                    }
                    ch = H;
                    break;
                }
                case LayerSpec::Kind::Act:
                    for (auto& v : cur) {
                        switch (s.act) {
                            case Activation::Relu: v = v > 0.0L ? v : 0.0L; break;
                            case Activation::Sigmoid: v = 1.0L / (1.0L + expl(-v)); break;
                            case Activation::Tanh: v = tanhl(v); break;
                        }
                    }
                    break;
                case LayerSpec::Kind::GlobalAvgPool: {
                    std::vector<long double> y(ch, 0.0L);
                    for (size_t t = 0; t < len; ++t)
                        for (size_t c = 0; c < ch; ++c) y[c] += cur[t * ch + c];
                    for (auto& v : y) v /= static_cast<long double>(len);
                    cur = std::move(y);
                    len = 0;
                    break;
                }
                case LayerSpec::Kind::Output:
                    return cur[0];
            }
        }
        return cur[0];
    }

    const std::vector<LayerSpec>& stack_;
    std::vector<Layer::ParamRef> params_;
    size_t input_len_, input_ch_;
};

}  // namespace

double grad_check(const std::vector<LayerSpec>& stack, size_t input_len, size_t input_ch,
                  uint64_t seed) {
    Network net(stack, input_len, input_ch, seed);
    if (net.parameter_count() >= 5000)
        throw ConfigError("grad_check: model too large for finite differencing");

    const size_t count = 3;
    const size_t row_elems = input_len > 0 ? input_len * input_ch : input_ch;
    Rng rng(derive_seed(seed, 0x64adull));
    std::vector<double> rows(count * row_elems);
    for (double& v : rows) v = rng.uniform(-1.0, 1.0);
    std::vector<int> labels(count);
    for (size_t i = 0; i < count; ++i) labels[i] = rng.uniform() < 0.5 ? 0 : 1;

    net.backprop(rows.data(), labels.data(), count);
    auto params = net.params();
    std::vector<std::vector<double>> analytic;
    for (auto& p : params) analytic.push_back(p.grad->v);

    const ExtendedEval eval(net.stack(), net.params(), input_len, input_ch);

    // Fourth-order (Richardson) central differences.
    const long double h = 1e-4L;
    double worst = 0.0;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        const size_t size = params[pi].value->size();
        for (size_t i = 0; i < size; ++i) {
            auto at = [&](long double delta) {
                return eval.loss(rows.data(), labels.data(), count, pi, i, delta);
            };
            const long double d1 = at(h) - at(-h);
            const long double d2 = at(2.0L * h) - at(-2.0L * h);
            const double numeric = static_cast<double>((8.0L * d1 - d2) / (12.0L * h));
            const double a = analytic[pi][i];
            const double err =
                std::fabs(a - numeric) / std::max(1e-8, std::fabs(a) + std::fabs(numeric));
            worst = std::max(worst, err);
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Serialization: one JSON header line, then little-endian doubles per tensor
// in layer order.
// ---------------------------------------------------------------------------

namespace {

void write_u64_le(std::ostream& out, uint64_t x) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((x >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

uint64_t read_u64_le(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<uint64_t>(buf[i]) << (8 * i);
    return x;
}

const char* act_label(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Tanh: return "tanh";
    }
    return "?";
}

Activation act_from_label(const std::string& s) {
    if (s == "relu") return Activation::Relu;
    if (s == "sigmoid") return Activation::Sigmoid;
    if (s == "tanh") return Activation::Tanh;
    throw DataError("unknown activation '" + s + "'");
}

}  // namespace

void Network::save(std::ostream& out) const {
    nlohmann::ordered_json header;
    header["format"] = "hycard-net-v1";
    header["input_len"] = input_len_;
    header["input_ch"] = input_ch_;
    header["layers"] = nlohmann::ordered_json::array();
    for (const auto& s : stack_) {
        nlohmann::ordered_json j;
        j["kind"] = kind_label(s.kind);
        switch (s.kind) {
            case LayerSpec::Kind::Dense:
                j["in"] = s.in;
                j["out"] = s.out;
                break;
            case LayerSpec::Kind::Conv1D:
                j["in"] = s.in;
                j["out"] = s.out;
                j["kernel"] = s.kernel;
                break;
            case LayerSpec::Kind::Lstm:
                j["in"] = s.in;
                j["hidden"] = s.out;
                j["return_sequences"] = s.return_sequences;
                break;
            case LayerSpec::Kind::Act:
                j["fn"] = act_label(s.act);
                break;
            default:
                break;
        }
        header["layers"].push_back(j);
    }
    out << header.dump() << '\n';

    for (auto& layer : const_cast<Network*>(this)->layers_) {
        for (auto& p : layer->params()) {
            write_u64_le(out, p.value->size());
            for (double d : p.value->v) write_u64_le(out, std::bit_cast<uint64_t>(d));
        }
    }
}

void Network::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path);
    save(out);
    if (!out) throw DataError("write failed: " + path);
}

Network Network::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("model stream: missing header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model stream: invalid header: ") + e.what());
    }
    if (header.value("format", "") != std::string("hycard-net-v1"))
        throw DataError("model stream: unrecognized format");

    std::vector<LayerSpec> stack;
    for (const auto& j : header["layers"]) {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "dense")
            stack.push_back(LayerSpec::dense(j.at("in").get<size_t>(), j.at("out").get<size_t>()));
        else if (kind == "conv1d")
            stack.push_back(LayerSpec::conv1d(j.at("in").get<size_t>(), j.at("out").get<size_t>(),
                                              j.at("kernel").get<size_t>()));
        else if (kind == "lstm")
            stack.push_back(LayerSpec::lstm(j.at("in").get<size_t>(), j.at("hidden").get<size_t>(),
                                            j.at("return_sequences").get<bool>()));
        else if (kind == "act")
            stack.push_back(LayerSpec::activation(act_from_label(j.at("fn").get<std::string>())));
        else if (kind == "gap")
            stack.push_back(LayerSpec::global_avg_pool());
        else if (kind == "output")
            stack.push_back(LayerSpec::output_sigmoid());
        else
            throw DataError("model stream: unknown layer kind '" + kind + "'");
    }

    Network net(stack, header.at("input_len").get<size_t>(), header.at("input_ch").get<size_t>(), 0);
    for (auto& p : net.params()) {
        const uint64_t n = read_u64_le(in);
        if (!in || n != p.value->size())
            throw DataError("model stream: tensor size mismatch");
        for (double& d : p.value->v) d = std::bit_cast<double>(read_u64_le(in));
    }
    if (!in) throw DataError("model stream: truncated parameter data");
    return net;
}

Network Network::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    return load(in);
}

// ---------------------------------------------------------------------------
// Reference stacks
// ---------------------------------------------------------------------------

std::vector<LayerSpec> default_cnn_stack() {
    using L = LayerSpec;
    return {
        L::conv1d(1, 32, 3),  L::activation(Activation::Relu),
        L::conv1d(32, 64, 3), L::activation(Activation::Relu),
        L::global_avg_pool(),
        L::dense(64, 1024),   L::activation(Activation::Relu),
        L::dense(1024, 512),  L::activation(Activation::Relu),
        L::dense(512, 1),     L::output_sigmoid(),
    };
}

std::vector<LayerSpec> default_lstm_stack() {
    using L = LayerSpec;
    return {
        L::lstm(1, 48, true), L::lstm(48, 48, false),
        L::dense(48, 1024),   L::activation(Activation::Relu),
        L::dense(1024, 384),  L::activation(Activation::Relu),
        L::dense(384, 1),     L::output_sigmoid(),
    };
}

std::vector<LayerSpec> default_cnn_lstm_stack() {
    using L = LayerSpec;
    return {
        L::conv1d(1, 32, 3),   L::activation(Activation::Relu),
        L::conv1d(32, 64, 3),  L::activation(Activation::Relu),
        L::lstm(64, 64, false),
        L::dense(64, 1024),    L::activation(Activation::Relu),
        L::dense(1024, 1024),  L::activation(Activation::Relu),
        L::dense(1024, 1),     L::output_sigmoid(),
    };
}

}  // namespace hycard
