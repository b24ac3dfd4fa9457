#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcdrop/rng.hpp"

namespace mcdrop {

// Gate weights of one LSTM layer. Every matrix maps the concatenated vector
// chi_t = [x_t, h_{t-1}] (length input_dim + hidden) to the hidden size and is
// stored row-major.
struct LstmLayerParams {
    std::size_t input_dim = 0;
    std::size_t hidden = 0;
    std::vector<double> W_i, W_f, W_o, W_c;
    std::vector<double> b_i, b_f, b_o, b_c;

    std::size_t chi_dim() const { return input_dim + hidden; }
};

struct DenseLayerParams {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::vector<double> M;  // out_dim x in_dim, row-major
    std::vector<double> b;
};

struct ModelParams {
    std::size_t input_dim = 1;
    std::vector<LstmLayerParams> lstm_layers;
    std::vector<DenseLayerParams> dense_layers;
};

// Gradients share the parameter layout exactly.
using ParamGrads = ModelParams;

// One dropout realization of the network. Entries are 0 (dropped) or the
// inverted-dropout scale 1/(1-p_drop). The recurrent mask of a layer is
// applied to chi_t at every time step of the pass, never resampled mid-pass.
struct DropoutMasks {
    std::vector<std::vector<double>> recurrent;    // per LSTM layer, chi_dim entries
    std::vector<std::vector<double>> dense_units;  // per dense layer, in_dim entries
    std::uint64_t seed = 0;
    bool degenerate = false;  // p_drop == 1: everything dropped, scale 0
};

struct CellState {
    std::vector<double> h;
    std::vector<double> c;
};

enum class Activation { logistic, identity };

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

namespace detail {

inline void matvec(const std::vector<double>& W, std::size_t rows, std::size_t cols,
                   const std::vector<double>& v, std::vector<double>& out) {
    out.assign(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        const double* wr = W.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * v[c];
        out[r] = acc;
    }
}

// out += W^T * v
inline void matvec_t_add(const std::vector<double>& W, std::size_t rows, std::size_t cols,
                         const std::vector<double>& v, std::vector<double>& out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* wr = W.data() + r * cols;
        const double vr = v[r];
        for (std::size_t c = 0; c < cols; ++c) out[c] += wr[c] * vr;
    }
}

// W += a * v^T (outer product accumulate)
inline void outer_add(std::vector<double>& W, std::size_t rows, std::size_t cols,
                      const std::vector<double>& a, const std::vector<double>& v) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* wr = W.data() + r * cols;
        const double ar = a[r];
        for (std::size_t c = 0; c < cols; ++c) wr[c] += ar * v[c];
    }
}

}  // namespace detail

// Wires up layer dimensions: lstm_hidden lists the hidden size per LSTM layer,
// dense_sizes the output size per dense layer (last one is the forecast
// horizon). Parameters are zero until init_params is called.
inline ModelParams make_model(std::size_t input_dim, const std::vector<std::size_t>& lstm_hidden,
                              const std::vector<std::size_t>& dense_sizes) {
    if (input_dim == 0 || lstm_hidden.empty() || dense_sizes.empty())
        throw std::invalid_argument("make_model: empty architecture");
    ModelParams p;
    p.input_dim = input_dim;
    std::size_t in = input_dim;
    for (std::size_t h : lstm_hidden) {
        if (h == 0) throw std::invalid_argument("make_model: zero hidden size");
        LstmLayerParams l;
        l.input_dim = in;
        l.hidden = h;
        const std::size_t wsize = h * l.chi_dim();
        l.W_i.assign(wsize, 0.0);
        l.W_f.assign(wsize, 0.0);
        l.W_o.assign(wsize, 0.0);
        l.W_c.assign(wsize, 0.0);
        l.b_i.assign(h, 0.0);
        l.b_f.assign(h, 0.0);
        l.b_o.assign(h, 0.0);
        l.b_c.assign(h, 0.0);
        p.lstm_layers.push_back(std::move(l));
        in = h;
    }
    for (std::size_t k : dense_sizes) {
        if (k == 0) throw std::invalid_argument("make_model: zero dense size");
        DenseLayerParams d;
        d.in_dim = in;
        d.out_dim = k;
        d.M.assign(k * in, 0.0);
        d.b.assign(k, 0.0);
        p.dense_layers.push_back(std::move(d));
        in = k;
    }
    return p;
}

// Same dimension wiring, everything zeroed. Used for gradient accumulators.
inline ParamGrads make_zero_like(const ModelParams& p) {
    std::vector<std::size_t> hs, ds;
    for (const auto& l : p.lstm_layers) hs.push_back(l.hidden);
    for (const auto& d : p.dense_layers) ds.push_back(d.out_dim);
    return make_model(p.input_dim, hs, ds);
}

// Visits every parameter tensor in a fixed order; is_weight_matrix separates
// the tensors subject to L2 decay from the biases.
template <typename Fn>
void for_each_tensor(ModelParams& params, Fn&& fn) {
    for (auto& l : params.lstm_layers) {
        fn(l.W_i, true);
        fn(l.W_f, true);
        fn(l.W_o, true);
        fn(l.W_c, true);
        fn(l.b_i, false);
        fn(l.b_f, false);
        fn(l.b_o, false);
        fn(l.b_c, false);
    }
    for (auto& d : params.dense_layers) {
        fn(d.M, true);
        fn(d.b, false);
    }
}

template <typename Fn>
void for_each_tensor(const ModelParams& params, Fn&& fn) {
    for (const auto& l : params.lstm_layers) {
        fn(l.W_i, true);
        fn(l.W_f, true);
        fn(l.W_o, true);
        fn(l.W_c, true);
        fn(l.b_i, false);
        fn(l.b_f, false);
        fn(l.b_o, false);
        fn(l.b_c, false);
    }
    for (const auto& d : params.dense_layers) {
        fn(d.M, true);
        fn(d.b, false);
    }
}

// Xavier-uniform weights, zero biases, forget-gate bias +1.
inline void init_params(ModelParams& p, std::uint64_t seed) {
    Rng rng(seed);
    for (auto& l : p.lstm_layers) {
        const double limit = std::sqrt(6.0 / static_cast<double>(l.chi_dim() + l.hidden));
        for (auto* W : {&l.W_i, &l.W_f, &l.W_o, &l.W_c})
            for (double& w : *W) w = rng.uniform(-limit, limit);
        for (double& b : l.b_f) b = 1.0;
    }
    for (auto& d : p.dense_layers) {
        const double limit = std::sqrt(6.0 / static_cast<double>(d.in_dim + d.out_dim));
        for (double& w : d.M) w = rng.uniform(-limit, limit);
    }
}

inline void validate_model(const ModelParams& p) {
    if (p.lstm_layers.empty() || p.dense_layers.empty())
        throw std::invalid_argument("model: needs at least one LSTM and one dense layer");
    std::size_t in = p.input_dim;
    for (std::size_t l = 0; l < p.lstm_layers.size(); ++l) {
        const auto& layer = p.lstm_layers[l];
        if (layer.input_dim != in)
            throw std::invalid_argument("model: LSTM layer " + std::to_string(l) +
                                        " input dim mismatch");
        const std::size_t ws = layer.hidden * layer.chi_dim();
        if (layer.W_i.size() != ws || layer.W_f.size() != ws || layer.W_o.size() != ws ||
            layer.W_c.size() != ws || layer.b_i.size() != layer.hidden ||
            layer.b_f.size() != layer.hidden || layer.b_o.size() != layer.hidden ||
            layer.b_c.size() != layer.hidden)
            throw std::invalid_argument("model: LSTM layer " + std::to_string(l) +
                                        " tensor size mismatch");
        in = layer.hidden;
    }
    for (std::size_t d = 0; d < p.dense_layers.size(); ++d) {
        const auto& layer = p.dense_layers[d];
        if (layer.in_dim != in)
            throw std::invalid_argument("model: dense layer " + std::to_string(d) +
                                        " input dim mismatch");
        if (layer.M.size() != layer.out_dim * layer.in_dim || layer.b.size() != layer.out_dim)
            throw std::invalid_argument("model: dense layer " + std::to_string(d) +
                                        " tensor size mismatch");
        in = layer.out_dim;
    }
}

// One Bernoulli mask per LSTM layer plus one per dense layer, all drawn from a
// single stream so the pass is reproducible from the seed alone.
inline DropoutMasks sample_masks(const ModelParams& arch, double p_drop, std::uint64_t seed) {
    if (!(p_drop >= 0.0 && p_drop <= 1.0))
        throw std::invalid_argument("sample_masks: p_drop outside [0,1]");
    const double scale = p_drop < 1.0 ? 1.0 / (1.0 - p_drop) : 0.0;
    Rng rng(seed);
    DropoutMasks m;
    m.seed = seed;
    m.degenerate = (p_drop == 1.0);
    for (const auto& l : arch.lstm_layers) {
        std::vector<double> mask(l.chi_dim());
        for (double& e : mask) e = rng.bernoulli(p_drop) ? 0.0 : scale;
        m.recurrent.push_back(std::move(mask));
    }
    for (const auto& d : arch.dense_layers) {
        std::vector<double> mask(d.in_dim);
        for (double& e : mask) e = rng.bernoulli(p_drop) ? 0.0 : scale;
        m.dense_units.push_back(std::move(mask));
    }
    return m;
}

inline void validate_masks(const ModelParams& p, const DropoutMasks& m) {
    if (m.recurrent.size() != p.lstm_layers.size() ||
        m.dense_units.size() != p.dense_layers.size())
        throw std::invalid_argument("masks: layer count mismatch");
    for (std::size_t l = 0; l < p.lstm_layers.size(); ++l)
        if (m.recurrent[l].size() != p.lstm_layers[l].chi_dim())
            throw std::invalid_argument("masks: recurrent mask " + std::to_string(l) +
                                        " size mismatch");
    for (std::size_t d = 0; d < p.dense_layers.size(); ++d)
        if (m.dense_units[d].size() != p.dense_layers[d].in_dim)
            throw std::invalid_argument("masks: dense mask " + std::to_string(d) +
                                        " size mismatch");
}

// One LSTM time step: gates over the masked concatenated input.
inline CellState lstm_step(const std::vector<double>& x_t, const CellState& prev,
                           const LstmLayerParams& params, const std::vector<double>& mask) {
    const std::size_t H = params.hidden;
    const std::size_t C = params.chi_dim();
    if (x_t.size() != params.input_dim || prev.h.size() != H || prev.c.size() != H ||
        mask.size() != C)
        throw std::invalid_argument("lstm_step: dimension mismatch");

    std::vector<double> chi(C);
    for (std::size_t j = 0; j < params.input_dim; ++j) chi[j] = x_t[j] * mask[j];
    for (std::size_t j = 0; j < H; ++j)
        chi[params.input_dim + j] = prev.h[j] * mask[params.input_dim + j];

    std::vector<double> gi, gf, go, gc;
    detail::matvec(params.W_i, H, C, chi, gi);
    detail::matvec(params.W_f, H, C, chi, gf);
    detail::matvec(params.W_o, H, C, chi, go);
    detail::matvec(params.W_c, H, C, chi, gc);

    CellState next;
    next.h.resize(H);
    next.c.resize(H);
    for (std::size_t j = 0; j < H; ++j) {
        const double i = logistic(gi[j] + params.b_i[j]);
        const double f = logistic(gf[j] + params.b_f[j]);
        const double o = logistic(go[j] + params.b_o[j]);
        const double cand = std::tanh(gc[j] + params.b_c[j]);
        next.c[j] = f * prev.c[j] + i * cand;
        next.h[j] = o * std::tanh(next.c[j]);
    }
    return next;
}

// activation(M * (input .* mask) + b)
inline std::vector<double> dense_forward(const std::vector<double>& input,
                                         const DenseLayerParams& params,
                                         const std::vector<double>& mask,
                                         Activation activation) {
    if (input.size() != params.in_dim || mask.size() != params.in_dim)
        throw std::invalid_argument("dense_forward: dimension mismatch");
    std::vector<double> masked(params.in_dim);
    for (std::size_t j = 0; j < params.in_dim; ++j) masked[j] = input[j] * mask[j];
    std::vector<double> out;
    detail::matvec(params.M, params.out_dim, params.in_dim, masked, out);
    for (std::size_t r = 0; r < params.out_dim; ++r) {
        out[r] += params.b[r];
        if (activation == Activation::logistic) out[r] = logistic(out[r]);
    }
    return out;
}

// Everything the backward pass needs from one forward pass. The masks are
// copied in so the cache stays valid on its own.
struct ForwardCache {
    struct Step {
        std::vector<double> chi_masked;  // masked [x_t, h_{t-1}]
        std::vector<double> gi, gf, go, gcand;  // post-activation gate values
        std::vector<double> c, tanh_c, h;
    };
    struct Dense {
        std::vector<double> in_masked;
        std::vector<double> out;  // post-activation
        Activation act = Activation::identity;
    };
    std::size_t T = 0;
    std::vector<std::vector<Step>> steps;  // [layer][t]
    std::vector<Dense> dense;
    DropoutMasks masks;
    double prediction = 0.0;
};

// Full network pass over a lookback window: T steps through every LSTM layer
// (layer l consumes layer l-1's h sequence), then the dense stack on the final
// hidden state. Hidden dense layers use the logistic activation, the output
// layer is linear.
inline double forward(const std::vector<double>& sequence, const ModelParams& params,
                      const DropoutMasks& masks, ForwardCache& cache) {
    validate_model(params);
    validate_masks(params, masks);
    if (params.input_dim != 1)
        throw std::invalid_argument("forward: expects univariate input");
    if (sequence.empty()) throw std::invalid_argument("forward: empty sequence");
    if (params.dense_layers.back().out_dim != 1)
        throw std::invalid_argument("forward: output layer must have size 1");

    const std::size_t T = sequence.size();
    const std::size_t L = params.lstm_layers.size();
    cache.T = T;
    cache.steps.assign(L, {});
    cache.dense.clear();
    cache.masks = masks;

    std::vector<std::vector<double>> below(T);  // input sequence to current layer
    for (std::size_t t = 0; t < T; ++t) below[t] = {sequence[t]};

    for (std::size_t l = 0; l < L; ++l) {
        const auto& lp = params.lstm_layers[l];
        const auto& mask = masks.recurrent[l];
        const std::size_t H = lp.hidden;
        const std::size_t C = lp.chi_dim();
        cache.steps[l].resize(T);
        std::vector<double> h(H, 0.0), c(H, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
            auto& st = cache.steps[l][t];
            st.chi_masked.resize(C);
            for (std::size_t j = 0; j < lp.input_dim; ++j)
                st.chi_masked[j] = below[t][j] * mask[j];
            for (std::size_t j = 0; j < H; ++j)
                st.chi_masked[lp.input_dim + j] = h[j] * mask[lp.input_dim + j];

            detail::matvec(lp.W_i, H, C, st.chi_masked, st.gi);
            detail::matvec(lp.W_f, H, C, st.chi_masked, st.gf);
            detail::matvec(lp.W_o, H, C, st.chi_masked, st.go);
            detail::matvec(lp.W_c, H, C, st.chi_masked, st.gcand);
            st.c.resize(H);
            st.tanh_c.resize(H);
            st.h.resize(H);
            for (std::size_t j = 0; j < H; ++j) {
                st.gi[j] = logistic(st.gi[j] + lp.b_i[j]);
                st.gf[j] = logistic(st.gf[j] + lp.b_f[j]);
                st.go[j] = logistic(st.go[j] + lp.b_o[j]);
                st.gcand[j] = std::tanh(st.gcand[j] + lp.b_c[j]);
                st.c[j] = st.gf[j] * c[j] + st.gi[j] * st.gcand[j];
                st.tanh_c[j] = std::tanh(st.c[j]);
                st.h[j] = st.go[j] * st.tanh_c[j];
            }
            h = st.h;
            c = st.c;
        }
        for (std::size_t t = 0; t < T; ++t) below[t] = cache.steps[l][t].h;
    }

    std::vector<double> v = cache.steps[L - 1][T - 1].h;
    for (std::size_t d = 0; d < params.dense_layers.size(); ++d) {
        const auto& dp = params.dense_layers[d];
        const auto& mask = masks.dense_units[d];
        ForwardCache::Dense dc;
        dc.act = (d + 1 == params.dense_layers.size()) ? Activation::identity
                                                       : Activation::logistic;
        dc.in_masked.resize(dp.in_dim);
        for (std::size_t j = 0; j < dp.in_dim; ++j) dc.in_masked[j] = v[j] * mask[j];
        detail::matvec(dp.M, dp.out_dim, dp.in_dim, dc.in_masked, dc.out);
        for (std::size_t r = 0; r < dp.out_dim; ++r) {
            dc.out[r] += dp.b[r];
            if (dc.act == Activation::logistic) dc.out[r] = logistic(dc.out[r]);
        }
        v = dc.out;
        cache.dense.push_back(std::move(dc));
    }

    cache.prediction = v[0];
    if (!std::isfinite(cache.prediction))
        throw std::runtime_error("forward: non-finite prediction");
    return cache.prediction;
}

inline double forward(const std::vector<double>& sequence, const ModelParams& params,
                      const DropoutMasks& masks) {
    ForwardCache cache;
    return forward(sequence, params, masks, cache);
}

// Backpropagation through the dense stack and every LSTM layer/time step,
// masks held constant. Accumulates into grads (same layout as the params).
inline void backward_accumulate(const ModelParams& params, const ForwardCache& cache,
                                double d_loss_d_pred, ParamGrads& grads) {
    const std::size_t L = params.lstm_layers.size();
    const std::size_t T = cache.T;
    if (cache.steps.size() != L || cache.dense.size() != params.dense_layers.size() || T == 0)
        throw std::invalid_argument("backward: cache does not match the model");
    for (std::size_t l = 0; l < L; ++l)
        if (cache.steps[l].size() != T ||
            cache.steps[l][0].chi_masked.size() != params.lstm_layers[l].chi_dim())
            throw std::invalid_argument("backward: cache does not match the model");
    validate_masks(params, cache.masks);

    // dense stack, top down
    std::vector<double> dv = {d_loss_d_pred};
    for (std::size_t d = params.dense_layers.size(); d-- > 0;) {
        const auto& dp = params.dense_layers[d];
        const auto& dc = cache.dense[d];
        auto& dg = grads.dense_layers[d];
        std::vector<double> dpre(dp.out_dim);
        for (std::size_t r = 0; r < dp.out_dim; ++r)
            dpre[r] = dc.act == Activation::logistic
                          ? dv[r] * dc.out[r] * (1.0 - dc.out[r])
                          : dv[r];
        detail::outer_add(dg.M, dp.out_dim, dp.in_dim, dpre, dc.in_masked);
        for (std::size_t r = 0; r < dp.out_dim; ++r) dg.b[r] += dpre[r];
        std::vector<double> din(dp.in_dim, 0.0);
        detail::matvec_t_add(dp.M, dp.out_dim, dp.in_dim, dpre, din);
        const auto& mask = cache.masks.dense_units[d];
        for (std::size_t j = 0; j < dp.in_dim; ++j) din[j] *= mask[j];
        dv = std::move(din);
    }

    // gradient arriving at each h_t of the layer currently being processed;
    // the top layer only feeds the dense stack through h_{T-1}
    std::vector<std::vector<double>> dh_seq(T);
    for (std::size_t t = 0; t < T; ++t)
        dh_seq[t].assign(params.lstm_layers[L - 1].hidden, 0.0);
    dh_seq[T - 1] = dv;

    for (std::size_t l = L; l-- > 0;) {
        const auto& lp = params.lstm_layers[l];
        auto& lg = grads.lstm_layers[l];
        const auto& mask = cache.masks.recurrent[l];
        const std::size_t H = lp.hidden;
        const std::size_t C = lp.chi_dim();

        std::vector<std::vector<double>> dx_seq(T);
        std::vector<double> dh_rec(H, 0.0), dc(H, 0.0);
        std::vector<double> dpre_i(H), dpre_f(H), dpre_o(H), dpre_c(H);
        for (std::size_t t = T; t-- > 0;) {
            const auto& st = cache.steps[l][t];
            const std::vector<double>* c_prev = t > 0 ? &cache.steps[l][t - 1].c : nullptr;
            for (std::size_t j = 0; j < H; ++j) {
                const double dh = dh_seq[t][j] + dh_rec[j];
                const double o = st.go[j];
                dc[j] += dh * o * (1.0 - st.tanh_c[j] * st.tanh_c[j]);
                dpre_o[j] = dh * st.tanh_c[j] * o * (1.0 - o);
                const double cp = c_prev ? (*c_prev)[j] : 0.0;
                dpre_f[j] = dc[j] * cp * st.gf[j] * (1.0 - st.gf[j]);
                dpre_i[j] = dc[j] * st.gcand[j] * st.gi[j] * (1.0 - st.gi[j]);
                dpre_c[j] = dc[j] * st.gi[j] * (1.0 - st.gcand[j] * st.gcand[j]);
            }
            detail::outer_add(lg.W_i, H, C, dpre_i, st.chi_masked);
            detail::outer_add(lg.W_f, H, C, dpre_f, st.chi_masked);
            detail::outer_add(lg.W_o, H, C, dpre_o, st.chi_masked);
            detail::outer_add(lg.W_c, H, C, dpre_c, st.chi_masked);
            for (std::size_t j = 0; j < H; ++j) {
                lg.b_i[j] += dpre_i[j];
                lg.b_f[j] += dpre_f[j];
                lg.b_o[j] += dpre_o[j];
                lg.b_c[j] += dpre_c[j];
            }

            std::vector<double> dchi(C, 0.0);
            detail::matvec_t_add(lp.W_i, H, C, dpre_i, dchi);
            detail::matvec_t_add(lp.W_f, H, C, dpre_f, dchi);
            detail::matvec_t_add(lp.W_o, H, C, dpre_o, dchi);
            detail::matvec_t_add(lp.W_c, H, C, dpre_c, dchi);
            for (std::size_t j = 0; j < C; ++j) dchi[j] *= mask[j];

            dx_seq[t].assign(dchi.begin(), dchi.begin() + static_cast<long>(lp.input_dim));
            dh_rec.assign(dchi.begin() + static_cast<long>(lp.input_dim), dchi.end());
            for (std::size_t j = 0; j < H; ++j) dc[j] *= st.gf[j];
        }
        if (l > 0) dh_seq = std::move(dx_seq);
    }
}

inline ParamGrads backward(const ModelParams& params, const ForwardCache& cache,
                           double d_loss_d_pred) {
    ParamGrads grads = make_zero_like(params);
    backward_accumulate(params, cache, d_loss_d_pred, grads);
    return grads;
}

}  // namespace mcdrop
