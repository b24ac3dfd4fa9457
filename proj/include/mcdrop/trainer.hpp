#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcdrop/lstm.hpp"
#include "mcdrop/preprocess.hpp"
#include "mcdrop/rng.hpp"

namespace mcdrop {

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double weight_decay = 1e-5;  // lambda on the squared weight-matrix norms
    double p_drop = 0.2;
    std::size_t lookback = 2;  // T
    std::uint64_t seed = 0;

    std::vector<std::size_t> lstm_hidden = {64, 64, 64};
    std::vector<std::size_t> dense_sizes = {32, 1};

    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double grad_clip = 5.0;  // global norm
    bool shuffle = true;

    bool early_stopping = false;
    std::size_t patience = 10;
    double val_fraction = 0.1;  // tail share of windows held out when stopping early
};

struct LossBreakdown {
    double data_term = 0.0;
    double reg_term = 0.0;
    double total = 0.0;
};

struct TrainResult {
    ModelParams params;
    std::vector<LossBreakdown> history;  // one entry per epoch
};

struct WindowSet {
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;
};

// data term = MSE, reg term = sum of squared weight-matrix entries (biases
// excluded), total = data + lambda * reg, held exactly.
inline LossBreakdown loss(const std::vector<double>& predictions,
                          const std::vector<double>& targets, const ModelParams& params,
                          double lambda) {
    if (predictions.size() != targets.size() || predictions.empty())
        throw std::invalid_argument("loss: predictions/targets length mismatch");
    if (lambda < 0.0) throw std::invalid_argument("loss: negative lambda");
    double sq = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double r = predictions[i] - targets[i];
        sq += r * r;
    }
    LossBreakdown lb;
    lb.data_term = sq / static_cast<double>(predictions.size());
    double reg = 0.0;
    for_each_tensor(params, [&](const std::vector<double>& t, bool is_w) {
        if (!is_w) return;
        for (double w : t) reg += w * w;
    });
    lb.reg_term = reg;
    lb.total = lb.data_term + lambda * lb.reg_term;
    return lb;
}

inline double weight_sq_norm(const ModelParams& params) {
    double reg = 0.0;
    for_each_tensor(params, [&](const std::vector<double>& t, bool is_w) {
        if (!is_w) return;
        for (double w : t) reg += w * w;
    });
    return reg;
}

// One-step-ahead supervision pairs: input = values[i..i+T), target = values[i+T].
inline WindowSet make_windows(const std::vector<double>& series, std::size_t T) {
    if (T < 1) throw std::invalid_argument("make_windows: lookback must be >= 1");
    if (series.size() <= T)
        throw std::invalid_argument("make_windows: series length " +
                                    std::to_string(series.size()) +
                                    " too short for lookback " + std::to_string(T));
    WindowSet w;
    const std::size_t count = series.size() - T;
    w.inputs.reserve(count);
    w.targets.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        w.inputs.emplace_back(series.begin() + static_cast<long>(i),
                              series.begin() + static_cast<long>(i + T));
        w.targets.push_back(series[i + T]);
    }
    return w;
}

namespace detail {

struct AdamState {
    ParamGrads m, v;
    std::size_t step = 0;
};

inline void adam_update(ModelParams& params, const ParamGrads& grads, AdamState& state,
                        const TrainConfig& cfg) {
    ++state.step;
    const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

    std::vector<std::vector<double>*> pt, mt, vt;
    std::vector<const std::vector<double>*> gt;
    for_each_tensor(params, [&](std::vector<double>& t, bool) { pt.push_back(&t); });
    for_each_tensor(grads, [&](const std::vector<double>& t, bool) { gt.push_back(&t); });
    for_each_tensor(state.m, [&](std::vector<double>& t, bool) { mt.push_back(&t); });
    for_each_tensor(state.v, [&](std::vector<double>& t, bool) { vt.push_back(&t); });

    for (std::size_t k = 0; k < pt.size(); ++k) {
        auto& p = *pt[k];
        const auto& g = *gt[k];
        auto& m = *mt[k];
        auto& v = *vt[k];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = b1 * m[j] + (1.0 - b1) * g[j];
            v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
            const double mhat = m[j] / corr1;
            const double vhat = v[j] / corr2;
            p[j] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
        }
    }
}

inline void clip_global_norm(ParamGrads& grads, double max_norm) {
    double sq = 0.0;
    for_each_tensor(grads, [&](std::vector<double>& t, bool) {
        for (double g : t) sq += g * g;
    });
    const double norm = std::sqrt(sq);
    if (norm <= max_norm || norm == 0.0) return;
    const double scale = max_norm / norm;
    for_each_tensor(grads, [&](std::vector<double>& t, bool) {
        for (double& g : t) g *= scale;
    });
}

}  // namespace detail

// Mini-batch gradient descent on MSE + lambda * ||W||^2 with a fresh dropout
// realization per sequence. Fully reproducible from cfg.seed.
inline TrainResult train(const SmoothedSeries& series, const TrainConfig& cfg) {
    if (cfg.p_drop < 0.0 || cfg.p_drop >= 1.0)
        throw std::invalid_argument("train: p_drop must be in [0,1)");
    if (cfg.batch_size < 1 || cfg.learning_rate <= 0.0 || cfg.weight_decay < 0.0)
        throw std::invalid_argument("train: invalid config");
    const WindowSet all = make_windows(series.values, cfg.lookback);

    Rng rng(cfg.seed);
    TrainResult res;
    res.params = make_model(1, cfg.lstm_hidden, cfg.dense_sizes);
    init_params(res.params, rng.fork_seed());

    std::size_t train_count = all.inputs.size();
    std::size_t val_count = 0;
    if (cfg.early_stopping) {
        val_count = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(
                   static_cast<double>(all.inputs.size()) * cfg.val_fraction)));
        if (val_count >= all.inputs.size())
            throw std::invalid_argument("train: too few windows for validation split");
        train_count = all.inputs.size() - val_count;
    }

    detail::AdamState adam;
    adam.m = make_zero_like(res.params);
    adam.v = make_zero_like(res.params);

    const DropoutMasks eval_masks = sample_masks(res.params, 0.0, 0);
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    ModelParams best_params = res.params;

    std::vector<std::size_t> order(train_count);
    std::iota(order.begin(), order.end(), 0);

    ForwardCache cache;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) rng.shuffle(order);
        double epoch_sq = 0.0;

        for (std::size_t begin = 0; begin < train_count; begin += cfg.batch_size) {
            const std::size_t end = std::min(begin + cfg.batch_size, train_count);
            const double batch_n = static_cast<double>(end - begin);
            ParamGrads grads = make_zero_like(res.params);

            for (std::size_t b = begin; b < end; ++b) {
                const std::size_t w = order[b];
                const DropoutMasks masks =
                    sample_masks(res.params, cfg.p_drop, rng.fork_seed());
                const double pred = forward(all.inputs[w], res.params, masks, cache);
                const double r = pred - all.targets[w];
                epoch_sq += r * r;
                backward_accumulate(res.params, cache, 2.0 * r / batch_n, grads);
            }
            if (cfg.weight_decay > 0.0) {
                std::vector<std::vector<double>*> pw, gw;
                for_each_tensor(res.params, [&](std::vector<double>& t, bool is_w) {
                    if (is_w) pw.push_back(&t);
                });
                for_each_tensor(grads, [&](std::vector<double>& t, bool is_w) {
                    if (is_w) gw.push_back(&t);
                });
                for (std::size_t k = 0; k < pw.size(); ++k)
                    for (std::size_t j = 0; j < pw[k]->size(); ++j)
                        (*gw[k])[j] += 2.0 * cfg.weight_decay * (*pw[k])[j];
            }
            detail::clip_global_norm(grads, cfg.grad_clip);
            detail::adam_update(res.params, grads, adam, cfg);
        }

        LossBreakdown lb;
        lb.data_term = epoch_sq / static_cast<double>(train_count);
        lb.reg_term = weight_sq_norm(res.params);
        lb.total = lb.data_term + cfg.weight_decay * lb.reg_term;
        if (!std::isfinite(lb.total))
            throw std::runtime_error("train: loss diverged (non-finite) at epoch " +
                                     std::to_string(epoch));
        res.history.push_back(lb);

        if (cfg.early_stopping) {
            double val_sq = 0.0;
            for (std::size_t w = train_count; w < all.inputs.size(); ++w) {
                const double pred = forward(all.inputs[w], res.params, eval_masks, cache);
                const double r = pred - all.targets[w];
                val_sq += r * r;
            }
            const double val = val_sq / static_cast<double>(val_count);
            if (val < best_val) {
                best_val = val;
                best_params = res.params;
                since_best = 0;
            } else if (++since_best >= cfg.patience) {
                break;
            }
        }
    }
    if (cfg.early_stopping) res.params = best_params;
    return res;
}

}  // namespace mcdrop
