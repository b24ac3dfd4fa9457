#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mcdrop/lstm.hpp"
#include "mcdrop/preprocess.hpp"
#include "mcdrop/trainer.hpp"

namespace mcdrop {

// Monte-Carlo forecast for one channel: l stochastic passes per target index,
// aggregated into predictive mean, variance and mean +/- z_mult * std bounds.
struct ForecastDistribution {
    std::vector<std::size_t> timestamps;       // index into the source series
    std::vector<std::vector<double>> samples;  // [pass][target index]
    std::vector<double> mean;
    std::vector<double> variance;
    std::vector<double> lower;
    std::vector<double> upper;
    std::size_t l = 0;
    double z_mult = 2.0;
};

// Column mean and population variance, computed against the first sample as
// origin so that identical samples give mean == sample and variance == 0
// exactly, not up to rounding.
inline void sample_stats(const std::vector<std::vector<double>>& samples, std::size_t col,
                         double& mean, double& variance) {
    const std::size_t l = samples.size();
    if (l == 0) throw std::invalid_argument("sample_stats: no samples");
    const double origin = samples[0][col];
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t t = 0; t < l; ++t) {
        const double d = samples[t][col] - origin;
        s1 += d;
        s2 += d * d;
    }
    const double m1 = s1 / static_cast<double>(l);
    mean = origin + m1;
    variance = s2 / static_cast<double>(l) - m1 * m1;
    if (variance < 0.0) {
        if (variance < -1e-12) throw std::runtime_error("sample_stats: variance underflow");
        variance = 0.0;
    }
}

// Dropout stays active: pass t gets its own mask realization (seed + t),
// reused across every window of that pass so the pass is one coherent
// network realization.
inline ForecastDistribution predict_dist(const SmoothedSeries& series,
                                         const ModelParams& params, std::size_t l,
                                         double p_drop, double z_mult, std::uint64_t seed,
                                         std::size_t lookback) {
    if (l < 1) throw std::invalid_argument("predict_dist: need at least one pass");
    if (z_mult <= 0.0) throw std::invalid_argument("predict_dist: z_mult must be positive");
    const WindowSet windows = make_windows(series.values, lookback);
    const std::size_t n_pred = windows.inputs.size();

    ForecastDistribution dist;
    dist.l = l;
    dist.z_mult = z_mult;
    dist.timestamps.resize(n_pred);
    for (std::size_t j = 0; j < n_pred; ++j) dist.timestamps[j] = j + lookback;

    dist.samples.assign(l, std::vector<double>(n_pred, 0.0));
    ForwardCache cache;
    for (std::size_t t = 0; t < l; ++t) {
        const DropoutMasks masks = sample_masks(params, p_drop, seed + t);
        for (std::size_t j = 0; j < n_pred; ++j)
            dist.samples[t][j] = forward(windows.inputs[j], params, masks, cache);
    }

    dist.mean.resize(n_pred);
    dist.variance.resize(n_pred);
    dist.lower.resize(n_pred);
    dist.upper.resize(n_pred);
    for (std::size_t j = 0; j < n_pred; ++j) {
        sample_stats(dist.samples, j, dist.mean[j], dist.variance[j]);
        const double half = z_mult * std::sqrt(dist.variance[j]);
        dist.lower[j] = dist.mean[j] - half;
        dist.upper[j] = dist.mean[j] + half;
    }
    return dist;
}

// Fraction of actual values inside [lower, upper].
inline double coverage(const ForecastDistribution& dist, const std::vector<double>& actual) {
    if (actual.size() != dist.mean.size())
        throw std::invalid_argument("coverage: length mismatch");
    if (actual.empty()) return 0.0;
    std::size_t inside = 0;
    for (std::size_t j = 0; j < actual.size(); ++j)
        if (actual[j] >= dist.lower[j] && actual[j] <= dist.upper[j]) ++inside;
    return static_cast<double>(inside) / static_cast<double>(actual.size());
}

}  // namespace mcdrop
