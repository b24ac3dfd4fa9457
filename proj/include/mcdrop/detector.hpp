#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mcdrop/anomaly.hpp"
#include "mcdrop/mcinfer.hpp"
#include "mcdrop/metrics.hpp"

namespace mcdrop {

struct OutsideFlags {
    std::vector<bool> flags;  // true = outside the confidence region
};

struct DetectorOptions {
    // default: count-in-window rule (>= ceil(0.8 n_max) outside points inside
    // some n_max window); strict mode instead demands an unbroken run of that
    // many outside points
    bool strict_consecutive = false;
};

struct NmaxSweepResult {
    std::vector<std::size_t> candidates;
    std::vector<double> rho;  // TP + TN - FP - FN per candidate
    std::vector<ConfusionCounts> counts;
    std::size_t n_opt = 0;
};

inline OutsideFlags mark_outside(const ForecastDistribution& dist,
                                 const std::vector<double>& actual) {
    if (actual.size() != dist.lower.size())
        throw std::invalid_argument("mark_outside: length mismatch");
    OutsideFlags out;
    out.flags.resize(actual.size());
    for (std::size_t j = 0; j < actual.size(); ++j)
        out.flags[j] = actual[j] < dist.lower[j] || actual[j] > dist.upper[j];
    return out;
}

// ceil(0.8 * n_max), computed in integers so the boundary cases are exact.
inline std::size_t trigger_threshold(std::size_t n_max) { return (4 * n_max + 4) / 5; }

namespace detail {

// merge overlapping or touching intervals; the earliest trigger wins
inline std::vector<AnomalyInterval> merge_intervals(std::vector<AnomalyInterval> v) {
    v = sorted_by_start(std::move(v));
    std::vector<AnomalyInterval> out;
    for (const auto& a : v) {
        if (!out.empty() && a.start <= out.back().end + 1) {
            out.back().end = std::max(out.back().end, a.end);
            out.back().trigger_index = std::min(out.back().trigger_index, a.trigger_index);
        } else {
            out.push_back(a);
        }
    }
    return out;
}

}  // namespace detail

// Slide a window of length n_max over the outside-flags. Whenever at least
// ceil(0.8 n_max) flags in the window are set, an anomaly is open: it starts
// at the first set flag of the first triggering window, fires at the flag
// that completed the threshold, and extends to the last set flag of the last
// window of the triggering streak. Returns disjoint, sorted intervals; empty
// when n_max exceeds the series length.
inline std::vector<AnomalyInterval> flag_anomalies(const OutsideFlags& outside,
                                                   std::size_t n_max,
                                                   const DetectorOptions& opts = {}) {
    if (n_max < 1) throw std::invalid_argument("flag_anomalies: n_max must be >= 1");
    const auto& flags = outside.flags;
    const std::size_t n = flags.size();
    const std::size_t thresh = trigger_threshold(n_max);
    std::vector<AnomalyInterval> raw;

    if (opts.strict_consecutive) {
        if (n_max > n) return {};
        std::size_t run = 0;
        for (std::size_t j = 0; j <= n; ++j) {
            if (j < n && flags[j]) {
                ++run;
                continue;
            }
            if (run >= thresh) {
                AnomalyInterval a;
                a.start = j - run;
                a.end = j - 1;
                a.trigger_index = a.start + thresh - 1;
                raw.push_back(a);
            }
            run = 0;
        }
        return raw;  // runs are separated by a gap, nothing to merge
    }

    if (n_max > n) return {};
    std::size_t count = 0;
    for (std::size_t j = 0; j < n_max; ++j) count += flags[j] ? 1 : 0;

    const std::size_t n_windows = n - n_max + 1;
    std::vector<bool> triggered(n_windows);
    for (std::size_t w = 0; w < n_windows; ++w) {
        if (w > 0) count += (flags[w + n_max - 1] ? 1 : 0) - (flags[w - 1] ? 1 : 0);
        triggered[w] = count >= thresh;
    }

    std::size_t w = 0;
    while (w < n_windows) {
        if (!triggered[w]) {
            ++w;
            continue;
        }
        std::size_t last = w;
        while (last + 1 < n_windows && triggered[last + 1]) ++last;

        AnomalyInterval a;
        std::size_t seen = 0;
        for (std::size_t j = w; j < w + n_max; ++j) {
            if (!flags[j]) continue;
            if (seen == 0) a.start = j;
            if (++seen == thresh) {
                a.trigger_index = j;
                break;
            }
        }
        for (std::size_t j = last + n_max; j-- > last;) {
            if (flags[j]) {
                a.end = j;
                break;
            }
        }
        raw.push_back(a);
        w = last + 1;
    }
    return detail::merge_intervals(std::move(raw));
}

// Grid search over n_max maximizing rho = TP + TN - FP - FN; ties go to the
// smallest candidate. Labels must be given in the same index frame as the
// flags.
inline NmaxSweepResult sweep_nmax(const OutsideFlags& outside,
                                  const std::vector<AnomalyInterval>& labels,
                                  const std::vector<std::size_t>& candidates,
                                  std::size_t max_delay, const DetectorOptions& opts = {}) {
    if (candidates.empty()) throw std::invalid_argument("sweep_nmax: empty candidate grid");
    NmaxSweepResult res;
    res.candidates = candidates;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto detections = flag_anomalies(outside, candidates[i], opts);
        const ConfusionCounts c =
            confusion(detections, labels, max_delay, outside.flags.size());
        const double rho = static_cast<double>(c.tp) + static_cast<double>(c.tn) -
                           static_cast<double>(c.fp) - static_cast<double>(c.fn);
        res.rho.push_back(rho);
        res.counts.push_back(c);
    }
    double best = res.rho[0];
    for (double r : res.rho) best = std::max(best, r);
    res.n_opt = candidates[0];
    bool first = true;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (res.rho[i] == best && (first || candidates[i] < res.n_opt)) {
            res.n_opt = candidates[i];
            first = false;
        }
    return res;
}

inline std::vector<std::size_t> default_nmax_grid() { return {2, 4, 6, 8, 10, 12, 16, 24, 32}; }

}  // namespace mcdrop
