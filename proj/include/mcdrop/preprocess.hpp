#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcdrop {

struct RawSeries {
    std::vector<double> values;
    std::string channel_id;
};

struct SmoothedSeries {
    std::vector<double> values;
    std::string source_channel;
};

struct SmoothOptions {
    std::size_t init_len = 2;   // l_w at the start and after every collapse
    std::size_t max_len = 32;   // growth cap, bounds filter latency
};

struct WindowStats {
    double mean = 0.0;
    double sigma = 0.0;
    double d_th = 0.0;
};

// |u(k-i-1) - u(k-i)|, the jump between two successive points.
inline double distance(const RawSeries& series, std::size_t k, long i) {
    const long idx = static_cast<long>(k) - i;
    const long n = static_cast<long>(series.values.size());
    if (idx - 1 < 0 || idx >= n)
        throw std::out_of_range("distance: offsets " + std::to_string(idx - 1) + "," +
                                std::to_string(idx) + " outside series of length " +
                                std::to_string(n));
    return std::abs(series.values[static_cast<std::size_t>(idx - 1)] -
                    series.values[static_cast<std::size_t>(idx)]);
}

// Mean, population s.t.d. and threshold mean + 2*sigma of one window.
inline WindowStats window_threshold(const std::vector<double>& window_values) {
    if (window_values.empty())
        throw std::invalid_argument("window_threshold: empty window");
    double sum = 0.0;
    for (double v : window_values) sum += v;
    const double m = sum / static_cast<double>(window_values.size());
    double sq = 0.0;
    for (double v : window_values) sq += (v - m) * (v - m);
    const double sigma = std::sqrt(sq / static_cast<double>(window_values.size()));
    return {m, sigma, m + 2.0 * sigma};
}

namespace detail {

// Candidate offsets in the order the grow loop examines them:
// 0, +1, -1, +2, -2, ...  (past side of the window first).
inline long candidate_offset(std::size_t pos) {
    if (pos == 0) return 0;
    const long mag = static_cast<long>((pos + 1) / 2);
    return (pos % 2 == 1) ? mag : -mag;
}

}  // namespace detail

// Adaptive weighted-moving-average smoothing. The window length carries over
// from one index to the next, widening one point at a time while successive
// jumps stay below the window threshold, and collapsing to the single current
// point the moment a jump reaches it, so spikes pass through untouched.
//
// Conventions shared with the reference oracle in the test suite:
//  - entry stats use the in-range values at offsets |i| <= cur_len/2;
//  - the threshold is fixed per k (computed once at loop entry);
//  - offsets are examined in the order 0, +1, -1, +2, -2, ...;
//  - offsets pointing outside the series are skipped;
//  - offset index 0 of the series has no predecessor, hence no distance to
//    test, and is accepted as-is;
//  - a jump d >= d_th collapses the window (alpha_0 = 1, rest 0) and resets
//    the carried length to init_len;
//  - the output value is the plain mean of the accepted points, summed in
//    ascending offset order.
inline SmoothedSeries smooth(const RawSeries& raw, const SmoothOptions& opt = {}) {
    const std::vector<double>& u = raw.values;
    const long n = static_cast<long>(u.size());
    if (n == 0) throw std::invalid_argument("smooth: empty input series");
    if (opt.init_len < 1 || opt.max_len < opt.init_len)
        throw std::invalid_argument("smooth: invalid window lengths");
    for (long j = 0; j < n; ++j)
        if (!std::isfinite(u[static_cast<std::size_t>(j)]))
            throw std::invalid_argument("smooth: non-finite value at index " + std::to_string(j));

    SmoothedSeries out;
    out.source_channel = raw.channel_id;
    out.values.resize(u.size());

    std::size_t cur_len = opt.init_len;
    std::vector<double> window;
    std::vector<long> accepted;

    for (long k = 0; k < n; ++k) {
        // stats of the values inside the current window at loop entry
        const long entry_half = static_cast<long>(cur_len / 2);
        window.clear();
        for (long i = -entry_half; i <= entry_half; ++i) {
            const long idx = k - i;
            if (idx >= 0 && idx < n) window.push_back(u[static_cast<std::size_t>(idx)]);
        }
        const WindowStats stats = window_threshold(window);

        std::size_t lw = cur_len;
        accepted.clear();
        bool collapsed = false;
        for (std::size_t pos = 0;; ++pos) {
            const long i = detail::candidate_offset(pos);
            if (std::abs(i) > static_cast<long>(lw / 2)) break;
            const long idx = k - i;
            if (idx < 0 || idx >= n) continue;
            if (idx > 0) {
                const double d = std::abs(u[static_cast<std::size_t>(idx - 1)] -
                                          u[static_cast<std::size_t>(idx)]);
                if (d >= stats.d_th) {
                    collapsed = true;
                    break;
                }
            }
            accepted.push_back(i);
            if (lw < opt.max_len) ++lw;
        }

        if (collapsed) {
            out.values[static_cast<std::size_t>(k)] = u[static_cast<std::size_t>(k)];
            cur_len = opt.init_len;
        } else {
            // sum in ascending offset order so the result is reproducible
            // bit-for-bit against the oracle
            std::sort(accepted.begin(), accepted.end());
            double sum = 0.0;
            for (long i : accepted) sum += u[static_cast<std::size_t>(k - i)];
            out.values[static_cast<std::size_t>(k)] = sum / static_cast<double>(accepted.size());
            cur_len = lw;
        }
    }
    return out;
}

}  // namespace mcdrop
