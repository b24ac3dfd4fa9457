#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mcdrop/anomaly.hpp"

namespace mcdrop {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
};

struct MetricReport {
    double mse = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double accuracy = 0.0;
    double f1 = 0.0;
    bool zero_division = false;  // some denominator was empty; affected metrics are 0
};

inline double mse(const std::vector<double>& actual, const std::vector<double>& predicted) {
    if (actual.size() != predicted.size() || actual.empty())
        throw std::invalid_argument("mse: length mismatch or empty input");
    double sq = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double r = actual[i] - predicted[i];
        sq += r * r;
    }
    return sq / static_cast<double>(actual.size());
}

// Sequence-level, delay-aware confusion counts.
//
// A label is credited (TP) when a detection triggers within max_delay points
// of the label start; matching is one-to-one, each label taking the earliest
// unmatched trigger inside its window. Uncredited labels are FN. A detection
// is FP only when it neither overlaps any label nor triggers inside any
// label's delay window. TN is counted over the non-anomalous remainder of the
// channel, divided into max_delay-long segments (final partial segment
// included): one TN per segment free of detection triggers.
inline ConfusionCounts confusion(const std::vector<AnomalyInterval>& detections,
                                 const std::vector<AnomalyInterval>& labels,
                                 std::size_t max_delay, std::size_t n_eval_points) {
    if (max_delay < 1) throw std::invalid_argument("confusion: max_delay must be >= 1");
    validate_intervals(detections);
    validate_intervals(labels);
    for (const auto& v : {&detections, &labels})
        for (const auto& a : *v)
            if (a.end >= n_eval_points)
                throw std::invalid_argument("confusion: interval outside evaluation range");

    const auto dets = sorted_by_start(detections);
    const auto labs = sorted_by_start(labels);

    ConfusionCounts counts;

    // greedy earliest-trigger matching, labels in start order
    std::vector<bool> det_used(dets.size(), false);
    std::vector<std::size_t> det_by_trigger(dets.size());
    for (std::size_t i = 0; i < dets.size(); ++i) det_by_trigger[i] = i;
    std::sort(det_by_trigger.begin(), det_by_trigger.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].trigger_index < dets[b].trigger_index;
    });
    for (const auto& lab : labs) {
        const std::size_t hi = lab.start + max_delay;
        bool credited = false;
        for (std::size_t di : det_by_trigger) {
            if (det_used[di]) continue;
            const std::size_t trig = dets[di].trigger_index;
            if (trig >= lab.start && trig <= hi) {
                det_used[di] = true;
                credited = true;
                break;
            }
        }
        if (credited)
            ++counts.tp;
        else
            ++counts.fn;
    }

    for (const auto& det : dets) {
        bool forgiven = false;
        for (const auto& lab : labs) {
            const bool overlaps = det.start <= lab.end && lab.start <= det.end;
            const bool in_delay =
                det.trigger_index >= lab.start && det.trigger_index <= lab.start + max_delay;
            if (overlaps || in_delay) {
                forgiven = true;
                break;
            }
        }
        if (!forgiven) ++counts.fp;
    }

    // non-anomalous gaps chopped into max_delay segments
    std::vector<std::pair<std::size_t, std::size_t>> gaps;
    std::size_t cursor = 0;
    for (const auto& lab : labs) {
        if (lab.start > cursor) gaps.emplace_back(cursor, lab.start);  // [lo, hi)
        cursor = std::max(cursor, lab.end + 1);
    }
    if (cursor < n_eval_points) gaps.emplace_back(cursor, n_eval_points);

    for (const auto& [lo, hi] : gaps) {
        for (std::size_t seg = lo; seg < hi; seg += max_delay) {
            const std::size_t seg_end = std::min(seg + max_delay, hi);  // exclusive
            bool hit = false;
            for (const auto& det : dets)
                if (det.trigger_index >= seg && det.trigger_index < seg_end) {
                    hit = true;
                    break;
                }
            if (!hit) ++counts.tn;
        }
    }
    return counts;
}

// precision, recall, accuracy and F1 from the counts; a zero denominator
// yields 0 for that metric rather than NaN.
inline MetricReport scalar_metrics(const ConfusionCounts& c) {
    MetricReport r;
    const std::size_t total = c.tp + c.tn + c.fp + c.fn;
    if (c.tp + c.fp > 0)
        r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    else
        r.zero_division = true;
    if (c.tp + c.fn > 0)
        r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    else
        r.zero_division = true;
    if (total > 0)
        r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
    else
        r.zero_division = true;
    if (r.precision + r.recall > 0.0)
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

}  // namespace mcdrop
