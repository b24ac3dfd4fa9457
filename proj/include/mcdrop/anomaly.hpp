#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mcdrop {

// One flagged anomaly stretch, indices inclusive. trigger_index is the point
// at which the detection rule first had enough evidence to fire.
struct AnomalyInterval {
    std::size_t start = 0;
    std::size_t end = 0;
    std::size_t trigger_index = 0;

    bool operator==(const AnomalyInterval&) const = default;
};

inline void validate_intervals(const std::vector<AnomalyInterval>& v) {
    for (const auto& a : v)
        if (!(a.start <= a.trigger_index && a.trigger_index <= a.end))
            throw std::invalid_argument("interval: start <= trigger <= end violated");
}

inline std::vector<AnomalyInterval> sorted_by_start(std::vector<AnomalyInterval> v) {
    std::sort(v.begin(), v.end(), [](const AnomalyInterval& a, const AnomalyInterval& b) {
        return a.start < b.start || (a.start == b.start && a.end < b.end);
    });
    return v;
}

}  // namespace mcdrop
