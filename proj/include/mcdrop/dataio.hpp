#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcdrop/anomaly.hpp"

namespace mcdrop {

struct ChannelRecord {
    std::string channel_id;
    std::vector<double> train;
    std::vector<double> test;
    std::vector<AnomalyInterval> labels;  // test-frame indices
    bool excluded = false;
};

struct NormalizationState {
    double min = 0.0;
    double max = 0.0;
    double lo = -1.0;
    double hi = 1.0;
};

// Signals the paper's evaluation drops (constant or otherwise unusable in the
// univariate setting).
inline const std::set<std::string>& default_exclusion_list() {
    static const std::set<std::string> ids = {
        "M6", "E3", "A1",  "D1", "D3",  "D4", "G1",  "D5",  "D11", "G6",
        "R1", "A6", "F3",  "M2", "P10", "M3", "D16", "P15", "P11", "P14"};
    return ids;
}

// Reads column 0 of a delimiter-separated numeric text file, one row per
// timestep. Remaining columns (command features) are ignored.
inline std::vector<double> read_series(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<double> values;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        std::size_t b = 0;
        while (b < line.size() && (std::isspace(static_cast<unsigned char>(line[b])) != 0))
            ++b;
        if (b == line.size()) continue;  // blank line
        std::size_t e = b;
        while (e < line.size() && line[e] != ',' && line[e] != ';' && line[e] != '\t' &&
               line[e] != ' ')
            ++e;
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(line.data() + b, line.data() + e, v);
        if (ec != std::errc() || ptr != line.data() + e)
            throw std::runtime_error(path.string() + ": non-numeric telemetry value at row " +
                                     std::to_string(row));
        values.push_back(v);
    }
    if (values.empty()) throw std::runtime_error(path.string() + ": no data rows");
    return values;
}

inline void write_series(const std::filesystem::path& path, const std::vector<double>& values) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    char buf[64];
    for (double v : values) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        out << buf;
    }
}

// labels.json: { "channel": [[start, end], ...], ... }, test-frame inclusive
// index pairs.
inline std::map<std::string, std::vector<AnomalyInterval>> load_labels(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error(path.string() + ": expected an object");
    std::map<std::string, std::vector<AnomalyInterval>> out;
    for (const auto& [key, arr] : j.items()) {
        std::vector<AnomalyInterval> v;
        for (const auto& pair : arr) {
            if (!pair.is_array() || pair.size() != 2)
                throw std::runtime_error(path.string() + ": label for " + key +
                                         " is not a [start, end] pair");
            AnomalyInterval a;
            a.start = pair[0].get<std::size_t>();
            a.end = pair[1].get<std::size_t>();
            a.trigger_index = a.start;
            if (a.end < a.start)
                throw std::runtime_error(path.string() + ": label for " + key +
                                         " has end before start");
            v.push_back(a);
        }
        out[key] = sorted_by_start(std::move(v));
    }
    return out;
}

inline std::filesystem::path train_file(const std::filesystem::path& dir,
                                        const std::string& channel_id) {
    return dir / (channel_id + "_train.csv");
}

inline std::filesystem::path test_file(const std::filesystem::path& dir,
                                       const std::string& channel_id) {
    return dir / (channel_id + "_test.csv");
}

// Channel ids that have both a train and a test file in the directory.
inline std::vector<std::string> discover_channels(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw std::runtime_error(dir.string() + " is not a directory");
    std::vector<std::string> ids;
    const std::string suffix = "_train.csv";
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.size() <= suffix.size() || !name.ends_with(suffix)) continue;
        const std::string id = name.substr(0, name.size() - suffix.size());
        if (std::filesystem::exists(test_file(dir, id))) ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

inline ChannelRecord load_channel(
    const std::filesystem::path& dir, const std::string& channel_id,
    const std::map<std::string, std::vector<AnomalyInterval>>& labels,
    const std::set<std::string>& exclusion = default_exclusion_list()) {
    ChannelRecord rec;
    rec.channel_id = channel_id;
    rec.train = read_series(train_file(dir, channel_id));
    rec.test = read_series(test_file(dir, channel_id));
    rec.excluded = exclusion.contains(channel_id);
    if (auto it = labels.find(channel_id); it != labels.end()) {
        rec.labels = it->second;
        for (const auto& a : rec.labels)
            if (a.end >= rec.test.size())
                throw std::runtime_error(channel_id + ": label [" + std::to_string(a.start) +
                                         "," + std::to_string(a.end) +
                                         "] outside test series of length " +
                                         std::to_string(rec.test.size()));
    }
    return rec;
}

// Affine map of the train range onto [-1, 1]; the same map is applied to the
// test split, so test statistics never leak in. A constant train split maps
// everything to 0.
inline NormalizationState normalize(std::vector<double>& train, std::vector<double>& test) {
    if (train.empty()) throw std::invalid_argument("normalize: empty train split");
    NormalizationState st;
    st.min = *std::min_element(train.begin(), train.end());
    st.max = *std::max_element(train.begin(), train.end());
    const double span = st.max - st.min;
    auto apply = [&](double v) {
        if (span == 0.0) return 0.0;
        return st.lo + (st.hi - st.lo) * (v - st.min) / span;
    };
    for (double& v : train) v = apply(v);
    for (double& v : test) v = apply(v);
    return st;
}

inline double denormalize(double v, const NormalizationState& st) {
    if (st.max == st.min) return st.min;
    return st.min + (v - st.lo) * (st.max - st.min) / (st.hi - st.lo);
}

}  // namespace mcdrop
