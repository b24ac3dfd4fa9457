#pragma once

// Synthetic channel generation shared by the pipeline tests and the
// acceptance suite.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mcdrop/rng.hpp"

namespace synth {

struct Channel {
    std::vector<double> train;
    std::vector<double> test;
    std::size_t burst_start = 0;  // test-frame index, only when a burst was planted
    std::size_t burst_end = 0;
};

inline std::vector<double> sine_noise(mcdrop::Rng& rng, std::size_t n, double amp,
                                      double period, double noise) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = amp * std::sin(2.0 * M_PI * static_cast<double>(i) / period) +
               rng.uniform(-noise, noise);
    return v;
}

// train: clean periodic signal; test: same signal with one level-shift burst
inline Channel burst_channel(std::uint64_t seed, std::size_t train_len = 400,
                             std::size_t test_len = 300, std::size_t burst_start = 180,
                             std::size_t burst_len = 12, double shift = 3.0) {
    mcdrop::Rng rng(seed);
    Channel ch;
    ch.train = sine_noise(rng, train_len, 0.8, 50.0, 0.02);
    ch.test = sine_noise(rng, test_len, 0.8, 50.0, 0.02);
    ch.burst_start = burst_start;
    ch.burst_end = burst_start + burst_len - 1;
    for (std::size_t i = ch.burst_start; i <= ch.burst_end; ++i) ch.test[i] += shift;
    return ch;
}

inline void write_rows(const std::filesystem::path& path, const std::vector<double>& values) {
    std::ofstream out(path);
    for (double v : values) out << v << ",0,1\n";  // extra command columns, ignored on load
}

// lays out <id>_train.csv, <id>_test.csv and labels.json in dir
inline void write_dataset(const std::filesystem::path& dir, const std::string& id,
                          const Channel& ch, bool labeled = true) {
    std::filesystem::create_directories(dir);
    write_rows(dir / (id + "_train.csv"), ch.train);
    write_rows(dir / (id + "_test.csv"), ch.test);
    if (labeled) {
        std::ofstream labels(dir / "labels.json");
        labels << "{ \"" << id << "\": [[" << ch.burst_start << ", " << ch.burst_end
               << "]] }\n";
    }
}

}  // namespace synth
