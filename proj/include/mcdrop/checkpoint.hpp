#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcdrop/lstm.hpp"
#include "mcdrop/trainer.hpp"

namespace mcdrop {

// Versioned textual checkpoint: architecture, training config, then every
// parameter tensor in for_each_tensor order, row-major, printed with 17
// significant digits so values survive a save/load round trip bit-for-bit.
inline constexpr const char* kCheckpointMagic = "mcdrop-checkpoint v1";

inline void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                            const TrainConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << kCheckpointMagic << "\n";
    out << "input_dim " << params.input_dim << "\n";
    out << "lstm_hidden " << params.lstm_layers.size();
    for (const auto& l : params.lstm_layers) out << " " << l.hidden;
    out << "\n";
    out << "dense_sizes " << params.dense_layers.size();
    for (const auto& d : params.dense_layers) out << " " << d.out_dim;
    out << "\n";
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "config epochs " << cfg.epochs << " batch_size " << cfg.batch_size
        << " learning_rate " << fmt(cfg.learning_rate) << " weight_decay "
        << fmt(cfg.weight_decay) << " p_drop " << fmt(cfg.p_drop) << " lookback "
        << cfg.lookback << " seed " << cfg.seed << "\n";
    for_each_tensor(params, [&](const std::vector<double>& t, bool) {
        for (std::size_t j = 0; j < t.size(); ++j) {
            if (j) out << " ";
            out << fmt(t[j]);
        }
        out << "\n";
    });
    out << "end\n";
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

struct Checkpoint {
    ModelParams params;
    TrainConfig config;
};

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kCheckpointMagic)
        throw std::runtime_error(path.string() + ": not a " + std::string(kCheckpointMagic) +
                                 " file");
    auto expect_key = [&](std::istream& s, const std::string& key) {
        std::string k;
        s >> k;
        if (k != key)
            throw std::runtime_error(path.string() + ": expected '" + key + "', got '" + k +
                                     "'");
    };
    Checkpoint ck;
    std::size_t input_dim = 0, n_lstm = 0, n_dense = 0;
    expect_key(in, "input_dim");
    in >> input_dim;
    expect_key(in, "lstm_hidden");
    in >> n_lstm;
    std::vector<std::size_t> hidden(n_lstm);
    for (auto& h : hidden) in >> h;
    expect_key(in, "dense_sizes");
    in >> n_dense;
    std::vector<std::size_t> dense(n_dense);
    for (auto& d : dense) in >> d;
    expect_key(in, "config");
    expect_key(in, "epochs");
    in >> ck.config.epochs;
    expect_key(in, "batch_size");
    in >> ck.config.batch_size;
    expect_key(in, "learning_rate");
    in >> ck.config.learning_rate;
    expect_key(in, "weight_decay");
    in >> ck.config.weight_decay;
    expect_key(in, "p_drop");
    in >> ck.config.p_drop;
    expect_key(in, "lookback");
    in >> ck.config.lookback;
    expect_key(in, "seed");
    in >> ck.config.seed;
    if (!in) throw std::runtime_error(path.string() + ": malformed header");

    ck.config.lstm_hidden = hidden;
    ck.config.dense_sizes = dense;
    ck.params = make_model(input_dim, hidden, dense);
    for_each_tensor(ck.params, [&](std::vector<double>& t, bool) {
        for (double& v : t)
            if (!(in >> v))
                throw std::runtime_error(path.string() + ": truncated tensor data");
    });
    std::string sentinel;
    in >> sentinel;
    if (sentinel != "end")
        throw std::runtime_error(path.string() + ": missing end marker");
    return ck;
}

}  // namespace mcdrop
