#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mcdrop/checkpoint.hpp"
#include "mcdrop/dataio.hpp"
#include "mcdrop/detector.hpp"
#include "mcdrop/mcinfer.hpp"
#include "mcdrop/metrics.hpp"
#include "mcdrop/preprocess.hpp"
#include "mcdrop/trainer.hpp"

namespace mcdrop {

struct RunConfig {
    std::string dataset_dir;
    std::string labels_file;             // empty: <dataset_dir>/labels.json when present
    std::vector<std::string> channels;   // empty: every channel in the dataset dir
    std::string output_dir = "out";

    TrainConfig train;  // architecture, optimizer and dropout settings

    std::size_t mc_passes = 30;  // l
    double z_mult = 2.0;

    std::vector<std::size_t> nmax_grid = default_nmax_grid();
    std::size_t n_max = 8;  // used by the plain detect stage (no sweep)
    std::size_t max_delay = 100;
    bool strict_consecutive = false;

    SmoothOptions smooth_opts;
    bool smooth_test = true;  // apply the pre-processing filter to the test split too

    bool use_exclusions = true;
    std::uint64_t seed = 42;
    std::size_t jobs = 1;
};

struct StageError {
    std::string channel;
    std::string stage;
    std::string message;
};

struct ChannelRow {
    std::string channel;
    std::string status;  // ok / excluded / error
    MetricReport metrics;
    ConfusionCounts counts;
    std::size_t n_opt = 0;
    double coverage = 0.0;
};

namespace paths {

inline std::filesystem::path smoothed_dir(const RunConfig& c) {
    return std::filesystem::path(c.output_dir) / "smoothed";
}
inline std::filesystem::path models_dir(const RunConfig& c) {
    return std::filesystem::path(c.output_dir) / "models";
}
inline std::filesystem::path logs_dir(const RunConfig& c) {
    return std::filesystem::path(c.output_dir) / "logs";
}
inline std::filesystem::path forecasts_dir(const RunConfig& c) {
    return std::filesystem::path(c.output_dir) / "forecasts";
}
inline std::filesystem::path detections_dir(const RunConfig& c) {
    return std::filesystem::path(c.output_dir) / "detections";
}
inline std::filesystem::path sweeps_dir(const RunConfig& c) {
    return std::filesystem::path(c.output_dir) / "sweeps";
}
inline std::filesystem::path plots_dir(const RunConfig& c) {
    return std::filesystem::path(c.output_dir) / "plots";
}
inline std::filesystem::path forecast_file(const RunConfig& c, const std::string& id) {
    return forecasts_dir(c) / (id + "_forecast.csv");
}
inline std::filesystem::path detections_file(const RunConfig& c, const std::string& id) {
    return detections_dir(c) / (id + "_detections.csv");
}
inline std::filesystem::path sweep_file(const RunConfig& c, const std::string& id) {
    return sweeps_dir(c) / (id + "_sweep.csv");
}
inline std::filesystem::path model_file(const RunConfig& c, const std::string& id) {
    return models_dir(c) / (id + ".ckpt");
}

}  // namespace paths

namespace detail {

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Stable per-channel seed: independent of processing order and worker count.
inline std::uint64_t channel_seed(const RunConfig& cfg, const std::string& id) {
    return Rng::mix(cfg.seed ^ fnv1a(id));
}

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

template <typename Fn>
std::vector<StageError> for_each_channel(const std::vector<std::string>& ids, std::size_t jobs,
                                         const char* stage, Fn&& fn) {
    std::vector<StageError> errors;
    std::mutex m;
    auto work = [&](const std::string& id) {
        try {
            fn(id);
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(m);
            errors.push_back({id, stage, e.what()});
        }
    };
    if (jobs <= 1 || ids.size() <= 1) {
        for (const auto& id : ids) work(id);
        return errors;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const std::size_t n_threads = std::min(jobs, ids.size());
    for (std::size_t t = 0; t < n_threads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= ids.size()) return;
                work(ids[i]);
            }
        });
    for (auto& th : pool) th.join();
    return errors;
}

}  // namespace detail

// Channels selected by the config: the explicit list, or everything present
// in the dataset directory; the exclusion list is applied in both cases.
inline std::vector<std::string> resolve_channels(const RunConfig& cfg,
                                                 std::vector<std::string>* excluded = nullptr) {
    std::vector<std::string> ids =
        cfg.channels.empty() ? discover_channels(cfg.dataset_dir) : cfg.channels;
    std::vector<std::string> kept;
    for (const auto& id : ids) {
        if (cfg.use_exclusions && default_exclusion_list().contains(id)) {
            if (excluded) excluded->push_back(id);
        } else {
            kept.push_back(id);
        }
    }
    return kept;
}

inline std::map<std::string, std::vector<AnomalyInterval>> resolve_labels(const RunConfig& cfg) {
    std::filesystem::path p = cfg.labels_file.empty()
                                  ? std::filesystem::path(cfg.dataset_dir) / "labels.json"
                                  : std::filesystem::path(cfg.labels_file);
    if (cfg.labels_file.empty() && !std::filesystem::exists(p)) return {};
    return load_labels(p);
}

// ---- preprocess stage: normalize on train statistics, then smooth ----

inline void preprocess_channel(const RunConfig& cfg, const std::string& id) {
    const auto labels = std::map<std::string, std::vector<AnomalyInterval>>{};
    ChannelRecord rec = load_channel(cfg.dataset_dir, id, labels, {});
    const NormalizationState norm = normalize(rec.train, rec.test);

    const SmoothedSeries strain = smooth({rec.train, id}, cfg.smooth_opts);
    const SmoothedSeries stest = cfg.smooth_test ? smooth({rec.test, id}, cfg.smooth_opts)
                                                 : SmoothedSeries{rec.test, id};

    std::filesystem::create_directories(paths::smoothed_dir(cfg));
    write_series(train_file(paths::smoothed_dir(cfg), id), strain.values);
    write_series(test_file(paths::smoothed_dir(cfg), id), stest.values);

    std::ofstream ns(paths::smoothed_dir(cfg) / (id + "_norm.txt"));
    ns << "min " << detail::fmt17(norm.min) << "\nmax " << detail::fmt17(norm.max) << "\n";
}

// ---- train stage ----

inline void train_channel(const RunConfig& cfg, const std::string& id) {
    const auto train_path = train_file(paths::smoothed_dir(cfg), id);
    if (!std::filesystem::exists(train_path))
        throw std::runtime_error("missing smoothed train file " + train_path.string() +
                                 " (run preprocess first)");
    SmoothedSeries series{read_series(train_path), id};

    TrainConfig tc = cfg.train;
    tc.seed = detail::channel_seed(cfg, id);
    const TrainResult result = train(series, tc);

    std::filesystem::create_directories(paths::models_dir(cfg));
    std::filesystem::create_directories(paths::logs_dir(cfg));
    save_checkpoint(paths::model_file(cfg, id), result.params, tc);

    std::ofstream log(paths::logs_dir(cfg) / (id + "_loss.txt"));
    for (std::size_t e = 0; e < result.history.size(); ++e) {
        const auto& lb = result.history[e];
        log << e << " " << detail::fmt17(lb.data_term) << " " << detail::fmt17(lb.reg_term)
            << " " << detail::fmt17(lb.total) << "\n";
    }
}

// ---- infer stage ----

inline void infer_channel(const RunConfig& cfg, const std::string& id) {
    const auto test_path = test_file(paths::smoothed_dir(cfg), id);
    if (!std::filesystem::exists(test_path))
        throw std::runtime_error("missing smoothed test file " + test_path.string() +
                                 " (run preprocess first)");
    const auto ckpt_path = paths::model_file(cfg, id);
    if (!std::filesystem::exists(ckpt_path))
        throw std::runtime_error("missing checkpoint " + ckpt_path.string() +
                                 " (run train first)");

    SmoothedSeries series{read_series(test_path), id};
    const Checkpoint ck = load_checkpoint(ckpt_path);
    const std::uint64_t seed = Rng::mix(detail::channel_seed(cfg, id) ^ 0x6d63696e666572ULL);
    const ForecastDistribution dist = predict_dist(series, ck.params, cfg.mc_passes,
                                                   ck.config.p_drop, cfg.z_mult, seed,
                                                   ck.config.lookback);

    std::filesystem::create_directories(paths::forecasts_dir(cfg));
    std::ofstream out(paths::forecast_file(cfg, id));
    if (!out) throw std::runtime_error("cannot write forecast for " + id);
    for (std::size_t j = 0; j < dist.mean.size(); ++j) {
        const double actual = series.values[dist.timestamps[j]];
        out << dist.timestamps[j] << " " << detail::fmt17(actual) << " "
            << detail::fmt17(dist.mean[j]) << " " << detail::fmt17(dist.variance[j]) << " "
            << detail::fmt17(dist.lower[j]) << " " << detail::fmt17(dist.upper[j]) << "\n";
    }
}

// Forecast artifact: one row per predicted index,
// "series_index actual mean variance lower upper".
struct ForecastFile {
    std::vector<std::size_t> timestamps;
    std::vector<double> actual, mean, variance, lower, upper;

    std::size_t offset() const { return timestamps.empty() ? 0 : timestamps[0]; }
};

inline ForecastFile read_forecast(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing forecast " + path.string());
    ForecastFile f;
    std::size_t ts = 0;
    double a = 0, m = 0, v = 0, lo = 0, hi = 0;
    while (in >> ts >> a >> m >> v >> lo >> hi) {
        f.timestamps.push_back(ts);
        f.actual.push_back(a);
        f.mean.push_back(m);
        f.variance.push_back(v);
        f.lower.push_back(lo);
        f.upper.push_back(hi);
    }
    if (f.timestamps.empty()) throw std::runtime_error(path.string() + ": no forecast rows");
    return f;
}

inline OutsideFlags forecast_flags(const ForecastFile& f) {
    ForecastDistribution d;
    d.lower = f.lower;
    d.upper = f.upper;
    d.mean = f.mean;
    return mark_outside(d, f.actual);
}

// Labels live in test-frame indices; flags start at the first predicted index.
inline std::vector<AnomalyInterval> labels_to_flag_frame(
    const std::vector<AnomalyInterval>& labels, std::size_t offset, std::size_t n_pred) {
    std::vector<AnomalyInterval> out;
    for (const auto& lab : labels) {
        AnomalyInterval a;
        a.start = lab.start >= offset ? lab.start - offset : 0;
        a.end = lab.end >= offset ? lab.end - offset : 0;
        if (a.start >= n_pred) continue;  // beyond the prediction range
        a.end = std::min(a.end, n_pred - 1);
        a.trigger_index = a.start;
        out.push_back(a);
    }
    return out;
}

// ---- sweep stage ----

inline NmaxSweepResult sweep_channel(const RunConfig& cfg, const std::string& id,
                                     const std::vector<AnomalyInterval>& labels) {
    const ForecastFile f = read_forecast(paths::forecast_file(cfg, id));
    const OutsideFlags flags = forecast_flags(f);
    const auto flabels = labels_to_flag_frame(labels, f.offset(), flags.flags.size());
    const DetectorOptions opts{cfg.strict_consecutive};
    const NmaxSweepResult res = sweep_nmax(flags, flabels, cfg.nmax_grid, cfg.max_delay, opts);

    std::filesystem::create_directories(paths::sweeps_dir(cfg));
    std::ofstream out(paths::sweep_file(cfg, id));
    out << "# n_max rho tp fp fn tn precision recall accuracy f1\n";
    for (std::size_t i = 0; i < res.candidates.size(); ++i) {
        const MetricReport mr = scalar_metrics(res.counts[i]);
        out << res.candidates[i] << " " << res.rho[i] << " " << res.counts[i].tp << " "
            << res.counts[i].fp << " " << res.counts[i].fn << " " << res.counts[i].tn << " "
            << detail::fmt6(mr.precision) << " " << detail::fmt6(mr.recall) << " "
            << detail::fmt6(mr.accuracy) << " " << detail::fmt6(mr.f1) << "\n";
    }
    out << "# n_opt " << res.n_opt << "\n";
    return res;
}

inline std::size_t read_swept_nopt(const RunConfig& cfg, const std::string& id) {
    std::ifstream in(paths::sweep_file(cfg, id));
    if (!in) throw std::runtime_error("missing sweep file " +
                                      paths::sweep_file(cfg, id).string() +
                                      " (run sweep first)");
    std::string line, key;
    std::size_t n_opt = 0;
    bool found = false;
    while (std::getline(in, line)) {
        if (line.rfind("# n_opt ", 0) == 0) {
            n_opt = std::stoul(line.substr(8));
            found = true;
        }
    }
    if (!found)
        throw std::runtime_error(paths::sweep_file(cfg, id).string() + ": no n_opt record");
    return n_opt;
}

// ---- detect stage ----

inline std::vector<AnomalyInterval> detect_channel(const RunConfig& cfg, const std::string& id,
                                                   std::size_t n_max) {
    const ForecastFile f = read_forecast(paths::forecast_file(cfg, id));
    const OutsideFlags flags = forecast_flags(f);
    const DetectorOptions opts{cfg.strict_consecutive};
    std::vector<AnomalyInterval> dets = flag_anomalies(flags, n_max, opts);

    // emit in test-frame indices
    const std::size_t off = f.offset();
    std::filesystem::create_directories(paths::detections_dir(cfg));
    std::ofstream out(paths::detections_file(cfg, id));
    out << "# channel start end trigger_index n_max\n";
    for (const auto& d : dets)
        out << id << " " << d.start + off << " " << d.end + off << " "
            << d.trigger_index + off << " " << n_max << "\n";
    return dets;
}

struct DetectionsFile {
    std::vector<AnomalyInterval> intervals;  // test frame
    std::size_t n_max = 0;
};

inline DetectionsFile read_detections(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing detections " + path.string());
    DetectionsFile df;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string ch;
        AnomalyInterval a;
        if (!(row >> ch >> a.start >> a.end >> a.trigger_index >> df.n_max))
            throw std::runtime_error(path.string() + ": malformed detection row");
        df.intervals.push_back(a);
    }
    return df;
}

// ---- evaluate stage ----

inline ChannelRow evaluate_channel(const RunConfig& cfg, const std::string& id,
                                   const std::vector<AnomalyInterval>& labels) {
    const ForecastFile f = read_forecast(paths::forecast_file(cfg, id));
    const DetectionsFile dets = read_detections(paths::detections_file(cfg, id));

    ChannelRow row;
    row.channel = id;
    row.status = "ok";
    row.metrics.mse = mse(f.actual, f.mean);
    row.n_opt = dets.n_max;

    ForecastDistribution d;
    d.lower = f.lower;
    d.upper = f.upper;
    d.mean = f.mean;
    row.coverage = coverage(d, f.actual);

    // score in the flag frame, consistent with the sweep
    const std::size_t off = f.offset();
    const std::size_t n_pred = f.actual.size();
    std::vector<AnomalyInterval> fdets;
    for (const auto& a : dets.intervals)
        fdets.push_back({a.start - off, a.end - off, a.trigger_index - off});
    const auto flabels = labels_to_flag_frame(labels, off, n_pred);
    row.counts = confusion(fdets, flabels, cfg.max_delay, n_pred);
    const double saved_mse = row.metrics.mse;
    row.metrics = scalar_metrics(row.counts);
    row.metrics.mse = saved_mse;
    return row;
}

// ---- report assembly ----

inline void write_report(const RunConfig& cfg, const std::vector<ChannelRow>& rows) {
    std::filesystem::create_directories(cfg.output_dir);
    const auto txt_path = std::filesystem::path(cfg.output_dir) / "report.txt";
    std::ofstream out(txt_path);
    if (!out) throw std::runtime_error("cannot write " + txt_path.string());

    out << "channel status mse tp fp fn tn precision recall accuracy f1 n_opt coverage\n";
    auto emit = [&](const ChannelRow& r) {
        out << r.channel << " " << r.status << " " << detail::fmt6(r.metrics.mse) << " "
            << r.counts.tp << " " << r.counts.fp << " " << r.counts.fn << " " << r.counts.tn
            << " " << detail::fmt6(r.metrics.precision) << " " << detail::fmt6(r.metrics.recall)
            << " " << detail::fmt6(r.metrics.accuracy) << " " << detail::fmt6(r.metrics.f1)
            << " " << r.n_opt << " " << detail::fmt6(r.coverage) << "\n";
    };

    ConfusionCounts pooled;
    double mse_sum = 0, cov_sum = 0, prec_sum = 0, rec_sum = 0, acc_sum = 0, f1_sum = 0;
    std::size_t ok = 0;
    for (const auto& r : rows) {
        emit(r);
        if (r.status != "ok") continue;
        ++ok;
        pooled.tp += r.counts.tp;
        pooled.fp += r.counts.fp;
        pooled.fn += r.counts.fn;
        pooled.tn += r.counts.tn;
        mse_sum += r.metrics.mse;
        cov_sum += r.coverage;
        prec_sum += r.metrics.precision;
        rec_sum += r.metrics.recall;
        acc_sum += r.metrics.accuracy;
        f1_sum += r.metrics.f1;
    }

    nlohmann::json j;
    j["channels"] = nlohmann::json::array();
    for (const auto& r : rows) {
        j["channels"].push_back({{"channel", r.channel},
                                 {"status", r.status},
                                 {"mse", r.metrics.mse},
                                 {"tp", r.counts.tp},
                                 {"fp", r.counts.fp},
                                 {"fn", r.counts.fn},
                                 {"tn", r.counts.tn},
                                 {"precision", r.metrics.precision},
                                 {"recall", r.metrics.recall},
                                 {"accuracy", r.metrics.accuracy},
                                 {"f1", r.metrics.f1},
                                 {"n_opt", r.n_opt},
                                 {"coverage", r.coverage}});
    }

    if (ok > 0) {
        const MetricReport pm = scalar_metrics(pooled);
        const double n = static_cast<double>(ok);
        ChannelRow pr;
        pr.channel = "ALL(pooled)";
        pr.status = "ok";
        pr.metrics = pm;
        pr.metrics.mse = mse_sum / n;
        pr.counts = pooled;
        pr.coverage = cov_sum / n;
        emit(pr);
        ChannelRow mr;
        mr.channel = "ALL(mean)";
        mr.status = "ok";
        mr.metrics.mse = mse_sum / n;
        mr.metrics.precision = prec_sum / n;
        mr.metrics.recall = rec_sum / n;
        mr.metrics.accuracy = acc_sum / n;
        mr.metrics.f1 = f1_sum / n;
        mr.coverage = cov_sum / n;
        emit(mr);
        j["aggregate_pooled"] = {{"mse", mse_sum / n},        {"tp", pooled.tp},
                                 {"fp", pooled.fp},           {"fn", pooled.fn},
                                 {"tn", pooled.tn},           {"precision", pm.precision},
                                 {"recall", pm.recall},       {"accuracy", pm.accuracy},
                                 {"f1", pm.f1},               {"coverage", cov_sum / n}};
        j["aggregate_mean"] = {{"mse", mse_sum / n},          {"precision", prec_sum / n},
                               {"recall", rec_sum / n},       {"accuracy", acc_sum / n},
                               {"f1", f1_sum / n},            {"coverage", cov_sum / n}};
    }

    std::ofstream js(std::filesystem::path(cfg.output_dir) / "report.json");
    js << j.dump(2) << "\n";
}

// Fully resolved configuration echo, one key per line.
inline void write_config_echo(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream out(std::filesystem::path(cfg.output_dir) / "config_echo.txt");
    out << "dataset_dir " << cfg.dataset_dir << "\n";
    out << "labels_file " << cfg.labels_file << "\n";
    out << "output_dir " << cfg.output_dir << "\n";
    out << "channels";
    for (const auto& c : cfg.channels) out << " " << c;
    out << "\n";
    out << "epochs " << cfg.train.epochs << "\n";
    out << "batch_size " << cfg.train.batch_size << "\n";
    out << "learning_rate " << detail::fmt17(cfg.train.learning_rate) << "\n";
    out << "weight_decay " << detail::fmt17(cfg.train.weight_decay) << "\n";
    out << "p_drop " << detail::fmt17(cfg.train.p_drop) << "\n";
    out << "lookback " << cfg.train.lookback << "\n";
    out << "lstm_hidden";
    for (auto h : cfg.train.lstm_hidden) out << " " << h;
    out << "\n";
    out << "dense_sizes";
    for (auto d : cfg.train.dense_sizes) out << " " << d;
    out << "\n";
    out << "grad_clip " << detail::fmt17(cfg.train.grad_clip) << "\n";
    out << "early_stopping " << (cfg.train.early_stopping ? 1 : 0) << "\n";
    out << "mc_passes " << cfg.mc_passes << "\n";
    out << "z_mult " << detail::fmt17(cfg.z_mult) << "\n";
    out << "nmax_grid";
    for (auto n : cfg.nmax_grid) out << " " << n;
    out << "\n";
    out << "n_max " << cfg.n_max << "\n";
    out << "max_delay " << cfg.max_delay << "\n";
    out << "strict_consecutive " << (cfg.strict_consecutive ? 1 : 0) << "\n";
    out << "smooth_init_len " << cfg.smooth_opts.init_len << "\n";
    out << "smooth_max_len " << cfg.smooth_opts.max_len << "\n";
    out << "smooth_test " << (cfg.smooth_test ? 1 : 0) << "\n";
    out << "use_exclusions " << (cfg.use_exclusions ? 1 : 0) << "\n";
    out << "seed " << cfg.seed << "\n";
    out << "jobs " << cfg.jobs << "\n";
}

inline void write_error_manifest(const RunConfig& cfg, const std::vector<StageError>& errors) {
    if (errors.empty()) return;
    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream out(std::filesystem::path(cfg.output_dir) / "errors.txt", std::ios::app);
    for (const auto& e : errors)
        out << e.channel << " [" << e.stage << "] " << e.message << "\n";
}

struct RunOutcome {
    std::vector<ChannelRow> rows;
    std::vector<StageError> errors;

    int exit_code() const { return errors.empty() ? 0 : 1; }
};

// The whole pipeline for every selected channel: preprocess, train, infer,
// sweep, detect at the swept optimum, evaluate. One channel failing never
// stops the others.
inline RunOutcome run_pipeline(const RunConfig& cfg) {
    std::vector<std::string> excluded;
    const std::vector<std::string> ids = resolve_channels(cfg, &excluded);
    const auto labels = resolve_labels(cfg);
    write_config_echo(cfg);

    RunOutcome outcome;
    std::mutex rows_mutex;
    std::map<std::string, ChannelRow> rows;

    outcome.errors = detail::for_each_channel(ids, cfg.jobs, "run", [&](const std::string& id) {
        preprocess_channel(cfg, id);
        train_channel(cfg, id);
        infer_channel(cfg, id);
        std::vector<AnomalyInterval> chan_labels;
        if (auto it = labels.find(id); it != labels.end()) chan_labels = it->second;
        const NmaxSweepResult sw = sweep_channel(cfg, id, chan_labels);
        detect_channel(cfg, id, sw.n_opt);
        ChannelRow row = evaluate_channel(cfg, id, chan_labels);
        std::lock_guard<std::mutex> lock(rows_mutex);
        rows[id] = std::move(row);
    });

    for (const auto& id : excluded) {
        ChannelRow row;
        row.channel = id;
        row.status = "excluded";
        rows[id] = std::move(row);
    }
    for (const auto& e : outcome.errors) {
        ChannelRow row;
        row.channel = e.channel;
        row.status = "error";
        rows[e.channel] = std::move(row);
    }
    for (auto& [id, row] : rows) outcome.rows.push_back(std::move(row));

    write_report(cfg, outcome.rows);
    write_error_manifest(cfg, outcome.errors);
    return outcome;
}

}  // namespace mcdrop
