// mcdrop: telemetry anomaly detection via an LSTM forecaster with Monte Carlo
// dropout uncertainty bounds. Subcommands cover the pipeline stages
// (preprocess, train, infer, sweep, detect, evaluate), an end-to-end `run`,
// and `plotdata` for exporting plot-ready tables.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcdrop/pipeline.hpp"

namespace {

using mcdrop::RunConfig;

void add_common_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("-d,--data-dir", cfg.dataset_dir, "dataset directory with channel csvs")
        ->envname("MCDROP_DATA_DIR");
    cmd->add_option("--labels", cfg.labels_file,
                    "labels.json path (default <data-dir>/labels.json)");
    cmd->add_option("-o,--out", cfg.output_dir, "output directory")->capture_default_str();
    cmd->add_option("-c,--channels", cfg.channels,
                    "channel ids to process (default: all in the dataset dir)")
        ->delimiter(',');
    cmd->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
    cmd->add_option("-j,--jobs", cfg.jobs, "parallel channel workers")->capture_default_str();
    cmd->add_flag("--no-exclusions", [&cfg](std::int64_t) { cfg.use_exclusions = false; },
                  "process channels on the built-in exclusion list too");
    cmd->set_config("--config", "", "read options from an INI file");
}

void add_model_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--epochs", cfg.train.epochs)->capture_default_str();
    cmd->add_option("--batch-size", cfg.train.batch_size)->capture_default_str();
    cmd->add_option("--lr", cfg.train.learning_rate)->capture_default_str();
    cmd->add_option("--weight-decay", cfg.train.weight_decay)->capture_default_str();
    cmd->add_option("--p-drop", cfg.train.p_drop)->capture_default_str();
    cmd->add_option("--lookback", cfg.train.lookback)->capture_default_str();
    cmd->add_option("--lstm-hidden", cfg.train.lstm_hidden, "hidden size per LSTM layer")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--dense-sizes", cfg.train.dense_sizes, "output size per dense layer")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_flag("--early-stopping", cfg.train.early_stopping,
                  "hold out the last 10% of windows and stop on stalled validation loss");
}

void add_infer_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("-l,--mc-passes", cfg.mc_passes, "stochastic forward passes")
        ->capture_default_str();
    cmd->add_option("--z-mult", cfg.z_mult, "half-width of the confidence band in stds")
        ->capture_default_str();
}

void add_detect_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--nmax-grid", cfg.nmax_grid, "candidate N_max values for the sweep")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--max-delay", cfg.max_delay, "TP credit window after a label start")
        ->capture_default_str();
    cmd->add_flag("--strict-consecutive", cfg.strict_consecutive,
                  "require an unbroken run of outside points instead of a window density");
}

void add_smooth_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--smooth-init-len", cfg.smooth_opts.init_len)->capture_default_str();
    cmd->add_option("--smooth-max-len", cfg.smooth_opts.max_len)->capture_default_str();
    cmd->add_flag("--no-smooth-test", [&cfg](std::int64_t) { cfg.smooth_test = false; },
                  "leave the test split unsmoothed");
}

int run_stage(const RunConfig& cfg, const char* stage,
              const std::function<void(const std::string&)>& fn) {
    std::vector<std::string> excluded;
    const auto ids = mcdrop::resolve_channels(cfg, &excluded);
    for (const auto& id : excluded)
        std::cerr << id << ": excluded (paper's unusable-signal list)\n";
    const auto errors = mcdrop::detail::for_each_channel(ids, cfg.jobs, stage, fn);
    mcdrop::write_error_manifest(cfg, errors);
    for (const auto& e : errors)
        std::cerr << e.channel << " [" << e.stage << "] " << e.message << "\n";
    return errors.empty() ? 0 : 1;
}

int cmd_evaluate(const RunConfig& cfg) {
    std::vector<std::string> excluded;
    const auto ids = mcdrop::resolve_channels(cfg, &excluded);
    const auto labels = mcdrop::resolve_labels(cfg);
    std::vector<mcdrop::ChannelRow> rows;
    std::vector<mcdrop::StageError> errors;
    for (const auto& id : ids) {
        try {
            std::vector<mcdrop::AnomalyInterval> chan_labels;
            if (auto it = labels.find(id); it != labels.end()) chan_labels = it->second;
            rows.push_back(mcdrop::evaluate_channel(cfg, id, chan_labels));
        } catch (const std::exception& e) {
            errors.push_back({id, "evaluate", e.what()});
            mcdrop::ChannelRow row;
            row.channel = id;
            row.status = "error";
            rows.push_back(row);
        }
    }
    for (const auto& id : excluded) {
        mcdrop::ChannelRow row;
        row.channel = id;
        row.status = "excluded";
        rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.channel < b.channel; });
    mcdrop::write_report(cfg, rows);
    mcdrop::write_error_manifest(cfg, errors);
    for (const auto& e : errors)
        std::cerr << e.channel << " [evaluate] " << e.message << "\n";
    return errors.empty() ? 0 : 1;
}

int cmd_plotdata(const std::string& run_dir) {
    namespace fs = std::filesystem;
    RunConfig cfg;
    cfg.output_dir = run_dir;
    const fs::path fdir = mcdrop::paths::forecasts_dir(cfg);
    if (!fs::is_directory(fdir))
        throw std::runtime_error("missing forecast directory " + fdir.string() +
                                 " (run infer first)");
    fs::create_directories(mcdrop::paths::plots_dir(cfg));
    std::size_t emitted = 0;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(fdir))
        if (entry.path().filename().string().ends_with("_forecast.csv"))
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        std::string id = path.filename().string();
        id = id.substr(0, id.size() - std::string("_forecast.csv").size());
        const mcdrop::ForecastFile f = mcdrop::read_forecast(path);
        std::ofstream bounds(mcdrop::paths::plots_dir(cfg) / (id + "_bounds.csv"));
        bounds << "# index actual predicted lower upper\n";
        for (std::size_t j = 0; j < f.actual.size(); ++j)
            bounds << f.timestamps[j] << " " << f.actual[j] << " " << f.mean[j] << " "
                   << f.lower[j] << " " << f.upper[j] << "\n";
        ++emitted;

        const fs::path sweep = mcdrop::paths::sweep_file(cfg, id);
        if (fs::exists(sweep)) {
            std::ifstream in(sweep);
            std::ofstream curve(mcdrop::paths::plots_dir(cfg) / (id + "_sweepcurve.csv"));
            curve << in.rdbuf();
        }
    }
    if (emitted == 0)
        throw std::runtime_error("missing forecast files under " + fdir.string());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LSTM + MC-dropout anomaly detection for telemetry channels"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::size_t detect_nmax = 0;  // 0 = use the swept optimum when available
    std::string plot_run_dir;

    auto* c_pre = app.add_subcommand("preprocess", "normalize and smooth channels");
    add_common_options(c_pre, cfg);
    add_smooth_options(c_pre, cfg);

    auto* c_train = app.add_subcommand("train", "train the forecaster per channel");
    add_common_options(c_train, cfg);
    add_model_options(c_train, cfg);

    auto* c_infer = app.add_subcommand("infer", "MC-dropout forecast with bounds");
    add_common_options(c_infer, cfg);
    add_infer_options(c_infer, cfg);

    auto* c_sweep = app.add_subcommand("sweep", "grid-search N_max against the labels");
    add_common_options(c_sweep, cfg);
    add_detect_options(c_sweep, cfg);

    auto* c_detect = app.add_subcommand("detect", "flag anomaly intervals");
    add_common_options(c_detect, cfg);
    add_detect_options(c_detect, cfg);
    c_detect->add_option("--n-max", detect_nmax,
                         "window length (default: swept optimum, else 8)");

    auto* c_eval = app.add_subcommand("evaluate", "score detections and write the report");
    add_common_options(c_eval, cfg);
    add_detect_options(c_eval, cfg);

    auto* c_run = app.add_subcommand("run", "full pipeline: all stages per channel");
    add_common_options(c_run, cfg);
    add_smooth_options(c_run, cfg);
    add_model_options(c_run, cfg);
    add_infer_options(c_run, cfg);
    add_detect_options(c_run, cfg);

    auto* c_plot = app.add_subcommand("plotdata", "export plot-ready tables from a run dir");
    c_plot->add_option("run_dir", plot_run_dir, "output directory of a previous run")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (c_pre->parsed())
            return run_stage(cfg, "preprocess",
                             [&](const std::string& id) { mcdrop::preprocess_channel(cfg, id); });
        if (c_train->parsed())
            return run_stage(cfg, "train",
                             [&](const std::string& id) { mcdrop::train_channel(cfg, id); });
        if (c_infer->parsed())
            return run_stage(cfg, "infer",
                             [&](const std::string& id) { mcdrop::infer_channel(cfg, id); });
        if (c_sweep->parsed()) {
            const auto labels = mcdrop::resolve_labels(cfg);
            return run_stage(cfg, "sweep", [&](const std::string& id) {
                std::vector<mcdrop::AnomalyInterval> chan_labels;
                if (auto it = labels.find(id); it != labels.end()) chan_labels = it->second;
                mcdrop::sweep_channel(cfg, id, chan_labels);
            });
        }
        if (c_detect->parsed())
            return run_stage(cfg, "detect", [&](const std::string& id) {
                std::size_t n = detect_nmax;
                if (n == 0) {
                    try {
                        n = mcdrop::read_swept_nopt(cfg, id);
                    } catch (const std::exception&) {
                        n = cfg.n_max;
                    }
                }
                mcdrop::detect_channel(cfg, id, n);
            });
        if (c_eval->parsed()) return cmd_evaluate(cfg);
        if (c_run->parsed()) {
            const mcdrop::RunOutcome outcome = mcdrop::run_pipeline(cfg);
            for (const auto& e : outcome.errors)
                std::cerr << e.channel << " [" << e.stage << "] " << e.message << "\n";
            return outcome.exit_code();
        }
        if (c_plot->parsed()) return cmd_plotdata(plot_run_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
