#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qforecast/cli.hpp"

namespace qforecast::cli {

namespace {

// --config JSON is applied before flag parsing so that explicitly passed
// flags override file values.
ExperimentConfig preload_config(const std::vector<std::string>& args) {
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
        } else if (a.rfind("--config=", 0) == 0) {
            config_path = a.substr(9);
        }
    }
    if (config_path.empty()) {
        return {};
    }
    std::ifstream in(config_path);
    if (!in) {
        throw ConfigError("cannot open config file: " + config_path);
    }
    try {
        return config_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid config file " + config_path + ": " + e.what());
    }
}

void add_data_options(CLI::App* cmd, ExperimentConfig& cfg) {
    cmd->add_option("--csv", cfg.csv_path, "input CSV (timestamp,flow); synthetic data when omitted");
    cmd->add_flag("--csv-sort", cfg.csv_sort, "sort out-of-order CSV rows instead of failing");
    cmd->add_flag("--csv-fill-gaps", cfg.csv_fill_gaps, "linearly interpolate CSV gaps");
    cmd->add_option("--days", cfg.synth_days, "synthetic series length in days");
    cmd->add_option("--base-flow", cfg.synth_base_flow, "synthetic overnight flow, veh/h");
    cmd->add_option("--peak-flow", cfg.synth_peak_flow, "synthetic rush-hour peak, veh/h");
    cmd->add_option("--noise-std", cfg.synth_noise_std, "synthetic noise stddev, veh/h");
    cmd->add_option("--weekend-factor", cfg.synth_weekend_factor, "weekend scaling factor");
    cmd->add_option("--synth-seed", cfg.synth_seed, "generator seed (0: derive from --seed)");
    cmd->add_option("--seed", cfg.seed, "experiment seed");
    cmd->add_option("--out-dir", cfg.out_dir, "output directory (default: $QFORECAST_OUT or ./qforecast-out)");
    cmd->add_flag("--fixed-timestamp", cfg.fixed_timestamp,
                  "pin report timestamps/runtimes for byte-reproducible output");
}

void add_train_options(CLI::App* cmd, ExperimentConfig& cfg) {
    cmd->add_option("--config", "JSON config file; flags override its values")
        ->check(CLI::ExistingFile);
    cmd->add_option("--window", cfg.window, "window size w");
    cmd->add_option("--epochs", cfg.epochs, "training epochs");
    cmd->add_option("--ae-epochs", cfg.ae_epochs, "autoencoder epochs (0: same as --epochs)");
    cmd->add_option("--batch", cfg.batch, "mini-batch size");
    cmd->add_option("--learning-rate", cfg.learning_rate, "Adam learning rate");
    cmd->add_option("--ae-learning-rate", cfg.ae_learning_rate, "autoencoder Adam learning rate");
    cmd->add_option("--folds", cfg.folds, "cross-validation folds");
    cmd->add_option("--gap-size", cfg.gap_size, "discarded samples on each interior side of the test fold");
    cmd->add_option("--val-fraction", cfg.val_fraction, "validation fraction of the series");
    cmd->add_option("--angle-scale", cfg.angle_scale, "multiplier on features before angle embedding");
    cmd->add_option("--clip-norm", cfg.clip_norm, "global gradient-norm clip");
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        ExperimentConfig cfg = preload_config(args);

        CLI::App app{"hybrid quantum-classical traffic flow forecasting"};
        app.require_subcommand(1);

        std::string synth_out;
        CLI::App* synth = app.add_subcommand("synth", "generate a synthetic series as CSV");
        add_data_options(synth, cfg);
        synth->add_option("--out", synth_out, "output CSV path (default: <out-dir>/synthetic.csv)");

        CLI::App* train_ae = app.add_subcommand("train-ae", "pre-train and cache the window autoencoder");
        add_data_options(train_ae, cfg);
        add_train_options(train_ae, cfg);
        train_ae->add_option("--n-q", cfg.n_q, "latent feature count N_q");

        std::string run_variant;
        CLI::App* run = app.add_subcommand("run", "gap-CV experiment for one (scenario, variant, N_q)");
        add_data_options(run, cfg);
        add_train_options(run, cfg);
        run->add_option("--scenario", cfg.scenario, "A (fully connected) or B (recursive)");
        run->add_option("--variant", run_variant, "classic or hybrid")->required();
        run->add_option("--n-q", cfg.n_q, "qubit count N_q");

        CLI::App* grid = app.add_subcommand("grid", "classic-vs-hybrid comparison over the N_q grid");
        add_data_options(grid, cfg);
        add_train_options(grid, cfg);
        grid->add_option("--scenario", cfg.scenario, "A (fully connected) or B (recursive)");
        grid->add_option("--variants", cfg.variants, "variants to compare")->delimiter(',');
        grid->add_option("--grid", cfg.grid, "qubit counts")->delimiter(',');
        grid->add_option("--workers", cfg.workers, "concurrent grid cells");

        std::string report_file;
        CLI::App* report = app.add_subcommand("report", "render a report file as text and plots");
        report->add_option("file", report_file, "report JSON produced by run or grid")->required();

        std::vector<const char*> argv;
        argv.push_back("qforecast");
        for (const std::string& a : args) {
            argv.push_back(a.c_str());
        }
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::CallForHelp& e) {
            out << app.help();
            return kOk;
        } catch (const CLI::ParseError& e) {
            err << "error: " << e.what() << "\n";
            return kUsage;
        }

        if (synth->parsed()) {
            const auto path = cmd_synth(cfg, synth_out);
            out << "wrote " << path.string() << "\n";
            return kOk;
        }
        if (train_ae->parsed()) {
            cmd_train_ae(cfg, out);
            return kOk;
        }
        if (run->parsed()) {
            cfg.variants = {run_variant};
            cmd_run(cfg, out);
            return kOk;
        }
        if (grid->parsed()) {
            cmd_grid(cfg, out);
            return kOk;
        }
        if (report->parsed()) {
            cmd_report(report_file, out);
            return kOk;
        }
        err << "error: no subcommand\n";
        return kUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const IngestError& e) {
        err << "ingestion error: " << e.what() << "\n";
        return kIngest;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kConfig;
    } catch (const InternalError& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternal;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternal;
    }
}

} // namespace qforecast::cli
