#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qforecast/eval.hpp"

namespace qforecast::cli {

// sysexits-style mapping, one code per error class.
enum ExitCode : int {
    kOk = 0,
    kUsage = 64,
    kIngest = 65,
    kInternal = 70,
    kConfig = 78,
};

// Everything a run depends on; echoed verbatim into every report so a
// report can be re-executed to identical results.
struct ExperimentConfig {
    // data source: a CSV path, or the synthetic generator when empty
    std::string csv_path;
    bool csv_sort = false;
    bool csv_fill_gaps = false;
    int synth_days = 10;
    double synth_base_flow = 250.0;
    double synth_peak_flow = 2000.0;
    double synth_noise_std = 60.0;
    double synth_weekend_factor = 0.7;
    std::uint64_t synth_seed = 0; // 0: derive from `seed`

    std::string scenario = "A";
    std::vector<std::string> variants = {"classic", "hybrid"};
    int n_q = 4;
    std::vector<int> grid = {2, 4, 6, 8, 10, 12, 14};

    int window = 20;
    int epochs = 20;
    int ae_epochs = 0; // 0: same as epochs
    int batch = 32;
    double learning_rate = 0.0005;
    double ae_learning_rate = 0.0005;
    int folds = 5;
    std::int64_t gap_size = 960; // one day of samples
    double val_fraction = 0.1;
    double angle_scale = 3.14159265358979323846;
    double clip_norm = 5.0;
    std::uint64_t seed = 1;

    std::string out_dir; // empty: $QFORECAST_OUT or ./qforecast-out
    int workers = 1;
    bool fixed_timestamp = false; // pins report timestamps and runtimes for byte-reproducibility

    std::filesystem::path resolved_out_dir() const;
    eval::RunConfig run_config() const;
    std::uint64_t effective_synth_seed() const { return synth_seed != 0 ? synth_seed : seed; }

    void validate() const;
};

nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

data::TimeSeries load_series(const ExperimentConfig& config);

// Commands; each throws on failure and is mapped to an exit code by run_cli.
std::filesystem::path cmd_synth(const ExperimentConfig& config, const std::string& out_file);
void cmd_train_ae(const ExperimentConfig& config, std::ostream& out);
std::filesystem::path cmd_run(const ExperimentConfig& config, std::ostream& out);
std::filesystem::path cmd_grid(const ExperimentConfig& config, std::ostream& out);
void cmd_report(const std::filesystem::path& report_file, std::ostream& out);

// Full argv dispatch including error-to-exit-code mapping.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string checksum_file(const std::filesystem::path& path); // "fnv1a64:<hex>"

} // namespace qforecast::cli
