#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qforecast/cli.hpp"
#include "qforecast/rng.hpp"

namespace qforecast::cli {

using nlohmann::json;

std::filesystem::path ExperimentConfig::resolved_out_dir() const {
    if (!out_dir.empty()) {
        return out_dir;
    }
    if (const char* env = std::getenv("QFORECAST_OUT"); env != nullptr && *env != '\0') {
        return env;
    }
    return "qforecast-out";
}

eval::RunConfig ExperimentConfig::run_config() const {
    eval::RunConfig rc;
    rc.window = window;
    rc.epochs = epochs;
    rc.ae_epochs = ae_epochs;
    rc.batch_size = batch;
    rc.learning_rate = learning_rate;
    rc.ae_learning_rate = ae_learning_rate;
    rc.clip_norm = clip_norm;
    rc.angle_scale = angle_scale;
    rc.seed = seed;
    return rc;
}

void ExperimentConfig::validate() const {
    models::scenario_from_string(scenario);
    if (variants.empty()) {
        throw UsageError("at least one variant is required");
    }
    for (const std::string& v : variants) {
        models::variant_from_string(v);
    }
    if (window < 1) {
        throw ConfigError("window must be positive");
    }
    if (epochs < 1 || ae_epochs < 0 || batch < 1) {
        throw ConfigError("epochs and batch must be positive");
    }
    if (learning_rate <= 0.0 || ae_learning_rate <= 0.0) {
        throw ConfigError("learning rates must be positive");
    }
    if (folds < 2) {
        throw ConfigError("folds must be at least 2");
    }
    if (gap_size < 0) {
        throw ConfigError("gap-size must be non-negative");
    }
    if (!(val_fraction > 0.0 && val_fraction < 0.5)) {
        throw ConfigError("val-fraction must lie in (0, 0.5)");
    }
    if (workers < 1) {
        throw ConfigError("workers must be at least 1");
    }
}

json config_to_json(const ExperimentConfig& c) {
    json j = json::object();
    j["csv_path"] = c.csv_path;
    j["csv_sort"] = c.csv_sort;
    j["csv_fill_gaps"] = c.csv_fill_gaps;
    j["synth_days"] = c.synth_days;
    j["synth_base_flow"] = c.synth_base_flow;
    j["synth_peak_flow"] = c.synth_peak_flow;
    j["synth_noise_std"] = c.synth_noise_std;
    j["synth_weekend_factor"] = c.synth_weekend_factor;
    j["synth_seed"] = c.synth_seed;
    j["scenario"] = c.scenario;
    j["variants"] = c.variants;
    j["n_q"] = c.n_q;
    j["grid"] = c.grid;
    j["window"] = c.window;
    j["epochs"] = c.epochs;
    j["ae_epochs"] = c.ae_epochs;
    j["batch"] = c.batch;
    j["learning_rate"] = c.learning_rate;
    j["ae_learning_rate"] = c.ae_learning_rate;
    j["folds"] = c.folds;
    j["gap_size"] = c.gap_size;
    j["val_fraction"] = c.val_fraction;
    j["angle_scale"] = c.angle_scale;
    j["clip_norm"] = c.clip_norm;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    j["workers"] = c.workers;
    j["fixed_timestamp"] = c.fixed_timestamp;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    ExperimentConfig c;
    try {
        c.csv_path = j.value("csv_path", c.csv_path);
        c.csv_sort = j.value("csv_sort", c.csv_sort);
        c.csv_fill_gaps = j.value("csv_fill_gaps", c.csv_fill_gaps);
        c.synth_days = j.value("synth_days", c.synth_days);
        c.synth_base_flow = j.value("synth_base_flow", c.synth_base_flow);
        c.synth_peak_flow = j.value("synth_peak_flow", c.synth_peak_flow);
        c.synth_noise_std = j.value("synth_noise_std", c.synth_noise_std);
        c.synth_weekend_factor = j.value("synth_weekend_factor", c.synth_weekend_factor);
        c.synth_seed = j.value("synth_seed", c.synth_seed);
        c.scenario = j.value("scenario", c.scenario);
        c.variants = j.value("variants", c.variants);
        c.n_q = j.value("n_q", c.n_q);
        c.grid = j.value("grid", c.grid);
        c.window = j.value("window", c.window);
        c.epochs = j.value("epochs", c.epochs);
        c.ae_epochs = j.value("ae_epochs", c.ae_epochs);
        c.batch = j.value("batch", c.batch);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.ae_learning_rate = j.value("ae_learning_rate", c.ae_learning_rate);
        c.folds = j.value("folds", c.folds);
        c.gap_size = j.value("gap_size", c.gap_size);
        c.val_fraction = j.value("val_fraction", c.val_fraction);
        c.angle_scale = j.value("angle_scale", c.angle_scale);
        c.clip_norm = j.value("clip_norm", c.clip_norm);
        c.seed = j.value("seed", c.seed);
        c.out_dir = j.value("out_dir", c.out_dir);
        c.workers = j.value("workers", c.workers);
        c.fixed_timestamp = j.value("fixed_timestamp", c.fixed_timestamp);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config value: ") + e.what());
    }
    return c;
}

data::TimeSeries load_series(const ExperimentConfig& config) {
    if (!config.csv_path.empty()) {
        data::CsvOptions options;
        options.sort = config.csv_sort;
        options.fill_gaps = config.csv_fill_gaps;
        return data::load_csv(config.csv_path, options);
    }
    data::SyntheticConfig synth;
    synth.n_days = config.synth_days;
    synth.base_flow = config.synth_base_flow;
    synth.peak_flow = config.synth_peak_flow;
    synth.noise_std = config.synth_noise_std;
    synth.weekend_factor = config.synth_weekend_factor;
    synth.seed = config.effective_synth_seed();
    return data::generate_synthetic(synth);
}

std::string checksum_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestError("cannot read artifact for checksumming: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string bytes = buffer.str();
    char hex[20];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return std::string("fnv1a64:") + hex;
}

} // namespace qforecast::cli
