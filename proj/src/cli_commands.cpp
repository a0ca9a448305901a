#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qforecast/checkpoint.hpp"
#include "qforecast/cli.hpp"
#include "qforecast/plot.hpp"

namespace qforecast::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kReportSchema = "qforecast-report/1";
constexpr const char* kFixedTimestamp = "1970-01-01T00:00:00Z";
constexpr const char* kClassicColor = "#1f77b4";
constexpr const char* kHybridColor = "#ff7f0e";

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string now_or_fixed(const ExperimentConfig& config) {
    if (config.fixed_timestamp) {
        return kFixedTimestamp;
    }
    const auto now = std::chrono::system_clock::now();
    return data::format_iso8601(std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
}

double elapsed_or_zero(const ExperimentConfig& config,
                       std::chrono::steady_clock::time_point start) {
    if (config.fixed_timestamp) {
        return 0.0;
    }
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string series_checksum(const data::TimeSeries& series) {
    const std::string_view bytes(reinterpret_cast<const char*>(series.values.data()),
                                 series.values.size() * sizeof(double));
    char hex[20];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return std::string("fnv1a64:") + hex;
}

json metrics_to_json(const eval::Metrics& m) {
    json j = json::object();
    j["mse"] = m.mse;
    j["mae"] = m.mae;
    if (m.r2.has_value()) {
        j["r2"] = *m.r2;
    } else {
        j["r2"] = nullptr;
    }
    return j;
}

json box_to_json(const eval::BoxStats& b) {
    json j = json::object();
    j["q1"] = b.q1;
    j["median"] = b.median;
    j["q3"] = b.q3;
    j["whisker_lo"] = b.whisker_lo;
    j["whisker_hi"] = b.whisker_hi;
    j["outliers"] = b.outliers;
    return j;
}

json summarize_metric(const std::vector<double>& values) {
    json j = json::object();
    j["mean"] = eval::mean_of(values);
    j["std"] = eval::stddev_of(values);
    j["box"] = box_to_json(eval::box_stats(values));
    return j;
}

json aggregate_to_json(const eval::CrossValResult& result) {
    std::vector<double> raw_mse, raw_mae, raw_r2;
    for (const eval::FoldScore& f : result.folds) {
        raw_mse.push_back(f.denormalized.mse);
        raw_mae.push_back(f.denormalized.mae);
        raw_r2.push_back(f.denormalized.r2.value_or(std::numeric_limits<double>::quiet_NaN()));
    }
    json j = json::object();
    j["normalized"] = json::object();
    j["normalized"]["mse"] = summarize_metric(result.fold_mse());
    j["normalized"]["mae"] = summarize_metric(result.fold_mae());
    j["normalized"]["r2"] = summarize_metric(result.fold_r2());
    j["raw"] = json::object();
    j["raw"]["mse"] = summarize_metric(raw_mse);
    j["raw"]["mae"] = summarize_metric(raw_mae);
    j["raw"]["r2"] = summarize_metric(raw_r2);
    return j;
}

json consistency_to_json(const eval::CrossValResult& result) {
    json rows = json::array();
    for (const eval::ConsistencyRow& row : eval::consistency_check(result)) {
        json r = json::object();
        r["metric"] = row.metric;
        if (row.skipped) {
            r["skipped"] = true;
        } else {
            r["normalized"] = row.normalized;
            r["stddev"] = row.stddev;
            r["spearman_vs_fold"] = row.spearman_vs_fold;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

json model_to_json(const models::ModelLabel& label, const models::ModelInfo& info) {
    json j = json::object();
    j["scenario"] = models::to_string(label.scenario);
    j["variant"] = models::to_string(label.variant);
    j["n_q"] = label.n_q;
    j["display"] = label.display();
    j["id"] = label.id();
    json i = json::object();
    i["latent_dim"] = info.latent_dim;
    i["hidden_width"] = info.hidden_width;
    i["recursion_count"] = info.recursion_count;
    i["reupload_blocks"] = info.reupload_blocks;
    i["n_qubits"] = info.n_qubits;
    i["parameter_count"] = info.parameter_count;
    j["info"] = i;
    return j;
}

json fold_plan_to_json(const eval::FoldPlan& plan) {
    json j = json::object();
    j["n"] = plan.n;
    j["k"] = plan.k;
    j["gap_size"] = plan.gap_size;
    j["val_fraction"] = plan.val_fraction;
    json folds = json::array();
    for (const eval::Fold& fold : plan.folds) {
        json f = json::object();
        f["test"] = {fold.test.begin, fold.test.end};
        json vals = json::array();
        for (const eval::IndexRange& r : fold.validation) {
            vals.push_back({r.begin, r.end});
        }
        f["validation"] = vals;
        json trains = json::array();
        for (const eval::IndexRange& r : fold.train) {
            trains.push_back({r.begin, r.end});
        }
        f["train"] = trains;
        folds.push_back(std::move(f));
    }
    j["folds"] = folds;
    return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IngestError("cannot open file for writing: " + path.string());
    }
    out << text;
    if (!out) {
        throw IngestError("failed writing file: " + path.string());
    }
}

// Trains encoders once per (n_q, fold) and shares them across the
// classic/hybrid pair, backed by checkpoints on disk keyed by
// (n_q, seed, data hash).
class EncoderCache {
public:
    EncoderCache(const ExperimentConfig& config, std::filesystem::path dir)
        : config_(config), dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    ae::AutoencoderWeights get(int n_q, int fold, const data::WindowSet& train_windows) {
        const std::string key = cache_key(n_q, fold, train_windows);
        {
            const std::lock_guard<std::mutex> lock(mutex_);
            if (const auto it = memory_.find(key); it != memory_.end()) {
                return it->second;
            }
        }

        const eval::RunConfig rc = config_.run_config();
        ae::AutoencoderWeights weights = ae::make_autoencoder(
            n_q, config_.window,
            seed_mix(config_.seed, 0xae, static_cast<std::uint64_t>(n_q), static_cast<std::uint64_t>(fold)));

        const std::filesystem::path ckpt = dir_ / (key + ".ckpt");
        const std::filesystem::path meta = dir_ / (key + ".json");
        if (std::filesystem::exists(ckpt) && std::filesystem::exists(meta)) {
            nn::ParameterBundle bundle = ae::parameter_bundle(weights);
            checkpoint::load(bundle, ckpt);
            std::ifstream meta_in(meta);
            const json m = json::parse(meta_in);
            weights.training.epochs_run = m.value("epochs_run", 0);
            weights.training.final_loss = m.value("final_loss", 0.0);
        } else {
            ae::AeTrainConfig ae_config;
            ae_config.epochs = rc.effective_ae_epochs();
            ae_config.batch_size = rc.batch_size;
            ae_config.learning_rate = rc.ae_learning_rate;
            ae_config.clip_norm = rc.clip_norm;
            ae_config.seed = seed_mix(config_.seed, 0xae5d, static_cast<std::uint64_t>(n_q),
                                      static_cast<std::uint64_t>(fold));
            ae::train_autoencoder(weights, train_windows, ae_config);
            nn::ParameterBundle bundle = ae::parameter_bundle(weights);
            checkpoint::save(bundle, ckpt);
            json m = json::object();
            m["epochs_run"] = weights.training.epochs_run;
            m["final_loss"] = weights.training.final_loss;
            write_text_file(meta, m.dump(2) + "\n");
        }

        const std::lock_guard<std::mutex> lock(mutex_);
        memory_.emplace(key, weights);
        return weights;
    }

private:
    std::string cache_key(int n_q, int fold, const data::WindowSet& windows) const {
        std::uint64_t h = fnv1a64(std::string_view(
            reinterpret_cast<const char*>(windows.inputs.data()),
            static_cast<std::size_t>(windows.inputs.size()) * sizeof(double)));
        h = fnv1a64(std::string_view(reinterpret_cast<const char*>(windows.targets.data()),
                                     static_cast<std::size_t>(windows.targets.size()) * sizeof(double)),
                    h);
        const std::string params = std::to_string(config_.window) + ":" +
                                   std::to_string(config_.run_config().effective_ae_epochs()) + ":" +
                                   fmt_num(config_.ae_learning_rate) + ":" +
                                   std::to_string(config_.batch);
        h = fnv1a64(params, h);
        char hex[20];
        std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
        return "ae_q" + std::to_string(n_q) + "_s" + std::to_string(config_.seed) + "_f" +
               std::to_string(fold) + "_" + hex;
    }

    ExperimentConfig config_;
    std::filesystem::path dir_;
    std::mutex mutex_;
    std::map<std::string, ae::AutoencoderWeights> memory_;
};

struct CellArtifacts {
    eval::CrossValResult result;
    double runtime_seconds = 0.0;
    std::map<std::string, std::string> files; // name -> checksum
    std::filesystem::path report_path;
};

std::string loss_history_csv(const eval::CrossValResult& result) {
    std::ostringstream out;
    out << "fold,epoch,train_loss,val_loss\n";
    for (const eval::FoldScore& fold : result.folds) {
        for (std::size_t e = 0; e < fold.train_loss.size(); ++e) {
            out << fold.fold << ',' << (e + 1) << ',' << fmt_num(fold.train_loss[e]) << ',';
            if (e < fold.val_loss.size()) {
                out << fmt_num(fold.val_loss[e]);
            }
            out << '\n';
        }
    }
    return out.str();
}

std::string predictions_csv(const eval::CrossValResult& result) {
    std::ostringstream out;
    out << "fold,window_start,target_norm,prediction_norm,target_raw,prediction_raw\n";
    for (const eval::FoldScore& fold : result.folds) {
        for (Eigen::Index i = 0; i < fold.test_predictions.size(); ++i) {
            const double t = fold.test_targets(i);
            const double p = fold.test_predictions(i);
            out << fold.fold << ',' << fold.test_window_start[static_cast<std::size_t>(i)] << ','
                << fmt_num(t) << ',' << fmt_num(p) << ',' << fmt_num(fold.normalizer.invert(t)) << ','
                << fmt_num(fold.normalizer.invert(p)) << '\n';
        }
    }
    return out.str();
}

std::vector<double> val_loss_mean(const eval::CrossValResult& result) {
    std::vector<double> out;
    if (result.folds.empty() || result.folds.front().val_loss.empty()) {
        return out;
    }
    const std::size_t epochs = result.folds.front().val_loss.size();
    for (std::size_t e = 0; e < epochs; ++e) {
        double acc = 0.0;
        for (const eval::FoldScore& f : result.folds) {
            acc += f.val_loss[e];
        }
        out.push_back(acc / static_cast<double>(result.folds.size()));
    }
    return out;
}

json cell_report_json(const ExperimentConfig& config, const data::TimeSeries& series,
                      const eval::FoldPlan& plan, const models::ModelLabel& label,
                      const CellArtifacts& cell) {
    const auto model = models::build_model(label, 0, config.angle_scale);
    json j = json::object();
    j["schema"] = kReportSchema;
    j["kind"] = "run";
    j["created"] = now_or_fixed(config);
    j["config"] = config_to_json(config);
    j["model"] = model_to_json(label, model->info());
    j["series"] = json::object();
    j["series"]["length"] = series.size();
    j["series"]["source"] = config.csv_path.empty() ? std::string("synthetic") : config.csv_path;
    j["series"]["checksum"] = series_checksum(series);
    j["fold_plan"] = fold_plan_to_json(plan);

    json folds = json::array();
    for (const eval::FoldScore& fold : cell.result.folds) {
        json f = json::object();
        f["fold"] = fold.fold;
        f["n_train_windows"] = fold.n_train_windows;
        f["n_val_windows"] = fold.n_val_windows;
        f["n_test_windows"] = fold.n_test_windows;
        f["ae_final_loss"] = fold.ae_final_loss;
        f["normalized"] = metrics_to_json(fold.normalized);
        f["raw"] = metrics_to_json(fold.denormalized);
        f["train_loss"] = fold.train_loss;
        f["val_loss"] = fold.val_loss;
        folds.push_back(std::move(f));
    }
    j["folds"] = folds;
    j["aggregate"] = aggregate_to_json(cell.result);
    json convergence = json::object();
    convergence["epoch_loss_mean"] = cell.result.epoch_loss_mean();
    convergence["epoch_loss_std"] = cell.result.epoch_loss_std();
    convergence["val_loss_mean"] = val_loss_mean(cell.result);
    j["convergence"] = convergence;
    j["consistency"] = consistency_to_json(cell.result);
    j["runtime_seconds"] = cell.runtime_seconds;
    json artifacts = json::object();
    for (const auto& [name, checksum] : cell.files) {
        artifacts[name] = checksum;
    }
    j["artifacts"] = artifacts;
    return j;
}

CellArtifacts run_cell(const ExperimentConfig& config, const data::TimeSeries& series,
                       const eval::FoldPlan& plan, const models::ModelLabel& label,
                       EncoderCache& encoders, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    const eval::RunConfig rc = config.run_config();
    const eval::EncoderProvider provider = [&](int fold, const data::WindowSet& train_windows) {
        return encoders.get(label.n_q, fold, train_windows);
    };

    CellArtifacts cell;
    cell.result = eval::run_cross_validation(label, series, plan, rc, provider);
    cell.runtime_seconds = elapsed_or_zero(config, start);

    const std::filesystem::path dir = config.resolved_out_dir();
    std::filesystem::create_directories(dir);
    const std::string id = label.id();

    const std::filesystem::path loss_path = dir / ("loss_history_" + id + ".csv");
    write_text_file(loss_path, loss_history_csv(cell.result));
    const std::filesystem::path pred_path = dir / ("predictions_" + id + ".csv");
    write_text_file(pred_path, predictions_csv(cell.result));

    const std::filesystem::path curve_path = dir / ("loss_curve_" + id + ".svg");
    std::vector<plot::CurveSeries> curves;
    curves.push_back({"train (5-fold mean, 1-sigma)",
                      label.variant == models::Variant::Classic ? kClassicColor : kHybridColor,
                      cell.result.epoch_loss_mean(), cell.result.epoch_loss_std()});
    const std::vector<double> val_mean = val_loss_mean(cell.result);
    if (!val_mean.empty()) {
        curves.push_back({"validation (mean)", "#2ca02c", val_mean, {}});
    }
    plot::write_loss_curve_svg(curve_path, "training loss, " + id, curves);

    cell.files[loss_path.filename().string()] = checksum_file(loss_path);
    cell.files[pred_path.filename().string()] = checksum_file(pred_path);
    cell.files[curve_path.filename().string()] = checksum_file(curve_path);

    const json report = cell_report_json(config, series, plan, label, cell);
    cell.report_path = dir / ("report_" + id + ".json");
    write_text_file(cell.report_path, report.dump(2) + "\n");

    out << "[" << id << "] folds=" << cell.result.folds.size()
        << " mse=" << fmt_num(eval::mean_of(cell.result.fold_mse()))
        << " r2=" << fmt_num(eval::mean_of(cell.result.fold_r2()))
        << " runtime=" << fmt_num(cell.runtime_seconds) << "s\n";
    return cell;
}

models::ModelLabel label_for(const ExperimentConfig& config, const std::string& variant, int n_q) {
    models::ModelLabel label;
    label.scenario = models::scenario_from_string(config.scenario);
    label.variant = models::variant_from_string(variant);
    label.n_q = n_q;
    return label;
}

void print_metric_table(std::ostream& out, const json& aggregate, const std::string& space) {
    out << "  " << space << " scores (mean +/- std over folds):\n";
    for (const char* metric : {"mse", "mae", "r2"}) {
        const json& m = aggregate[space][metric];
        out << "    " << std::left << std::setw(4) << metric << " "
            << fmt_num(m["mean"].get<double>()) << " +/- " << fmt_num(m["std"].get<double>()) << "\n";
    }
}

} // namespace

std::filesystem::path cmd_synth(const ExperimentConfig& config, const std::string& out_file) {
    data::SyntheticConfig synth;
    synth.n_days = config.synth_days;
    synth.base_flow = config.synth_base_flow;
    synth.peak_flow = config.synth_peak_flow;
    synth.noise_std = config.synth_noise_std;
    synth.weekend_factor = config.synth_weekend_factor;
    synth.seed = config.effective_synth_seed();
    const data::TimeSeries series = data::generate_synthetic(synth);

    std::filesystem::path path = out_file;
    if (path.empty()) {
        path = config.resolved_out_dir() / "synthetic.csv";
    }
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    data::save_csv(series, path);
    return path;
}

void cmd_train_ae(const ExperimentConfig& config, std::ostream& out) {
    config.validate();
    const data::TimeSeries series = load_series(config);
    const eval::FoldPlan plan =
        eval::gap_kfold_split(static_cast<std::int64_t>(series.size()), config.folds, config.gap_size,
                              config.val_fraction);
    EncoderCache cache(config, config.resolved_out_dir() / "ae-cache");
    for (int f = 0; f < plan.k; ++f) {
        const eval::Fold& fold = plan.folds[static_cast<std::size_t>(f)];
        std::vector<double> train_values;
        for (const eval::IndexRange& r : fold.train) {
            train_values.insert(train_values.end(), series.values.begin() + r.begin,
                                series.values.begin() + r.end);
        }
        const data::NormalizationParams norm = data::fit_normalizer(train_values);
        const std::vector<double> normalized = data::apply_normalizer(norm, series.values);
        const data::WindowSet windows = eval::windows_for_ranges(normalized, fold.train, config.window);
        const ae::AutoencoderWeights weights = cache.get(config.n_q, f, windows);
        out << "fold " << f << ": windows=" << windows.count()
            << " reconstruction_mse=" << fmt_num(weights.training.final_loss) << "\n";
    }
    out << "encoder checkpoints cached under "
        << (config.resolved_out_dir() / "ae-cache").string() << "\n";
}

std::filesystem::path cmd_run(const ExperimentConfig& config, std::ostream& out) {
    config.validate();
    if (config.variants.size() != 1) {
        throw UsageError("run expects exactly one --variant (classic or hybrid)");
    }
    const data::TimeSeries series = load_series(config);
    const eval::FoldPlan plan =
        eval::gap_kfold_split(static_cast<std::int64_t>(series.size()), config.folds, config.gap_size,
                              config.val_fraction);
    EncoderCache encoders(config, config.resolved_out_dir() / "ae-cache");
    const models::ModelLabel label = label_for(config, config.variants.front(), config.n_q);
    const CellArtifacts cell = run_cell(config, series, plan, label, encoders, out);
    out << "report written to " << cell.report_path.string() << "\n";
    return cell.report_path;
}

std::filesystem::path cmd_grid(const ExperimentConfig& config, std::ostream& out) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const data::TimeSeries series = load_series(config);
    const eval::FoldPlan plan =
        eval::gap_kfold_split(static_cast<std::int64_t>(series.size()), config.folds, config.gap_size,
                              config.val_fraction);
    EncoderCache encoders(config, config.resolved_out_dir() / "ae-cache");

    // Encoders are shared within each (n_q, fold), so train them before the
    // cells fan out to worker threads.
    for (int n_q : config.grid) {
        for (int f = 0; f < plan.k; ++f) {
            const eval::Fold& fold = plan.folds[static_cast<std::size_t>(f)];
            std::vector<double> train_values;
            for (const eval::IndexRange& r : fold.train) {
                train_values.insert(train_values.end(), series.values.begin() + r.begin,
                                    series.values.begin() + r.end);
            }
            const data::NormalizationParams norm = data::fit_normalizer(train_values);
            const std::vector<double> normalized = data::apply_normalizer(norm, series.values);
            encoders.get(n_q, f, eval::windows_for_ranges(normalized, fold.train, config.window));
        }
    }

    struct Cell {
        models::ModelLabel label;
        CellArtifacts artifacts;
    };
    std::vector<models::ModelLabel> labels;
    for (int n_q : config.grid) {
        for (const std::string& variant : config.variants) {
            labels.push_back(label_for(config, variant, n_q));
        }
    }

    std::vector<Cell> cells(labels.size());
    if (config.workers <= 1) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            cells[i] = {labels[i], run_cell(config, series, plan, labels[i], encoders, out)};
        }
    } else {
        std::vector<std::future<CellArtifacts>> futures(labels.size());
        std::size_t next = 0;
        std::mutex out_mutex;
        while (next < labels.size()) {
            const std::size_t batch_end =
                std::min(labels.size(), next + static_cast<std::size_t>(config.workers));
            for (std::size_t i = next; i < batch_end; ++i) {
                futures[i] = std::async(std::launch::async, [&, i] {
                    std::ostringstream local;
                    CellArtifacts cell = run_cell(config, series, plan, labels[i], encoders, local);
                    const std::lock_guard<std::mutex> lock(out_mutex);
                    out << local.str();
                    return cell;
                });
            }
            for (std::size_t i = next; i < batch_end; ++i) {
                cells[i] = {labels[i], futures[i].get()};
            }
            next = batch_end;
        }
    }

    json report = json::object();
    report["schema"] = kReportSchema;
    report["kind"] = "grid";
    report["created"] = now_or_fixed(config);
    report["config"] = config_to_json(config);
    report["series"] = json::object();
    report["series"]["length"] = series.size();
    report["series"]["source"] = config.csv_path.empty() ? std::string("synthetic") : config.csv_path;
    report["series"]["checksum"] = series_checksum(series);
    report["fold_plan"] = fold_plan_to_json(plan);

    json cell_array = json::array();
    for (const Cell& cell : cells) {
        const auto model = models::build_model(cell.label, 0, config.angle_scale);
        json c = json::object();
        c["model"] = model_to_json(cell.label, model->info());
        c["aggregate"] = aggregate_to_json(cell.artifacts.result);
        c["consistency"] = consistency_to_json(cell.artifacts.result);
        json convergence = json::object();
        convergence["epoch_loss_mean"] = cell.artifacts.result.epoch_loss_mean();
        convergence["epoch_loss_std"] = cell.artifacts.result.epoch_loss_std();
        c["convergence"] = convergence;
        c["runtime_seconds"] = cell.artifacts.runtime_seconds;
        c["report_file"] = cell.artifacts.report_path.filename().string();
        cell_array.push_back(std::move(c));
    }
    report["cells"] = cell_array;

    const std::filesystem::path dir = config.resolved_out_dir();
    std::filesystem::create_directories(dir);

    // Box-plot statistics per metric, classic and hybrid side by side.
    std::ostringstream box_csv;
    box_csv << "model,space,metric,q1,median,q3,whisker_lo,whisker_hi,outliers\n";
    for (const char* metric : {"mse", "mae", "r2"}) {
        std::vector<plot::BoxGroup> groups;
        for (const Cell& cell : cells) {
            std::vector<double> values;
            if (std::string(metric) == "mse") {
                values = cell.artifacts.result.fold_mse();
            } else if (std::string(metric) == "mae") {
                values = cell.artifacts.result.fold_mae();
            } else {
                values = cell.artifacts.result.fold_r2();
            }
            const eval::BoxStats stats = eval::box_stats(values);
            groups.push_back({cell.label.display() + " " + models::to_string(cell.label.variant),
                              cell.label.variant == models::Variant::Classic ? kClassicColor
                                                                             : kHybridColor,
                              stats});
            box_csv << cell.label.id() << ",normalized," << metric << ',' << fmt_num(stats.q1) << ','
                    << fmt_num(stats.median) << ',' << fmt_num(stats.q3) << ','
                    << fmt_num(stats.whisker_lo) << ',' << fmt_num(stats.whisker_hi) << ',';
            for (std::size_t i = 0; i < stats.outliers.size(); ++i) {
                box_csv << (i > 0 ? ";" : "") << fmt_num(stats.outliers[i]);
            }
            box_csv << '\n';
        }
        plot::write_box_plot_svg(dir / ("box_" + config.scenario + "_" + metric + ".svg"),
                                 std::string("test-fold ") + metric + ", scenario " + config.scenario,
                                 metric, groups);
    }
    write_text_file(dir / "box_stats.csv", box_csv.str());

    // The fold-position consistency table.
    std::ostringstream consistency_csv;
    consistency_csv << "model,metric";
    for (int f = 0; f < plan.k; ++f) {
        consistency_csv << ",fold_" << f;
    }
    consistency_csv << ",stddev,spearman_vs_fold\n";
    for (const Cell& cell : cells) {
        for (const eval::ConsistencyRow& row : eval::consistency_check(cell.artifacts.result)) {
            if (row.skipped) {
                continue;
            }
            consistency_csv << cell.label.id() << ',' << row.metric;
            for (double v : row.normalized) {
                consistency_csv << ',' << fmt_num(v);
            }
            consistency_csv << ',' << fmt_num(row.stddev) << ',' << fmt_num(row.spearman_vs_fold)
                            << '\n';
        }
    }
    write_text_file(dir / "consistency.csv", consistency_csv.str());

    // Paired classic/hybrid loss curves per qubit count.
    for (int n_q : config.grid) {
        std::vector<plot::CurveSeries> curves;
        for (const Cell& cell : cells) {
            if (cell.label.n_q != n_q) {
                continue;
            }
            curves.push_back({models::to_string(cell.label.variant),
                              cell.label.variant == models::Variant::Classic ? kClassicColor
                                                                             : kHybridColor,
                              cell.artifacts.result.epoch_loss_mean(),
                              cell.artifacts.result.epoch_loss_std()});
        }
        if (!curves.empty()) {
            plot::write_loss_curve_svg(
                dir / ("loss_curves_" + config.scenario + "_Q" + std::to_string(n_q) + ".svg"),
                "training loss, scenario " + config.scenario + ", Q" + std::to_string(n_q), curves);
        }
    }

    report["runtime_seconds"] = elapsed_or_zero(config, start);
    json artifacts = json::object();
    for (const char* name : {"box_stats.csv", "consistency.csv"}) {
        artifacts[name] = checksum_file(dir / name);
    }
    report["artifacts"] = artifacts;

    const std::filesystem::path report_path = dir / ("grid_report_" + config.scenario + ".json");
    write_text_file(report_path, report.dump(2) + "\n");
    out << "grid report written to " << report_path.string() << "\n";
    return report_path;
}

void cmd_report(const std::filesystem::path& report_file, std::ostream& out) {
    std::ifstream in(report_file);
    if (!in) {
        throw IngestError("cannot open report: " + report_file.string());
    }
    json report;
    try {
        report = json::parse(in);
    } catch (const json::exception& e) {
        throw IngestError("invalid report file " + report_file.string() + ": " + e.what());
    }
    if (!report.is_object() || report.value("schema", "") != kReportSchema) {
        throw IngestError("not a qforecast report: " + report_file.string());
    }

    const std::filesystem::path dir =
        report_file.has_parent_path() ? report_file.parent_path() : std::filesystem::path(".");
    const std::string kind = report.value("kind", "run");
    out << "qforecast report (" << kind << "), created " << report.value("created", "?") << "\n";

    if (kind == "run") {
        const json& model = report["model"];
        out << "model " << model["id"].get<std::string>() << " (" << model["display"].get<std::string>()
            << ", " << model["info"]["parameter_count"].get<std::size_t>() << " parameters)\n";
        print_metric_table(out, report["aggregate"], "normalized");
        print_metric_table(out, report["aggregate"], "raw");
        out << "  runtime: " << fmt_num(report["runtime_seconds"].get<double>()) << "s\n";

        const std::vector<double> mean = report["convergence"]["epoch_loss_mean"].get<std::vector<double>>();
        const std::vector<double> stddev = report["convergence"]["epoch_loss_std"].get<std::vector<double>>();
        const std::string id = model["id"].get<std::string>();
        const std::filesystem::path curve = dir / ("loss_curve_" + id + "_rendered.svg");
        plot::write_loss_curve_svg(curve, "training loss, " + id,
                                   {{"train (mean, 1-sigma)", kClassicColor, mean, stddev}});
        out << "loss curve rendered to " << curve.string() << "\n";
        return;
    }

    // grid report
    out << "cells:\n";
    for (const json& cell : report["cells"]) {
        const json& model = cell["model"];
        const json& mse = cell["aggregate"]["normalized"]["mse"];
        const json& r2 = cell["aggregate"]["normalized"]["r2"];
        out << "  " << std::left << std::setw(16) << model["id"].get<std::string>()
            << " mse " << fmt_num(mse["mean"].get<double>()) << " +/- " << fmt_num(mse["std"].get<double>())
            << "   r2 " << fmt_num(r2["mean"].get<double>()) << " +/- " << fmt_num(r2["std"].get<double>())
            << "\n";
    }
    out << "consistency (spearman of normalized score vs fold index):\n";
    for (const json& cell : report["cells"]) {
        for (const json& row : cell["consistency"]) {
            if (row.contains("skipped")) {
                continue;
            }
            out << "  " << std::left << std::setw(16) << cell["model"]["id"].get<std::string>()
                << " " << std::setw(4) << row["metric"].get<std::string>() << " rho="
                << fmt_num(row["spearman_vs_fold"].get<double>()) << "\n";
        }
    }
}

} // namespace qforecast::cli
