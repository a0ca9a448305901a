#include "qforecast/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qforecast::eval {

namespace {

// Ranges are kept sorted and disjoint; wrapped spans are stored as two
// entries. Collects the mask positions that are set.
std::vector<IndexRange> ranges_from_mask(const std::vector<bool>& mask) {
    std::vector<IndexRange> out;
    const std::int64_t n = static_cast<std::int64_t>(mask.size());
    std::int64_t i = 0;
    while (i < n) {
        if (!mask[static_cast<std::size_t>(i)]) {
            ++i;
            continue;
        }
        std::int64_t j = i;
        while (j < n && mask[static_cast<std::size_t>(j)]) {
            ++j;
        }
        out.push_back({i, j});
        i = j;
    }
    return out;
}

void mark(std::vector<bool>& mask, const IndexRange& range, const char* what) {
    for (std::int64_t i = range.begin; i < range.end; ++i) {
        if (mask[static_cast<std::size_t>(i)]) {
            throw ConfigError(std::string("fold splits collide at index ") + std::to_string(i) +
                              " while placing the " + what +
                              " set; shrink gap_size or val_fraction");
        }
        mask[static_cast<std::size_t>(i)] = true;
    }
}

// Midrank vector of v.
std::vector<double> ranks_of(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) {
            ++j;
        }
        const double midrank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = midrank;
        }
        i = j + 1;
    }
    return ranks;
}

std::vector<double> gather(const std::vector<double>& values, const std::vector<IndexRange>& ranges) {
    std::vector<double> out;
    for (const IndexRange& r : ranges) {
        for (std::int64_t i = r.begin; i < r.end; ++i) {
            out.push_back(values[static_cast<std::size_t>(i)]);
        }
    }
    return out;
}

} // namespace

FoldPlan gap_kfold_split(std::int64_t n, int k, std::int64_t gap_size, double val_fraction) {
    if (k < 2) {
        throw ConfigError("gap k-fold needs k >= 2, got " + std::to_string(k));
    }
    if (gap_size < 0) {
        throw ConfigError("gap_size must be non-negative");
    }
    if (!(val_fraction > 0.0 && val_fraction < 0.5)) {
        throw ConfigError("val_fraction must lie in (0, 0.5)");
    }
    if (n < k) {
        throw ConfigError("series of length " + std::to_string(n) + " cannot be split into " +
                          std::to_string(k) + " folds");
    }

    const std::int64_t n_val = static_cast<std::int64_t>(std::ceil(val_fraction * static_cast<double>(n)));

    FoldPlan plan;
    plan.n = n;
    plan.k = k;
    plan.gap_size = gap_size;
    plan.val_fraction = val_fraction;

    for (int f = 0; f < k; ++f) {
        Fold fold;
        fold.test = {n * f / k, n * (f + 1) / k};

        // Gaps only where the test fold has an interior neighbour; a test
        // fold at the series edge needs no buffer on that side.
        if (fold.test.begin > 0) {
            fold.gap_before = {std::max<std::int64_t>(0, fold.test.begin - gap_size), fold.test.begin};
        }
        if (fold.test.end < n) {
            fold.gap_after = {fold.test.end, std::min(n, fold.test.end + gap_size)};
        }

        std::vector<bool> taken(static_cast<std::size_t>(n), false);
        mark(taken, fold.test, "test");
        mark(taken, fold.gap_before, "gap");
        mark(taken, fold.gap_after, "gap");

        // Validation ends where the pre-test gap begins, wrapping circularly
        // past the series start when the test fold sits at (or near) it.
        const std::int64_t anchor = fold.gap_before.empty() ? fold.test.begin : fold.gap_before.begin;
        std::int64_t val_begin = anchor - n_val;
        if (val_begin >= 0) {
            fold.validation.push_back({val_begin, anchor});
        } else {
            if (anchor > 0) {
                fold.validation.push_back({0, anchor});
            }
            fold.validation.push_back({n + val_begin, n});
        }
        for (const IndexRange& r : fold.validation) {
            mark(taken, r, "validation");
        }

        std::vector<bool> train_mask(static_cast<std::size_t>(n), true);
        for (std::int64_t i = 0; i < n; ++i) {
            if (taken[static_cast<std::size_t>(i)]) {
                train_mask[static_cast<std::size_t>(i)] = false;
            }
        }
        fold.train = ranges_from_mask(train_mask);
        if (fold.train.empty()) {
            throw ConfigError("fold " + std::to_string(f) +
                              " has no training data; shrink gap_size or val_fraction");
        }
        std::sort(fold.validation.begin(), fold.validation.end(),
                  [](const IndexRange& a, const IndexRange& b) { return a.begin < b.begin; });
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

Metrics compute_metrics(const nn::VectorXd& predictions, const nn::VectorXd& targets) {
    if (predictions.size() == 0 || predictions.size() != targets.size()) {
        throw UsageError("metrics require equal, nonzero prediction/target lengths");
    }
    const double n = static_cast<double>(targets.size());
    const nn::VectorXd residual = predictions - targets;
    Metrics m;
    m.mse = residual.squaredNorm() / n;
    m.mae = residual.cwiseAbs().sum() / n;
    const double target_mean = targets.mean();
    const double ss_tot = (targets.array() - target_mean).square().sum();
    if (ss_tot > 0.0) {
        m.r2 = 1.0 - residual.squaredNorm() / ss_tot;
    }
    return m;
}

BoxStats box_stats(std::vector<double> values) {
    if (values.empty()) {
        throw UsageError("box stats require at least one value");
    }
    std::sort(values.begin(), values.end());
    // Linear interpolation between order statistics (the convention used by
    // numpy's default percentile).
    auto quantile = [&](double p) {
        const double pos = p * static_cast<double>(values.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
        const double frac = pos - std::floor(pos);
        return values[lo] + frac * (values[hi] - values[lo]);
    };
    BoxStats stats;
    stats.q1 = quantile(0.25);
    stats.median = quantile(0.5);
    stats.q3 = quantile(0.75);
    const double iqr = stats.q3 - stats.q1;
    const double lo_fence = stats.q1 - 1.5 * iqr;
    const double hi_fence = stats.q3 + 1.5 * iqr;
    stats.whisker_lo = stats.q3;
    stats.whisker_hi = stats.q1;
    for (double v : values) {
        if (v < lo_fence || v > hi_fence) {
            stats.outliers.push_back(v);
        } else {
            stats.whisker_lo = std::min(stats.whisker_lo, v);
            stats.whisker_hi = std::max(stats.whisker_hi, v);
        }
    }
    return stats;
}

double mean_of(const std::vector<double>& values) {
    if (values.empty()) {
        throw UsageError("mean of empty vector");
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double stddev_of(const std::vector<double>& values) {
    const double mu = mean_of(values);
    double acc = 0.0;
    for (double v : values) {
        acc += (v - mu) * (v - mu);
    }
    return std::sqrt(acc / static_cast<double>(values.size()));
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw UsageError("spearman requires two equal-length vectors of size >= 2");
    }
    const std::vector<double> ra = ranks_of(a);
    const std::vector<double> rb = ranks_of(b);
    const double ma = mean_of(ra);
    const double mb = mean_of(rb);
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) {
        return 0.0; // a constant sequence carries no rank trend
    }
    return cov / std::sqrt(va * vb);
}

std::vector<double> CrossValResult::fold_mse() const {
    std::vector<double> out;
    for (const FoldScore& f : folds) {
        out.push_back(f.normalized.mse);
    }
    return out;
}

std::vector<double> CrossValResult::fold_mae() const {
    std::vector<double> out;
    for (const FoldScore& f : folds) {
        out.push_back(f.normalized.mae);
    }
    return out;
}

std::vector<double> CrossValResult::fold_r2() const {
    std::vector<double> out;
    for (const FoldScore& f : folds) {
        out.push_back(f.normalized.r2.value_or(std::numeric_limits<double>::quiet_NaN()));
    }
    return out;
}

std::vector<double> CrossValResult::epoch_loss_mean() const {
    std::vector<double> out;
    if (folds.empty()) {
        return out;
    }
    const std::size_t epochs = folds.front().train_loss.size();
    for (std::size_t e = 0; e < epochs; ++e) {
        double acc = 0.0;
        for (const FoldScore& f : folds) {
            acc += f.train_loss[e];
        }
        out.push_back(acc / static_cast<double>(folds.size()));
    }
    return out;
}

std::vector<double> CrossValResult::epoch_loss_std() const {
    std::vector<double> out;
    if (folds.empty()) {
        return out;
    }
    const std::vector<double> mean = epoch_loss_mean();
    const std::size_t epochs = mean.size();
    for (std::size_t e = 0; e < epochs; ++e) {
        double acc = 0.0;
        for (const FoldScore& f : folds) {
            const double d = f.train_loss[e] - mean[e];
            acc += d * d;
        }
        out.push_back(std::sqrt(acc / static_cast<double>(folds.size())));
    }
    return out;
}

std::vector<ConsistencyRow> consistency_check(const CrossValResult& result) {
    if (result.folds.size() < 2) {
        throw UsageError("consistency check needs at least two folds");
    }
    std::vector<double> fold_index;
    for (std::size_t i = 0; i < result.folds.size(); ++i) {
        fold_index.push_back(static_cast<double>(i));
    }
    std::vector<ConsistencyRow> rows;
    auto add = [&](const std::string& name, const std::vector<double>& values) {
        ConsistencyRow row;
        row.metric = name;
        const double mu = mean_of(values);
        if (mu == 0.0 || std::isnan(mu)) {
            row.skipped = true;
            rows.push_back(std::move(row));
            return;
        }
        for (double v : values) {
            row.normalized.push_back(v / mu);
        }
        row.stddev = stddev_of(row.normalized);
        row.spearman_vs_fold = spearman(fold_index, row.normalized);
        rows.push_back(std::move(row));
    };
    add("mse", result.fold_mse());
    add("mae", result.fold_mae());
    add("r2", result.fold_r2());
    return rows;
}

data::WindowSet windows_for_ranges(const std::vector<double>& values,
                                   const std::vector<IndexRange>& ranges, int w) {
    std::vector<data::WindowSet> parts;
    for (const IndexRange& r : ranges) {
        if (r.size() <= w) {
            continue; // too short to hold a single window plus its target
        }
        const std::vector<double> segment(values.begin() + r.begin, values.begin() + r.end);
        parts.push_back(data::make_windows(segment, w, r.begin));
    }
    return data::concat_windows(parts);
}

EncoderProvider fresh_encoder_provider(const RunConfig& config, int n_q) {
    return [config, n_q](int fold, const data::WindowSet& train_windows) {
        ae::AutoencoderWeights weights = ae::make_autoencoder(
            n_q, config.window, seed_mix(config.seed, 0xae, static_cast<std::uint64_t>(n_q),
                                         static_cast<std::uint64_t>(fold)));
        ae::AeTrainConfig ae_config;
        ae_config.epochs = config.effective_ae_epochs();
        ae_config.batch_size = config.batch_size;
        ae_config.learning_rate = config.ae_learning_rate;
        ae_config.clip_norm = config.clip_norm;
        ae_config.seed = seed_mix(config.seed, 0xae5d, static_cast<std::uint64_t>(n_q),
                                  static_cast<std::uint64_t>(fold));
        ae::train_autoencoder(weights, train_windows, ae_config);
        return weights;
    };
}

CrossValResult run_cross_validation(const models::ModelLabel& label, const data::TimeSeries& series,
                                    const FoldPlan& plan, const RunConfig& config,
                                    const EncoderProvider& encoder_provider) {
    if (static_cast<std::int64_t>(series.size()) != plan.n) {
        throw UsageError("fold plan was built for a series of length " + std::to_string(plan.n) +
                         ", got " + std::to_string(series.size()));
    }
    CrossValResult result;
    result.label = label;
    for (int f = 0; f < plan.k; ++f) {
        const Fold& fold = plan.folds[static_cast<std::size_t>(f)];

        const data::NormalizationParams norm = data::fit_normalizer(gather(series.values, fold.train));
        const std::vector<double> normalized = data::apply_normalizer(norm, series.values);

        // Windows are cut after splitting, separately per split, so no
        // window straddles a fold boundary.
        const data::WindowSet train_windows = windows_for_ranges(normalized, fold.train, config.window);
        const data::WindowSet val_windows = windows_for_ranges(normalized, fold.validation, config.window);
        const data::WindowSet test_windows = windows_for_ranges(normalized, {fold.test}, config.window);
        if (train_windows.count() == 0 || test_windows.count() == 0) {
            throw ConfigError("fold " + std::to_string(f) + " yields no usable windows");
        }

        const ae::AutoencoderWeights encoder = encoder_provider(f, train_windows);

        const models::LatentDataset train_set = models::encode_windows(encoder, train_windows);
        models::LatentDataset val_set;
        if (val_windows.count() > 0) {
            val_set = models::encode_windows(encoder, val_windows);
        }
        const models::LatentDataset test_set = models::encode_windows(encoder, test_windows);

        auto model = models::build_model(
            label, seed_mix(config.seed, fnv1a64(label.id()), static_cast<std::uint64_t>(f)),
            config.angle_scale);
        models::TrainConfig train_config;
        train_config.epochs = config.epochs;
        train_config.batch_size = config.batch_size;
        train_config.learning_rate = config.learning_rate;
        train_config.clip_norm = config.clip_norm;
        train_config.seed = seed_mix(config.seed, 0x7a11, fnv1a64(label.id()),
                                     static_cast<std::uint64_t>(f));
        const models::TrainResult trained = models::train_regressor(
            *model, train_set, val_set.targets.size() > 0 ? &val_set : nullptr, train_config);

        const nn::VectorXd predictions = models::predict_all(*model, test_set.latents);

        FoldScore score;
        score.fold = f;
        score.normalized = compute_metrics(predictions, test_set.targets);
        nn::VectorXd pred_raw(predictions.size());
        nn::VectorXd target_raw(predictions.size());
        for (Eigen::Index i = 0; i < predictions.size(); ++i) {
            pred_raw(i) = norm.invert(predictions(i));
            target_raw(i) = norm.invert(test_set.targets(i));
        }
        score.denormalized = compute_metrics(pred_raw, target_raw);
        score.train_loss = trained.train_loss;
        score.val_loss = trained.val_loss;
        score.ae_final_loss = encoder.training.final_loss;
        score.n_train_windows = train_windows.count();
        score.n_val_windows = val_windows.count();
        score.n_test_windows = test_windows.count();
        score.test_predictions = predictions;
        score.test_targets = test_set.targets;
        score.test_window_start = test_windows.source_start;
        score.normalizer = norm;
        result.folds.push_back(std::move(score));
    }
    return result;
}

CrossValResult run_cross_validation(const models::ModelLabel& label, const data::TimeSeries& series,
                                    const FoldPlan& plan, const RunConfig& config) {
    return run_cross_validation(label, series, plan, config, fresh_encoder_provider(config, label.n_q));
}

} // namespace qforecast::eval
