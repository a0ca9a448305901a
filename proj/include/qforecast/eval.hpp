#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qforecast/autoencoder.hpp"
#include "qforecast/data.hpp"
#include "qforecast/models.hpp"

namespace qforecast::eval {

// Half-open [begin, end) range of series indices.
struct IndexRange {
    std::int64_t begin = 0;
    std::int64_t end = 0;

    std::int64_t size() const { return end - begin; }
    bool empty() const { return end <= begin; }
    bool contains(std::int64_t i) const { return i >= begin && i < end; }
};

struct Fold {
    IndexRange test;
    IndexRange gap_before; // empty when the test fold touches the series start
    IndexRange gap_after;  // empty when it touches the end
    std::vector<IndexRange> validation; // contiguous, possibly wrapped into two ranges
    std::vector<IndexRange> train;      // the remaining indices
};

struct FoldPlan {
    std::int64_t n = 0;
    int k = 5;
    std::int64_t gap_size = 0;
    double val_fraction = 0.1;
    std::vector<Fold> folds;
};

// Splits [0, n) into k contiguous test chunks. Gaps of gap_size are
// discarded on each interior side of the test fold (none where it touches
// a series edge). The validation slice of ceil(val_fraction*n) indices
// always immediately precedes the pre-test gap, wrapping past index 0 to
// the series end when needed; training takes everything left over.
FoldPlan gap_kfold_split(std::int64_t n, int k, std::int64_t gap_size, double val_fraction);

struct Metrics {
    double mse = 0.0;
    double mae = 0.0;
    std::optional<double> r2; // absent when the targets are constant
};

Metrics compute_metrics(const nn::VectorXd& predictions, const nn::VectorXd& targets);

struct BoxStats {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double whisker_lo = 0.0; // most extreme points within 1.5*IQR of the box
    double whisker_hi = 0.0;
    std::vector<double> outliers;
};

BoxStats box_stats(std::vector<double> values);

double mean_of(const std::vector<double>& values);
double stddev_of(const std::vector<double>& values); // population stddev

// Spearman rank correlation with midranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

struct FoldScore {
    int fold = 0;
    Metrics normalized;   // on [0,1]-normalized values, the training scale
    Metrics denormalized; // back in vehicles/hour
    std::vector<double> train_loss; // per-epoch mean training MSE
    std::vector<double> val_loss;   // per-epoch validation MSE
    double ae_final_loss = 0.0;
    std::int64_t n_train_windows = 0;
    std::int64_t n_val_windows = 0;
    std::int64_t n_test_windows = 0;
    // Per-test-window outputs, in normalized units; the normalizer converts
    // back to vehicles/hour.
    nn::VectorXd test_predictions;
    nn::VectorXd test_targets;
    std::vector<std::int64_t> test_window_start;
    data::NormalizationParams normalizer;
};

struct CrossValResult {
    models::ModelLabel label;
    std::vector<FoldScore> folds;

    std::vector<double> fold_mse() const;
    std::vector<double> fold_mae() const;
    std::vector<double> fold_r2() const;
    // Cross-fold mean and 1-sigma band of the training loss, per epoch.
    std::vector<double> epoch_loss_mean() const;
    std::vector<double> epoch_loss_std() const;
};

struct ConsistencyRow {
    std::string metric;
    std::vector<double> normalized; // per-fold score / cross-fold mean
    double stddev = 0.0;
    double spearman_vs_fold = 0.0;
    bool skipped = false; // zero cross-fold mean
};

// Fold-position consistency check: each metric normalized by its
// cross-fold mean, plus its rank correlation against fold order.
std::vector<ConsistencyRow> consistency_check(const CrossValResult& result);

struct RunConfig {
    int window = 20;
    int epochs = 20;
    int ae_epochs = 0; // 0 means "same as epochs"
    int batch_size = 32;
    double learning_rate = 0.0005;
    double ae_learning_rate = 0.0005;
    double clip_norm = 5.0;
    double angle_scale = 3.14159265358979323846;
    std::uint64_t seed = 1;

    int effective_ae_epochs() const { return ae_epochs > 0 ? ae_epochs : epochs; }
};

// Trains (or fetches) the frozen per-fold encoder. Arguments: fold index,
// training windows of that fold.
using EncoderProvider =
    std::function<ae::AutoencoderWeights(int fold, const data::WindowSet& train_windows)>;

// The default provider: trains a fresh autoencoder per fold, seeded by
// (seed, n_q, fold) so classic/hybrid counterparts share encoders.
EncoderProvider fresh_encoder_provider(const RunConfig& config, int n_q);

data::WindowSet windows_for_ranges(const std::vector<double>& values,
                                   const std::vector<IndexRange>& ranges, int w);

// Full per-fold pipeline: fit the normalizer on the training indices,
// window each split separately, train the (cached) encoder and the
// regressor, then score the test fold.
CrossValResult run_cross_validation(const models::ModelLabel& label, const data::TimeSeries& series,
                                    const FoldPlan& plan, const RunConfig& config,
                                    const EncoderProvider& encoder_provider);

CrossValResult run_cross_validation(const models::ModelLabel& label, const data::TimeSeries& series,
                                    const FoldPlan& plan, const RunConfig& config);

} // namespace qforecast::eval
