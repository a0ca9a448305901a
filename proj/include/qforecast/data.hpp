#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qforecast/errors.hpp"

namespace qforecast::data {

// Loop-detector cadence: one sample every 90 seconds, 40 per hour.
inline constexpr int kSampleIntervalSeconds = 90;
inline constexpr int kSamplesPerHour = 40;
inline constexpr int kSamplesPerDay = 24 * kSamplesPerHour;

struct TimeSeries {
    std::vector<double> values; // vehicles/hour, non-negative
    std::int64_t origin_epoch_s = 0;

    std::size_t size() const { return values.size(); }
    std::int64_t timestamp_at(std::size_t index) const {
        return origin_epoch_s + static_cast<std::int64_t>(index) * kSampleIntervalSeconds;
    }
};

struct SyntheticConfig {
    int n_days = 40;
    double base_flow = 250.0;    // overnight level, veh/h
    double peak_flow = 2000.0;   // rush-hour maximum, veh/h
    double noise_std = 60.0;     // additive Gaussian noise, veh/h
    double weekend_factor = 0.7; // scales the whole weekend profile
    std::uint64_t seed = 1;

    void validate() const;
};

// Deterministic commuter-style series: two Gaussian rush-hour bumps per
// weekday (08:00 and 18:00), weekends scaled down, additive noise, clamped
// at zero. Day 0 is a Monday. Length is n_days * 960.
TimeSeries generate_synthetic(const SyntheticConfig& config);

struct CsvOptions {
    bool sort = false;      // allow and sort out-of-order timestamps
    bool fill_gaps = false; // linearly interpolate gaps that are multiples of the interval
};

// Reads the two-column "timestamp,flow" schema (ISO-8601 timestamps,
// veh/h flow). Errors carry the 1-based row number.
TimeSeries load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

void save_csv(const TimeSeries& series, const std::filesystem::path& path);

std::string format_iso8601(std::int64_t epoch_s);
std::int64_t parse_iso8601(const std::string& text); // throws IngestError

// Min-max normalization fitted on training-fold values only.
struct NormalizationParams {
    double min = 0.0;
    double max = 1.0;

    double apply(double x) const { return (x - min) / (max - min); }
    double invert(double y) const { return y * (max - min) + min; }
};

NormalizationParams fit_normalizer(const std::vector<double>& training_values);

std::vector<double> apply_normalizer(const NormalizationParams& params,
                                     const std::vector<double>& values);

struct WindowSet {
    Eigen::MatrixXd inputs;                  // n_windows x w, one window per row
    Eigen::VectorXd targets;                 // value immediately following each window
    std::vector<std::int64_t> source_start;  // series index of each window's first element

    Eigen::Index count() const { return inputs.rows(); }
    int window() const { return static_cast<int>(inputs.cols()); }
};

// One window per admissible start; segment must be longer than w.
// `source_offset` is the series index of segment[0].
WindowSet make_windows(const std::vector<double>& segment, int w, std::int64_t source_offset = 0);

WindowSet concat_windows(const std::vector<WindowSet>& sets);

} // namespace qforecast::data
