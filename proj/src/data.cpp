#include "qforecast/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "qforecast/rng.hpp"

namespace qforecast::data {

namespace {

// 2024-01-01T00:00:00Z; a Monday, so day index modulo 7 gives the weekday.
constexpr std::int64_t kDefaultOrigin = 1704067200;

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y += m <= 2;
}

bool parse_int(const std::string& s, std::size_t begin, std::size_t len, int& out) {
    if (begin + len > s.size()) {
        return false;
    }
    out = 0;
    for (std::size_t i = begin; i < begin + len; ++i) {
        if (s[i] < '0' || s[i] > '9') {
            return false;
        }
        out = out * 10 + (s[i] - '0');
    }
    return true;
}

[[noreturn]] void row_error(std::size_t row, const std::string& what) {
    throw IngestError("row " + std::to_string(row) + ": " + what);
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

} // namespace

std::int64_t parse_iso8601(const std::string& text) {
    // YYYY-MM-DD[T ]HH:MM:SS with an optional trailing Z.
    std::string s = text;
    if (!s.empty() && s.back() == 'Z') {
        s.pop_back();
    }
    int year, month, day, hour, minute, second;
    const bool shape_ok =
        s.size() == 19 && s[4] == '-' && s[7] == '-' && (s[10] == 'T' || s[10] == ' ') &&
        s[13] == ':' && s[16] == ':' && parse_int(s, 0, 4, year) && parse_int(s, 5, 2, month) &&
        parse_int(s, 8, 2, day) && parse_int(s, 11, 2, hour) && parse_int(s, 14, 2, minute) &&
        parse_int(s, 17, 2, second);
    if (!shape_ok || month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 ||
        second > 59) {
        throw IngestError("invalid ISO-8601 timestamp: '" + text + "'");
    }
    return days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 + second;
}

std::string format_iso8601(std::int64_t epoch_s) {
    std::int64_t days = epoch_s / 86400;
    std::int64_t rem = epoch_s % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                  static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                  static_cast<int>(rem % 60));
    return buf;
}

void SyntheticConfig::validate() const {
    if (n_days < 1) {
        throw ConfigError("synthetic series needs at least one day, got " + std::to_string(n_days));
    }
    if (noise_std < 0.0) {
        throw ConfigError("noise_std must be non-negative");
    }
    if (base_flow < 0.0 || peak_flow <= base_flow) {
        throw ConfigError("require 0 <= base_flow < peak_flow");
    }
    if (weekend_factor < 0.0) {
        throw ConfigError("weekend_factor must be non-negative");
    }
}

TimeSeries generate_synthetic(const SyntheticConfig& config) {
    config.validate();
    const std::size_t n = static_cast<std::size_t>(config.n_days) * kSamplesPerDay;
    TimeSeries series;
    series.origin_epoch_s = kDefaultOrigin;
    series.values.resize(n);

    // Morning and evening commuter bumps; sigma in hours.
    const double morning_peak = 8.0, evening_peak = 18.0;
    const double morning_sigma = 1.6, evening_sigma = 2.1;

    Rng rng(config.seed);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t day = i / kSamplesPerDay;
        const double hour = static_cast<double>(i % kSamplesPerDay) / kSamplesPerHour;
        const double dm = (hour - morning_peak) / morning_sigma;
        const double de = (hour - evening_peak) / evening_sigma;
        const double bumps = std::exp(-0.5 * dm * dm) + std::exp(-0.5 * de * de);
        double flow = config.base_flow + (config.peak_flow - config.base_flow) * bumps;
        if (day % 7 >= 5) {
            flow *= config.weekend_factor;
        }
        flow += config.noise_std * normal01(rng);
        series.values[i] = std::max(flow, 0.0);
    }
    return series;
}

TimeSeries load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) {
        throw IngestError("cannot open CSV file: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IngestError("empty CSV file: " + path.string());
    }
    if (trim(line) != "timestamp,flow") {
        throw IngestError("expected header 'timestamp,flow', got '" + trim(line) + "'");
    }

    std::vector<std::pair<std::int64_t, double>> rows;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        const std::string trimmed = trim(line);
        if (trimmed.empty()) {
            continue;
        }
        const auto comma = trimmed.find(',');
        if (comma == std::string::npos) {
            row_error(row, "expected 'timestamp,flow'");
        }
        std::int64_t ts;
        try {
            ts = parse_iso8601(trim(trimmed.substr(0, comma)));
        } catch (const IngestError& e) {
            row_error(row, e.what());
        }
        const std::string flow_text = trim(trimmed.substr(comma + 1));
        double flow = 0.0;
        const auto [ptr, ec] =
            std::from_chars(flow_text.data(), flow_text.data() + flow_text.size(), flow);
        if (ec != std::errc{} || ptr != flow_text.data() + flow_text.size()) {
            row_error(row, "invalid flow value '" + flow_text + "'");
        }
        if (!std::isfinite(flow)) {
            row_error(row, "non-finite flow value");
        }
        if (flow < 0.0) {
            row_error(row, "negative flow value " + flow_text);
        }
        rows.emplace_back(ts, flow);
    }
    if (rows.empty()) {
        throw IngestError("CSV has no data rows: " + path.string());
    }

    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].first <= rows[i - 1].first) {
            if (!options.sort) {
                row_error(i + 2, "timestamps not strictly increasing (pass the sort flag to reorder)");
            }
            std::stable_sort(rows.begin(), rows.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            for (std::size_t j = 1; j < rows.size(); ++j) {
                if (rows[j].first == rows[j - 1].first) {
                    throw IngestError("duplicate timestamp " + format_iso8601(rows[j].first));
                }
            }
            break;
        }
    }

    TimeSeries series;
    series.origin_epoch_s = rows.front().first;
    series.values.push_back(rows.front().second);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const std::int64_t delta = rows[i].first - rows[i - 1].first;
        if (delta == kSampleIntervalSeconds) {
            series.values.push_back(rows[i].second);
            continue;
        }
        if (delta % kSampleIntervalSeconds != 0) {
            row_error(i + 2, "timestamp offset " + std::to_string(delta) +
                                 "s is not a multiple of the " +
                                 std::to_string(kSampleIntervalSeconds) + "s interval");
        }
        const std::int64_t steps = delta / kSampleIntervalSeconds;
        if (!options.fill_gaps) {
            row_error(i + 2, "gap of " + std::to_string(steps) +
                                 " intervals (pass the fill flag to interpolate)");
        }
        const double prev = rows[i - 1].second;
        const double next = rows[i].second;
        for (std::int64_t s = 1; s <= steps; ++s) {
            const double t = static_cast<double>(s) / static_cast<double>(steps);
            series.values.push_back(prev + t * (next - prev));
        }
    }
    return series;
}

void save_csv(const TimeSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw IngestError("cannot open CSV for writing: " + path.string());
    }
    out << "timestamp,flow\n";
    char buf[64];
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.6f", series.values[i]);
        out << format_iso8601(series.timestamp_at(i)) << ',' << buf << '\n';
    }
    if (!out) {
        throw IngestError("failed writing CSV: " + path.string());
    }
}

NormalizationParams fit_normalizer(const std::vector<double>& training_values) {
    if (training_values.empty()) {
        throw UsageError("cannot fit a normalizer on an empty value set");
    }
    const auto [lo, hi] = std::minmax_element(training_values.begin(), training_values.end());
    if (!(*hi > *lo)) {
        throw UsageError("cannot fit a normalizer on a constant value set");
    }
    return NormalizationParams{*lo, *hi};
}

std::vector<double> apply_normalizer(const NormalizationParams& params,
                                     const std::vector<double>& values) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = params.apply(values[i]);
    }
    return out;
}

WindowSet make_windows(const std::vector<double>& segment, int w, std::int64_t source_offset) {
    if (w < 1) {
        throw UsageError("window size must be positive");
    }
    const std::int64_t n_windows = static_cast<std::int64_t>(segment.size()) - w;
    if (n_windows < 1) {
        throw UsageError("segment of length " + std::to_string(segment.size()) +
                         " is too short for window size " + std::to_string(w));
    }
    WindowSet set;
    set.inputs.resize(n_windows, w);
    set.targets.resize(n_windows);
    set.source_start.resize(static_cast<std::size_t>(n_windows));
    for (std::int64_t j = 0; j < n_windows; ++j) {
        for (int k = 0; k < w; ++k) {
            set.inputs(j, k) = segment[static_cast<std::size_t>(j + k)];
        }
        set.targets(j) = segment[static_cast<std::size_t>(j + w)];
        set.source_start[static_cast<std::size_t>(j)] = source_offset + j;
    }
    return set;
}

WindowSet concat_windows(const std::vector<WindowSet>& sets) {
    WindowSet out;
    Eigen::Index total = 0;
    int w = 0;
    for (const WindowSet& s : sets) {
        if (s.count() == 0) {
            continue;
        }
        if (w == 0) {
            w = s.window();
        } else if (s.window() != w) {
            throw UsageError("cannot concatenate window sets with different window sizes");
        }
        total += s.count();
    }
    if (total == 0) {
        return out;
    }
    out.inputs.resize(total, w);
    out.targets.resize(total);
    out.source_start.reserve(static_cast<std::size_t>(total));
    Eigen::Index row = 0;
    for (const WindowSet& s : sets) {
        if (s.count() == 0) {
            continue;
        }
        out.inputs.middleRows(row, s.count()) = s.inputs;
        out.targets.segment(row, s.count()) = s.targets;
        out.source_start.insert(out.source_start.end(), s.source_start.begin(), s.source_start.end());
        row += s.count();
    }
    return out;
}

} // namespace qforecast::data
