#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "qforecast/data.hpp"

using namespace qforecast;

namespace {

std::filesystem::path write_temp_csv(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << body;
    return path;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_SUITE("data") {

TEST_CASE("iso8601 round trip") {
    const std::int64_t t = data::parse_iso8601("2024-01-01T00:00:00");
    CHECK(t == 1704067200);
    CHECK(data::format_iso8601(t) == "2024-01-01T00:00:00Z");
    CHECK(data::parse_iso8601("2024-01-01 00:01:30Z") == t + 90);
    CHECK_THROWS_AS(data::parse_iso8601("2024-13-01T00:00:00"), IngestError);
    CHECK_THROWS_AS(data::parse_iso8601("not a date"), IngestError);
}

TEST_CASE("load_csv accepts a well-formed file") {
    const auto path = write_temp_csv("qf_ok.csv",
                                     "timestamp,flow\n"
                                     "2024-01-01T00:00:00,100\n"
                                     "2024-01-01T00:01:30,110.5\n"
                                     "2024-01-01T00:03:00,120\n");
    const data::TimeSeries series = data::load_csv(path);
    CHECK(series.size() == 3);
    CHECK(series.values[1] == doctest::Approx(110.5));
    CHECK(series.origin_epoch_s == data::parse_iso8601("2024-01-01T00:00:00"));
    std::filesystem::remove(path);
}

TEST_CASE("load_csv rejects negative flow naming the row") {
    const auto path = write_temp_csv("qf_neg.csv",
                                     "timestamp,flow\n"
                                     "2024-01-01T00:00:00,100\n"
                                     "2024-01-01T00:01:30,-5\n");
    try {
        data::load_csv(path);
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
        CHECK(std::string(e.what()).find("negative") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("load_csv rejects out-of-order rows unless sorting is requested") {
    const auto path = write_temp_csv("qf_unsorted.csv",
                                     "timestamp,flow\n"
                                     "2024-01-01T00:01:30,110\n"
                                     "2024-01-01T00:00:00,100\n");
    CHECK_THROWS_AS(data::load_csv(path), IngestError);
    const data::TimeSeries sorted = data::load_csv(path, {.sort = true});
    CHECK(sorted.values.front() == doctest::Approx(100.0));
    std::filesystem::remove(path);
}

TEST_CASE("load_csv gap handling") {
    const auto path = write_temp_csv("qf_gap.csv",
                                     "timestamp,flow\n"
                                     "2024-01-01T00:00:00,100\n"
                                     "2024-01-01T00:04:30,130\n"); // 3 intervals ahead
    CHECK_THROWS_AS(data::load_csv(path), IngestError);
    const data::TimeSeries filled = data::load_csv(path, {.fill_gaps = true});
    CHECK(filled.size() == 4);
    CHECK(filled.values[1] == doctest::Approx(110.0));
    CHECK(filled.values[2] == doctest::Approx(120.0));
    std::filesystem::remove(path);

    const auto ragged = write_temp_csv("qf_ragged.csv",
                                       "timestamp,flow\n"
                                       "2024-01-01T00:00:00,100\n"
                                       "2024-01-01T00:01:00,130\n"); // not a multiple of 90 s
    CHECK_THROWS_AS(data::load_csv(ragged, {.fill_gaps = true}), IngestError);
    std::filesystem::remove(ragged);
}

TEST_CASE("load_csv rejects bad headers and malformed rows") {
    const auto bad_header = write_temp_csv("qf_head.csv", "time,volume\n2024-01-01T00:00:00,1\n");
    CHECK_THROWS_AS(data::load_csv(bad_header), IngestError);
    std::filesystem::remove(bad_header);

    const auto bad_row = write_temp_csv("qf_row.csv", "timestamp,flow\n2024-01-01T00:00:00,abc\n");
    CHECK_THROWS_AS(data::load_csv(bad_row), IngestError);
    std::filesystem::remove(bad_row);
}

TEST_CASE("synthetic generator length and determinism") {
    data::SyntheticConfig config;
    config.n_days = 40;
    config.seed = 5;
    const data::TimeSeries series = data::generate_synthetic(config);
    CHECK(series.size() == 38400);

    const data::TimeSeries again = data::generate_synthetic(config);
    CHECK(series.values == again.values);

    config.seed = 6;
    const data::TimeSeries different = data::generate_synthetic(config);
    CHECK(series.values != different.values);
}

TEST_CASE("synthetic generator config validation") {
    data::SyntheticConfig config;
    config.n_days = 0;
    CHECK_THROWS_AS(data::generate_synthetic(config), ConfigError);
    config.n_days = 1;
    config.noise_std = -1.0;
    CHECK_THROWS_AS(data::generate_synthetic(config), ConfigError);
    config.noise_std = 0.0;
    config.peak_flow = config.base_flow;
    CHECK_THROWS_AS(data::generate_synthetic(config), ConfigError);
}

TEST_CASE("noise-free synthetic series repeats weekly") {
    data::SyntheticConfig config;
    config.n_days = 14;
    config.noise_std = 0.0;
    const data::TimeSeries series = data::generate_synthetic(config);
    const std::size_t week = 7 * data::kSamplesPerDay;
    for (std::size_t i = 0; i < week; ++i) {
        CHECK(series.values[i] == series.values[i + week]);
    }
    // Weekends are scaled down relative to weekdays.
    const std::size_t monday_peak = 8 * data::kSamplesPerHour;
    const std::size_t saturday_peak = 5 * data::kSamplesPerDay + monday_peak;
    CHECK(series.values[saturday_peak] < series.values[monday_peak]);
    // Rush hour reaches the configured magnitude.
    CHECK(series.values[monday_peak] == doctest::Approx(config.peak_flow).epsilon(0.02));
}

TEST_CASE("normalizer maps the training range to [0, 1]") {
    const data::NormalizationParams params = data::fit_normalizer({0.0, 2000.0});
    CHECK(params.apply(1000.0) == doctest::Approx(0.5));
    CHECK(params.apply(0.0) == doctest::Approx(0.0));
    CHECK(params.apply(2000.0) == doctest::Approx(1.0));
    CHECK(params.apply(3000.0) > 1.0); // test values may leave the unit interval

    for (double x : {0.0, 123.456, 1999.0}) {
        CHECK(params.invert(params.apply(x)) == doctest::Approx(x).epsilon(1e-12));
    }

    CHECK_THROWS_AS(data::fit_normalizer({5.0, 5.0, 5.0}), UsageError);
    CHECK_THROWS_AS(data::fit_normalizer({}), UsageError);
}

TEST_CASE("normalizer depends only on the values it was fitted on") {
    const data::NormalizationParams a = data::fit_normalizer({10.0, 20.0, 30.0});
    const data::NormalizationParams b = data::fit_normalizer({30.0, 10.0, 20.0});
    CHECK(a.min == b.min);
    CHECK(a.max == b.max);
}

TEST_CASE("make_windows enumerates sliding windows with next-step targets") {
    const data::WindowSet set = data::make_windows({1, 2, 3, 4, 5}, 2, 100);
    CHECK(set.count() == 3);
    CHECK(set.inputs(0, 0) == 1);
    CHECK(set.inputs(0, 1) == 2);
    CHECK(set.targets(0) == 3);
    CHECK(set.inputs(2, 0) == 3);
    CHECK(set.targets(2) == 5);
    CHECK(set.source_start == std::vector<std::int64_t>{100, 101, 102});
}

TEST_CASE("make_windows boundary conditions") {
    CHECK(data::make_windows({1, 2, 3}, 2).count() == 1); // length w+1 -> one window
    CHECK_THROWS_AS(data::make_windows({1, 2}, 2), UsageError);
    CHECK_THROWS_AS(data::make_windows({1, 2, 3}, 0), UsageError);

    // A segment of length L yields exactly L - w windows.
    for (int L : {21, 40, 100}) {
        std::vector<double> values(static_cast<std::size_t>(L), 1.0);
        CHECK(data::make_windows(values, 20).count() == L - 20);
    }
}

TEST_CASE("csv round trip preserves the synthetic series") {
    data::SyntheticConfig config;
    config.n_days = 1;
    config.seed = 9;
    const data::TimeSeries series = data::generate_synthetic(config);
    const auto path = std::filesystem::temp_directory_path() / "qf_roundtrip.csv";
    data::save_csv(series, path);
    const data::TimeSeries loaded = data::load_csv(path);
    REQUIRE(loaded.size() == series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        CHECK(loaded.values[i] == doctest::Approx(series.values[i]).epsilon(1e-6));
    }
    CHECK(loaded.origin_epoch_s == series.origin_epoch_s);

    // Identical seeds produce byte-identical files.
    const auto path2 = std::filesystem::temp_directory_path() / "qf_roundtrip2.csv";
    data::save_csv(data::generate_synthetic(config), path2);
    CHECK(read_file(path) == read_file(path2));
    std::filesystem::remove(path);
    std::filesystem::remove(path2);
}

} // TEST_SUITE
