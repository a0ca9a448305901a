#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qforecast/eval.hpp"

namespace qforecast::plot {

// Hand-rolled SVG output so reports need no plotting dependency. All
// number formatting is locale-free and deterministic.

struct CurveSeries {
    std::string name;
    std::string color;          // e.g. "#1f77b4"
    std::vector<double> mean;   // one value per epoch
    std::vector<double> stddev; // optional 1-sigma band, same length or empty
};

void write_loss_curve_svg(const std::filesystem::path& path, const std::string& title,
                          const std::vector<CurveSeries>& series);

struct BoxGroup {
    std::string label;
    std::string color;
    eval::BoxStats stats;
};

void write_box_plot_svg(const std::filesystem::path& path, const std::string& title,
                        const std::string& y_label, const std::vector<BoxGroup>& groups);

} // namespace qforecast::plot
