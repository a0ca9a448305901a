#include "qforecast/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "qforecast/errors.hpp"

namespace qforecast::plot {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Axis {
    double lo = 0.0, hi = 1.0;
    double span() const { return hi - lo; }
};

Axis pad_axis(double lo, double hi) {
    if (!(hi > lo)) {
        hi = lo + 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

double map_x(const Axis& a, double v) {
    return kMarginLeft + (v - a.lo) / a.span() * (kWidth - kMarginLeft - kMarginRight);
}

double map_y(const Axis& a, double v) {
    return kHeight - kMarginBottom - (v - a.lo) / a.span() * (kHeight - kMarginTop - kMarginBottom);
}

void open_svg(std::ofstream& out, const std::filesystem::path& path, const std::string& title) {
    out.open(path);
    if (!out) {
        throw IngestError("cannot open plot file for writing: " + path.string());
    }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\""
        << fmt(kHeight) << "\" viewBox=\"0 0 " << fmt(kWidth) << " " << fmt(kHeight) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
}

void draw_frame(std::ofstream& out, const Axis& x, const Axis& y, const std::string& x_label,
                const std::string& y_label) {
    out << "<rect x=\"" << fmt(kMarginLeft) << "\" y=\"" << fmt(kMarginTop) << "\" width=\""
        << fmt(kWidth - kMarginLeft - kMarginRight) << "\" height=\""
        << fmt(kHeight - kMarginTop - kMarginBottom)
        << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double tx = x.lo + x.span() * i / 4.0;
        const double ty = y.lo + y.span() * i / 4.0;
        if (!x_label.empty()) {
            out << "<text x=\"" << fmt(map_x(x, tx)) << "\" y=\"" << fmt(kHeight - kMarginBottom + 18)
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(tx)
                << "</text>\n";
        }
        out << "<text x=\"" << fmt(kMarginLeft - 8) << "\" y=\"" << fmt(map_y(y, ty) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(ty)
            << "</text>\n";
        out << "<line x1=\"" << fmt(kMarginLeft) << "\" y1=\"" << fmt(map_y(y, ty)) << "\" x2=\""
            << fmt(kWidth - kMarginRight) << "\" y2=\"" << fmt(map_y(y, ty))
            << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    }
    out << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"" << fmt(kHeight - 12)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label
        << "</text>\n";
    out << "<text x=\"16\" y=\"" << fmt(kHeight / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
        << fmt(kHeight / 2) << ")\">" << y_label << "</text>\n";
}

} // namespace

void write_loss_curve_svg(const std::filesystem::path& path, const std::string& title,
                          const std::vector<CurveSeries>& series) {
    if (series.empty()) {
        throw UsageError("loss curve needs at least one series");
    }
    std::size_t epochs = 0;
    double y_lo = 0.0, y_hi = 0.0;
    bool first = true;
    for (const CurveSeries& s : series) {
        epochs = std::max(epochs, s.mean.size());
        for (std::size_t e = 0; e < s.mean.size(); ++e) {
            const double sd = e < s.stddev.size() ? s.stddev[e] : 0.0;
            const double lo = s.mean[e] - sd;
            const double hi = s.mean[e] + sd;
            y_lo = first ? lo : std::min(y_lo, lo);
            y_hi = first ? hi : std::max(y_hi, hi);
            first = false;
        }
    }
    if (epochs == 0) {
        throw UsageError("loss curve series are empty");
    }
    const Axis x{1.0, static_cast<double>(epochs)};
    const Axis y = pad_axis(std::min(y_lo, 0.0), y_hi);

    std::ofstream out;
    open_svg(out, path, title);
    draw_frame(out, x, y, "epoch", "training MSE");

    for (const CurveSeries& s : series) {
        if (!s.stddev.empty()) {
            out << "<path d=\"";
            for (std::size_t e = 0; e < s.mean.size(); ++e) {
                out << (e == 0 ? "M" : "L") << fmt(map_x(x, static_cast<double>(e + 1))) << ","
                    << fmt(map_y(y, s.mean[e] + s.stddev[e])) << " ";
            }
            for (std::size_t e = s.mean.size(); e-- > 0;) {
                out << "L" << fmt(map_x(x, static_cast<double>(e + 1))) << ","
                    << fmt(map_y(y, s.mean[e] - s.stddev[e])) << " ";
            }
            out << "Z\" fill=\"" << s.color << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
        }
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t e = 0; e < s.mean.size(); ++e) {
            out << fmt(map_x(x, static_cast<double>(e + 1))) << "," << fmt(map_y(y, s.mean[e])) << " ";
        }
        out << "\"/>\n";
    }

    double legend_y = kMarginTop + 14;
    for (const CurveSeries& s : series) {
        out << "<rect x=\"" << fmt(kWidth - kMarginRight - 170) << "\" y=\"" << fmt(legend_y - 9)
            << "\" width=\"12\" height=\"12\" fill=\"" << s.color << "\"/>\n";
        out << "<text x=\"" << fmt(kWidth - kMarginRight - 152) << "\" y=\"" << fmt(legend_y + 1)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.name << "</text>\n";
        legend_y += 18;
    }
    out << "</svg>\n";
}

void write_box_plot_svg(const std::filesystem::path& path, const std::string& title,
                        const std::string& y_label, const std::vector<BoxGroup>& groups) {
    if (groups.empty()) {
        throw UsageError("box plot needs at least one group");
    }
    double y_lo = groups.front().stats.whisker_lo;
    double y_hi = groups.front().stats.whisker_hi;
    for (const BoxGroup& g : groups) {
        y_lo = std::min(y_lo, g.stats.whisker_lo);
        y_hi = std::max(y_hi, g.stats.whisker_hi);
        for (double v : g.stats.outliers) {
            y_lo = std::min(y_lo, v);
            y_hi = std::max(y_hi, v);
        }
    }
    const Axis y = pad_axis(y_lo, y_hi);
    const Axis x{0.0, static_cast<double>(groups.size())};

    std::ofstream out;
    open_svg(out, path, title);
    draw_frame(out, x, y, "", y_label);

    const double slot = (kWidth - kMarginLeft - kMarginRight) / static_cast<double>(groups.size());
    const double box_w = std::min(40.0, slot * 0.5);
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const BoxGroup& g = groups[i];
        const double cx = kMarginLeft + slot * (static_cast<double>(i) + 0.5);
        const double q1 = map_y(y, g.stats.q1);
        const double q3 = map_y(y, g.stats.q3);
        const double med = map_y(y, g.stats.median);
        const double wlo = map_y(y, g.stats.whisker_lo);
        const double whi = map_y(y, g.stats.whisker_hi);
        out << "<line x1=\"" << fmt(cx) << "\" y1=\"" << fmt(wlo) << "\" x2=\"" << fmt(cx)
            << "\" y2=\"" << fmt(q1) << "\" stroke=\"#444444\"/>\n";
        out << "<line x1=\"" << fmt(cx) << "\" y1=\"" << fmt(whi) << "\" x2=\"" << fmt(cx)
            << "\" y2=\"" << fmt(q3) << "\" stroke=\"#444444\"/>\n";
        out << "<rect x=\"" << fmt(cx - box_w / 2) << "\" y=\"" << fmt(q3) << "\" width=\"" << fmt(box_w)
            << "\" height=\"" << fmt(q1 - q3) << "\" fill=\"" << g.color
            << "\" fill-opacity=\"0.6\" stroke=\"#444444\"/>\n";
        out << "<line x1=\"" << fmt(cx - box_w / 2) << "\" y1=\"" << fmt(med) << "\" x2=\""
            << fmt(cx + box_w / 2) << "\" y2=\"" << fmt(med)
            << "\" stroke=\"#222222\" stroke-width=\"1.5\"/>\n";
        for (double v : g.stats.outliers) {
            out << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(map_y(y, v))
                << "\" r=\"3\" fill=\"none\" stroke=\"#444444\"/>\n";
        }
        out << "<text x=\"" << fmt(cx) << "\" y=\"" << fmt(kHeight - kMarginBottom + 18)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << g.label
            << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace qforecast::plot
