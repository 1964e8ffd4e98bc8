#include "scalelab/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace scalelab {

namespace {

constexpr int kW = 720, kH = 420;
constexpr int kLeft = 70, kRight = 24, kTop = 44, kBottom = 52;
constexpr const char* kPalette[] = {"#4878cf", "#ee854a", "#6acc65", "#d65f5f",
                                    "#956cb4", "#8c613c"};
constexpr int kPaletteN = 6;

std::string fmt(double v) {
    char buf[32];
    if (v == 0 || (std::fabs(v) >= 0.01 && std::fabs(v) < 1e6))
        std::snprintf(buf, sizeof buf, "%.4g", v);
    else
        std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

// Round the raw range out to nice tick positions.
std::vector<double> ticks(double lo, double hi, int want = 5) {
    if (hi <= lo) hi = lo + 1;
    double span = hi - lo;
    double step = std::pow(10.0, std::floor(std::log10(span / want)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (span / (step * m) <= want) {
            step *= m;
            break;
        }
    }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step)
        out.push_back(t);
    return out;
}

struct Canvas {
    std::ofstream out;
    explicit Canvas(const std::string& path) : out(path) {
        if (!out) throw std::runtime_error("cannot write " + path);
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\""
            << kH << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n"
            << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
    }
    void title(const std::string& t) {
        out << "<text x=\"" << kW / 2 << "\" y=\"24\" font-family=\"sans-serif\" "
            << "font-size=\"15\" text-anchor=\"middle\">" << esc(t) << "</text>\n";
    }
    void axis_labels(const std::string& xl, const std::string& yl) {
        if (!xl.empty())
            out << "<text x=\"" << (kLeft + (kW - kLeft - kRight) / 2) << "\" y=\"" << kH - 10
                << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
                << esc(xl) << "</text>\n";
        if (!yl.empty())
            out << "<text x=\"16\" y=\"" << (kTop + (kH - kTop - kBottom) / 2)
                << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
                << "transform=\"rotate(-90 16 " << (kTop + (kH - kTop - kBottom) / 2)
                << ")\">" << esc(yl) << "</text>\n";
    }
    void y_axis(double lo, double hi) {
        for (double t : ticks(lo, hi)) {
            double y = map_y(t, lo, hi);
            out << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kW - kRight
                << "\" y2=\"" << y << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
                << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4
                << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
                << fmt(t) << "</text>\n";
        }
        out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
            << "\" y2=\"" << kH - kBottom << "\" stroke=\"black\"/>\n"
            << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\""
            << kW - kRight << "\" y2=\"" << kH - kBottom << "\" stroke=\"black\"/>\n";
    }
    void legend(const std::vector<PlotSeries>& series) {
        if (series.size() < 2) return;
        double x = kLeft + 10, y = kTop + 6;
        for (std::size_t i = 0; i < series.size(); ++i) {
            out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"12\" height=\"12\" fill=\""
                << kPalette[i % kPaletteN] << "\"/>\n"
                << "<text x=\"" << x + 16 << "\" y=\"" << y + 10
                << "\" font-family=\"sans-serif\" font-size=\"11\">" << esc(series[i].label)
                << "</text>\n";
            y += 16;
        }
    }
    static double map_y(double v, double lo, double hi) {
        return kH - kBottom - (v - lo) / (hi - lo) * (kH - kTop - kBottom);
    }
    static double map_x(double v, double lo, double hi) {
        return kLeft + (v - lo) / (hi - lo) * (kW - kLeft - kRight);
    }
    ~Canvas() { out << "</svg>\n"; }
};

void y_range(const std::vector<PlotSeries>& series, double& lo, double& hi) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (const auto& s : series)
        for (double v : s.y) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi == lo) hi = lo + 1;
}

}  // namespace

void bar_chart_svg(const std::string& path, const std::string& title,
                   const std::string& y_label, const std::vector<std::string>& groups,
                   const std::vector<PlotSeries>& series) {
    double lo, hi;
    y_range(series, lo, hi);
    lo = std::min(lo, 0.0);
    hi = std::max(hi, 0.0);
    Canvas c(path);
    c.title(title);
    c.y_axis(lo, hi);
    c.axis_labels("", y_label);
    double plot_w = kW - kLeft - kRight;
    std::size_t n_groups = groups.size(), n_series = std::max<std::size_t>(series.size(), 1);
    double group_w = plot_w / std::max<std::size_t>(n_groups, 1);
    double bar_w = group_w * 0.8 / n_series;
    double y0 = Canvas::map_y(0.0, lo, hi);
    for (std::size_t g = 0; g < n_groups; ++g) {
        double gx = kLeft + g * group_w + group_w * 0.1;
        for (std::size_t s = 0; s < series.size(); ++s) {
            if (g >= series[s].y.size()) continue;
            double v = series[s].y[g];
            double y = Canvas::map_y(v, lo, hi);
            c.out << "<rect x=\"" << gx + s * bar_w << "\" y=\"" << std::min(y, y0)
                  << "\" width=\"" << bar_w * 0.92 << "\" height=\"" << std::fabs(y0 - y)
                  << "\" fill=\"" << kPalette[s % kPaletteN] << "\"/>\n";
        }
        c.out << "<text x=\"" << gx + group_w * 0.4 << "\" y=\"" << kH - kBottom + 16
              << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
              << esc(groups[g]) << "</text>\n";
    }
    c.legend(series);
}

void line_chart_svg(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series) {
    double ylo, yhi;
    y_range(series, ylo, yhi);
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            double x = i < s.x.size() ? s.x[i] : static_cast<double>(i);
            xlo = std::min(xlo, x);
            xhi = std::max(xhi, x);
        }
    }
    if (!std::isfinite(xlo)) xlo = 0, xhi = 1;
    if (xhi == xlo) xhi = xlo + 1;
    Canvas c(path);
    c.title(title);
    c.y_axis(ylo, yhi);
    c.axis_labels(x_label, y_label);
    for (double t : ticks(xlo, xhi)) {
        double x = Canvas::map_x(t, xlo, xhi);
        c.out << "<text x=\"" << x << "\" y=\"" << kH - kBottom + 16
              << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
              << fmt(t) << "</text>\n";
    }
    for (std::size_t s = 0; s < series.size(); ++s) {
        if (series[s].y.empty()) continue;
        c.out << "<polyline fill=\"none\" stroke=\"" << kPalette[s % kPaletteN]
              << "\" stroke-width=\"1.6\" points=\"";
        for (std::size_t i = 0; i < series[s].y.size(); ++i) {
            double x = i < series[s].x.size() ? series[s].x[i] : static_cast<double>(i);
            c.out << Canvas::map_x(x, xlo, xhi) << ',' << Canvas::map_y(series[s].y[i], ylo, yhi)
                  << ' ';
        }
        c.out << "\"/>\n";
    }
    c.legend(series);
}

}  // namespace scalelab
