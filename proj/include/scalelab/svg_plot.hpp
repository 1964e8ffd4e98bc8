#pragma once

#include <string>
#include <vector>

namespace scalelab {

// One plotted quantity. Line charts use x/y pairs (x defaults to the index
// when empty); bar charts use y only, one value per group.
struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Grouped bar chart: groups on the x axis, one bar per series within each
// group. Writes a self-contained SVG file.
void bar_chart_svg(const std::string& path, const std::string& title,
                   const std::string& y_label, const std::vector<std::string>& groups,
                   const std::vector<PlotSeries>& series);

void line_chart_svg(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series);

}  // namespace scalelab
