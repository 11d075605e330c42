#pragma once

#include <string>
#include <vector>

namespace gpc {

struct PlotSeries {
    std::string label;
    std::vector<double> y;
};

/// Self-contained 800×500 SVG line chart: one polyline per series over the
/// shared x values, labeled axes and a legend. Long series are thinned to at
/// most 1000 evenly spaced points. Output depends only on the inputs.
std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<double>& x, const std::vector<PlotSeries>& series);

}  // namespace gpc
