#ifndef QDF_PLOT_HPP
#define QDF_PLOT_HPP

#include <string>
#include <vector>

namespace qdf {

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
    bool scatter = false; // markers instead of a polyline
};

struct PlotSpec {
    std::string title;
    std::string xlabel, ylabel;
    bool log_x = false, log_y = false;
    double hline = 0.0; // dashed horizontal guide (e.g. the target error)
    bool has_hline = false;
    int width = 640, height = 420;
};

/// Self-contained SVG with axes, tick labels, series and legend.
/// Byte-deterministic for fixed input; an empty series list still yields
/// a valid plot frame.
void emit_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series,
               const std::string& path);

} // namespace qdf

#endif
