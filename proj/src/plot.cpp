#include "qdf/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "qdf/errors.hpp"

namespace qdf {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

} // namespace

void emit_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series,
               const std::string& path) {
    const double ml = 70, mr = 20, mt = 34, mb = 48;
    const double pw = spec.width - ml - mr, ph = spec.height - mt - mb;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    auto tx = [&](double x) { return spec.log_x ? std::log10(x) : x; };
    auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) throw InvalidParams("non-finite plot data");
            if (spec.log_x && x <= 0.0) throw InvalidParams("log axis needs positive x");
            if (spec.log_y && y <= 0.0) continue; // zero errors fall off a log axis
            xmin = std::min(xmin, tx(x));
            xmax = std::max(xmax, tx(x));
            ymin = std::min(ymin, ty(y));
            ymax = std::max(ymax, ty(y));
        }
    if (spec.has_hline && (!spec.log_y || spec.hline > 0.0)) {
        ymin = std::min(ymin, ty(spec.hline));
        ymax = std::max(ymax, ty(spec.hline));
    }
    if (!std::isfinite(xmin)) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax - xmin < 1e-12) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax - ymin < 1e-12) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    // breathing room
    double xpad = 0.04 * (xmax - xmin), ypad = 0.06 * (ymax - ymin);
    xmin -= xpad;
    xmax += xpad;
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) { return ml + (tx(x) - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return mt + ph - (ty(y) - ymin) / (ymax - ymin) * ph; };

    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" viewBox=\"0 0 " << spec.width << " " << spec.height << "\">\n";
    f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    f << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << spec.title << "</text>\n";

    // frame
    f << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(pw)
      << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

    // ticks: 5 per axis in transformed space
    for (int i = 0; i <= 4; ++i) {
        double xi = xmin + (xmax - xmin) * i / 4.0;
        double yi = ymin + (ymax - ymin) * i / 4.0;
        double xv = spec.log_x ? std::pow(10.0, xi) : xi;
        double yv = spec.log_y ? std::pow(10.0, yi) : yi;
        double gx = ml + pw * i / 4.0;
        double gy = mt + ph - ph * i / 4.0;
        f << "<line x1=\"" << fmt(gx) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\"" << fmt(gx)
          << "\" y2=\"" << fmt(mt + ph + 5) << "\" stroke=\"black\"/>\n";
        f << "<text x=\"" << fmt(gx) << "\" y=\"" << fmt(mt + ph + 18)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(xv)
          << "</text>\n";
        f << "<line x1=\"" << fmt(ml - 5) << "\" y1=\"" << fmt(gy) << "\" x2=\"" << fmt(ml)
          << "\" y2=\"" << fmt(gy) << "\" stroke=\"black\"/>\n";
        f << "<text x=\"" << fmt(ml - 8) << "\" y=\"" << fmt(gy + 4)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(yv)
          << "</text>\n";
    }
    f << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(double(spec.height) - 8)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << spec.xlabel
      << "</text>\n";
    f << "<text x=\"16\" y=\"" << fmt(mt + ph / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 16 " << fmt(mt + ph / 2) << ")\">" << spec.ylabel << "</text>\n";

    if (spec.has_hline && (!spec.log_y || spec.hline > 0.0)) {
        double gy = py(spec.hline);
        f << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(gy) << "\" x2=\"" << fmt(ml + pw)
          << "\" y2=\"" << fmt(gy) << "\" stroke=\"black\" stroke-dasharray=\"6 4\"/>\n";
    }

    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kColors[si % 8];
        const auto& s = series[si];
        if (s.scatter) {
            for (auto [x, y] : s.points) {
                if (spec.log_y && y <= 0.0) continue;
                f << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y))
                  << "\" r=\"2.2\" fill=\"" << color << "\" fill-opacity=\"0.6\"/>\n";
            }
        } else if (!s.points.empty()) {
            f << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
            bool first = true;
            for (auto [x, y] : s.points) {
                if (spec.log_y && y <= 0.0) continue;
                if (!first) f << ' ';
                f << fmt(px(x)) << ',' << fmt(py(y));
                first = false;
            }
            f << "\"/>\n";
        }
        // legend entry
        double ly = mt + 14 + 16.0 * double(si);
        f << "<line x1=\"" << fmt(ml + pw - 130) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
          << fmt(ml + pw - 110) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
        f << "<text x=\"" << fmt(ml + pw - 104) << "\" y=\"" << fmt(ly)
          << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
    }
    f << "</svg>\n";
    if (!f) throw IoError("write failed: " + path);
}

} // namespace qdf
