#include "qdf/experiments.hpp"

#include <cstdio>
#include <fstream>

#include "qdf/plot.hpp"

namespace qdf {

ResolutionReport error_decay_experiment(const ParameterGrid& domain,
                                        const ResolutionConfig& config,
                                        const ParamSimulator& sim, int threads) {
    return estimate_grid_resolution(domain, config, sim, threads);
}

void write_resolution_csv(const ResolutionReport& report, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << "axis,n,j,K,max_error\n";
    char buf[96];
    for (const auto& e : report.entries) {
        for (std::size_t j = 0; j < e.curve.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%s,%d,%zu,%d,%.10g\n",
                          report.axes[e.axis].name.c_str(), e.order, j + 1, e.curve[j].K,
                          e.curve[j].max_error);
            f << buf;
        }
    }
    if (!f) throw IoError("write failed: " + path);
}

void write_selected_csv(const ResolutionReport& report, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << "axis,n,reached,selected_K,error_floor\n";
    char buf[96];
    for (const auto& e : report.entries) {
        std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%.10g\n", report.axes[e.axis].name.c_str(),
                      e.order, e.reached ? 1 : 0, e.reached ? e.selected_K : 0,
                      e.floor_estimate);
        f << buf;
    }
    if (!f) throw IoError("write failed: " + path);
}

void emit_resolution_svg(const ResolutionReport& report, const std::string& prefix) {
    for (std::size_t p = 0; p < report.axes.size(); ++p) {
        std::vector<PlotSeries> series;
        for (const auto& e : report.entries) {
            if (e.axis != static_cast<int>(p)) continue;
            PlotSeries s;
            char label[48];
            if (e.reached)
                std::snprintf(label, sizeof label, "n=%d (K=%d)", e.order, e.selected_K);
            else
                std::snprintf(label, sizeof label, "n=%d (not reached)", e.order);
            s.label = label;
            for (const auto& pt : e.curve) s.points.emplace_back(double(pt.K), pt.max_error);
            series.push_back(std::move(s));
        }
        PlotSpec spec;
        spec.title = "interpolation error along the " + report.axes[p].name + " edges";
        spec.xlabel = "atoms per dimension";
        spec.ylabel = "max midpoint error";
        spec.log_x = spec.log_y = true;
        spec.has_hline = true;
        spec.hline = report.config.alpha;
        emit_plot(spec, series, prefix + "_" + report.axes[p].name + ".svg");
    }
}

void write_audit_csv(const AuditStats& stats, const ParameterGrid& grid,
                     const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << "sample";
    for (const auto& a : grid.axes) f << ",v_" << a.name << ',' << a.name;
    f << ",error\n";
    char buf[64];
    for (std::size_t i = 0; i < stats.samples.size(); ++i) {
        f << i;
        for (int p = 0; p < grid.dims(); ++p) {
            std::snprintf(buf, sizeof buf, ",%.10g,%.10g", stats.samples[i].v[p],
                          stats.samples[i].theta[p]);
            f << buf;
        }
        std::snprintf(buf, sizeof buf, ",%.10g\n", stats.samples[i].error);
        f << buf;
    }
    if (!f) throw IoError("write failed: " + path);
}

void emit_audit_svg(const AuditStats& stats, const ParameterGrid& grid, double alpha,
                    const std::string& prefix) {
    for (int p = 0; p < grid.dims(); ++p) {
        PlotSeries s;
        s.label = "samples";
        s.scatter = true;
        for (const auto& smp : stats.samples) s.points.emplace_back(smp.theta[p], smp.error);
        PlotSpec spec;
        spec.title = "interior interpolation error vs " + grid.axes[p].name;
        spec.xlabel = grid.axes[p].name;
        spec.ylabel = "interpolation error";
        spec.log_x = grid.axes[p].spacing == Spacing::Log;
        spec.log_y = true;
        spec.has_hline = true;
        spec.hline = alpha;
        emit_plot(spec, {s}, prefix + "_" + grid.axes[p].name + ".svg");
    }
}

ParityResult parity_experiment(const SyntheticPhantom& phantom,
                               const AcquisitionSchedule& schedule, const SpinEnsemble& ensemble,
                               const Dictionary& dense, const Dictionary& sparse,
                               const SplineModel& sparse_model, const ParityConfig& config) {
    ComplexMatrixRM signals = phantom_signals(phantom, schedule, ensemble, config.threads);
    ParityResult out;
    out.sigma = sigma_for_snr(signals, phantom.labels, config.snr);
    add_noise(signals, {out.sigma, config.seed});
    out.match = estimate_map(signals, phantom, dense, nullptr, Method::Match, {}, config.threads);
    out.fit = estimate_map(signals, phantom, sparse, &sparse_model, Method::Fit,
                           config.fit_options, config.threads);
    return out;
}

void write_parity_csv(const ParityResult& result, const ParameterGrid& grid,
                      const std::string& prefix) {
    write_roi_csv(result.match.roi, prefix + "_match_roi.csv");
    write_roi_csv(result.fit.roi, prefix + "_fit_roi.csv");
    write_estimates_csv(result.match.estimates, grid, prefix + "_match_voxels.csv");
    write_estimates_csv(result.fit.estimates, grid, prefix + "_fit_voxels.csv");

    std::ofstream f(prefix + "_summary.csv");
    if (!f) throw IoError("cannot open " + prefix + "_summary.csv for writing");
    char buf[256];
    f << "metric,match,fit,ratio_fit_over_match\n";
    double m1 = result.match.roi.median_rmse_T1(), f1 = result.fit.roi.median_rmse_T1();
    double m2 = result.match.roi.median_rmse_T2(), f2 = result.fit.roi.median_rmse_T2();
    std::snprintf(buf, sizeof buf, "median_rmse_T1_pct,%.10g,%.10g,%.10g\n", m1, f1, f1 / m1);
    f << buf;
    std::snprintf(buf, sizeof buf, "median_rmse_T2_pct,%.10g,%.10g,%.10g\n", m2, f2, f2 / m2);
    f << buf;
    std::snprintf(buf, sizeof buf, "estimate_seconds,%.10g,%.10g,%.10g\n",
                  result.match.timing.estimate_s, result.fit.timing.estimate_s,
                  result.fit.timing.estimate_s / result.match.timing.estimate_s);
    f << buf;
    std::snprintf(buf, sizeof buf, "sigma,%.10g,,\n", result.sigma);
    f << buf;
    if (!f) throw IoError("write failed: " + prefix + "_summary.csv");
}

} // namespace qdf
