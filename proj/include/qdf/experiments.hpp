#ifndef QDF_EXPERIMENTS_HPP
#define QDF_EXPERIMENTS_HPP

#include <string>

#include "qdf/metrics.hpp"
#include "qdf/resolve.hpp"

namespace qdf {

/// Resolution curves for all configured orders plus their emission as CSV
/// (axis, n, j, K_j, max_error), per-axis selected-count summary, and
/// per-axis decay plots with the target-error line.
ResolutionReport error_decay_experiment(const ParameterGrid& domain,
                                        const ResolutionConfig& config,
                                        const ParamSimulator& sim, int threads = 0);

void write_resolution_csv(const ResolutionReport& report, const std::string& path);
void write_selected_csv(const ResolutionReport& report, const std::string& path);
/// One SVG per axis: <prefix>_<axis-name>.svg
void emit_resolution_svg(const ResolutionReport& report, const std::string& prefix);

/// Audit emission: per-sample CSV (coordinates, parameters, error) and a
/// scatter of E_int against each parameter with the alpha line,
/// <prefix>_<axis-name>.svg.
void write_audit_csv(const AuditStats& stats, const ParameterGrid& grid,
                     const std::string& path);
void emit_audit_svg(const AuditStats& stats, const ParameterGrid& grid, double alpha,
                    const std::string& prefix);

/// Matching on the dense dictionary and fitting on the sparse model over
/// the same noisy signals; per-method per-ROI reports plus timings.
struct ParityConfig {
    double snr = 30.0;
    std::uint64_t seed = 1;
    int threads = 0;
    FitOptions fit_options;
};

struct ParityResult {
    double sigma = 0.0;
    MapResult match; // dense dictionary, discrete
    MapResult fit;   // sparse dictionary, continuous
};

ParityResult parity_experiment(const SyntheticPhantom& phantom,
                               const AcquisitionSchedule& schedule, const SpinEnsemble& ensemble,
                               const Dictionary& dense, const Dictionary& sparse,
                               const SplineModel& sparse_model, const ParityConfig& config);

/// Per-method ROI CSVs plus a combined summary with the RMSE ratios.
void write_parity_csv(const ParityResult& result, const ParameterGrid& grid,
                      const std::string& prefix);

} // namespace qdf

#endif
