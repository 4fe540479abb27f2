#ifndef QDF_RESOLVE_HPP
#define QDF_RESOLVE_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qdf/pgrid.hpp"
#include "qdf/spline.hpp"

namespace qdf {

/// Signal model evaluated at a physical parameter vector (axis order of
/// the grid). Used for edge signals and fresh audit references.
using ParamSimulator = std::function<Eigen::VectorXcd(const Eigen::VectorXd& theta)>;

struct ResolutionConfig {
    double alpha = 5e-4;      // target interpolation error (signal L2)
    double safety_factor = 2.0; // selection threshold is alpha / safety_factor
    int max_levels = 10;      // J; level j has K_j = 2^(j-1) + 1 nodes
    std::vector<int> orders = {0, 1, 2, 3};
    bool loglog_interp = true; // interpolate the error curve in log-log space
};

/// One edge of the parameter box: the probed axis varies over its full
/// range while every other axis sits at its minimum or maximum.
struct Edge {
    int axis = 0;
    std::vector<double> fixed_fraction; // 0 or 1 per axis; entry [axis] unused
};

/// The 2^(P-1) edges probing `axis`.
std::vector<Edge> edge_set(const ParameterGrid& grid, int axis);

struct ErrorCurvePoint {
    int K = 0;
    double max_error = 0.0; // max over edges and midpoints at this level
};

struct AxisResolution {
    int axis = 0;
    int order = 0;
    std::vector<ErrorCurvePoint> curve;
    bool reached = false;
    int selected_K = 0;          // valid when reached
    double floor_estimate = 0.0; // smallest error seen on the curve
};

/// Selection rule applied to a measured error curve: the smallest integer
/// K whose interpolated curve value is below the threshold at that count
/// and at every evaluated refinement beyond it. Fills reached/selected_K/
/// floor_estimate on the given entry.
void select_resolution_count(AxisResolution& entry, double threshold, bool loglog_interp);

struct ResolutionReport {
    ResolutionConfig config;
    std::vector<ParameterAxis> axes;
    std::vector<AxisResolution> entries; // axis-major, order in config order

    const AxisResolution& entry(int axis, int order) const;
    bool all_reached(int order) const;
    /// Product of selected counts for one order (no boundary padding).
    std::int64_t total_atoms(int order) const;
    /// Counts for one order, for ParameterGrid::with_counts.
    std::vector<int> selected_counts(int order) const;
};

/// Dyadic refinement along the edges of one axis: at level j build a 1-D
/// spline through K_j = 2^(j-1) + 1 uniformly spaced nodes, measure the
/// max L2 interpolation error at the midpoints between nodes, and select
/// the smallest K whose interpolated error curve stays below
/// alpha/safety_factor there and at every evaluated refinement beyond.
/// Node and midpoint signals nest across levels and are simulated once.
std::vector<AxisResolution> estimate_axis_resolution(const ParameterGrid& domain, int axis,
                                                     const ResolutionConfig& config,
                                                     const ParamSimulator& sim, int threads = 0);

/// estimate_axis_resolution for every axis.
ResolutionReport estimate_grid_resolution(const ParameterGrid& domain,
                                          const ResolutionConfig& config,
                                          const ParamSimulator& sim, int threads = 0);

/// Interpolation error statistics over uniformly drawn interior grid
/// positions (rejection-sampled to T2 <= T1 when both axes are present).
struct AuditSample {
    Eigen::VectorXd v;
    Eigen::VectorXd theta;
    double error = 0.0;
};

struct AuditStats {
    double rms = 0.0;
    double max_error = 0.0;
    double exceed_fraction = 0.0; // share of samples with error > alpha
    std::vector<AuditSample> samples;
};

using Interpolant = std::function<Eigen::VectorXcd(const Eigen::VectorXd& v)>;

AuditStats interior_error_audit(const ParameterGrid& grid, const Interpolant& interp,
                                const ParamSimulator& sim, int samples, double alpha,
                                std::uint64_t seed, int threads = 0);

/// Audit a prefiltered model.
AuditStats interior_error_audit(const SplineModel& model, const ParamSimulator& sim, int samples,
                                double alpha, std::uint64_t seed, int threads = 0);

/// Nearest-neighbor audit that simulates only the visited nodes, for
/// dense grids too large to materialize.
AuditStats interior_error_audit_nearest(const ParameterGrid& grid, const ParamSimulator& sim,
                                        int samples, double alpha, std::uint64_t seed,
                                        int threads = 0);

} // namespace qdf

#endif
