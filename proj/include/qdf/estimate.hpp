#ifndef QDF_ESTIMATE_HPP
#define QDF_ESTIMATE_HPP

#include <complex>
#include <utility>

#include <Eigen/Dense>

#include "qdf/dictionary.hpp"
#include "qdf/spline.hpp"

namespace qdf {

/// Least-squares complex scale: rho = (s^H m) / (s^H s).
std::complex<double> optimal_scale(const Eigen::VectorXcd& m, const Eigen::VectorXcd& s);

struct MatchResult {
    std::int64_t atom = -1;
    std::complex<double> rho{0.0, 0.0};
    double score = 0.0; // |m^H s| / ||s||
    bool zero_signal = false;
};

/// Exhaustive argmax of the normalized absolute inner product over all
/// atoms; ties break toward the lowest canonical index. A zero-norm input
/// comes back flagged with rho = 0 rather than as an error.
MatchResult match_dictionary(const Eigen::VectorXcd& m, const Dictionary& dict);

/// Matching for a block of signals (rows), parallel over row blocks.
std::vector<MatchResult> match_dictionary_batch(const ComplexMatrixRM& signals,
                                                const Dictionary& dict, int threads = 0);

struct FitOptions {
    double abs_decrease_tol = 1e-5; // stop when the objective drops less than this
    int max_iterations = 100;
    bool multi_start = false; // extra starts one grid step toward the interior
};

struct VoxelEstimate {
    Eigen::VectorXd v_hat;     // grid coordinates in [1, K_p]
    Eigen::VectorXd theta_hat; // f(v_hat)
    std::complex<double> rho_hat{0.0, 0.0};
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    bool zero_signal = false;
};

/// Variable-projection objective ||m||^2 - |m^H s~(v)|^2 / ||s~(v)||^2:
/// the least-squares misfit minimized over the complex scale, with its
/// gradient in v.
std::pair<double, Eigen::VectorXd> reduced_objective(const Eigen::VectorXcd& m,
                                                     const SplineModel& model,
                                                     const Eigen::VectorXd& v);
double reduced_objective_value(const Eigen::VectorXcd& m, const SplineModel& model,
                               const Eigen::VectorXd& v);

/// Box-constrained quasi-Newton descent on the reduced objective from the
/// given start. Monotone over accepted iterates; stops when the absolute
/// decrease falls below tolerance, at stationarity, or at the iteration
/// cap (converged=false in the last case).
VoxelEstimate fit_spline(const Eigen::VectorXcd& m, const SplineModel& model,
                         const FitOptions& options, const Eigen::VectorXd& start);

/// Dictionary match for the initial node, then fit_spline.
VoxelEstimate estimate_voxel(const Eigen::VectorXcd& m, const SplineModel& model,
                             const Dictionary& dict, const FitOptions& options = {});

/// Match-only estimate (discrete): the matched node as a VoxelEstimate.
VoxelEstimate match_voxel(const Eigen::VectorXcd& m, const Dictionary& dict);

} // namespace qdf

#endif
