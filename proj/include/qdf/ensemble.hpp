#ifndef QDF_ENSEMBLE_HPP
#define QDF_ENSEMBLE_HPP

#include <Eigen/Dense>

#include "qdf/errors.hpp"

namespace qdf {

/// Discretized slice-profile ensemble. Spin i sits at slice_offsets[i]
/// (units of slice width, spanning twice the slice width), is excited with
/// efficiency flip_scale[i], and accrues dephase_angles[i] of extra
/// transverse phase per TR from the unbalanced gradient.
struct SpinEnsemble {
    Eigen::VectorXd slice_offsets;  // [N], dimensionless
    Eigen::VectorXd flip_scale;     // [N] in [0, 1]
    Eigen::VectorXd dephase_angles; // [N] radians, uniform over [0, 2pi)
    Eigen::VectorXd unit_freq;      // [N] unit-Cauchy samples; scaled by 1/T2' when used

    int spins() const { return static_cast<int>(slice_offsets.size()); }
    void validate() const;
};

/// Small-tip slice profile of a truncated-sinc excitation pulse with the
/// given time-bandwidth product, at a position in slice-width units.
/// Normalized so the profile is 1 at the slice center.
double slice_profile(double position, double time_bandwidth = 3.0);

/// Ensemble of N spins uniformly covering twice the slice width, with
/// truncated-sinc flip scaling, 2*pi*k/N spoiling angles, and stratified
/// unit-Cauchy frequency offsets for the optional intra-voxel dephasing.
SpinEnsemble make_ensemble(int spins = 200, double time_bandwidth = 3.0);

/// Degenerate single-spin ensemble with ideal excitation and no spoiling.
SpinEnsemble single_spin_ensemble();

} // namespace qdf

#endif
