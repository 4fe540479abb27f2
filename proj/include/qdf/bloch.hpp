#ifndef QDF_BLOCH_HPP
#define QDF_BLOCH_HPP

#include <complex>

#include <Eigen/Dense>

#include "qdf/ensemble.hpp"
#include "qdf/errors.hpp"
#include "qdf/schedule.hpp"

namespace qdf {

/// Per-voxel tissue parameters. delta_omega0 (off-resonance, rad/s) and
/// T2_prime (intra-voxel dephasing, ms; 0 disables it) extend the basic
/// (T1, T2, B1+) triple.
struct TissueParams {
    double T1_ms = 0.0;
    double T2_ms = 0.0;
    double B1_plus = 1.0;
    double delta_omega0 = 0.0;
    double T2_prime_ms = 0.0;

    /// InvalidParams on non-positive times or, unless allowed, T2 > T1.
    void validate(bool allow_unphysical = false) const;
};

/// Magnetization of every spin in the ensemble, struct-of-arrays.
struct SpinState {
    Eigen::ArrayXd Mx, My, Mz;

    static SpinState equilibrium(int spins);
    int spins() const { return static_cast<int>(Mx.size()); }
    /// Ensemble-averaged complex transverse magnetization.
    std::complex<double> transverse_mean() const;
};

/// Instantaneous rotation by flip * B1 * flip_scale(spin) about the
/// transverse axis at `phase_rad`. Left-handed about that axis, so an
/// ideal 90 deg pulse at phase 0 takes (0,0,1) to (0,1,0).
void rf_rotate(SpinState& state, double flip_deg, double phase_rad, const SpinEnsemble& ensemble,
               double B1_plus);

/// Free relaxation for dt: T1 recovery toward Mz = 1, T2 decay of the
/// transverse components.
void relax(SpinState& state, double dt_ms, double T1_ms, double T2_ms);

/// Relaxation plus per-spin precession at omega (rad/ms, counterclockwise).
void relax(SpinState& state, double dt_ms, double T1_ms, double T2_ms,
           const Eigen::ArrayXd& omega_rad_per_ms);

/// Advance each spin's transverse phase by its spoiling dephase angle.
void spoil(SpinState& state, const SpinEnsemble& ensemble);

struct SimOptions {
    /// Grid corners may combine T2 > T1; dictionary generation runs them anyway.
    bool allow_unphysical = false;
};

/// Ensemble-averaged complex signal at each echo of the train. Inversion
/// (when enabled) is an ideal instantaneous 180 unaffected by B1+ or the
/// slice profile; all readout pulses share phase 0. |s_m| <= 1.
Eigen::VectorXcd simulate_signal(const TissueParams& theta, const AcquisitionSchedule& schedule,
                                 const SpinEnsemble& ensemble, const SimOptions& opts = {});

} // namespace qdf

#endif
