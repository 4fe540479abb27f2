#include "qdf/bloch.hpp"

#include <cmath>

namespace qdf {

void TissueParams::validate(bool allow_unphysical) const {
    if (!(T1_ms > 0.0) || !(T2_ms > 0.0)) throw InvalidParams("relaxation times must be > 0");
    if (!(B1_plus > 0.0)) throw InvalidParams("B1+ must be > 0");
    if (T2_prime_ms < 0.0) throw InvalidParams("T2' must be >= 0");
    if (!allow_unphysical && T2_ms > T1_ms) throw InvalidParams("T2 > T1 is unphysical");
}

SpinState SpinState::equilibrium(int spins) {
    SpinState s;
    s.Mx = Eigen::ArrayXd::Zero(spins);
    s.My = Eigen::ArrayXd::Zero(spins);
    s.Mz = Eigen::ArrayXd::Ones(spins);
    return s;
}

std::complex<double> SpinState::transverse_mean() const {
    return {Mx.mean(), My.mean()};
}

void rf_rotate(SpinState& state, double flip_deg, double phase_rad, const SpinEnsemble& ensemble,
               double B1_plus) {
    if (flip_deg == 0.0) return;
    const double k = flip_deg * M_PI / 180.0 * B1_plus;
    Eigen::ArrayXd c = (k * ensemble.flip_scale.array()).cos();
    Eigen::ArrayXd s = (k * ensemble.flip_scale.array()).sin();
    if (phase_rad == 0.0) {
        Eigen::ArrayXd my = state.My * c + state.Mz * s;
        state.Mz = -state.My * s + state.Mz * c;
        state.My = my;
        return;
    }
    const double cp = std::cos(phase_rad), sp = std::sin(phase_rad);
    Eigen::ArrayXd a = state.Mx * cp + state.My * sp;  // along the rotation axis
    Eigen::ArrayXd b = -state.Mx * sp + state.My * cp; // transverse, perpendicular
    Eigen::ArrayXd b2 = b * c + state.Mz * s;
    state.Mz = -b * s + state.Mz * c;
    state.Mx = a * cp - b2 * sp;
    state.My = a * sp + b2 * cp;
}

void relax(SpinState& state, double dt_ms, double T1_ms, double T2_ms) {
    if (dt_ms < 0.0) throw InvalidParams("relax: dt must be >= 0");
    if (dt_ms == 0.0) return;
    const double e1 = std::exp(-dt_ms / T1_ms);
    const double e2 = std::exp(-dt_ms / T2_ms);
    state.Mx *= e2;
    state.My *= e2;
    state.Mz = 1.0 + (state.Mz - 1.0) * e1;
}

void relax(SpinState& state, double dt_ms, double T1_ms, double T2_ms,
           const Eigen::ArrayXd& omega_rad_per_ms) {
    if (dt_ms < 0.0) throw InvalidParams("relax: dt must be >= 0");
    if (dt_ms == 0.0) return;
    const double e1 = std::exp(-dt_ms / T1_ms);
    const double e2 = std::exp(-dt_ms / T2_ms);
    Eigen::ArrayXd c = (omega_rad_per_ms * dt_ms).cos();
    Eigen::ArrayXd s = (omega_rad_per_ms * dt_ms).sin();
    Eigen::ArrayXd mx = e2 * (state.Mx * c - state.My * s);
    state.My = e2 * (state.Mx * s + state.My * c);
    state.Mx = mx;
    state.Mz = 1.0 + (state.Mz - 1.0) * e1;
}

void spoil(SpinState& state, const SpinEnsemble& ensemble) {
    Eigen::ArrayXd c = ensemble.dephase_angles.array().cos();
    Eigen::ArrayXd s = ensemble.dephase_angles.array().sin();
    Eigen::ArrayXd mx = state.Mx * c - state.My * s;
    state.My = state.Mx * s + state.My * c;
    state.Mx = mx;
}

Eigen::VectorXcd simulate_signal(const TissueParams& theta, const AcquisitionSchedule& schedule,
                                 const SpinEnsemble& ensemble, const SimOptions& opts) {
    schedule.validate();
    ensemble.validate();
    theta.validate(opts.allow_unphysical);

    const int M = schedule.length();
    const int N = ensemble.spins();
    const double T1 = theta.T1_ms, T2 = theta.T2_ms;

    const bool precessing = theta.delta_omega0 != 0.0 || theta.T2_prime_ms > 0.0;
    Eigen::ArrayXd omega; // rad/ms per spin
    if (precessing) {
        omega = Eigen::ArrayXd::Constant(N, theta.delta_omega0 * 1e-3);
        if (theta.T2_prime_ms > 0.0)
            omega += ensemble.unit_freq.array() / theta.T2_prime_ms;
    }

    // Spoiling phase advance fused into one complex multiply per spin.
    const Eigen::ArrayXd cd = ensemble.dephase_angles.array().cos();
    const Eigen::ArrayXd sd = ensemble.dephase_angles.array().sin();
    const Eigen::ArrayXd scale = ensemble.flip_scale.array() * (M_PI / 180.0 * theta.B1_plus);

    SpinState st = SpinState::equilibrium(N);
    if (schedule.inversion_enabled) {
        st.Mz = -st.Mz; // ideal adiabatic 180
        if (precessing)
            relax(st, schedule.inversion_time_ms, T1, T2, omega);
        else
            relax(st, schedule.inversion_time_ms, T1, T2);
    }

    Eigen::VectorXcd signal(M);
    const double TE = schedule.echo_time_ms;
    Eigen::ArrayXd c(N), s(N), tmp(N);
    for (int m = 0; m < M; ++m) {
        c = (schedule.flip_deg[m] * scale).cos();
        s = (schedule.flip_deg[m] * scale).sin();
        tmp = st.My * c + st.Mz * s;
        st.Mz = -st.My * s + st.Mz * c;
        st.My = tmp;

        if (precessing)
            relax(st, TE, T1, T2, omega);
        else
            relax(st, TE, T1, T2);
        signal[m] = st.transverse_mean();

        const double rest = schedule.tr_ms[m] - TE;
        if (precessing)
            relax(st, rest, T1, T2, omega);
        else
            relax(st, rest, T1, T2);

        tmp = st.Mx * cd - st.My * sd;
        st.My = st.Mx * sd + st.My * cd;
        st.Mx = tmp;
    }
    if (schedule.train_delay_ms > 0.0) relax(st, schedule.train_delay_ms, T1, T2);
    return signal;
}

} // namespace qdf
