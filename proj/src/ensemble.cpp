#include "qdf/ensemble.hpp"

#include <cmath>

namespace qdf {

void SpinEnsemble::validate() const {
    if (spins() < 1) throw InvalidParams("ensemble needs at least one spin");
    if (flip_scale.size() != spins() || dephase_angles.size() != spins() ||
        unit_freq.size() != spins())
        throw InvalidParams("ensemble field lengths differ");
    for (int i = 0; i < spins(); ++i)
        if (flip_scale[i] < 0.0 || flip_scale[i] > 1.0)
            throw InvalidParams("flip_scale outside [0, 1]");
}

namespace {

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    return std::sin(M_PI * x) / (M_PI * x);
}

// integral over tau in [-1/2, 1/2] of sinc(tbw*tau) * cos(2*pi*x*tbw*tau),
// composite Simpson with 512 intervals
double profile_integral(double x, double tbw) {
    const int n = 512;
    const double h = 1.0 / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        double tau = -0.5 + i * h;
        double f = sinc(tbw * tau) * std::cos(2.0 * M_PI * x * tbw * tau);
        double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * f;
    }
    return acc * h / 3.0;
}

} // namespace

double slice_profile(double position, double time_bandwidth) {
    return profile_integral(position, time_bandwidth) / profile_integral(0.0, time_bandwidth);
}

SpinEnsemble make_ensemble(int spins, double time_bandwidth) {
    if (spins < 1) throw InvalidParams("ensemble needs at least one spin");
    SpinEnsemble e;
    e.slice_offsets.resize(spins);
    e.flip_scale.resize(spins);
    e.dephase_angles.resize(spins);
    e.unit_freq.resize(spins);
    for (int i = 0; i < spins; ++i) {
        // cell centers over [-1, 1] slice widths
        double x = -1.0 + 2.0 * (i + 0.5) / spins;
        e.slice_offsets[i] = x;
        double p = slice_profile(x, time_bandwidth);
        e.flip_scale[i] = std::min(1.0, std::max(0.0, p));
        e.dephase_angles[i] = 2.0 * M_PI * i / spins;
        // stratified quantiles of the standard Cauchy distribution
        double u = (i + 0.5) / spins;
        e.unit_freq[i] = std::tan(M_PI * (u - 0.5));
    }
    return e;
}

SpinEnsemble single_spin_ensemble() {
    SpinEnsemble e;
    e.slice_offsets = Eigen::VectorXd::Zero(1);
    e.flip_scale = Eigen::VectorXd::Ones(1);
    e.dephase_angles = Eigen::VectorXd::Zero(1);
    e.unit_freq = Eigen::VectorXd::Zero(1);
    return e;
}

} // namespace qdf
