#ifndef QDF_SCHEDULE_HPP
#define QDF_SCHEDULE_HPP

#include <string>

#include <Eigen/Dense>

#include "qdf/errors.hpp"

namespace qdf {

/// Pulse-train timing: one flip angle / TR pair per excitation, plus the
/// inversion, echo and post-train delays shared by the whole train.
struct AcquisitionSchedule {
    Eigen::VectorXd flip_deg;  // [M] nominal flip angles, degrees
    Eigen::VectorXd tr_ms;     // [M] repetition times, ms
    double inversion_time_ms = 40.0;
    double echo_time_ms = 2.5;
    double train_delay_ms = 5000.0;
    bool inversion_enabled = true;

    int length() const { return static_cast<int>(flip_deg.size()); }

    /// Throws InvalidParams when any invariant is violated
    /// (M >= 1, flips in [0, 180], TR > TE > 0, TI/TD >= 0).
    void validate() const;
};

/// Default train: sinusoidal flip-angle lobes with cycling peak amplitudes
/// and a smoothly wandering TR, preceded by an inversion. Deterministic.
AcquisitionSchedule default_schedule(int rows = 1000);

/// CSV with header "flip_deg,tr_ms", one row per excitation. Timing fields
/// are not part of the file; callers set them separately.
void save_schedule_csv(const AcquisitionSchedule& s, const std::string& path);
AcquisitionSchedule load_schedule_csv(const std::string& path);

} // namespace qdf

#endif
