#include "qdf/noise.hpp"

#include <cmath>

namespace qdf {

double GaussianSampler::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1], u2 in [0, 1)
    double u1 = 1.0 - double(rng_() >> 11) * 0x1.0p-53;
    double u2 = double(rng_() >> 11) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
}

void add_noise(ComplexMatrixRM& signals, const NoiseModel& noise) {
    if (noise.sigma < 0.0) throw InvalidParams("noise sigma must be >= 0");
    if (noise.sigma == 0.0) return;
    GaussianSampler g(noise.seed);
    for (Eigen::Index i = 0; i < signals.rows(); ++i)
        for (Eigen::Index j = 0; j < signals.cols(); ++j) {
            double re = noise.sigma * g.next();
            double im = noise.sigma * g.next();
            signals(i, j) += std::complex<double>(re, im);
        }
}

} // namespace qdf
