#ifndef QDF_NOISE_HPP
#define QDF_NOISE_HPP

#include <cstdint>
#include <random>

#include "qdf/dictionary.hpp"

namespace qdf {

/// Complex Gaussian noise: real and imaginary parts i.i.d. N(0, sigma^2)
/// per entry. sigma is in signal units (the coherent maximum is 1).
struct NoiseModel {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Deterministic normal sampler (Box-Muller on the mt19937_64 stream) so
/// equal seeds give bit-identical draws on every platform.
class GaussianSampler {
  public:
    explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}
    double next();

  private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Adds noise in place, row by row in order; seed-deterministic and
/// independent of any threading used elsewhere.
void add_noise(ComplexMatrixRM& signals, const NoiseModel& noise);

} // namespace qdf

#endif
