#ifndef QDF_IMAGE_HPP
#define QDF_IMAGE_HPP

#include <string>
#include <vector>

namespace qdf {

/// Grayscale parameter map: writes <base>.pgm (binary 8-bit, values
/// windowed to [lo, hi]) and <base>.f32 (raw little-endian float32,
/// row-major). Byte-deterministic.
void emit_map(const std::vector<double>& values, int rows, int cols, double window_lo,
              double window_hi, const std::string& base_path);

} // namespace qdf

#endif
