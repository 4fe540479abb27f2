#ifndef QDF_IO_HPP
#define QDF_IO_HPP

#include <string>

#include "qdf/dictionary.hpp"
#include "qdf/spline.hpp"

namespace qdf {

/// Dictionary container, little-endian, CRC32-terminated:
///   magic "QDFD", version u32, P u16, M u32, L u32 (0 = uncompressed),
///   per axis {name_len u8, name, spacing u8, min f64, max f64, K u32},
///   schedule hash 32 B, atoms complex32 row-major, atom norms f32,
///   then for L > 0: V_L complex32 [M x L] row-major and singular values
///   f32[L], then CRC32 over all preceding bytes.
void save_dictionary(const Dictionary& dict, const std::string& path);
Dictionary load_dictionary(const std::string& path);

/// Spline coefficient cache: the same container framing with magic "QDFC"
/// and an order byte after the version; coefficients are stored as
/// complex64 so reloaded models keep node exactness.
void save_spline(const SplineModel& model, const std::string& path);
SplineModel load_spline(const std::string& path);

/// Voxel signal set: magic "QDFS", signal length u32 (M or L), voxel
/// count u32, payload complex32 row-major.
struct SignalSet {
    int length = 0;
    ComplexMatrixRM signals; // [count x length]
};
void save_signals(const SignalSet& set, const std::string& path);
SignalSet load_signals(const std::string& path);

} // namespace qdf

#endif
