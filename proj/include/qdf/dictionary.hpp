#ifndef QDF_DICTIONARY_HPP
#define QDF_DICTIONARY_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "qdf/bloch.hpp"
#include "qdf/pgrid.hpp"

namespace qdf {

using ComplexMatrixRM =
    Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Time-domain compression basis: the top-L singular directions of the
/// atom matrix along the time dimension.
struct CompressionBasis {
    Eigen::MatrixXcd V;               // [M x L], orthonormal columns
    Eigen::VectorXd singular_values;  // [L], non-increasing
    double energy_fraction = 1.0;     // sum of kept sigma^2 over total
    bool rank_deficient = false;      // sigma_L < 1e-12 * sigma_1

    int time_length() const { return static_cast<int>(V.rows()); }
    int rank() const { return static_cast<int>(V.cols()); }
};

/// Precomputed signal dictionary over a parameter grid, one atom row per
/// grid index in canonical order. Rows hold either raw time courses
/// (compressed_length == 0) or their projections onto the basis.
struct Dictionary {
    ParameterGrid grid;
    int signal_length = 0;     // M of the originating schedule
    int compressed_length = 0; // L; 0 = uncompressed
    ComplexMatrixRM atoms;     // [prod K_p x columns()]
    Eigen::VectorXd norms;     // [prod K_p] L2 norms of the stored rows
    std::array<std::uint8_t, 32> fingerprint{}; // schedule + ensemble hash
    std::optional<CompressionBasis> basis;

    int columns() const { return compressed_length > 0 ? compressed_length : signal_length; }
    std::int64_t atom_rows() const { return atoms.rows(); }
};

/// Map a grid parameter vector onto tissue parameters by axis name.
/// Recognized names: T1, T2, B1, dw0, T2p.
TissueParams tissue_from_axes(const ParameterGrid& grid, const Eigen::VectorXd& theta);

/// Fingerprint of the acquisition configuration stored in dictionary files
/// so a dictionary and a schedule can be cross-checked. Not cryptographic.
std::array<std::uint8_t, 32> acquisition_fingerprint(const AcquisitionSchedule& schedule,
                                                     const SpinEnsemble& ensemble);

/// Simulate every atom of the grid in canonical order. Grid corners with
/// T2 > T1 are generated like any other atom.
Dictionary generate_dictionary(const ParameterGrid& grid, const AcquisitionSchedule& schedule,
                               const SpinEnsemble& ensemble, int threads = 0);

/// Truncated SVD of the atom matrix along time. Returns the basis and the
/// projected atoms V_L^H s(f(k)) as rows.
std::pair<CompressionBasis, ComplexMatrixRM> svd_truncate(const Dictionary& dict, int L);

/// Compressed copy of a raw dictionary (atoms, norms and basis replaced).
Dictionary compress_dictionary(const Dictionary& dict, int L);

/// Two-pass streaming build of a compressed dictionary: accumulate the
/// time-domain Gram matrix over all atoms, then regenerate and project.
/// Keeps peak memory at O(atoms * L) for grids too large to hold raw.
Dictionary generate_compressed_dictionary(const ParameterGrid& grid,
                                          const AcquisitionSchedule& schedule,
                                          const SpinEnsemble& ensemble, int L, int threads = 0);

/// V_L^H m.
Eigen::VectorXcd project_signal(const Eigen::VectorXcd& m, const CompressionBasis& basis);

} // namespace qdf

#endif
