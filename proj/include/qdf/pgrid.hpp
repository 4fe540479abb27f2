#ifndef QDF_PGRID_HPP
#define QDF_PGRID_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdf/errors.hpp"

namespace qdf {

enum class Spacing : std::uint8_t { Linear = 0, Log = 1 };

/// One parameter dimension: its physical range, node count K and the
/// spacing law of the grid-coordinate mapping f_p: [1, K] -> [min, max].
struct ParameterAxis {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    int K = 2;
    Spacing spacing = Spacing::Linear;

    ParameterAxis() = default;
    ParameterAxis(std::string name_, double min_, double max_, int K_, Spacing spacing_);

    /// f_p(v), defined for real v; `ext` widens the accepted coordinate
    /// range to [1 - ext, K + ext] (used by spline boundary extension).
    double to_param(double v, double ext = 0.0) const;
    /// f_p^{-1}(theta) for theta in [min, max].
    double to_coord(double theta) const;
    /// Range fraction t in [0, 1] to a physical value, independent of K.
    double fraction_to_param(double t) const;
};

/// Tensor grid of P axes. Grid coordinates are 1-based per axis; the
/// canonical linear order over integer indices is lexicographic with the
/// last axis fastest.
struct ParameterGrid {
    std::vector<ParameterAxis> axes;

    ParameterGrid() = default;
    explicit ParameterGrid(std::vector<ParameterAxis> axes_);

    int dims() const { return static_cast<int>(axes.size()); }
    std::int64_t atom_count() const;

    Eigen::VectorXd to_params(const Eigen::VectorXd& v, double ext = 0.0) const;
    Eigen::VectorXd to_coords(const Eigen::VectorXd& theta) const;

    /// Canonical linear index of an integer index vector (1-based entries).
    std::int64_t linear_index(const std::vector<int>& k) const;
    /// Inverse of linear_index.
    std::vector<int> index_vector(std::int64_t linear) const;

    /// All integer index vectors in canonical order.
    std::vector<std::vector<int>> iter_indices() const;

    /// Position of the axis with the given name, or -1.
    int axis_index(const std::string& name) const;

    /// Same ranges and spacing laws with new node counts.
    ParameterGrid with_counts(const std::vector<int>& counts) const;
};

/// Parse an axis declaration of the form "T1 log 5 6000 13".
ParameterAxis parse_axis(const std::string& line);

} // namespace qdf

#endif
