#ifndef QDF_SPLINE_HPP
#define QDF_SPLINE_HPP

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qdf/dictionary.hpp"
#include "qdf/pgrid.hpp"

namespace qdf {

/// Centered B-spline basis of degree n in {0,1,2,3}: piecewise polynomial,
/// support width n+1, partition of unity over integer shifts. The degree-0
/// box is 1 on (-1/2, 1/2], so half-integer ties resolve toward the lower
/// node index.
double basis_value(int order, double x);

/// d/dx of the basis: beta^{n-1}(x + 1/2) - beta^{n-1}(x - 1/2).
/// Unsupported for order 0.
double basis_derivative(int order, double x);

/// Tensor-product B-spline interpolant of vector-valued atoms on the grid
/// coordinate box [1, K_p]^P. For orders >= 2 the coefficient lattice is
/// extended by one node per side; the extra coefficients encode the
/// boundary-derivative condition applied during prefiltering.
struct SplineModel {
    int order = 1;
    ParameterGrid grid;
    int channels = 0;      // L or M
    int extension = 0;     // nodes added per side (1 when order >= 2)
    ComplexMatrixRM coefficients; // [prod (K_p + 2*extension) x channels]

    int dims() const { return grid.dims(); }
    int extended_size(int axis) const { return grid.axes[axis].K + 2 * extension; }

    Eigen::VectorXcd evaluate(const Eigen::VectorXd& v) const;

    /// Value plus the gradient d s~ / d v as a [channels x P] matrix.
    std::pair<Eigen::VectorXcd, Eigen::MatrixXcd>
    evaluate_with_gradient(const Eigen::VectorXd& v) const;
};

/// Solve for coefficients such that the interpolant reproduces the atoms
/// at every grid node. Orders 0 and 1 copy the atoms; orders 2 and 3 run
/// per-axis banded collocation solves with one extension node per side
/// whose row equates the interpolant derivative at the boundary node with
/// the one-sided second-order numerical derivative of the data.
/// Requires K_p >= 2, and K_p >= 3 for orders >= 2.
SplineModel prefilter_coefficients(const ComplexMatrixRM& atoms, const ParameterGrid& grid,
                                   int order, int threads = 0);

/// Prefilter a dictionary's stored atoms.
SplineModel build_spline(const Dictionary& dict, int order, int threads = 0);

} // namespace qdf

#endif
