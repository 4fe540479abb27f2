#include "qdf/spline.hpp"

#include <cmath>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "qdf/parallel.hpp"

namespace qdf {

double basis_value(int order, double x) {
    const double a = std::abs(x);
    switch (order) {
    case 0:
        return (x > -0.5 && x <= 0.5) ? 1.0 : 0.0;
    case 1:
        return a < 1.0 ? 1.0 - a : 0.0;
    case 2:
        if (a < 0.5) return 0.75 - a * a;
        if (a < 1.5) {
            double t = 1.5 - a;
            return 0.5 * t * t;
        }
        return 0.0;
    case 3:
        if (a < 1.0) return 2.0 / 3.0 - a * a + 0.5 * a * a * a;
        if (a < 2.0) {
            double t = 2.0 - a;
            return t * t * t / 6.0;
        }
        return 0.0;
    default:
        throw Unsupported("B-spline order must be in {0,1,2,3}");
    }
}

double basis_derivative(int order, double x) {
    if (order == 0) throw Unsupported("order-0 B-spline has no derivative");
    return basis_value(order - 1, x + 0.5) - basis_value(order - 1, x - 0.5);
}

namespace {

// Active node ids and basis weights along one axis. Node ids run over
// [1 - ext, K + ext]; ids falling outside carry zero weight and are dropped.
struct AxisSupport {
    int ids[4];
    double w[4];
    double dw[4];
    int count = 0;
};

AxisSupport axis_support(double v, int order, int K, int ext, bool with_derivative) {
    AxisSupport s;
    int first = static_cast<int>(std::ceil(v - 0.5 * (order + 1)));
    const int lo = 1 - ext, hi = K + ext;
    for (int t = 0; t <= order; ++t) {
        int k = first + t;
        if (k < lo || k > hi) continue;
        s.ids[s.count] = k;
        s.w[s.count] = basis_value(order, v - k);
        s.dw[s.count] = with_derivative ? basis_derivative(order, v - k) : 0.0;
        ++s.count;
    }
    return s;
}

void check_domain(const ParameterGrid& grid, const Eigen::VectorXd& v) {
    if (v.size() != grid.dims()) throw DimensionMismatch("coordinate dimension mismatch");
    for (int p = 0; p < grid.dims(); ++p)
        if (v[p] < 1.0 - 1e-9 || v[p] > grid.axes[p].K + 1e-9)
            throw OutOfDomain("evaluation point outside the grid box");
}

} // namespace

Eigen::VectorXcd SplineModel::evaluate(const Eigen::VectorXd& v) const {
    check_domain(grid, v);
    const int P = dims();
    AxisSupport sup[8];
    for (int p = 0; p < P; ++p) {
        double vp = std::min(std::max(v[p], 1.0), double(grid.axes[p].K));
        sup[p] = axis_support(vp, order, grid.axes[p].K, extension, false);
    }
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(channels);
    int digit[8] = {0};
    while (true) {
        double w = 1.0;
        std::int64_t row = 0;
        for (int p = 0; p < P; ++p) {
            w *= sup[p].w[digit[p]];
            row = row * extended_size(p) + (sup[p].ids[digit[p]] - 1 + extension);
        }
        if (w != 0.0) acc += w * coefficients.row(row).transpose();
        int p = P - 1;
        while (p >= 0 && ++digit[p] == sup[p].count) digit[p--] = 0;
        if (p < 0) break;
    }
    return acc;
}

std::pair<Eigen::VectorXcd, Eigen::MatrixXcd>
SplineModel::evaluate_with_gradient(const Eigen::VectorXd& v) const {
    if (order < 1) throw Unsupported("gradient requires order >= 1");
    check_domain(grid, v);
    const int P = dims();
    AxisSupport sup[8];
    for (int p = 0; p < P; ++p) {
        double vp = std::min(std::max(v[p], 1.0), double(grid.axes[p].K));
        sup[p] = axis_support(vp, order, grid.axes[p].K, extension, true);
    }
    Eigen::VectorXcd value = Eigen::VectorXcd::Zero(channels);
    Eigen::MatrixXcd grad = Eigen::MatrixXcd::Zero(channels, P);
    int digit[8] = {0};
    while (true) {
        double w = 1.0;
        std::int64_t row = 0;
        for (int p = 0; p < P; ++p) {
            w *= sup[p].w[digit[p]];
            row = row * extended_size(p) + (sup[p].ids[digit[p]] - 1 + extension);
        }
        auto crow = coefficients.row(row).transpose();
        if (w != 0.0) value += w * crow;
        for (int p = 0; p < P; ++p) {
            double gw = sup[p].dw[digit[p]];
            if (gw == 0.0) continue;
            for (int q = 0; q < P; ++q)
                if (q != p) gw *= sup[q].w[digit[q]];
            if (gw != 0.0) grad.col(p) += gw * crow;
        }
        int p = P - 1;
        while (p >= 0 && ++digit[p] == sup[p].count) digit[p--] = 0;
        if (p < 0) break;
    }
    return {std::move(value), std::move(grad)};
}

namespace {

// Collocation system along one axis: K interpolation rows over K + 2
// unknowns c(0..K+1), closed by derivative rows at both boundary nodes:
// c(2) - c(0) = 2 D_1 and c(K+1) - c(K-1) = 2 D_K with D the one-sided
// numerical derivative of the data.
Eigen::SparseMatrix<double> collocation_matrix(int K, int order) {
    const double b1 = basis_value(order, 1.0); // off-diagonal weight
    const double b0 = basis_value(order, 0.0);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * K + 4);
    trip.emplace_back(0, 0, -1.0);
    trip.emplace_back(0, 2, 1.0);
    for (int r = 1; r <= K; ++r) {
        trip.emplace_back(r, r - 1, b1);
        trip.emplace_back(r, r, b0);
        trip.emplace_back(r, r + 1, b1);
    }
    trip.emplace_back(K + 1, K - 1, -1.0);
    trip.emplace_back(K + 1, K + 1, 1.0);
    Eigen::SparseMatrix<double> A(K + 2, K + 2);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

} // namespace

SplineModel prefilter_coefficients(const ComplexMatrixRM& atoms, const ParameterGrid& grid,
                                   int order, int threads) {
    if (order < 0 || order > 3) throw Unsupported("B-spline order must be in {0,1,2,3}");
    if (atoms.rows() != grid.atom_count())
        throw DimensionMismatch("atom rows do not match the grid");
    for (const auto& a : grid.axes) {
        if (a.K < 2) throw InvalidParams("spline axis needs K >= 2");
        if (order >= 2 && a.K < 3) throw InvalidParams("orders >= 2 need K >= 3 per axis");
    }

    SplineModel model;
    model.order = order;
    model.grid = grid;
    model.channels = static_cast<int>(atoms.cols());
    model.extension = order >= 2 ? 1 : 0;
    if (order <= 1) {
        model.coefficients = atoms;
        return model;
    }

    const int P = grid.dims();
    const int C = model.channels;

    // Per-axis passes; dims[p] grows from K_p to K_p + 2 as each axis is done.
    std::vector<int> dims(P);
    for (int p = 0; p < P; ++p) dims[p] = grid.axes[p].K;
    ComplexMatrixRM data = atoms;

    for (int axis = 0; axis < P; ++axis) {
        const int K = grid.axes[axis].K;
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(collocation_matrix(K, order));
        if (lu.info() != Eigen::Success) throw SingularSystem("collocation solve failed");

        std::vector<int> newdims = dims;
        newdims[axis] = K + 2;
        std::int64_t total_new = 1, lines = 1, inner = 1;
        for (int p = 0; p < P; ++p) total_new *= newdims[p];
        for (int p = 0; p < axis; ++p) lines *= dims[p];
        for (int p = axis + 1; p < P; ++p) inner *= dims[p];

        ComplexMatrixRM out(total_new, C);
        // one line = all positions along `axis` for fixed outer/inner index
        parallel_for(static_cast<std::size_t>(lines * inner), threads, [&](std::size_t li) {
            const std::int64_t outer = static_cast<std::int64_t>(li) / inner;
            const std::int64_t in = static_cast<std::int64_t>(li) % inner;
            Eigen::MatrixXd rhs(K + 2, 2 * C);
            for (int r = 0; r < K; ++r) {
                auto row = data.row((outer * K + r) * inner + in);
                for (int c = 0; c < C; ++c) {
                    rhs(r + 1, 2 * c) = row[c].real();
                    rhs(r + 1, 2 * c + 1) = row[c].imag();
                }
            }
            // One-sided numerical derivative of the data at each boundary,
            // with the stencil order matched to the spline order so the
            // closure does not cap the interpolant's convergence rate.
            if (order >= 3 && K >= 4) {
                rhs.row(0) = (-11.0 * rhs.row(1) + 18.0 * rhs.row(2) - 9.0 * rhs.row(3) +
                              2.0 * rhs.row(4)) /
                             3.0;
                rhs.row(K + 1) = (11.0 * rhs.row(K) - 18.0 * rhs.row(K - 1) +
                                  9.0 * rhs.row(K - 2) - 2.0 * rhs.row(K - 3)) /
                                 3.0;
            } else {
                rhs.row(0) = -3.0 * rhs.row(1) + 4.0 * rhs.row(2) - rhs.row(3);
                rhs.row(K + 1) = 3.0 * rhs.row(K) - 4.0 * rhs.row(K - 1) + rhs.row(K - 2);
            }
            Eigen::MatrixXd sol = lu.solve(rhs);
            for (int r = 0; r < K + 2; ++r) {
                auto row = out.row((outer * (K + 2) + r) * inner + in);
                for (int c = 0; c < C; ++c)
                    row[c] = std::complex<double>(sol(r, 2 * c), sol(r, 2 * c + 1));
            }
        });
        data = std::move(out);
        dims = newdims;
    }
    model.coefficients = std::move(data);
    return model;
}

SplineModel build_spline(const Dictionary& dict, int order, int threads) {
    return prefilter_coefficients(dict.atoms, dict.grid, order, threads);
}

} // namespace qdf
