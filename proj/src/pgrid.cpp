#include "qdf/pgrid.hpp"

#include <cmath>
#include <sstream>

namespace qdf {

ParameterAxis::ParameterAxis(std::string name_, double min_, double max_, int K_, Spacing spacing_)
    : name(std::move(name_)), min(min_), max(max_), K(K_), spacing(spacing_) {
    if (!(min < max)) throw InvalidParams("axis " + name + ": min must be < max");
    if (K < 2) throw InvalidParams("axis " + name + ": K must be >= 2");
    if (spacing == Spacing::Log && !(min > 0.0))
        throw InvalidParams("axis " + name + ": log spacing requires min > 0");
}

double ParameterAxis::to_param(double v, double ext) const {
    if (v < 1.0 - ext - 1e-9 || v > K + ext + 1e-9)
        throw OutOfDomain("axis " + name + ": coordinate " + std::to_string(v) + " outside [1, K]");
    double t = (v - 1.0) / (K - 1.0);
    if (spacing == Spacing::Linear) return min + t * (max - min);
    // log: exponential of an affine map in log-space; exact at the endpoints
    return min * std::exp(t * std::log(max / min));
}

double ParameterAxis::fraction_to_param(double t) const {
    if (spacing == Spacing::Linear) return min + t * (max - min);
    return min * std::exp(t * std::log(max / min));
}

double ParameterAxis::to_coord(double theta) const {
    double lo = min, hi = max;
    if (theta < lo - 1e-9 * std::abs(lo) || theta > hi + 1e-9 * std::abs(hi))
        throw OutOfDomain("axis " + name + ": value " + std::to_string(theta) + " outside range");
    double t;
    if (spacing == Spacing::Linear) {
        t = (theta - min) / (max - min);
    } else {
        t = std::log(theta / min) / std::log(max / min);
    }
    return 1.0 + t * (K - 1.0);
}

ParameterGrid::ParameterGrid(std::vector<ParameterAxis> axes_) : axes(std::move(axes_)) {
    if (axes.empty()) throw InvalidParams("grid needs at least one axis");
}

std::int64_t ParameterGrid::atom_count() const {
    std::int64_t n = 1;
    for (const auto& a : axes) n *= a.K;
    return n;
}

Eigen::VectorXd ParameterGrid::to_params(const Eigen::VectorXd& v, double ext) const {
    if (v.size() != dims()) throw DimensionMismatch("coordinate dimension mismatch");
    Eigen::VectorXd theta(dims());
    for (int p = 0; p < dims(); ++p) theta[p] = axes[p].to_param(v[p], ext);
    return theta;
}

Eigen::VectorXd ParameterGrid::to_coords(const Eigen::VectorXd& theta) const {
    if (theta.size() != dims()) throw DimensionMismatch("parameter dimension mismatch");
    Eigen::VectorXd v(dims());
    for (int p = 0; p < dims(); ++p) v[p] = axes[p].to_coord(theta[p]);
    return v;
}

std::int64_t ParameterGrid::linear_index(const std::vector<int>& k) const {
    if (static_cast<int>(k.size()) != dims()) throw DimensionMismatch("index dimension mismatch");
    std::int64_t idx = 0;
    for (int p = 0; p < dims(); ++p) {
        if (k[p] < 1 || k[p] > axes[p].K) throw OutOfDomain("grid index out of range");
        idx = idx * axes[p].K + (k[p] - 1);
    }
    return idx;
}

std::vector<int> ParameterGrid::index_vector(std::int64_t linear) const {
    std::vector<int> k(dims());
    for (int p = dims() - 1; p >= 0; --p) {
        k[p] = static_cast<int>(linear % axes[p].K) + 1;
        linear /= axes[p].K;
    }
    return k;
}

std::vector<std::vector<int>> ParameterGrid::iter_indices() const {
    std::int64_t n = atom_count();
    std::vector<std::vector<int>> out;
    out.reserve(n);
    for (std::int64_t i = 0; i < n; ++i) out.push_back(index_vector(i));
    return out;
}

int ParameterGrid::axis_index(const std::string& name) const {
    for (int p = 0; p < dims(); ++p)
        if (axes[p].name == name) return p;
    return -1;
}

ParameterGrid ParameterGrid::with_counts(const std::vector<int>& counts) const {
    if (counts.size() != axes.size()) throw DimensionMismatch("count vector dimension mismatch");
    std::vector<ParameterAxis> out = axes;
    for (std::size_t p = 0; p < out.size(); ++p)
        out[p] = ParameterAxis(out[p].name, out[p].min, out[p].max, counts[p], out[p].spacing);
    return ParameterGrid(std::move(out));
}

ParameterAxis parse_axis(const std::string& line) {
    std::istringstream ss(line);
    std::string name, law;
    double lo, hi;
    int K;
    if (!(ss >> name >> law >> lo >> hi >> K))
        throw InvalidParams("bad axis declaration: '" + line + "' (want: name log|linear min max K)");
    Spacing sp;
    if (law == "log")
        sp = Spacing::Log;
    else if (law == "linear")
        sp = Spacing::Linear;
    else
        throw InvalidParams("bad spacing '" + law + "' in axis declaration");
    return ParameterAxis(name, lo, hi, K, sp);
}

} // namespace qdf
