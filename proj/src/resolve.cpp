#include "qdf/resolve.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "qdf/parallel.hpp"

namespace qdf {

std::vector<Edge> edge_set(const ParameterGrid& grid, int axis) {
    const int P = grid.dims();
    if (axis < 0 || axis >= P) throw OutOfDomain("edge_set: bad axis");
    std::vector<int> others;
    for (int p = 0; p < P; ++p)
        if (p != axis) others.push_back(p);
    std::vector<Edge> edges;
    const int n = 1 << others.size();
    edges.reserve(n);
    for (int bits = 0; bits < n; ++bits) {
        Edge e;
        e.axis = axis;
        e.fixed_fraction.assign(P, 0.0);
        for (std::size_t i = 0; i < others.size(); ++i)
            e.fixed_fraction[others[i]] = (bits >> i) & 1 ? 1.0 : 0.0;
        edges.push_back(std::move(e));
    }
    return edges;
}

const AxisResolution& ResolutionReport::entry(int axis, int order) const {
    for (const auto& e : entries)
        if (e.axis == axis && e.order == order) return e;
    throw OutOfDomain("no resolution entry for that axis/order");
}

bool ResolutionReport::all_reached(int order) const {
    for (std::size_t p = 0; p < axes.size(); ++p)
        if (!entry(static_cast<int>(p), order).reached) return false;
    return true;
}

std::int64_t ResolutionReport::total_atoms(int order) const {
    std::int64_t total = 1;
    for (std::size_t p = 0; p < axes.size(); ++p) {
        const auto& e = entry(static_cast<int>(p), order);
        if (!e.reached) throw InvalidParams("axis did not reach the target error");
        total *= e.selected_K;
    }
    return total;
}

std::vector<int> ResolutionReport::selected_counts(int order) const {
    std::vector<int> counts;
    for (std::size_t p = 0; p < axes.size(); ++p) {
        const auto& e = entry(static_cast<int>(p), order);
        if (!e.reached) throw InvalidParams("axis did not reach the target error");
        counts.push_back(e.selected_K);
    }
    return counts;
}

void select_resolution_count(AxisResolution& res, double threshold, bool loglog) {
    const auto& curve = res.curve;
    res.floor_estimate = std::numeric_limits<double>::infinity();
    for (const auto& p : curve) res.floor_estimate = std::min(res.floor_estimate, p.max_error);

    std::size_t first_ok = curve.size();
    for (std::size_t j = curve.size(); j-- > 0;) {
        if (curve[j].max_error < threshold)
            first_ok = j;
        else
            break;
    }
    if (first_ok == curve.size()) {
        res.reached = false;
        res.selected_K = 0;
        return;
    }
    res.reached = true;
    if (first_ok == 0) {
        res.selected_K = curve[0].K;
        return;
    }
    const auto& lo = curve[first_ok - 1];
    const auto& hi = curve[first_ok];
    double K;
    if (loglog) {
        double x0 = std::log(double(lo.K)), x1 = std::log(double(hi.K));
        double y0 = std::log(std::max(lo.max_error, 1e-300));
        double y1 = std::log(std::max(hi.max_error, 1e-300));
        double t = (std::log(threshold) - y0) / (y1 - y0);
        K = std::exp(x0 + t * (x1 - x0));
    } else {
        double t = (threshold - lo.max_error) / (hi.max_error - lo.max_error);
        K = lo.K + t * (hi.K - lo.K);
    }
    int sel = static_cast<int>(std::ceil(K - 1e-9));
    res.selected_K = std::min(std::max(sel, lo.K + 1), hi.K);
}

std::vector<AxisResolution> estimate_axis_resolution(const ParameterGrid& domain, int axis,
                                                     const ResolutionConfig& config,
                                                     const ParamSimulator& sim, int threads) {
    if (config.alpha <= 0.0) throw InvalidParams("alpha must be > 0");
    if (config.safety_factor < 1.0) throw InvalidParams("safety factor must be >= 1");
    if (config.max_levels < 2) throw InvalidParams("need at least two refinement levels");
    const int P = domain.dims();
    const int J = config.max_levels;
    const auto edges = edge_set(domain, axis);
    const std::int64_t denom = std::int64_t(1) << J;

    // Signals keyed by range fraction (numerator over 2^J); nodes and
    // midpoints of all dyadic levels land on this lattice.
    std::vector<std::unordered_map<std::int64_t, Eigen::VectorXcd>> cache(edges.size());

    auto theta_at = [&](const Edge& e, std::int64_t key) {
        Eigen::VectorXd theta(P);
        for (int q = 0; q < P; ++q)
            theta[q] = q == axis
                           ? domain.axes[q].fraction_to_param(double(key) / double(denom))
                           : domain.axes[q].fraction_to_param(e.fixed_fraction[q]);
        return theta;
    };

    auto ensure_cached = [&](const std::vector<std::int64_t>& keys) {
        std::vector<std::pair<std::size_t, std::int64_t>> todo;
        for (std::size_t e = 0; e < edges.size(); ++e)
            for (std::int64_t k : keys)
                if (!cache[e].count(k)) {
                    cache[e].emplace(k, Eigen::VectorXcd());
                    todo.emplace_back(e, k);
                }
        parallel_for(todo.size(), threads, [&](std::size_t i) {
            auto [e, k] = todo[i];
            cache[e].at(k) = sim(theta_at(edges[e], k));
        });
    };

    std::vector<AxisResolution> out;
    for (int n : config.orders) {
        AxisResolution r;
        r.axis = axis;
        r.order = n;
        out.push_back(std::move(r));
    }

    for (int j = 1; j <= J; ++j) {
        const int Kj = (1 << (j - 1)) + 1;
        std::vector<std::int64_t> node_keys(Kj), mid_keys(Kj - 1);
        for (int i = 0; i < Kj; ++i) node_keys[i] = std::int64_t(i) << (J - j + 1);
        for (int i = 0; i + 1 < Kj; ++i) mid_keys[i] = std::int64_t(2 * i + 1) << (J - j);
        ensure_cached(node_keys);
        ensure_cached(mid_keys);

        ParameterGrid line(
            {ParameterAxis(domain.axes[axis].name, domain.axes[axis].min, domain.axes[axis].max,
                           Kj, domain.axes[axis].spacing)});

        for (std::size_t oi = 0; oi < config.orders.size(); ++oi) {
            const int n = config.orders[oi];
            // a 2-node level cannot carry the boundary stencil of n >= 2
            const int n_eff = Kj < 3 ? std::min(n, 1) : n;
            double worst = 0.0;
            for (std::size_t e = 0; e < edges.size(); ++e) {
                ComplexMatrixRM atoms(Kj, cache[e].at(node_keys[0]).size());
                for (int i = 0; i < Kj; ++i)
                    atoms.row(i) = cache[e].at(node_keys[i]).transpose();
                SplineModel model = prefilter_coefficients(atoms, line, n_eff, 1);
                for (int i = 0; i + 1 < Kj; ++i) {
                    Eigen::VectorXd v(1);
                    v[0] = i + 1.5;
                    double err = (model.evaluate(v) - cache[e].at(mid_keys[i])).norm();
                    worst = std::max(worst, err);
                }
            }
            out[oi].curve.push_back({Kj, worst});
        }
    }

    const double threshold = config.alpha / config.safety_factor;
    for (auto& r : out) select_resolution_count(r, threshold, config.loglog_interp);
    return out;
}

ResolutionReport estimate_grid_resolution(const ParameterGrid& domain,
                                          const ResolutionConfig& config,
                                          const ParamSimulator& sim, int threads) {
    ResolutionReport report;
    report.config = config;
    report.axes = domain.axes;
    for (int p = 0; p < domain.dims(); ++p) {
        auto per_axis = estimate_axis_resolution(domain, p, config, sim, threads);
        for (auto& r : per_axis) report.entries.push_back(std::move(r));
    }
    return report;
}

namespace {

double uniform01(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53;
}

std::vector<Eigen::VectorXd> draw_positions(const ParameterGrid& grid, int samples,
                                            std::uint64_t seed) {
    const int P = grid.dims();
    const int it1 = grid.axis_index("T1");
    const int it2 = grid.axis_index("T2");
    std::mt19937_64 rng(seed);
    std::vector<Eigen::VectorXd> out;
    out.reserve(samples);
    std::int64_t guard = std::int64_t(samples) * 100000;
    while (static_cast<int>(out.size()) < samples && guard-- > 0) {
        Eigen::VectorXd v(P);
        for (int p = 0; p < P; ++p)
            v[p] = 1.0 + uniform01(rng) * (grid.axes[p].K - 1);
        if (it1 >= 0 && it2 >= 0) {
            double t1 = grid.axes[it1].to_param(v[it1]);
            double t2 = grid.axes[it2].to_param(v[it2]);
            if (t2 > t1) continue;
        }
        out.push_back(std::move(v));
    }
    if (static_cast<int>(out.size()) < samples)
        throw InvalidParams("rejection sampling could not satisfy T2 <= T1 on this grid");
    return out;
}

} // namespace

AuditStats interior_error_audit(const ParameterGrid& grid, const Interpolant& interp,
                                const ParamSimulator& sim, int samples, double alpha,
                                std::uint64_t seed, int threads) {
    if (samples < 1) throw InvalidParams("audit needs at least one sample");
    auto positions = draw_positions(grid, samples, seed);
    AuditStats stats;
    stats.samples.resize(samples);
    parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t i) {
        AuditSample& s = stats.samples[i];
        s.v = positions[i];
        s.theta = grid.to_params(s.v);
        s.error = (interp(s.v) - sim(s.theta)).norm();
    });
    double sq = 0.0;
    int above = 0;
    for (const auto& s : stats.samples) {
        sq += s.error * s.error;
        stats.max_error = std::max(stats.max_error, s.error);
        if (s.error > alpha) ++above;
    }
    stats.rms = std::sqrt(sq / samples);
    stats.exceed_fraction = double(above) / samples;
    return stats;
}

AuditStats interior_error_audit(const SplineModel& model, const ParamSimulator& sim, int samples,
                                double alpha, std::uint64_t seed, int threads) {
    return interior_error_audit(
        model.grid, [&](const Eigen::VectorXd& v) { return model.evaluate(v); }, sim, samples,
        alpha, seed, threads);
}

AuditStats interior_error_audit_nearest(const ParameterGrid& grid, const ParamSimulator& sim,
                                        int samples, double alpha, std::uint64_t seed,
                                        int threads) {
    auto positions = draw_positions(grid, samples, seed);
    const int P = grid.dims();

    auto round_to_node = [&](const Eigen::VectorXd& v) {
        std::vector<int> k(P);
        for (int p = 0; p < P; ++p) {
            k[p] = static_cast<int>(std::ceil(v[p] - 0.5));
            k[p] = std::min(std::max(k[p], 1), grid.axes[p].K);
        }
        return k;
    };

    // simulate each visited node once
    std::unordered_map<std::int64_t, Eigen::Index> node_slot;
    std::vector<Eigen::VectorXd> node_theta;
    for (int i = 0; i < samples; ++i) {
        std::vector<int> k = round_to_node(positions[i]);
        auto [it, fresh] = node_slot.emplace(grid.linear_index(k),
                                             static_cast<Eigen::Index>(node_theta.size()));
        if (fresh) {
            Eigen::VectorXd vk(P);
            for (int p = 0; p < P; ++p) vk[p] = k[p];
            node_theta.push_back(grid.to_params(vk));
        }
    }
    std::vector<Eigen::VectorXcd> node_signal(node_theta.size());
    parallel_for(node_theta.size(), threads,
                 [&](std::size_t i) { node_signal[i] = sim(node_theta[i]); });

    return interior_error_audit(
        grid,
        [&](const Eigen::VectorXd& v) -> Eigen::VectorXcd {
            return node_signal[node_slot.at(grid.linear_index(round_to_node(v)))];
        },
        sim, samples, alpha, seed, threads);
}

} // namespace qdf
