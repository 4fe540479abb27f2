#include "qdf/estimate.hpp"

#include <cmath>

#include "qdf/parallel.hpp"

namespace qdf {

std::complex<double> optimal_scale(const Eigen::VectorXcd& m, const Eigen::VectorXcd& s) {
    if (m.size() != s.size()) throw DimensionMismatch("signal lengths differ");
    double denom = s.squaredNorm();
    if (!(denom > 0.0)) throw DegenerateAtom("zero-norm atom has no scale");
    return s.dot(m) / denom;
}

MatchResult match_dictionary(const Eigen::VectorXcd& m, const Dictionary& dict) {
    if (dict.atom_rows() == 0) throw EmptyDictionary("dictionary has no atoms");
    if (m.size() != dict.columns())
        throw DimensionMismatch("signal length does not match dictionary columns");
    MatchResult r;
    if (!(m.squaredNorm() > 0.0)) {
        r.zero_signal = true;
        return r;
    }
    // |m^H s_k| = |(A conj(m))_k| for atom rows s_k
    Eigen::VectorXcd t = dict.atoms * m.conjugate();
    std::int64_t best = -1;
    double best_score = -1.0;
    for (std::int64_t i = 0; i < dict.atom_rows(); ++i) {
        if (!(dict.norms[i] > 0.0)) continue;
        double score = std::abs(t[i]) / dict.norms[i];
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    if (best < 0) throw DegenerateAtom("all atoms have zero norm");
    r.atom = best;
    r.score = best_score;
    r.rho = optimal_scale(m, dict.atoms.row(best).transpose());
    return r;
}

std::vector<MatchResult> match_dictionary_batch(const ComplexMatrixRM& signals,
                                                const Dictionary& dict, int threads) {
    if (dict.atom_rows() == 0) throw EmptyDictionary("dictionary has no atoms");
    if (signals.cols() != dict.columns())
        throw DimensionMismatch("signal length does not match dictionary columns");
    const Eigen::Index n = signals.rows();
    const Eigen::Index atoms = dict.atom_rows();
    std::vector<MatchResult> out(n);

    // Blocked evaluation keeps the score pass a gemm and streams the atom
    // matrix once per voxel block instead of once per voxel.
    constexpr Eigen::Index kVoxelBlock = 256;
    constexpr Eigen::Index kAtomChunk = 8192;
    const Eigen::Index blocks = (n + kVoxelBlock - 1) / kVoxelBlock;

    parallel_for(static_cast<std::size_t>(blocks), threads, [&](std::size_t bi) {
        const Eigen::Index lo = static_cast<Eigen::Index>(bi) * kVoxelBlock;
        const Eigen::Index nb = std::min(kVoxelBlock, n - lo);
        Eigen::MatrixXcd conj_block = signals.middleRows(lo, nb).transpose().conjugate();

        Eigen::VectorXd best_score = Eigen::VectorXd::Constant(nb, -1.0);
        std::vector<std::int64_t> best_atom(nb, -1);
        Eigen::MatrixXcd scores;
        for (Eigen::Index a0 = 0; a0 < atoms; a0 += kAtomChunk) {
            const Eigen::Index na = std::min(kAtomChunk, atoms - a0);
            scores.noalias() = dict.atoms.middleRows(a0, na) * conj_block;
            for (Eigen::Index j = 0; j < nb; ++j) {
                for (Eigen::Index i = 0; i < na; ++i) {
                    if (!(dict.norms[a0 + i] > 0.0)) continue;
                    double s = std::abs(scores(i, j)) / dict.norms[a0 + i];
                    if (s > best_score[j]) {
                        best_score[j] = s;
                        best_atom[j] = a0 + i;
                    }
                }
            }
        }
        for (Eigen::Index j = 0; j < nb; ++j) {
            MatchResult& r = out[lo + j];
            if (!(signals.row(lo + j).squaredNorm() > 0.0)) {
                r.zero_signal = true;
                continue;
            }
            if (best_atom[j] < 0) throw DegenerateAtom("all atoms have zero norm");
            r.atom = best_atom[j];
            r.score = best_score[j];
            r.rho = optimal_scale(signals.row(lo + j).transpose(),
                                  dict.atoms.row(best_atom[j]).transpose());
        }
    });
    return out;
}

std::pair<double, Eigen::VectorXd> reduced_objective(const Eigen::VectorXcd& m,
                                                     const SplineModel& model,
                                                     const Eigen::VectorXd& v) {
    auto [u, jac] = model.evaluate_with_gradient(v);
    const double w = u.squaredNorm();
    if (!(w > 0.0)) throw DegenerateAtom("interpolated atom has zero norm");
    const std::complex<double> h = m.dot(u); // m^H u
    const double m2 = m.squaredNorm();
    const double h2 = std::norm(h);
    const int P = model.dims();
    Eigen::VectorXd grad(P);
    for (int p = 0; p < P; ++p) {
        const std::complex<double> hp = m.dot(jac.col(p));
        const double wp = 2.0 * std::real(u.dot(jac.col(p)));
        grad[p] = -(2.0 * std::real(std::conj(h) * hp) * w - h2 * wp) / (w * w);
    }
    return {m2 - h2 / w, std::move(grad)};
}

double reduced_objective_value(const Eigen::VectorXcd& m, const SplineModel& model,
                               const Eigen::VectorXd& v) {
    Eigen::VectorXcd u = model.evaluate(v);
    const double w = u.squaredNorm();
    if (!(w > 0.0)) throw DegenerateAtom("interpolated atom has zero norm");
    return m.squaredNorm() - std::norm(m.dot(u)) / w;
}

namespace {

Eigen::VectorXd clamp_to_box(const ParameterGrid& grid, Eigen::VectorXd v) {
    for (int p = 0; p < grid.dims(); ++p)
        v[p] = std::min(std::max(v[p], 1.0), double(grid.axes[p].K));
    return v;
}

// gradient with components blocked by an active bound zeroed out
Eigen::VectorXd projected_gradient(const ParameterGrid& grid, const Eigen::VectorXd& v,
                                   const Eigen::VectorXd& g) {
    Eigen::VectorXd pg = g;
    for (int p = 0; p < grid.dims(); ++p) {
        if (v[p] <= 1.0 && g[p] > 0.0) pg[p] = 0.0;
        if (v[p] >= grid.axes[p].K && g[p] < 0.0) pg[p] = 0.0;
    }
    return pg;
}

VoxelEstimate fit_from_single_start(const Eigen::VectorXcd& m, const SplineModel& model,
                                    const FitOptions& options, Eigen::VectorXd v) {
    const int P = model.dims();
    VoxelEstimate est;
    v = clamp_to_box(model.grid, std::move(v));

    auto [f, g] = reduced_objective(m, model, v);
    const double scale = std::max(1.0, m.squaredNorm());
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(P, P); // inverse Hessian estimate
    bool first_update = true;
    int iters = 0;
    bool converged = false;

    for (int it = 0; it < options.max_iterations; ++it) {
        Eigen::VectorXd pg = projected_gradient(model.grid, v, g);
        if (pg.lpNorm<Eigen::Infinity>() <= 1e-13 * scale) {
            converged = true;
            break;
        }

        Eigen::VectorXd d = -(H * g);
        if (d.dot(g) > -1e-14 * d.norm() * g.norm()) d = -g;

        // backtracking Armijo search along the projected path
        double step = 1.0;
        bool accepted = false;
        Eigen::VectorXd x;
        double fx = f;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            step = 1.0;
            for (int ls = 0; ls < 60; ++ls) {
                x = clamp_to_box(model.grid, v + step * d);
                Eigen::VectorXd dx = x - v;
                double slope = g.dot(dx);
                if (dx.lpNorm<Eigen::Infinity>() < 1e-16 || slope >= 0.0) {
                    step *= 0.5;
                    continue;
                }
                fx = reduced_objective_value(m, model, x);
                if (fx <= f + 1e-4 * slope) {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) d = -g; // quasi-Newton direction failed; retry steepest
        }
        if (!accepted) {
            converged = true; // no descent along the projected gradient path
            break;
        }

        auto [fn, gn] = reduced_objective(m, model, x);
        ++iters;
        const double decrease = f - fn;

        Eigen::VectorXd s = x - v;
        Eigen::VectorXd y = gn - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (first_update) {
                H *= sy / y.squaredNorm(); // scale to the local curvature
                first_update = false;
            }
            // BFGS update of the inverse Hessian
            Eigen::VectorXd Hy = H * y;
            const double yHy = y.dot(Hy);
            H += ((sy + yHy) / (sy * sy)) * (s * s.transpose()) -
                 (Hy * s.transpose() + s * Hy.transpose()) / sy;
        } else {
            H.setIdentity();
            first_update = true;
        }

        v = x;
        f = fn;
        g = gn;
        if (decrease < options.abs_decrease_tol) {
            converged = true;
            break;
        }
    }

    est.v_hat = v;
    est.theta_hat = model.grid.to_params(v);
    Eigen::VectorXcd u = model.evaluate(v);
    est.rho_hat = optimal_scale(m, u);
    est.residual_norm = (m - est.rho_hat * u).norm();
    est.iterations = iters;
    est.converged = converged;
    return est;
}

} // namespace

VoxelEstimate fit_spline(const Eigen::VectorXcd& m, const SplineModel& model,
                         const FitOptions& options, const Eigen::VectorXd& start) {
    if (model.order < 1) throw Unsupported("fitting requires spline order >= 1");
    if (m.size() != model.channels) throw DimensionMismatch("signal/model length mismatch");
    if (start.size() != model.dims()) throw DimensionMismatch("start dimension mismatch");
    if (!(options.abs_decrease_tol > 0.0)) throw InvalidParams("tolerance must be > 0");
    if (options.max_iterations < 1) throw InvalidParams("max_iterations must be >= 1");

    VoxelEstimate best = fit_from_single_start(m, model, options, start);
    if (options.multi_start) {
        // one extra start per axis, one grid step toward the interior
        for (int p = 0; p < model.dims(); ++p) {
            Eigen::VectorXd alt = start;
            alt[p] += start[p] < 0.5 * (1.0 + model.grid.axes[p].K) ? 1.0 : -1.0;
            VoxelEstimate e = fit_from_single_start(m, model, options, alt);
            if (e.residual_norm < best.residual_norm) best = e;
        }
    }
    return best;
}

namespace {

// Scale elimination can rank atoms from distant grid regions within a few
// percent of each other, so a single matched start may sit in the wrong
// basin. Greedy pick of the highest-scoring atoms, skipping anything
// within one grid step (Chebyshev) of an already chosen start.
std::vector<std::int64_t> diverse_candidates(const Eigen::VectorXcd& m, const Dictionary& dict,
                                             int count) {
    Eigen::VectorXcd t = dict.atoms * m.conjugate();
    std::vector<std::int64_t> order(dict.atom_rows());
    std::vector<double> score(dict.atom_rows());
    for (std::int64_t i = 0; i < dict.atom_rows(); ++i) {
        order[i] = i;
        score[i] = dict.norms[i] > 0.0 ? std::abs(t[i]) / dict.norms[i] : -1.0;
    }
    std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return a < b;
    });
    std::vector<std::int64_t> picked;
    std::vector<std::vector<int>> picked_idx;
    for (std::int64_t i : order) {
        if (score[i] < 0.0) break;
        std::vector<int> k = dict.grid.index_vector(i);
        bool close = false;
        for (const auto& q : picked_idx) {
            int sep = 0;
            for (std::size_t p = 0; p < q.size(); ++p)
                sep = std::max(sep, std::abs(q[p] - k[p]));
            if (sep <= 1) {
                close = true;
                break;
            }
        }
        if (close) continue;
        picked.push_back(i);
        picked_idx.push_back(std::move(k));
        if (static_cast<int>(picked.size()) >= count) break;
    }
    return picked;
}

} // namespace

VoxelEstimate estimate_voxel(const Eigen::VectorXcd& m, const SplineModel& model,
                             const Dictionary& dict, const FitOptions& options) {
    MatchResult match = match_dictionary(m, dict);
    if (match.zero_signal) {
        VoxelEstimate est;
        est.zero_signal = true;
        est.v_hat = Eigen::VectorXd::Ones(model.dims());
        est.theta_hat = model.grid.to_params(est.v_hat);
        return est;
    }
    const int P = dict.grid.dims();
    auto node_of = [&](std::int64_t atom) {
        std::vector<int> k = dict.grid.index_vector(atom);
        Eigen::VectorXd v(P);
        for (int p = 0; p < P; ++p) v[p] = k[p];
        return v;
    };
    if (!options.multi_start) return fit_spline(m, model, options, node_of(match.atom));

    VoxelEstimate best;
    best.residual_norm = std::numeric_limits<double>::infinity();
    for (std::int64_t atom : diverse_candidates(m, dict, 6)) {
        FitOptions single = options;
        single.multi_start = false;
        VoxelEstimate e = fit_spline(m, model, single, node_of(atom));
        if (e.residual_norm < best.residual_norm) best = e;
    }
    // the spec's interior-nudged starts around the best match
    FitOptions nudged = options;
    VoxelEstimate e = fit_spline(m, model, nudged, node_of(match.atom));
    if (e.residual_norm < best.residual_norm) best = e;
    return best;
}

VoxelEstimate match_voxel(const Eigen::VectorXcd& m, const Dictionary& dict) {
    MatchResult match = match_dictionary(m, dict);
    VoxelEstimate est;
    const int P = dict.grid.dims();
    if (match.zero_signal) {
        est.zero_signal = true;
        est.v_hat = Eigen::VectorXd::Ones(P);
        est.theta_hat = dict.grid.to_params(est.v_hat);
        return est;
    }
    std::vector<int> k = dict.grid.index_vector(match.atom);
    est.v_hat.resize(P);
    for (int p = 0; p < P; ++p) est.v_hat[p] = k[p];
    est.theta_hat = dict.grid.to_params(est.v_hat);
    est.rho_hat = match.rho;
    Eigen::VectorXcd s = dict.atoms.row(match.atom).transpose();
    est.residual_norm = (m - match.rho * s).norm();
    est.converged = true;
    return est;
}

} // namespace qdf
