// Acceptance suite: one line per criterion, exit code = number of
// failures. Heavy fixtures (resolution report, reference dictionary) are
// built once and shared. Run with --list to see the criteria, --only N
// (repeatable) to run a subset.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <set>

#include "oracles.hpp"
#include "qdf/experiments.hpp"
#include "qdf/image.hpp"
#include "qdf/io.hpp"
#include "qdf/parallel.hpp"

using namespace qdf;

namespace {

struct Check {
    int id;
    std::string name;
    std::function<std::pair<bool, std::string>()> run;
};

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// ---------------------------------------------------------------- fixture

struct Fixture {
    int threads = 0;
    const double alpha = 5e-4;

    AcquisitionSchedule schedule = default_schedule(200);
    SpinEnsemble ensemble = make_ensemble(64);
    ParameterGrid domain{{ParameterAxis("T1", 80.0, 3000.0, 2, Spacing::Log),
                          ParameterAxis("T2", 5.0, 650.0, 2, Spacing::Log),
                          ParameterAxis("B1", 0.9, 1.1, 2, Spacing::Linear)}};

    ParamSimulator sim = [this](const Eigen::VectorXd& theta) {
        SimOptions opts;
        opts.allow_unphysical = true;
        return simulate_signal(tissue_from_axes(domain, theta), schedule, ensemble, opts);
    };

    // resolution curves at the paper-style selection threshold (= alpha)
    std::optional<ResolutionReport> report_;
    double resolution_seconds = 0.0;
    const ResolutionReport& report() {
        if (!report_) {
            ResolutionConfig cfg;
            cfg.alpha = alpha;
            cfg.safety_factor = 1.0;
            cfg.max_levels = 14;
            cfg.orders = {0, 1, 2, 3};
            double t0 = now_s();
            report_ = estimate_grid_resolution(domain, cfg, sim, threads);
            resolution_seconds = now_s() - t0;
        }
        return *report_;
    }

    std::vector<int> counts(int order, bool for_build) {
        std::vector<int> out;
        for (int p = 0; p < domain.dims(); ++p) {
            const auto& e = report().entry(p, order);
            if (!e.reached) throw InvalidParams("axis never reached the target error");
            int K = e.selected_K;
            // an order-n build needs at least n >= 2 ? 3 : 2 nodes per axis
            if (for_build && order >= 2) K = std::max(K, 3);
            out.push_back(K);
        }
        return out;
    }

    // criterion-3 sparse dictionary (selection at alpha), order 2
    std::optional<Dictionary> sparse_;
    std::optional<SplineModel> sparse_model_;
    const Dictionary& sparse() {
        if (!sparse_) {
            sparse_ = generate_dictionary(domain.with_counts(counts(2, true)), schedule,
                                          ensemble, threads);
            sparse_model_ = build_spline(*sparse_, 2, threads);
        }
        return *sparse_;
    }
    const SplineModel& sparse_model() {
        sparse();
        return *sparse_model_;
    }

    // production-default sizing (threshold alpha/2) for the precision
    // studies; still "at alpha = 5e-4", with the shipped safety factor
    std::optional<Dictionary> precision_;
    std::optional<SplineModel> precision_model_;
    const Dictionary& precision_dict() {
        if (!precision_) {
            ResolutionConfig cfg;
            cfg.alpha = alpha;
            cfg.safety_factor = 2.0;
            cfg.max_levels = 14;
            cfg.orders = {2};
            ResolutionReport rep = estimate_grid_resolution(domain, cfg, sim, threads);
            std::vector<int> k;
            for (int p = 0; p < domain.dims(); ++p)
                k.push_back(std::max(rep.entry(p, 2).selected_K, 3));
            precision_ = generate_dictionary(domain.with_counts(k), schedule, ensemble, threads);
            precision_model_ = build_spline(*precision_, 2, threads);
        }
        return *precision_;
    }
    const SplineModel& precision_model() {
        precision_dict();
        return *precision_model_;
    }

    // criterion-3 reference (order-0) dictionary, SVD-compressed. When its
    // size exceeds what this machine can simulate and hold, a reference
    // with proportionally shrunk per-axis counts is built instead and
    // `reference_shrunk` reports the deviation.
    static constexpr int kRank = 30;
    static constexpr std::int64_t kDenseBudget = 2500000;
    bool reference_shrunk = false;
    std::int64_t reference_required = 0;
    std::optional<Dictionary> dense_;
    const Dictionary& dense() {
        if (!dense_) {
            std::vector<int> k = counts(0, true);
            ParameterGrid grid = domain.with_counts(k);
            reference_required = grid.atom_count();
            if (reference_required > kDenseBudget) {
                reference_shrunk = true;
                double f = std::cbrt(double(kDenseBudget) / double(reference_required));
                for (int& c : k) c = std::max(3, static_cast<int>(std::floor(c * f)));
                grid = domain.with_counts(k);
            }
            std::printf("      [fixture] reference dictionary: %lld atoms (%d,%d,%d), L=%d%s\n",
                        static_cast<long long>(grid.atom_count()), k[0], k[1], k[2], kRank,
                        reference_shrunk ? " [shrunk: true sizing infeasible]" : "");
            std::fflush(stdout);
            dense_ = generate_compressed_dictionary(grid, schedule, ensemble, kRank, threads);
        }
        return *dense_;
    }

    std::string infeasibility_note() {
        dense();
        double bytes = double(reference_required) * kRank * 8.0;
        double hours = 2.0 * double(reference_required) * 150e-6 / 3600.0;
        std::snprintf(note_buf, sizeof note_buf,
                      "criterion-3 reference needs %lld atoms = %.0f GB at L=30 complex32 "
                      "(RAM 11 GB, disk 74 GB) and ~%.0f single-core hours to simulate",
                      static_cast<long long>(reference_required), bytes / 1e9, hours);
        return note_buf;
    }
    char note_buf[320];

    std::optional<Dictionary> sparse_compressed_;
    std::optional<SplineModel> sparse_model_c_;
    const Dictionary& sparse_compressed() {
        if (!sparse_compressed_) sparse_compressed_ = compress_dictionary(sparse(), kRank);
        return *sparse_compressed_;
    }
    const SplineModel& sparse_model_c() {
        if (!sparse_model_c_) sparse_model_c_ = build_spline(sparse_compressed(), 2, threads);
        return *sparse_model_c_;
    }

    // uniform interior draws honoring T2 <= T1, in grid coordinates
    std::vector<Eigen::VectorXd> draw_interior(const ParameterGrid& grid, int count,
                                               std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        auto uniform = [&] { return double(rng() >> 11) * 0x1.0p-53; };
        int it1 = grid.axis_index("T1"), it2 = grid.axis_index("T2");
        std::vector<Eigen::VectorXd> out;
        while (static_cast<int>(out.size()) < count) {
            Eigen::VectorXd v(grid.dims());
            for (int p = 0; p < grid.dims(); ++p)
                v[p] = 1.0 + uniform() * (grid.axes[p].K - 1);
            if (grid.axes[it1].to_param(v[it1]) < grid.axes[it2].to_param(v[it2])) continue;
            out.push_back(std::move(v));
        }
        return out;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

char buf[512];

} // namespace

int main(int argc, char** argv) {
    Fixture fx;
    std::set<int> only;
    bool list_only = false;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--threads") && i + 1 < argc) fx.threads = std::atoi(argv[++i]);
        else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) only.insert(std::atoi(argv[++i]));
        else if (!std::strcmp(argv[i], "--list")) list_only = true;
        else {
            std::fprintf(stderr, "usage: acceptance [--threads N] [--only K]... [--list]\n");
            return 2;
        }
    }

    std::vector<Check> checks;

    // 1 ------------------------------------------------------------------
    checks.push_back({1, "node exactness, orders 0-3 on a 9x7x9 dictionary", [&] {
        double t0 = now_s();
        ParameterGrid grid = fx.domain.with_counts({9, 7, 9});
        Dictionary dict = generate_dictionary(grid, fx.schedule, fx.ensemble, fx.threads);
        double worst = 0.0;
        for (int n = 0; n <= 3; ++n) {
            SplineModel model = build_spline(dict, n, fx.threads);
            for (std::int64_t i = 0; i < grid.atom_count(); ++i) {
                auto k = grid.index_vector(i);
                Eigen::VectorXd v(3);
                for (int p = 0; p < 3; ++p) v[p] = k[p];
                double rel =
                    (model.evaluate(v) - dict.atoms.row(i).transpose()).norm() /
                    dict.norms[i];
                worst = std::max(worst, rel);
            }
        }
        double dt = now_s() - t0;
        std::snprintf(buf, sizeof buf, "max rel err %.2e (tol 1e-10), %.1f s (budget 60 s)",
                      worst, dt);
        return std::make_pair(worst <= 1e-10 && dt < 60.0, std::string(buf));
    }});

    // 2 ------------------------------------------------------------------
    checks.push_back({2, "error-decay slopes on the T1 edge, j = 3..8", [&] {
        fx.report();
        bool ok = fx.resolution_seconds < 600.0;
        std::string detail;
        for (int n = 0; n <= 3; ++n) {
            const auto& e = fx.report().entry(0, n);
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            int cnt = 0;
            for (const auto& pt : e.curve) {
                if (pt.K < 5 || pt.K > 129) continue; // j = 3..8
                double x = std::log(double(pt.K)), y = std::log(pt.max_error);
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
                ++cnt;
            }
            double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
            std::snprintf(buf, sizeof buf, "n=%d: %.2f ", n, slope);
            detail += buf;
            if (std::abs(slope + (n + 1.0)) > 0.5) ok = false;
        }
        std::snprintf(buf, sizeof buf, "(targets -(n+1) +/- 0.5), curves in %.0f s",
                      fx.resolution_seconds);
        detail += buf;
        return std::make_pair(ok, detail);
    }});

    // 3 ------------------------------------------------------------------
    checks.push_back({3, "order-2 grids use >= 100x fewer atoms than order-0", [&] {
        fx.report();
        if (!fx.report().all_reached(0) || !fx.report().all_reached(2))
            return std::make_pair(false, std::string("an axis never reached the target error"));
        long long n0 = fx.report().total_atoms(0);
        long long n2 = fx.report().total_atoms(2);
        double ratio = double(n0) / double(n2);
        std::snprintf(buf, sizeof buf,
                      "n0 total %lld, n2 total %lld, ratio %.0fx (>= 100x), sized in %.0f s "
                      "(budget 1800 s)",
                      n0, n2, ratio, fx.resolution_seconds);
        return std::make_pair(ratio >= 100.0 && fx.resolution_seconds < 1800.0,
                              std::string(buf));
    }});

    // 4 ------------------------------------------------------------------
    checks.push_back({4, "interior audit of both sized dictionaries", [&] {
        double t0 = now_s();
        ParameterGrid dense_grid = fx.domain.with_counts(fx.counts(0, false));
        AuditStats nn =
            interior_error_audit_nearest(dense_grid, fx.sim, 1000, fx.alpha, 2024, fx.threads);
        AuditStats sp =
            interior_error_audit(fx.sparse_model(), fx.sim, 1000, fx.alpha, 2024, fx.threads);
        double dt = now_s() - t0;
        bool ok = nn.exceed_fraction <= 0.25 && sp.exceed_fraction <= 0.25 &&
                  nn.max_error <= 8.0 * fx.alpha && sp.max_error <= 8.0 * fx.alpha &&
                  dt < 900.0;
        std::snprintf(buf, sizeof buf,
                      "n=0: %.1f%% above alpha, max %.1f*alpha; n=2: %.1f%%, max %.1f*alpha "
                      "(gates 25%%, 8*alpha); %.0f s",
                      100.0 * nn.exceed_fraction, nn.max_error / fx.alpha,
                      100.0 * sp.exceed_fraction, sp.max_error / fx.alpha, dt);
        return std::make_pair(ok, std::string(buf));
    }});

    // 5 ------------------------------------------------------------------
    checks.push_back({5, "matching equals brute-force least squares, 1000 trials", [&] {
        const Dictionary& dict = fx.sparse();
        std::mt19937_64 rng(77);
        std::normal_distribution<double> g(0.0, 1.0);
        std::uniform_int_distribution<std::int64_t> pick(0, dict.atom_rows() - 1);
        int agreed = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            Eigen::VectorXcd m = dict.atoms.row(pick(rng)).transpose();
            m *= std::polar(0.2 + std::abs(g(rng)), g(rng));
            for (int i = 0; i < m.size(); ++i)
                m[i] += 0.001 * std::complex<double>(g(rng), g(rng));
            if (match_dictionary(m, dict).atom == test::residual_scan_match(m, dict.atoms))
                ++agreed;
        }
        std::snprintf(buf, sizeof buf, "%d/1000 argmax agreements (need 1000)", agreed);
        return std::make_pair(agreed == 1000, std::string(buf));
    }});

    // 6 ------------------------------------------------------------------
    checks.push_back({6, "reduced-objective gradient vs finite differences", [&] {
        double worst = 0.0;
        std::mt19937_64 rng(4242);
        std::normal_distribution<double> g(0.0, 1.0);
        const double h = 1e-5;
        for (int order : {2, 3}) {
            SplineModel model = build_spline(fx.precision_dict(), order, fx.threads);
            auto points = fx.draw_interior(model.grid, 50, 99 + order);
            for (const auto& v : points) {
                Eigen::VectorXcd m(model.channels);
                for (int i = 0; i < m.size(); ++i) m[i] = std::complex<double>(g(rng), g(rng));
                m.normalize();
                auto [f, grad] = reduced_objective(m, model, v);
                Eigen::VectorXd fd(3);
                for (int p = 0; p < 3; ++p) {
                    Eigen::VectorXd vp = v, vm = v;
                    vp[p] = std::min(vp[p] + h, double(model.grid.axes[p].K));
                    vm[p] = std::max(vm[p] - h, 1.0);
                    fd[p] = (reduced_objective_value(m, model, vp) -
                             reduced_objective_value(m, model, vm)) /
                            (vp[p] - vm[p]);
                }
                worst = std::max(worst, (grad - fd).norm() / std::max(fd.norm(), 1e-12));
            }
        }
        std::snprintf(buf, sizeof buf, "max rel deviation %.2e (tol 1e-5), 100 points", worst);
        return std::make_pair(worst <= 1e-5, std::string(buf));
    }});

    // 7 ------------------------------------------------------------------
    checks.push_back({7, "noiseless off-grid recovery within 1% T1 / 3% T2", [&] {
        const SplineModel& model = fx.precision_model();
        const Dictionary& dict = fx.precision_dict();
        auto points = fx.draw_interior(dict.grid, 48, 777);
        FitOptions opts;
        opts.abs_decrease_tol = 1e-9; // precision study: tighter stop than the default
        opts.max_iterations = 200;
        opts.multi_start = true; // guards against wrong-basin initializations
        double worst_t1 = 0.0, worst_t2 = 0.0;
        std::vector<double> e1(points.size()), e2(points.size());
        parallel_for(points.size(), fx.threads, [&](std::size_t i) {
            Eigen::VectorXd theta_true = dict.grid.to_params(points[i]);
            Eigen::VectorXcd m = fx.sim(theta_true);
            m /= m.norm();
            VoxelEstimate est = estimate_voxel(m, model, dict, opts);
            e1[i] = std::abs(est.theta_hat[0] - theta_true[0]) / theta_true[0];
            e2[i] = std::abs(est.theta_hat[1] - theta_true[1]) / theta_true[1];
        });
        for (std::size_t i = 0; i < points.size(); ++i) {
            worst_t1 = std::max(worst_t1, e1[i]);
            worst_t2 = std::max(worst_t2, e2[i]);
        }
        std::snprintf(buf, sizeof buf, "48 trials: max T1 err %.3f%% (gate 1%%), max T2 err "
                      "%.3f%% (gate 3%%)",
                      100.0 * worst_t1, 100.0 * worst_t2);
        return std::make_pair(worst_t1 <= 0.01 && worst_t2 <= 0.03, std::string(buf));
    }});

    // 8 ------------------------------------------------------------------
    checks.push_back({8, "fit/match parity at SNR 30 on the reference phantom", [&] {
        PhantomLayout layout;
        layout.radius = 13.0;
        layout.roi_voxels = 500;
        layout.rows = layout.cols = 112;
        SyntheticPhantom ph = synth_phantom(layout);

        ParityConfig cfg;
        cfg.snr = 30.0;
        cfg.seed = 3030;
        cfg.threads = fx.threads;
        cfg.fit_options.multi_start = true;
        ParityResult res = parity_experiment(ph, fx.schedule, fx.ensemble, fx.dense(),
                                             fx.sparse_compressed(), fx.sparse_model_c(), cfg);
        double r1 = res.fit.roi.median_rmse_T1() / res.match.roi.median_rmse_T1();
        double r2 = res.fit.roi.median_rmse_T2() / res.match.roi.median_rmse_T2();
        std::snprintf(buf, sizeof buf,
                      "median RMSE fit/match: T1 %.3f, T2 %.3f (gates 1.1); match %.0f s, "
                      "fit %.0f s",
                      r1, r2, res.match.timing.estimate_s, res.fit.timing.estimate_s);
        std::string detail = buf;
        if (fx.reference_shrunk) {
            // the criterion as stated cannot run on this machine; the
            // numbers above come from a proportionally shrunk reference
            detail = fx.infeasibility_note() + "; informational shrunk-reference run: " + detail;
            return std::make_pair(false, detail);
        }
        return std::make_pair(r1 <= 1.1 && r2 <= 1.1, detail);
    }});

    // 9 ------------------------------------------------------------------
    checks.push_back({9, "L=30 compression shifts fits by <= 1% T1 / 5% T2", [&] {
        PhantomLayout layout;
        layout.rows = layout.cols = 48;
        layout.radius = 3.2;
        layout.roi_voxels = 20;
        SyntheticPhantom ph = synth_phantom(layout);
        ComplexMatrixRM signals = phantom_signals(ph, fx.schedule, fx.ensemble, fx.threads);

        FitOptions opts;
        opts.abs_decrease_tol = 1e-9;
        opts.max_iterations = 200;
        opts.multi_start = true;
        Dictionary comp = compress_dictionary(fx.precision_dict(), Fixture::kRank);
        SplineModel comp_model = build_spline(comp, 2, fx.threads);
        MapResult raw = estimate_map(signals, ph, fx.precision_dict(), &fx.precision_model(),
                                     Method::Fit, opts, fx.threads);
        MapResult projected =
            estimate_map(signals, ph, comp, &comp_model, Method::Fit, opts, fx.threads);

        double dev1 = 0.0, dev2 = 0.0;
        int n = 0;
        for (int i = 0; i < ph.voxel_count(); ++i) {
            if (ph.labels[i] == 0) continue;
            dev1 += std::abs(projected.estimates[i].theta_hat[0] -
                             raw.estimates[i].theta_hat[0]) /
                    raw.estimates[i].theta_hat[0];
            dev2 += std::abs(projected.estimates[i].theta_hat[1] -
                             raw.estimates[i].theta_hat[1]) /
                    raw.estimates[i].theta_hat[1];
            ++n;
        }
        dev1 = 100.0 * dev1 / n;
        dev2 = 100.0 * dev2 / n;
        std::snprintf(buf, sizeof buf,
                      "mean abs deviation: T1 %.3f%% (gate 1%%), T2 %.3f%% (gate 5%%), %d voxels",
                      dev1, dev2, n);
        return std::make_pair(dev1 <= 1.0 && dev2 <= 5.0, std::string(buf));
    }});

    // 10 -----------------------------------------------------------------
    checks.push_back({10, "single-thread sparse fit at <= 0.5x dense match time", [&] {
        PhantomLayout layout; // 64x64 canvas per the criterion
        layout.rows = layout.cols = 64;
        layout.radius = 6.0;
        SyntheticPhantom ph = synth_phantom(layout);
        ComplexMatrixRM signals = phantom_signals(ph, fx.schedule, fx.ensemble, fx.threads);
        add_noise(signals, {sigma_for_snr(signals, ph.labels, 30.0), 606});

        MapResult match =
            estimate_map(signals, ph, fx.dense(), nullptr, Method::Match, {}, 1);
        MapResult fit = estimate_map(signals, ph, fx.sparse_compressed(),
                                     &fx.sparse_model_c(), Method::Fit, {}, 1);
        double ratio = fit.timing.estimate_s / match.timing.estimate_s;
        std::snprintf(buf, sizeof buf,
                      "dense match %.2f s, sparse fit %.2f s, ratio %.4f (gate 0.5)",
                      match.timing.estimate_s, fit.timing.estimate_s, ratio);
        std::string detail = buf;
        if (fx.reference_shrunk) {
            detail = fx.infeasibility_note() + "; informational shrunk-reference run: " + detail;
            return std::make_pair(false, detail);
        }
        return std::make_pair(ratio <= 0.5, detail);
    }});

    // 11 -----------------------------------------------------------------
    checks.push_back({11, "parity pipeline is byte-identical for 1 and 8 workers", [&] {
        PhantomLayout layout;
        layout.rows = layout.cols = 48;
        layout.radius = 3.2;
        layout.roi_voxels = 20;
        SyntheticPhantom ph = synth_phantom(layout);

        auto run = [&](int workers, const std::string& prefix) {
            ParityConfig cfg;
            cfg.snr = 30.0;
            cfg.seed = 1111;
            cfg.threads = workers;
            ParityResult res = parity_experiment(ph, fx.schedule, fx.ensemble, fx.dense(),
                                                 fx.sparse_compressed(), fx.sparse_model_c(),
                                                 cfg);
            write_parity_csv(res, fx.domain, prefix);
        };
        run(1, "acc11_w1");
        run(8, "acc11_w8");
        bool ok = true;
        // the summary carries wall times; the data files must match exactly
        for (const char* part : {"_match_roi.csv", "_fit_roi.csv", "_match_voxels.csv",
                                 "_fit_voxels.csv"}) {
            std::string a = slurp(std::string("acc11_w1") + part);
            std::string b = slurp(std::string("acc11_w8") + part);
            if (a.empty() || a != b) ok = false;
            std::remove((std::string("acc11_w1") + part).c_str());
            std::remove((std::string("acc11_w8") + part).c_str());
        }
        std::remove("acc11_w1_summary.csv");
        std::remove("acc11_w8_summary.csv");
        std::string detail = ok ? "all four data CSVs identical"
                                : "CSV outputs differ between worker counts";
        if (fx.reference_shrunk) detail += " (pipeline run on the shrunk reference)";
        return std::make_pair(ok, detail);
    }});

    if (list_only) {
        for (const auto& c : checks) std::printf("%2d  %s\n", c.id, c.name.c_str());
        return 0;
    }

    int failures = 0;
    for (const auto& c : checks) {
        if (!only.empty() && !only.count(c.id)) continue;
        std::printf("  ... criterion %d: %s\n", c.id, c.name.c_str());
        std::fflush(stdout);
        bool ok = false;
        std::string detail;
        try {
            auto [pass, text] = c.run();
            ok = pass;
            detail = text;
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %d: %s -- %s\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(),
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    std::printf("%s: %d criterion(s) failed\n", failures == 0 ? "OK" : "NOT OK", failures);
    return failures;
}
