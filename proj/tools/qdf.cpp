// Command-line front end: schedule generation, dictionary building and
// compression, resolution estimation, audits, synthetic phantoms, voxel
// estimation, and the canned experiments.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qdf/experiments.hpp"
#include "qdf/image.hpp"
#include "qdf/io.hpp"
#include "qdf/parallel.hpp"

using namespace qdf;

namespace {

struct ScheduleArgs {
    std::string csv_path;
    int rows = 1000;
    double ti = 40.0, te = 2.5, td = 5000.0;
    bool no_inversion = false;
    int spins = 200;

    void attach(CLI::App* cmd) {
        cmd->add_option("--schedule", csv_path, "schedule CSV (flip_deg,tr_ms); default train when omitted");
        cmd->add_option("--train-rows", rows, "rows of the default train")->check(CLI::PositiveNumber);
        cmd->add_option("--ti", ti, "inversion time [ms]");
        cmd->add_option("--te", te, "echo time [ms]");
        cmd->add_option("--td", td, "post-train delay [ms]");
        cmd->add_flag("--no-inversion", no_inversion, "disable the inversion pulse");
        cmd->add_option("--spins", spins, "slice-profile ensemble size")->check(CLI::PositiveNumber);
    }

    AcquisitionSchedule schedule() const {
        AcquisitionSchedule s =
            csv_path.empty() ? default_schedule(rows) : load_schedule_csv(csv_path);
        s.inversion_time_ms = ti;
        s.echo_time_ms = te;
        s.train_delay_ms = td;
        s.inversion_enabled = !no_inversion;
        s.validate();
        return s;
    }

    SpinEnsemble ensemble() const { return make_ensemble(spins); }
};

struct AxesArgs {
    std::vector<std::string> axis_specs;
    std::string config_path;

    void attach(CLI::App* cmd) {
        cmd->add_option("--axis", axis_specs,
                        "axis declaration, e.g. \"T1 log 80 3000 13\" (repeatable)");
        cmd->add_option("--config", config_path, "file with one axis declaration per line");
    }

    ParameterGrid grid() const {
        std::vector<ParameterAxis> axes;
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw IoError("cannot open " + config_path);
            std::string line;
            while (std::getline(f, line)) {
                if (line.empty() || line[0] == '#') continue;
                axes.push_back(parse_axis(line));
            }
        }
        for (const auto& spec : axis_specs) axes.push_back(parse_axis(spec));
        if (axes.empty()) throw InvalidParams("no axes given (use --axis or --config)");
        return ParameterGrid(std::move(axes));
    }
};

ParamSimulator make_simulator(const ParameterGrid& grid, const AcquisitionSchedule& sched,
                              const SpinEnsemble& ens) {
    SimOptions opts;
    opts.allow_unphysical = true;
    return [&grid, &sched, &ens, opts](const Eigen::VectorXd& theta) {
        return simulate_signal(tissue_from_axes(grid, theta), sched, ens, opts);
    };
}

void emit_parameter_maps(const std::vector<VoxelEstimate>& estimates, const ParameterGrid& grid,
                         int rows, int cols, const std::string& prefix) {
    for (int p = 0; p < grid.dims(); ++p) {
        std::vector<double> values(estimates.size());
        for (std::size_t i = 0; i < estimates.size(); ++i)
            values[i] = estimates[i].zero_signal ? 0.0 : estimates[i].theta_hat[p];
        emit_map(values, rows, cols, 0.0, grid.axes[p].max, prefix + "_" + grid.axes[p].name);
    }
    std::vector<double> pd(estimates.size());
    for (std::size_t i = 0; i < estimates.size(); ++i) pd[i] = std::abs(estimates[i].rho_hat);
    double top = *std::max_element(pd.begin(), pd.end());
    emit_map(pd, rows, cols, 0.0, std::max(top, 1e-30), prefix + "_PD");
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dictionary-fitting toolkit for multi-parameter MR mapping"};
    app.require_subcommand(1);
    app.fallthrough();

    int threads = 0;
    std::uint64_t seed = 1;
    double alpha = 5e-4;
    int order = 2;
    int L = 0;
    app.add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();
    app.add_option("--seed", seed, "random seed")->capture_default_str();
    app.add_option("--alpha", alpha, "target interpolation error")->capture_default_str();
    app.add_option("--order", order, "B-spline order")->check(CLI::Range(0, 3))
        ->capture_default_str();
    app.add_option("--L", L, "SVD rank (0 = uncompressed)")->capture_default_str();

    // ------------------------------------------------------ gen-schedule
    auto* gen = app.add_subcommand("gen-schedule", "write the default flip/TR train as CSV");
    int gen_rows = 1000;
    std::string gen_out = "schedule.csv";
    gen->add_option("--rows", gen_rows, "number of excitations")->check(CLI::PositiveNumber);
    gen->add_option("--out", gen_out, "output CSV path");
    gen->callback([&] {
        save_schedule_csv(default_schedule(gen_rows), gen_out);
        std::printf("wrote %s (%d rows)\n", gen_out.c_str(), gen_rows);
    });

    // --------------------------------------------------------- build-dict
    auto* build = app.add_subcommand("build-dict", "simulate a dictionary over a parameter grid");
    ScheduleArgs build_sched;
    AxesArgs build_axes;
    std::string build_out = "dictionary.qdfd";
    build_sched.attach(build);
    build_axes.attach(build);
    build->add_option("--out", build_out, "output dictionary path");
    build->callback([&] {
        auto sched = build_sched.schedule();
        auto ens = build_sched.ensemble();
        ParameterGrid grid = build_axes.grid();
        auto t0 = std::chrono::steady_clock::now();
        Dictionary dict = L > 0 ? generate_compressed_dictionary(grid, sched, ens, L, threads)
                                : generate_dictionary(grid, sched, ens, threads);
        std::printf("generated %lld atoms (M=%d, L=%d) in %.1f s\n",
                    static_cast<long long>(dict.atom_rows()), dict.signal_length,
                    dict.compressed_length, elapsed(t0));
        save_dictionary(dict, build_out);
        std::printf("wrote %s\n", build_out.c_str());
    });

    // ----------------------------------------------------------- compress
    auto* comp = app.add_subcommand("compress", "project a raw dictionary onto its top-L basis");
    std::string comp_in, comp_out = "compressed.qdfd";
    comp->add_option("--in", comp_in, "raw dictionary")->required();
    comp->add_option("--out", comp_out, "output path");
    comp->callback([&] {
        Dictionary dict = load_dictionary(comp_in);
        int rank = L > 0 ? L : 30;
        Dictionary small = compress_dictionary(dict, rank);
        std::printf("L=%d keeps %.6f of the spectral energy\n", rank,
                    small.basis->energy_fraction);
        if (small.basis->rank_deficient)
            std::printf("warning: trailing singular values are numerically zero\n");
        save_dictionary(small, comp_out);
        std::printf("wrote %s\n", comp_out.c_str());
    });

    // ------------------------------------------------- estimate-resolution
    auto* resolve_cmd =
        app.add_subcommand("estimate-resolution", "size each axis for the target error");
    ScheduleArgs res_sched;
    AxesArgs res_axes;
    std::vector<int> res_orders = {0, 1, 2, 3};
    int res_levels = 10;
    double res_safety = 2.0;
    bool res_linear = false;
    std::string res_prefix = "resolution";
    res_sched.attach(resolve_cmd);
    res_axes.attach(resolve_cmd);
    resolve_cmd->add_option("--orders", res_orders, "spline orders to evaluate");
    resolve_cmd->add_option("--levels", res_levels, "max dyadic refinements J");
    resolve_cmd->add_option("--safety", res_safety, "threshold divisor applied to alpha");
    resolve_cmd->add_flag("--linear-interp", res_linear,
                          "interpolate the error curve linearly instead of log-log");
    resolve_cmd->add_option("--out-prefix", res_prefix, "prefix for CSV/SVG outputs");
    resolve_cmd->callback([&] {
        auto sched = res_sched.schedule();
        auto ens = res_sched.ensemble();
        ParameterGrid domain = res_axes.grid();
        ResolutionConfig cfg;
        cfg.alpha = alpha;
        cfg.safety_factor = res_safety;
        cfg.max_levels = res_levels;
        cfg.orders = res_orders;
        cfg.loglog_interp = !res_linear;
        auto t0 = std::chrono::steady_clock::now();
        ResolutionReport report =
            error_decay_experiment(domain, cfg, make_simulator(domain, sched, ens), threads);
        std::printf("resolution estimated in %.1f s\n", elapsed(t0));
        write_resolution_csv(report, res_prefix + "_curves.csv");
        write_selected_csv(report, res_prefix + "_selected.csv");
        emit_resolution_svg(report, res_prefix);
        for (const auto& e : report.entries) {
            if (e.reached)
                std::printf("  %-4s n=%d  K=%d\n", report.axes[e.axis].name.c_str(), e.order,
                            e.selected_K);
            else
                std::printf("  %-4s n=%d  not reached (floor %.3e)\n",
                            report.axes[e.axis].name.c_str(), e.order, e.floor_estimate);
        }
        for (int n : res_orders) {
            if (!report.all_reached(n)) continue;
            std::printf("  n=%d total atoms: %lld\n", n,
                        static_cast<long long>(report.total_atoms(n)));
        }
    });

    // -------------------------------------------------------------- audit
    auto* audit_cmd = app.add_subcommand("audit", "interior interpolation-error audit");
    ScheduleArgs audit_sched;
    std::string audit_dict;
    int audit_samples = 1000;
    std::string audit_prefix = "audit";
    audit_sched.attach(audit_cmd);
    audit_cmd->add_option("--dict", audit_dict, "dictionary to audit")->required();
    audit_cmd->add_option("--samples", audit_samples, "number of interior samples");
    audit_cmd->add_option("--out-prefix", audit_prefix, "prefix for CSV/SVG outputs");
    audit_cmd->callback([&] {
        Dictionary dict = load_dictionary(audit_dict);
        if (dict.compressed_length > 0)
            throw InvalidParams("audit runs on uncompressed dictionaries");
        auto sched = audit_sched.schedule();
        auto ens = audit_sched.ensemble();
        if (sched.length() != dict.signal_length)
            throw InvalidParams("schedule length does not match the dictionary (pass "
                                "--train-rows or the original --schedule)");
        if (dict.fingerprint != acquisition_fingerprint(sched, ens))
            std::printf("warning: dictionary fingerprint does not match this schedule\n");
        auto sim = make_simulator(dict.grid, sched, ens);
        AuditStats stats;
        if (order == 0) {
            stats = interior_error_audit_nearest(dict.grid, sim, audit_samples, alpha, seed,
                                                 threads);
        } else {
            SplineModel model = build_spline(dict, order, threads);
            stats = interior_error_audit(model, sim, audit_samples, alpha, seed, threads);
        }
        std::printf("order %d: rms %.3e  max %.3e  above alpha %.1f%%\n", order, stats.rms,
                    stats.max_error, 100.0 * stats.exceed_fraction);
        write_audit_csv(stats, dict.grid, audit_prefix + "_samples.csv");
        emit_audit_svg(stats, dict.grid, alpha, audit_prefix);
    });

    // ------------------------------------------------------------ phantom
    auto* phantom_cmd = app.add_subcommand("phantom", "emit the synthetic phantom");
    ScheduleArgs ph_sched;
    int ph_rows = 64, ph_cols = 64, ph_roi_voxels = 0;
    double ph_radius = 6.0, ph_snr = 0.0;
    std::string ph_prefix = "phantom", ph_signals;
    ph_sched.attach(phantom_cmd);
    phantom_cmd->add_option("--rows", ph_rows);
    phantom_cmd->add_option("--cols", ph_cols);
    phantom_cmd->add_option("--radius", ph_radius, "ROI disk radius in pixels");
    phantom_cmd->add_option("--roi-voxels", ph_roi_voxels, "exact voxels per ROI (0 = full disk)");
    phantom_cmd->add_option("--snr", ph_snr, "add noise at this SNR (0 = noiseless)");
    phantom_cmd->add_option("--out-prefix", ph_prefix, "prefix for reference maps");
    phantom_cmd->add_option("--signals", ph_signals, "also write simulated voxel signals (QDFS)");
    phantom_cmd->callback([&] {
        PhantomLayout layout;
        layout.rows = ph_rows;
        layout.cols = ph_cols;
        layout.radius = ph_radius;
        layout.roi_voxels = ph_roi_voxels;
        SyntheticPhantom ph = synth_phantom(layout);
        std::vector<double> t1(ph.voxel_count()), t2(ph.voxel_count()), lab(ph.voxel_count());
        for (int i = 0; i < ph.voxel_count(); ++i) {
            t1[i] = ph.labels[i] ? ph.params[i].T1_ms : 0.0;
            t2[i] = ph.labels[i] ? ph.params[i].T2_ms : 0.0;
            lab[i] = ph.labels[i];
        }
        emit_map(t1, ph.rows, ph.cols, 0.0, 3000.0, ph_prefix + "_T1");
        emit_map(t2, ph.rows, ph.cols, 0.0, 650.0, ph_prefix + "_T2");
        emit_map(lab, ph.rows, ph.cols, 0.0, double(ph.rois.size()), ph_prefix + "_labels");
        std::printf("phantom: %dx%d, %d foreground voxels, %zu ROIs\n", ph.rows, ph.cols,
                    ph.foreground_count(), ph.rois.size());
        if (!ph_signals.empty()) {
            auto sched = ph_sched.schedule();
            auto ens = ph_sched.ensemble();
            ComplexMatrixRM sig = phantom_signals(ph, sched, ens, threads);
            if (ph_snr > 0.0) add_noise(sig, {sigma_for_snr(sig, ph.labels, ph_snr), seed});
            SignalSet set;
            set.length = sched.length();
            set.signals = std::move(sig);
            save_signals(set, ph_signals);
            std::printf("wrote %s\n", ph_signals.c_str());
        }
    });

    // -------------------------------------------------------- match / fit
    for (const char* name : {"match", "fit"}) {
        const bool fitting = std::string(name) == "fit";
        auto* cmd = app.add_subcommand(
            name, fitting ? "continuous spline fit per voxel" : "discrete dictionary match");
        auto dict_path = std::make_shared<std::string>();
        auto sig_path = std::make_shared<std::string>();
        auto out_csv = std::make_shared<std::string>(fitting ? "fit.csv" : "match.csv");
        auto maps_prefix = std::make_shared<std::string>();
        auto map_rows = std::make_shared<int>(0);
        auto map_cols = std::make_shared<int>(0);
        auto fit_tol = std::make_shared<double>(1e-5);
        auto fit_iters = std::make_shared<int>(100);
        auto multi_start = std::make_shared<bool>(false);
        auto cache_path = std::make_shared<std::string>();
        cmd->add_option("--dict", *dict_path, "dictionary file")->required();
        cmd->add_option("--signals", *sig_path, "QDFS voxel signals")->required();
        cmd->add_option("--out", *out_csv, "per-voxel CSV output");
        cmd->add_option("--maps", *maps_prefix, "also write parameter maps with this prefix");
        cmd->add_option("--map-rows", *map_rows, "map geometry rows");
        cmd->add_option("--map-cols", *map_cols, "map geometry columns");
        if (fitting) {
            cmd->add_option("--tol", *fit_tol, "absolute objective-decrease tolerance");
            cmd->add_option("--max-iters", *fit_iters, "iteration cap");
            cmd->add_flag("--multi-start", *multi_start, "diversified extra starts");
            cmd->add_option("--cache", *cache_path,
                            "spline coefficient cache (loaded when present, else written)");
        }
        cmd->callback([&, dict_path, sig_path, out_csv, maps_prefix, map_rows, map_cols, fit_tol,
                       fit_iters, multi_start, cache_path, fitting] {
            auto t0 = std::chrono::steady_clock::now();
            Dictionary dict = load_dictionary(*dict_path);
            std::printf("loaded %lld atoms in %.2f s\n",
                        static_cast<long long>(dict.atom_rows()), elapsed(t0));
            SignalSet set = load_signals(*sig_path);

            ComplexMatrixRM work;
            if (dict.compressed_length > 0 && set.length == dict.signal_length) {
                work = set.signals * dict.basis->V.conjugate();
            } else if (set.length == dict.columns()) {
                work = set.signals;
            } else {
                throw DimensionMismatch("signal length matches neither M nor L");
            }

            std::vector<VoxelEstimate> estimates(work.rows());
            double prefilter_s = 0.0;
            t0 = std::chrono::steady_clock::now();
            if (fitting) {
                if (order == 0)
                    throw Unsupported("fitting needs a spline order >= 1 (use match instead)");
                SplineModel model;
                if (!cache_path->empty() && std::ifstream(*cache_path).good()) {
                    model = load_spline(*cache_path);
                    if (model.order != order || model.channels != dict.columns())
                        throw InvalidParams("cache does not match this dictionary and order");
                } else {
                    model = build_spline(dict, order, threads);
                    if (!cache_path->empty()) save_spline(model, *cache_path);
                }
                prefilter_s = elapsed(t0);
                FitOptions opts;
                opts.abs_decrease_tol = *fit_tol;
                opts.max_iterations = *fit_iters;
                opts.multi_start = *multi_start;
                t0 = std::chrono::steady_clock::now();
                parallel_for(static_cast<std::size_t>(work.rows()), threads, [&](std::size_t i) {
                    estimates[i] = estimate_voxel(
                        work.row(static_cast<Eigen::Index>(i)).transpose(), model, dict, opts);
                });
            } else {
                auto matches = match_dictionary_batch(work, dict, threads);
                const int P = dict.grid.dims();
                for (std::size_t i = 0; i < matches.size(); ++i) {
                    VoxelEstimate est;
                    if (matches[i].zero_signal) {
                        est.zero_signal = true;
                        est.v_hat = Eigen::VectorXd::Ones(P);
                        est.theta_hat = dict.grid.to_params(est.v_hat);
                    } else {
                        auto k = dict.grid.index_vector(matches[i].atom);
                        est.v_hat.resize(P);
                        for (int p = 0; p < P; ++p) est.v_hat[p] = k[p];
                        est.theta_hat = dict.grid.to_params(est.v_hat);
                        est.rho_hat = matches[i].rho;
                        est.converged = true;
                        est.residual_norm =
                            (work.row(static_cast<Eigen::Index>(i)).transpose() -
                             matches[i].rho * dict.atoms.row(matches[i].atom).transpose())
                                .norm();
                    }
                    estimates[i] = std::move(est);
                }
            }
            double estimate_s = elapsed(t0);
            std::printf("prefilter %.2f s, estimation %.2f s (%.2f ms/voxel)\n", prefilter_s,
                        estimate_s, 1e3 * estimate_s / double(work.rows()));
            write_estimates_csv(estimates, dict.grid, *out_csv);
            std::printf("wrote %s\n", out_csv->c_str());
            if (!maps_prefix->empty()) {
                int r = *map_rows, c = *map_cols;
                if (r * c != static_cast<int>(estimates.size()))
                    throw InvalidParams("--map-rows/--map-cols must cover every voxel");
                emit_parameter_maps(estimates, dict.grid, r, c, *maps_prefix);
            }
        });
    }

    // --------------------------------------------------------- experiment
    auto* exp = app.add_subcommand("experiment", "canned studies");
    exp->require_subcommand(1);
    ScheduleArgs exp_sched;
    AxesArgs exp_axes;
    std::string exp_prefix = "experiment";
    int exp_levels = 10;
    double exp_safety = 1.0;
    exp_sched.attach(exp);
    exp_axes.attach(exp);
    exp->add_option("--out-prefix", exp_prefix, "prefix for all outputs");
    exp->add_option("--levels", exp_levels, "max dyadic refinements J");
    exp->add_option("--safety", exp_safety, "threshold divisor applied to alpha");
    exp->fallthrough();

    auto exp_domain = [&] {
        if (!exp_axes.axis_specs.empty() || !exp_axes.config_path.empty())
            return exp_axes.grid();
        return ParameterGrid({ParameterAxis("T1", 80.0, 3000.0, 2, Spacing::Log),
                              ParameterAxis("T2", 5.0, 650.0, 2, Spacing::Log),
                              ParameterAxis("B1", 0.9, 1.1, 2, Spacing::Linear)});
    };

    auto* fig1 = exp->add_subcommand("fig1", "edge error decay versus atom count");
    fig1->callback([&] {
        auto sched = exp_sched.schedule();
        auto ens = exp_sched.ensemble();
        ParameterGrid domain = exp_domain();
        ResolutionConfig cfg;
        cfg.alpha = alpha;
        cfg.safety_factor = exp_safety;
        cfg.max_levels = exp_levels;
        ResolutionReport report =
            error_decay_experiment(domain, cfg, make_simulator(domain, sched, ens), threads);
        write_resolution_csv(report, exp_prefix + "_curves.csv");
        write_selected_csv(report, exp_prefix + "_selected.csv");
        emit_resolution_svg(report, exp_prefix);
        std::printf("wrote %s_curves.csv and per-axis SVGs\n", exp_prefix.c_str());
    });

    auto* fig2 = exp->add_subcommand("fig2", "interior audit of the sized dictionaries");
    int fig2_samples = 1000;
    fig2->add_option("--samples", fig2_samples);
    fig2->callback([&] {
        auto sched = exp_sched.schedule();
        auto ens = exp_sched.ensemble();
        ParameterGrid domain = exp_domain();
        ResolutionConfig cfg;
        cfg.alpha = alpha;
        cfg.safety_factor = exp_safety;
        cfg.max_levels = exp_levels;
        cfg.orders = {0, 2};
        auto sim = make_simulator(domain, sched, ens);
        ResolutionReport report = estimate_grid_resolution(domain, cfg, sim, threads);

        auto counts_for = [&](int n) {
            std::vector<int> counts;
            for (std::size_t p = 0; p < report.axes.size(); ++p) {
                const auto& e = report.entry(static_cast<int>(p), n);
                int K = e.reached ? e.selected_K : e.curve.back().K;
                counts.push_back(std::max(K, n >= 2 ? 3 : 2));
            }
            return counts;
        };

        ParameterGrid dense_grid = domain.with_counts(counts_for(0));
        AuditStats nn = interior_error_audit_nearest(dense_grid, sim, fig2_samples, alpha, seed,
                                                     threads);
        std::printf("n=0: rms %.3e max %.3e above-alpha %.1f%%\n", nn.rms, nn.max_error,
                    100.0 * nn.exceed_fraction);
        write_audit_csv(nn, dense_grid, exp_prefix + "_match_audit.csv");
        emit_audit_svg(nn, dense_grid, alpha, exp_prefix + "_match");

        ParameterGrid sparse_grid = domain.with_counts(counts_for(2));
        Dictionary sparse = generate_dictionary(sparse_grid, sched, ens, threads);
        SplineModel model = build_spline(sparse, 2, threads);
        AuditStats sp = interior_error_audit(model, sim, fig2_samples, alpha, seed, threads);
        std::printf("n=2: rms %.3e max %.3e above-alpha %.1f%%\n", sp.rms, sp.max_error,
                    100.0 * sp.exceed_fraction);
        write_audit_csv(sp, sparse_grid, exp_prefix + "_fit_audit.csv");
        emit_audit_svg(sp, sparse_grid, alpha, exp_prefix + "_fit");
    });

    auto* suppd = exp->add_subcommand("suppD", "atom counts over an alpha sweep");
    suppd->callback([&] {
        auto sched = exp_sched.schedule();
        auto ens = exp_sched.ensemble();
        ParameterGrid domain = exp_domain();
        auto sim = make_simulator(domain, sched, ens);
        std::ofstream f(exp_prefix + "_suppD.csv");
        if (!f) throw IoError("cannot open output");
        f << "alpha,n";
        for (const auto& a : domain.axes) f << ',' << a.name;
        f << "\n";
        for (double a : {5e-3, 5e-4, 5e-5}) {
            ResolutionConfig cfg;
            cfg.alpha = a;
            cfg.safety_factor = exp_safety;
            cfg.max_levels = exp_levels;
            ResolutionReport report = estimate_grid_resolution(domain, cfg, sim, threads);
            for (int n : cfg.orders) {
                f << a << ',' << n;
                for (int p = 0; p < domain.dims(); ++p) {
                    const auto& e = report.entry(p, n);
                    if (e.reached)
                        f << ',' << e.selected_K;
                    else
                        f << ",>" << e.curve.back().K;
                }
                f << "\n";
            }
        }
        std::printf("wrote %s_suppD.csv\n", exp_prefix.c_str());
    });

    auto* parity = exp->add_subcommand("parity", "sparse fitting versus dense matching");
    int parity_voxels = 100;
    double parity_snr = 30.0;
    double parity_radius = 13.0;
    std::int64_t parity_budget = 30000000;
    parity->add_option("--voxels-per-roi", parity_voxels);
    parity->add_option("--snr", parity_snr);
    parity->add_option("--radius", parity_radius, "ROI disk radius in pixels");
    parity->add_option("--dense-budget", parity_budget,
                       "refuse to build a reference dictionary above this atom count");
    bool parity_multi = false;
    parity->add_flag("--multi-start", parity_multi, "diversified extra starts for the fit");
    parity->callback([&] {
        auto sched = exp_sched.schedule();
        auto ens = exp_sched.ensemble();
        ParameterGrid domain = exp_domain();
        auto sim = make_simulator(domain, sched, ens);
        ResolutionConfig cfg;
        cfg.alpha = alpha;
        cfg.safety_factor = exp_safety;
        cfg.max_levels = exp_levels;
        cfg.orders = {0, 2};
        std::printf("sizing the grids...\n");
        ResolutionReport report = estimate_grid_resolution(domain, cfg, sim, threads);
        std::vector<int> dense_counts, sparse_counts;
        for (std::size_t p = 0; p < report.axes.size(); ++p) {
            const auto& e0 = report.entry(static_cast<int>(p), 0);
            const auto& e2 = report.entry(static_cast<int>(p), 2);
            dense_counts.push_back(e0.reached ? e0.selected_K : e0.curve.back().K);
            sparse_counts.push_back(std::max(e2.reached ? e2.selected_K : e2.curve.back().K, 3));
        }
        ParameterGrid dense_grid = domain.with_counts(dense_counts);
        ParameterGrid sparse_grid = domain.with_counts(sparse_counts);
        if (dense_grid.atom_count() > parity_budget)
            throw InvalidParams("reference dictionary needs " +
                                std::to_string(dense_grid.atom_count()) +
                                " atoms, above --dense-budget");

        int rank = L > 0 ? L : 30;
        std::printf("building the reference dictionary (%lld atoms, L=%d)...\n",
                    static_cast<long long>(dense_grid.atom_count()), rank);
        Dictionary dense = generate_compressed_dictionary(dense_grid, sched, ens, rank, threads);
        std::printf("building the sparse dictionary (%lld atoms)...\n",
                    static_cast<long long>(sparse_grid.atom_count()));
        Dictionary sparse =
            compress_dictionary(generate_dictionary(sparse_grid, sched, ens, threads), rank);
        SplineModel model = build_spline(sparse, 2, threads);

        PhantomLayout layout;
        layout.radius = parity_radius;
        layout.roi_voxels = parity_voxels;
        layout.rows = layout.cols =
            static_cast<int>(std::ceil(std::sqrt(14.0) * 2.0 * (parity_radius + 1.0)));
        SyntheticPhantom ph = synth_phantom(layout);

        ParityConfig pc;
        pc.snr = parity_snr;
        pc.seed = seed;
        pc.threads = threads;
        pc.fit_options.multi_start = parity_multi;
        ParityResult result = parity_experiment(ph, sched, ens, dense, sparse, model, pc);
        write_parity_csv(result, domain, exp_prefix);
        std::printf("median RMSE  T1: match %.2f%% fit %.2f%%   T2: match %.2f%% fit %.2f%%\n",
                    result.match.roi.median_rmse_T1(), result.fit.roi.median_rmse_T1(),
                    result.match.roi.median_rmse_T2(), result.fit.roi.median_rmse_T2());
        std::printf("estimation time  match %.1f s  fit %.1f s\n",
                    result.match.timing.estimate_s, result.fit.timing.estimate_s);
    });

    // global flags may follow the subcommand
    for (auto* sc : app.get_subcommands({})) {
        sc->fallthrough();
        for (auto* nested : sc->get_subcommands({})) nested->fallthrough();
    }

    CLI11_PARSE(app, argc, argv);
    return 0;
}
