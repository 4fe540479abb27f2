#include "qdf/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "qdf/parallel.hpp"

namespace qdf {

namespace {

double median(std::vector<double> x) {
    if (x.empty()) return 0.0;
    std::sort(x.begin(), x.end());
    std::size_t n = x.size();
    return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

double RoiReport::median_rmse_T1() const {
    std::vector<double> v;
    for (const auto& r : rois) v.push_back(r.rmse_T1_pct);
    return median(std::move(v));
}

double RoiReport::median_rmse_T2() const {
    std::vector<double> v;
    for (const auto& r : rois) v.push_back(r.rmse_T2_pct);
    return median(std::move(v));
}

ComplexMatrixRM phantom_signals(const SyntheticPhantom& phantom,
                                const AcquisitionSchedule& schedule,
                                const SpinEnsemble& ensemble, int threads) {
    const int n = phantom.voxel_count();
    const int M = schedule.length();

    // dedupe tissue combinations (ROI values x the B1 ramp)
    std::map<std::tuple<double, double, double, double, double>, int> slot;
    std::vector<TissueParams> unique_params;
    std::vector<int> voxel_slot(n, -1);
    for (int i = 0; i < n; ++i) {
        if (phantom.labels[i] == 0) continue;
        const TissueParams& t = phantom.params[i];
        auto key = std::make_tuple(t.T1_ms, t.T2_ms, t.B1_plus, t.delta_omega0, t.T2_prime_ms);
        auto [it, fresh] = slot.emplace(key, static_cast<int>(unique_params.size()));
        if (fresh) unique_params.push_back(t);
        voxel_slot[i] = it->second;
    }

    std::vector<Eigen::VectorXcd> unique_signals(unique_params.size());
    parallel_for(unique_params.size(), threads, [&](std::size_t i) {
        unique_signals[i] = simulate_signal(unique_params[i], schedule, ensemble);
    });

    ComplexMatrixRM signals = ComplexMatrixRM::Zero(n, M);
    for (int i = 0; i < n; ++i)
        if (voxel_slot[i] >= 0)
            signals.row(i) = phantom.rho[i] * unique_signals[voxel_slot[i]].transpose();
    return signals;
}

double sigma_for_snr(const ComplexMatrixRM& signals, const std::vector<int>& labels, double snr) {
    if (!(snr > 0.0)) throw InvalidParams("SNR must be > 0");
    double acc = 0.0;
    int count = 0;
    for (Eigen::Index i = 0; i < signals.rows(); ++i) {
        if (labels[i] == 0) continue;
        acc += signals.row(i).cwiseAbs().mean();
        ++count;
    }
    if (count == 0) throw InvalidParams("phantom has no foreground voxels");
    return acc / count / snr;
}

MapResult estimate_map(const ComplexMatrixRM& signals, const SyntheticPhantom& phantom,
                       const Dictionary& dict, const SplineModel* model, Method method,
                       const FitOptions& options, int threads) {
    const int n = phantom.voxel_count();
    if (signals.rows() != n) throw DimensionMismatch("signal rows do not match the phantom");
    if (method == Method::Fit && model == nullptr)
        throw InvalidParams("fitting needs a spline model");

    // shared projection into the compressed space
    ComplexMatrixRM work;
    if (dict.compressed_length > 0) {
        if (!dict.basis) throw InvalidParams("compressed dictionary lacks its basis");
        work = signals * dict.basis->V.conjugate();
    } else {
        work = signals;
    }

    MapResult result;
    result.estimates.resize(n);
    auto background = [&](std::size_t i) {
        VoxelEstimate est;
        est.zero_signal = true;
        est.v_hat = Eigen::VectorXd::Ones(dict.grid.dims());
        est.theta_hat = dict.grid.to_params(est.v_hat);
        result.estimates[i] = std::move(est);
    };

    auto t0 = std::chrono::steady_clock::now();
    if (method == Method::Match) {
        // batched scoring; background voxels are zero rows and come back flagged
        std::vector<MatchResult> matches = match_dictionary_batch(work, dict, threads);
        const int P = dict.grid.dims();
        parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
            if (phantom.labels[i] == 0 || matches[i].zero_signal) {
                background(i);
                return;
            }
            VoxelEstimate est;
            std::vector<int> k = dict.grid.index_vector(matches[i].atom);
            est.v_hat.resize(P);
            for (int p = 0; p < P; ++p) est.v_hat[p] = k[p];
            est.theta_hat = dict.grid.to_params(est.v_hat);
            est.rho_hat = matches[i].rho;
            est.residual_norm = (work.row(static_cast<Eigen::Index>(i)).transpose() -
                                 matches[i].rho * dict.atoms.row(matches[i].atom).transpose())
                                    .norm();
            est.converged = true;
            result.estimates[i] = std::move(est);
        });
    } else {
        parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
            if (phantom.labels[i] == 0) {
                background(i);
                return;
            }
            Eigen::VectorXcd m = work.row(static_cast<Eigen::Index>(i)).transpose();
            result.estimates[i] = estimate_voxel(m, *model, dict, options);
        });
    }
    result.timing.estimate_s = seconds_since(t0);

    // per-ROI relative RMSE against the calibrated values
    const int it1 = dict.grid.axis_index("T1");
    const int it2 = dict.grid.axis_index("T2");
    for (std::size_t r = 0; r < phantom.rois.size(); ++r) {
        RoiStats st;
        st.roi = static_cast<int>(r) + 1;
        st.calibrated_T1 = phantom.rois[r].T1_ms;
        st.calibrated_T2 = phantom.rois[r].T2_ms;
        double sum1 = 0, sum2 = 0, sq1 = 0, sq2 = 0;
        for (int i = 0; i < n; ++i) {
            if (phantom.labels[i] != st.roi) continue;
            double t1 = it1 >= 0 ? result.estimates[i].theta_hat[it1] : 0.0;
            double t2 = it2 >= 0 ? result.estimates[i].theta_hat[it2] : 0.0;
            sum1 += t1;
            sum2 += t2;
            sq1 += (t1 - st.calibrated_T1) * (t1 - st.calibrated_T1);
            sq2 += (t2 - st.calibrated_T2) * (t2 - st.calibrated_T2);
            ++st.voxels;
        }
        if (st.voxels == 0) continue;
        st.mean_T1 = sum1 / st.voxels;
        st.mean_T2 = sum2 / st.voxels;
        st.rmse_T1_pct = 100.0 * std::sqrt(sq1 / st.voxels) / st.calibrated_T1;
        st.rmse_T2_pct = 100.0 * std::sqrt(sq2 / st.voxels) / st.calibrated_T2;
        result.roi.rois.push_back(st);
    }
    return result;
}

MapResult run_map(const SyntheticPhantom& phantom, const AcquisitionSchedule& schedule,
                  const SpinEnsemble& ensemble, const Dictionary& dict, const SplineModel* model,
                  Method method, const NoiseModel& noise, const FitOptions& options,
                  int threads) {
    auto t0 = std::chrono::steady_clock::now();
    ComplexMatrixRM signals = phantom_signals(phantom, schedule, ensemble, threads);
    add_noise(signals, noise);
    double sim_s = seconds_since(t0);
    MapResult result = estimate_map(signals, phantom, dict, model, method, options, threads);
    result.timing.simulate_s = sim_s;
    return result;
}

void write_estimates_csv(const std::vector<VoxelEstimate>& estimates, const ParameterGrid& grid,
                         const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << "voxel";
    for (const auto& a : grid.axes) f << ',' << a.name;
    f << ",rho_abs,rho_arg,residual,iterations,converged\n";
    char buf[64];
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const auto& e = estimates[i];
        f << i;
        for (int p = 0; p < grid.dims(); ++p) {
            std::snprintf(buf, sizeof buf, ",%.10g", e.theta_hat.size() ? e.theta_hat[p] : 0.0);
            f << buf;
        }
        std::snprintf(buf, sizeof buf, ",%.10g,%.10g,%.10g,%d,%d\n", std::abs(e.rho_hat),
                      std::arg(e.rho_hat), e.residual_norm, e.iterations, e.converged ? 1 : 0);
        f << buf;
    }
    if (!f) throw IoError("write failed: " + path);
}

void write_roi_csv(const RoiReport& report, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << "roi,calibrated_T1,calibrated_T2,mean_T1,mean_T2,rmse_T1_pct,rmse_T2_pct,voxels\n";
    char buf[160];
    for (const auto& r : report.rois) {
        std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%d\n", r.roi,
                      r.calibrated_T1, r.calibrated_T2, r.mean_T1, r.mean_T2, r.rmse_T1_pct,
                      r.rmse_T2_pct, r.voxels);
        f << buf;
    }
    if (!f) throw IoError("write failed: " + path);
}

} // namespace qdf
