#ifndef QDF_METRICS_HPP
#define QDF_METRICS_HPP

#include <string>
#include <vector>

#include "qdf/estimate.hpp"
#include "qdf/noise.hpp"
#include "qdf/phantom.hpp"

namespace qdf {

enum class Method { Match, Fit };

struct RoiStats {
    int roi = 0;
    double calibrated_T1 = 0.0, calibrated_T2 = 0.0;
    double mean_T1 = 0.0, mean_T2 = 0.0;
    double rmse_T1_pct = 0.0, rmse_T2_pct = 0.0; // percent of the calibrated value
    int voxels = 0;
};

struct RoiReport {
    std::vector<RoiStats> rois;
    double median_rmse_T1() const;
    double median_rmse_T2() const;
};

struct RunTiming {
    double simulate_s = 0.0;
    double prefilter_s = 0.0;
    double estimate_s = 0.0; // per-voxel matching/fitting only
};

struct MapResult {
    std::vector<VoxelEstimate> estimates; // one per voxel, background flagged
    RoiReport roi;
    RunTiming timing;
};

/// Noiseless complex signals of every voxel (rho applied; background rows
/// zero). Unique tissue parameter combinations are simulated once.
ComplexMatrixRM phantom_signals(const SyntheticPhantom& phantom,
                                const AcquisitionSchedule& schedule,
                                const SpinEnsemble& ensemble, int threads = 0);

/// Noise level for a target SNR: mean per-voxel mean |s| over the train,
/// divided by the SNR. Background voxels are excluded.
double sigma_for_snr(const ComplexMatrixRM& signals, const std::vector<int>& labels, double snr);

/// Estimate every foreground voxel of pre-simulated (possibly noisy)
/// signals. Signals are given in raw time space and are projected once
/// when the dictionary is compressed. `model` may be null for Match.
MapResult estimate_map(const ComplexMatrixRM& signals, const SyntheticPhantom& phantom,
                       const Dictionary& dict, const SplineModel* model, Method method,
                       const FitOptions& options = {}, int threads = 0);

/// simulate -> add noise -> estimate, in one call.
MapResult run_map(const SyntheticPhantom& phantom, const AcquisitionSchedule& schedule,
                  const SpinEnsemble& ensemble, const Dictionary& dict, const SplineModel* model,
                  Method method, const NoiseModel& noise, const FitOptions& options = {},
                  int threads = 0);

/// Per-voxel estimate CSV: voxel id, T1, T2, B1, |rho|, arg rho, residual,
/// iterations, converged flag.
void write_estimates_csv(const std::vector<VoxelEstimate>& estimates, const ParameterGrid& grid,
                         const std::string& path);

void write_roi_csv(const RoiReport& report, const std::string& path);

} // namespace qdf

#endif
