#ifndef QDF_PHANTOM_HPP
#define QDF_PHANTOM_HPP

#include <complex>
#include <vector>

#include "qdf/bloch.hpp"

namespace qdf {

struct RoiSpec {
    double T1_ms = 0.0;
    double T2_ms = 0.0;
};

/// Calibrated relaxation times of the 14 contrast regions used by the
/// reference phantom.
std::vector<RoiSpec> reference_rois();

struct PhantomLayout {
    int rows = 64;
    int cols = 64;
    double radius = 6.0;     // ROI disk radius in pixels
    int roi_voxels = 0;      // cap voxels per ROI (0 = whole disk)
    std::vector<RoiSpec> rois = reference_rois();
    double b1_min = 0.93; // B1+ ramps linearly across columns
    double b1_max = 1.07;
};

/// Deterministic test object: circular ROIs on a rectangular canvas,
/// unit proton density with a smoothly varying receiver phase.
struct SyntheticPhantom {
    int rows = 0;
    int cols = 0;
    std::vector<int> labels;                 // 0 = background, else ROI id
    std::vector<TissueParams> params;        // valid where label > 0
    std::vector<std::complex<double>> rho;   // per voxel
    std::vector<RoiSpec> rois;

    int voxel_count() const { return rows * cols; }
    int foreground_count() const;
};

SyntheticPhantom synth_phantom(const PhantomLayout& layout);

} // namespace qdf

#endif
