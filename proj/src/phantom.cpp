#include "qdf/phantom.hpp"

#include <cmath>

namespace qdf {

std::vector<RoiSpec> reference_rois() {
    return {
        {2480.0, 581.0}, {2173.0, 404.0}, {1907.0, 278.0}, {1604.0, 191.0},
        {1332.0, 133.0}, {1044.0, 97.0},  {802.0, 64.0},   {609.0, 46.0},
        {458.0, 32.0},   {337.0, 23.0},   {244.0, 16.0},   {177.0, 11.0},
        {127.0, 8.0},    {91.0, 6.0},
    };
}

int SyntheticPhantom::foreground_count() const {
    int n = 0;
    for (int l : labels)
        if (l > 0) ++n;
    return n;
}

SyntheticPhantom synth_phantom(const PhantomLayout& layout) {
    const int n_roi = static_cast<int>(layout.rois.size());
    SyntheticPhantom ph;
    ph.rows = layout.rows;
    ph.cols = layout.cols;
    ph.rois = layout.rois;
    ph.labels.assign(layout.rows * layout.cols, 0);
    ph.params.assign(layout.rows * layout.cols, TissueParams{});
    ph.rho.assign(layout.rows * layout.cols, {0.0, 0.0});
    if (n_roi == 0) return ph;

    // disk centers on a square arrangement
    int per_row = static_cast<int>(std::ceil(std::sqrt(double(n_roi))));
    int n_rows = (n_roi + per_row - 1) / per_row;
    double dx = double(layout.cols) / per_row;
    double dy = double(layout.rows) / n_rows;
    if (2.0 * layout.radius >= std::min(dx, dy))
        throw LayoutOverlap("ROI disks overlap; shrink the radius or enlarge the canvas");

    for (int r = 0; r < n_roi; ++r) {
        double cx = dx * (r % per_row + 0.5);
        double cy = dy * (r / per_row + 0.5);
        int placed = 0;
        for (int y = 0; y < layout.rows && (layout.roi_voxels == 0 || placed < layout.roi_voxels);
             ++y) {
            for (int x = 0;
                 x < layout.cols && (layout.roi_voxels == 0 || placed < layout.roi_voxels); ++x) {
                double ddx = x + 0.5 - cx, ddy = y + 0.5 - cy;
                if (ddx * ddx + ddy * ddy > layout.radius * layout.radius) continue;
                int idx = y * layout.cols + x;
                ph.labels[idx] = r + 1;
                ++placed;
            }
        }
        if (layout.roi_voxels > 0 && placed < layout.roi_voxels)
            throw InvalidParams("ROI disk too small for the requested voxel count");
    }

    for (int y = 0; y < layout.rows; ++y)
        for (int x = 0; x < layout.cols; ++x) {
            int idx = y * layout.cols + x;
            if (ph.labels[idx] == 0) continue;
            const RoiSpec& roi = layout.rois[ph.labels[idx] - 1];
            TissueParams t;
            t.T1_ms = roi.T1_ms;
            t.T2_ms = roi.T2_ms;
            t.B1_plus = layout.b1_min +
                        (layout.b1_max - layout.b1_min) * (x + 0.5) / layout.cols;
            ph.params[idx] = t;
            double phase = 0.4 * M_PI * (x + 0.5) / layout.cols +
                           0.25 * M_PI * (y + 0.5) / layout.rows;
            ph.rho[idx] = std::polar(1.0, phase);
        }
    return ph;
}

} // namespace qdf
