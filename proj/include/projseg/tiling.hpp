#pragma once

#include <utility>
#include <vector>

#include "projseg/projection.hpp"
#include "projseg/tensor.hpp"

namespace projseg {

// Row-major ordered patch origins covering an L x W plane with l x w patches
// at step d. Border patches are clamped inward so every patch holds real data.
struct PatchGrid {
    int plane_l = 0, plane_w = 0;
    int patch_l = 0, patch_w = 0;
    int step = 0;
    std::vector<std::pair<int, int>> origins;
};

PatchGrid plan_patches(int L, int W, int l, int w, int d);

// Crop the en-face window at `origin` from each volume (one channel per
// volume, then one per plane map broadcast along height) and resample the
// axial axis to target_h. Returns [l, w, target_h, channels].
Tensor extract_patch(const std::vector<const Volume3D*>& volumes, const std::vector<const Tensor*>& plane_maps,
                     std::pair<int, int> origin, int l, int w, int target_h);
Tensor extract_patch(const std::vector<const Volume3D*>& volumes, std::pair<int, int> origin, int l, int w,
                     int target_h);

// Mean-of-contributors splicing. Accumulators can be merged, and merging is
// associative, so patch outputs may be produced in any order or in parallel.
class SpliceAccumulator {
public:
    SpliceAccumulator(int L, int W, int channels);

    void add(std::pair<int, int> origin, const Tensor& patch_output);
    void merge(const SpliceAccumulator& other);

    // sum/count elementwise; every pixel must be covered
    Tensor finish() const;

    const Tensor& sum() const { return sum_; }
    const std::vector<int>& count() const { return count_; }

private:
    int plane_l_, plane_w_, channels_;
    Tensor sum_;
    std::vector<int> count_;
};

// Splice one output per grid origin back to the full plane; overlap regions
// are the arithmetic mean of every contributing patch.
Tensor splice(const std::vector<std::pair<std::pair<int, int>, Tensor>>& patch_outputs, const PatchGrid& grid);

// Seam-localized discontinuity excess of a [L,W] map under a grid: the mean
// absolute first difference across pixels straddling patch boundary lines,
// minus the same statistic at the lines offset by half a patch, floored at 0.
double seam_score(const Tensor& map, const PatchGrid& grid);

}  // namespace projseg
