#include "projseg/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "projseg/ops.hpp"

namespace projseg {

static std::vector<int> axis_origins(int extent, int patch, int step) {
    std::vector<int> out;
    for (int o = 0;; o += step) {
        if (o + patch >= extent) {
            out.push_back(extent - patch);  // final origin clamped flush to the border
            break;
        }
        out.push_back(o);
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

PatchGrid plan_patches(int L, int W, int l, int w, int d) {
    check(l >= 1 && w >= 1, "patch extents must be >= 1, got ", l, "x", w);
    check(l <= L && w <= W, "patch ", l, "x", w, " larger than plane ", L, "x", W);
    check(d >= 1, "step must be >= 1, got ", d);
    check(d <= std::min(l, w), "step ", d, " larger than patch extent ", std::min(l, w),
          " would leave uncovered gaps");

    PatchGrid grid{L, W, l, w, d, {}};
    const std::vector<int> xs = axis_origins(L, l, d);
    const std::vector<int> ys = axis_origins(W, w, d);
    for (int x : xs)
        for (int y : ys) grid.origins.emplace_back(x, y);
    return grid;
}

Tensor extract_patch(const std::vector<const Volume3D*>& volumes, const std::vector<const Tensor*>& plane_maps,
                     std::pair<int, int> origin, int l, int w, int target_h) {
    check(!volumes.empty(), "extract_patch needs at least one volume");
    const Volume3D& first = *volumes.front();
    for (const Volume3D* v : volumes)
        check(v->L == first.L && v->W == first.W && v->H == first.H, "volumes must share extents");
    for (const Tensor* m : plane_maps)
        check(m->rank() == 2 && m->dim(0) == first.L && m->dim(1) == first.W, "plane map shape ",
              shape_str(m->shape()), " does not match volume plane ", first.L, "x", first.W);

    const auto [x0, y0] = origin;
    check(x0 >= 0 && y0 >= 0 && x0 + l <= first.L && y0 + w <= first.W, "patch origin (", x0, ",", y0,
          ") with extent ", l, "x", w, " out of bounds for plane ", first.L, "x", first.W);

    const int C = static_cast<int>(volumes.size() + plane_maps.size());
    Tensor raw({l, w, first.H, C});
    for (int x = 0; x < l; ++x)
        for (int y = 0; y < w; ++y) {
            for (int z = 0; z < first.H; ++z) {
                int c = 0;
                for (const Volume3D* v : volumes) raw.at(x, y, z, c++) = v->at(x0 + x, y0 + y, z);
                for (const Tensor* m : plane_maps) raw.at(x, y, z, c++) = m->at(x0 + x, y0 + y);
            }
        }
    if (target_h == first.H) return raw;
    return resize_h_linear(raw, target_h);
}

Tensor extract_patch(const std::vector<const Volume3D*>& volumes, std::pair<int, int> origin, int l, int w,
                     int target_h) {
    return extract_patch(volumes, {}, origin, l, w, target_h);
}

SpliceAccumulator::SpliceAccumulator(int L, int W, int channels)
    : plane_l_(L), plane_w_(W), channels_(channels), sum_({L, W, channels}),
      count_(static_cast<std::size_t>(L) * W, 0) {}

void SpliceAccumulator::add(std::pair<int, int> origin, const Tensor& patch_output) {
    check(patch_output.rank() == 3, "patch output must be [l,w,c], got ", shape_str(patch_output.shape()));
    check(patch_output.dim(2) == channels_, "patch output channels ", patch_output.dim(2),
          " != accumulator channels ", channels_);
    const auto [x0, y0] = origin;
    const int l = patch_output.dim(0), w = patch_output.dim(1);
    check(x0 >= 0 && y0 >= 0 && x0 + l <= plane_l_ && y0 + w <= plane_w_, "patch at (", x0, ",", y0,
          ") with extent ", l, "x", w, " exceeds plane ", plane_l_, "x", plane_w_);

    for (int x = 0; x < l; ++x)
        for (int y = 0; y < w; ++y) {
            count_[static_cast<std::size_t>(x0 + x) * plane_w_ + (y0 + y)] += 1;
            double* s = sum_.data() + (static_cast<std::int64_t>(x0 + x) * plane_w_ + (y0 + y)) * channels_;
            const double* p = patch_output.data() + (static_cast<std::int64_t>(x) * w + y) * channels_;
            for (int c = 0; c < channels_; ++c) s[c] += p[c];
        }
}

void SpliceAccumulator::merge(const SpliceAccumulator& other) {
    check(plane_l_ == other.plane_l_ && plane_w_ == other.plane_w_ && channels_ == other.channels_,
          "cannot merge accumulators of different geometry");
    accumulate(sum_, other.sum_);
    for (std::size_t i = 0; i < count_.size(); ++i) count_[i] += other.count_[i];
}

Tensor SpliceAccumulator::finish() const {
    Tensor out(sum_.shape());
    for (int x = 0; x < plane_l_; ++x)
        for (int y = 0; y < plane_w_; ++y) {
            const int n = count_[static_cast<std::size_t>(x) * plane_w_ + y];
            check(n >= 1, "pixel (", x, ",", y, ") not covered by any patch");
            const double inv = 1.0 / static_cast<double>(n);
            const double* s = sum_.data() + (static_cast<std::int64_t>(x) * plane_w_ + y) * channels_;
            double* o = out.data() + (static_cast<std::int64_t>(x) * plane_w_ + y) * channels_;
            for (int c = 0; c < channels_; ++c) o[c] = s[c] * inv;
        }
    return out;
}

Tensor splice(const std::vector<std::pair<std::pair<int, int>, Tensor>>& patch_outputs, const PatchGrid& grid) {
    check(!patch_outputs.empty(), "splice needs at least one patch output");
    std::set<std::pair<int, int>> expected(grid.origins.begin(), grid.origins.end());
    std::set<std::pair<int, int>> seen;
    for (const auto& [origin, t] : patch_outputs) {
        check(expected.count(origin) == 1, "patch origin (", origin.first, ",", origin.second,
              ") is not a grid origin");
        check(seen.insert(origin).second, "duplicate patch output for origin (", origin.first, ",",
              origin.second, ")");
    }
    check(seen.size() == expected.size(), "splice got ", seen.size(), " patch outputs for ", expected.size(),
          " grid origins");

    SpliceAccumulator acc(grid.plane_l, grid.plane_w, patch_outputs.front().second.dim(2));
    for (const auto& [origin, t] : patch_outputs) acc.add(origin, t);
    return acc.finish();
}

namespace {

// contributor-change lines of the grid along one axis: every patch start
// (except 0) and every patch end (except the plane border)
std::vector<int> seam_lines(const std::vector<int>& starts, int patch, int extent) {
    std::set<int> lines;
    for (int s : starts) {
        if (s > 0) lines.insert(s);
        if (s + patch < extent) lines.insert(s + patch);
    }
    return {lines.begin(), lines.end()};
}

// mean |map[line] - map[line-1]| pooled over both orientations
struct DiffStat {
    double total = 0.0;
    std::int64_t count = 0;

    void add(double v) {
        total += v;
        ++count;
    }
    double mean() const { return count == 0 ? 0.0 : total / static_cast<double>(count); }
};

void add_lines(const Tensor& map, const std::vector<int>& xs, const std::vector<int>& ys, DiffStat& stat) {
    const int L = map.dim(0), W = map.dim(1);
    for (int x : xs)
        for (int y = 0; y < W; ++y) stat.add(std::abs(map.at(x, y) - map.at(x - 1, y)));
    for (int y : ys)
        for (int x = 0; x < L; ++x) stat.add(std::abs(map.at(x, y) - map.at(x, y - 1)));
}

std::vector<int> offset_lines(const std::vector<int>& lines, int half, int extent) {
    std::set<int> out;
    for (int v : lines) {
        if (v - half >= 1) out.insert(v - half);
        if (v + half <= extent - 1) out.insert(v + half);
    }
    return {out.begin(), out.end()};
}

}  // namespace

double seam_score(const Tensor& map, const PatchGrid& grid) {
    check(map.rank() == 2, "seam_score map must be [L,W], got ", shape_str(map.shape()));
    check(map.dim(0) == grid.plane_l && map.dim(1) == grid.plane_w, "map ", shape_str(map.shape()),
          " does not match grid plane ", grid.plane_l, "x", grid.plane_w);

    std::set<int> xs_set, ys_set;
    for (const auto& [x, y] : grid.origins) {
        xs_set.insert(x);
        ys_set.insert(y);
    }
    const std::vector<int> x_seams =
        seam_lines({xs_set.begin(), xs_set.end()}, grid.patch_l, grid.plane_l);
    const std::vector<int> y_seams =
        seam_lines({ys_set.begin(), ys_set.end()}, grid.patch_w, grid.plane_w);

    DiffStat boundary;
    add_lines(map, x_seams, y_seams, boundary);

    DiffStat interior;
    add_lines(map, offset_lines(x_seams, grid.patch_l / 2, grid.plane_l),
              offset_lines(y_seams, grid.patch_w / 2, grid.plane_w), interior);

    return std::max(0.0, boundary.mean() - interior.mean());
}

}  // namespace projseg
