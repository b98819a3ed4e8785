#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "projseg/common.hpp"
#include "projseg/tensor.hpp"

namespace projseg {

enum class Modality { OCT, OCTA };
enum class VoxelType { U8, F64 };

// Dense scalar grid of shape L x W x H (en-face length, width, axial height),
// stored row-major with the axial axis fastest.
struct Volume3D {
    int L = 0, W = 0, H = 0;
    VoxelType dtype = VoxelType::F64;
    Modality modality = Modality::OCT;
    std::optional<double> fov_mm;
    std::vector<double> data;

    Volume3D() = default;
    Volume3D(int l, int w, int h, VoxelType t = VoxelType::F64)
        : L(l), W(w), H(h), dtype(t), data(static_cast<std::size_t>(l) * w * h, 0.0) {
        check(l >= 1 && w >= 1 && h >= 1, "volume extents must be >= 1, got ", l, "x", w, "x", h);
    }

    double at(int x, int y, int z) const {
        return data[(static_cast<std::size_t>(x) * W + y) * H + z];
    }
    double& at(int x, int y, int z) { return data[(static_cast<std::size_t>(x) * W + y) * H + z]; }
};

// Per-(x,y) axial indices of the three segmented retinal surfaces.
// Invariant: 0 <= ilm <= opl <= bm < H everywhere.
struct LayerSurfaces {
    int L = 0, W = 0;
    std::vector<int> ilm, opl, bm;

    LayerSurfaces() = default;
    LayerSurfaces(int l, int w)
        : L(l),
          W(w),
          ilm(static_cast<std::size_t>(l) * w, 0),
          opl(static_cast<std::size_t>(l) * w, 0),
          bm(static_cast<std::size_t>(l) * w, 0) {}

    std::size_t idx(int x, int y) const { return static_cast<std::size_t>(x) * W + y; }
    void validate(int H) const;
};

enum class MapKind { B1, B2, B3, B4, B5, B6, Probability, Label };

std::string to_string(MapKind k);

// L x W scalar plane.
struct Map2D {
    int L = 0, W = 0;
    MapKind kind = MapKind::Probability;
    std::vector<double> v;

    Map2D() = default;
    Map2D(int l, int w, MapKind k = MapKind::Probability)
        : L(l), W(w), kind(k), v(static_cast<std::size_t>(l) * w, 0.0) {}

    double at(int x, int y) const { return v[static_cast<std::size_t>(x) * W + y]; }
    double& at(int x, int y) { return v[static_cast<std::size_t>(x) * W + y]; }
};

enum class Region { Full, IlmOpl, OplBm };
enum class ReduceMode { Average, Maximum };

// Reduce the volume along the axial direction over the selected region.
// Layer regions use inclusive bounds, so the surface ordering invariant
// guarantees a nonempty range; surfaces are required unless region is Full.
Map2D project(const Volume3D& volume, Region region, ReduceMode mode,
              const LayerSurfaces* surfaces = nullptr);

// The six standard en-face maps:
//   B1 OCT/full/avg, B2 OCT/ilm-opl/avg, B3 OCT/opl-bm/avg,
//   B4 OCTA/full/avg, B5 OCTA/ilm-opl/max, B6 OCTA/opl-bm/max.
std::array<Map2D, 6> generate_all(const Volume3D& oct, const Volume3D& octa, const LayerSurfaces& surfaces);

}  // namespace projseg
