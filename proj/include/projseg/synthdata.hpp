#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "projseg/io.hpp"
#include "projseg/projection.hpp"

namespace projseg {

// Geometry and noise of one synthetic eye: an en-face vessel tree avoiding
// the central avascular disk, smooth layer surfaces, and speckled volumes.
struct PhantomSpec {
    std::uint64_t seed = 1;
    int L = 64, W = 64, H = 32;
    int vessel_count = 12;
    double vessel_radius_min = 1.0;
    double vessel_radius_max = 2.0;
    double vessel_intensity = 0.9;
    double faz_radius = 10.0;
    int ilm_base = 6;
    int inner_thickness = 10;
    int outer_thickness = 9;
    double surface_wobble = 2.0;
    double noise_sigma = 0.05;

    void validate() const;
};

struct Sample {
    std::string id;
    Volume3D oct;
    Volume3D octa;
    LayerSurfaces surfaces;
    Map2D rv_gt;
    Map2D faz_gt;
};

// Deterministic per spec.seed. The OCTA volume carries vessel intensity in
// the inner slab plus clamped Gaussian speckle; the OCT volume is layered
// slab reflectivity without vessel signal; rv and faz masks are disjoint.
Sample gen_phantom(const PhantomSpec& spec);

struct SplitFractions {
    double train = 0.6, val = 0.2, test = 0.2;
};

// n samples under out_dir (one directory per id: oct.vvol, octa.vvol,
// surfaces.vsurf, rv.pgm, faz.pgm) plus a manifest. Per-sample seeds are
// derived from the master seed, so regeneration is byte-identical.
std::vector<ManifestEntry> gen_dataset(const PhantomSpec& spec_template, int n, SplitFractions fractions,
                                       std::uint64_t master_seed, const fs::path& out_dir);

// load one sample from a gen_dataset tree
Sample load_sample(const fs::path& dataset_dir, const std::string& id);

// ---- OCTA-500 style loading ----

enum class Octa500Subset { SixMM, ThreeMM, Other };

// NO.10001-10300 image at 400x400x640 (6mm FOV); NO.10301-10500 at
// 304x304x640 (3mm FOV); anything else carries no extent constraint.
Octa500Subset octa500_subset_for_id(const std::string& id);

// Loads a sample from an OCTA-500 style tree. The on-disk layout is given by
// a descriptor file (default <root>/layout.cfg) of key = value lines with
// {id} substitution:
//   oct      = OCT/{id}.vvol        volume file, or a directory of PGM
//   octa     = OCTA/{id}.vvol       B-scans when the value ends with '/'
//   surfaces = Surfaces/{id}.vsurf
//   rv       = GT_RV/{id}.pgm
//   faz      = GT_FAZ/{id}.pgm
// B-scan stacks: one PGM per en-face position x (sorted filenames), each
// image W columns wide and H rows tall.
Sample load_octa500_sample(const fs::path& root, const std::string& id,
                           const fs::path& descriptor = fs::path());

}  // namespace projseg
