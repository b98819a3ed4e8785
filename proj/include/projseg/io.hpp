#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "projseg/network.hpp"
#include "projseg/projection.hpp"

namespace projseg {

namespace fs = std::filesystem;

// All writers go through a temp file and an atomic rename, and every format
// round-trips write -> read -> write byte-identically.

// ".vvol": "VVOL1\n", "L W H dtype\n" with dtype u8|f64, then little-endian
// row-major payload (L outer, H fastest).
void write_vvol(const fs::path& path, const Volume3D& volume);
Volume3D read_vvol(const fs::path& path);

// ".vsurf": "VSURF1\n", "L W 3\n", then little-endian int32 planes for
// ILM, OPL, BM in that order.
void write_vsurf(const fs::path& path, const LayerSurfaces& surfaces);
LayerSurfaces read_vsurf(const fs::path& path);

// binary 8-bit PGM (P5), maxval 255
void write_pgm(const fs::path& path, const std::vector<std::uint8_t>& bytes, int width, int height);
std::vector<std::uint8_t> read_pgm(const fs::path& path, int& width, int& height);

// masks: 255 = foreground; reading maps nonzero to 1
void write_mask_pgm(const fs::path& path, const Map2D& mask);
Map2D read_mask_pgm(const fs::path& path);

// scalar maps as PGM after min-max scaling (constant maps write zeros)
void write_scaled_pgm(const fs::path& path, const Map2D& map);

// ".vmap": exact float sidecar; "VMAP1\n", "L W\n", little-endian f64 payload
void write_vmap(const fs::path& path, const Map2D& map);
Map2D read_vmap(const fs::path& path);

// checkpoint: "PSEG1\n", entry count line, one "name rank d0 d1 ..." line per
// parameter in model order, then concatenated little-endian f64 payloads
void save_checkpoint(const fs::path& path, const ModelParams& params);
void load_checkpoint(const fs::path& path, const ModelParams& params);
std::vector<std::string> read_checkpoint_names(const fs::path& path);

// manifest: "id<TAB>split" lines
struct ManifestEntry {
    std::string id;
    std::string split;  // train | val | test
};
void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const fs::path& path);

// small helpers shared by the cli
std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& content);

}  // namespace projseg
