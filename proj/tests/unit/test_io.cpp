#include <doctest.h>

#include <filesystem>

#include "projseg/io.hpp"
#include "projseg/network.hpp"
#include "projseg/rng.hpp"

using namespace projseg;
namespace fs = std::filesystem;

namespace {

struct TmpDir {
    fs::path path;
    TmpDir() : path(fs::temp_directory_path() / "projseg_io_test") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TmpDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE("io") {

TEST_CASE("vvol round-trips byte-identically for both dtypes") {
    TmpDir tmp;
    Rng rng(81);

    Volume3D f(3, 4, 5, VoxelType::F64);
    for (double& v : f.data) v = rng.uniform(-7.0, 7.0);
    write_vvol(tmp.path / "f.vvol", f);
    const Volume3D f2 = read_vvol(tmp.path / "f.vvol");
    CHECK(f2.data == f.data);
    write_vvol(tmp.path / "f2.vvol", f2);
    CHECK(read_text_file(tmp.path / "f.vvol") == read_text_file(tmp.path / "f2.vvol"));

    Volume3D u(4, 3, 2, VoxelType::U8);
    for (double& v : u.data) v = static_cast<double>(rng.below(256));
    write_vvol(tmp.path / "u.vvol", u);
    const Volume3D u2 = read_vvol(tmp.path / "u.vvol");
    CHECK(u2.dtype == VoxelType::U8);
    CHECK(u2.data == u.data);
    write_vvol(tmp.path / "u2.vvol", u2);
    CHECK(read_text_file(tmp.path / "u.vvol") == read_text_file(tmp.path / "u2.vvol"));
}

TEST_CASE("u8 vvol rejects non-integer or out-of-range values") {
    TmpDir tmp;
    Volume3D u(1, 1, 2, VoxelType::U8);
    u.data = {0.5, 1.0};
    CHECK_THROWS_AS(write_vvol(tmp.path / "bad.vvol", u), Error);
    u.data = {256.0, 0.0};
    CHECK_THROWS_AS(write_vvol(tmp.path / "bad.vvol", u), Error);
}

TEST_CASE("vsurf round-trips byte-identically") {
    TmpDir tmp;
    Rng rng(82);
    LayerSurfaces s(5, 4);
    for (std::size_t i = 0; i < s.ilm.size(); ++i) {
        s.ilm[i] = rng.range(0, 3);
        s.opl[i] = s.ilm[i] + rng.range(0, 3);
        s.bm[i] = s.opl[i] + rng.range(0, 3);
    }
    write_vsurf(tmp.path / "s.vsurf", s);
    const LayerSurfaces s2 = read_vsurf(tmp.path / "s.vsurf");
    CHECK(s2.ilm == s.ilm);
    CHECK(s2.opl == s.opl);
    CHECK(s2.bm == s.bm);
    write_vsurf(tmp.path / "s2.vsurf", s2);
    CHECK(read_text_file(tmp.path / "s.vsurf") == read_text_file(tmp.path / "s2.vsurf"));
}

TEST_CASE("mask pgm round-trips byte-identically with 255 foreground") {
    TmpDir tmp;
    Rng rng(83);
    Map2D m(6, 9, MapKind::Label);
    for (double& v : m.v) v = rng.uniform() < 0.4 ? 1.0 : 0.0;
    write_mask_pgm(tmp.path / "m.pgm", m);
    const Map2D m2 = read_mask_pgm(tmp.path / "m.pgm");
    CHECK(m2.L == 6);
    CHECK(m2.W == 9);
    CHECK(m2.v == m.v);
    write_mask_pgm(tmp.path / "m2.pgm", m2);
    CHECK(read_text_file(tmp.path / "m.pgm") == read_text_file(tmp.path / "m2.pgm"));

    Map2D bad(2, 2);
    bad.v[1] = 0.25;
    CHECK_THROWS_AS(write_mask_pgm(tmp.path / "bad.pgm", bad), Error);
}

TEST_CASE("vmap sidecar preserves exact doubles") {
    TmpDir tmp;
    Rng rng(84);
    Map2D m(7, 3);
    for (double& v : m.v) v = rng.uniform(-1.0, 1.0);
    write_vmap(tmp.path / "m.vmap", m);
    const Map2D m2 = read_vmap(tmp.path / "m.vmap");
    CHECK(m2.v == m.v);
    write_vmap(tmp.path / "m2.vmap", m2);
    CHECK(read_text_file(tmp.path / "m.vmap") == read_text_file(tmp.path / "m2.vmap"));
}

TEST_CASE("scaled pgm: constant maps write zeros, range maps span 0..255") {
    TmpDir tmp;
    Map2D flat(2, 2);
    for (double& v : flat.v) v = 3.0;
    write_scaled_pgm(tmp.path / "flat.pgm", flat);
    int w = 0, h = 0;
    for (std::uint8_t b : read_pgm(tmp.path / "flat.pgm", w, h)) CHECK(b == 0);

    Map2D ramp(1, 3);
    ramp.v = {1.0, 2.0, 3.0};
    write_scaled_pgm(tmp.path / "ramp.pgm", ramp);
    const auto bytes = read_pgm(tmp.path / "ramp.pgm", w, h);
    CHECK(bytes[0] == 0);
    CHECK(bytes[2] == 255);
}

TEST_CASE("checkpoint files round-trip byte-identically") {
    TmpDir tmp;
    IpnConfig cfg;
    cfg.plm_channels = {2};
    cfg.plm_strides = {4};
    cfg.convs_per_plm = 1;
    PatchNet net(cfg, PlanePerceptronConfig{}, false);
    init_params(net.params(), 85);
    save_checkpoint(tmp.path / "a.ckpt", net.params());

    PatchNet net2(cfg, PlanePerceptronConfig{}, false);
    load_checkpoint(tmp.path / "a.ckpt", net2.params());
    save_checkpoint(tmp.path / "b.ckpt", net2.params());
    CHECK(read_text_file(tmp.path / "a.ckpt") == read_text_file(tmp.path / "b.ckpt"));

    CHECK(read_checkpoint_names(tmp.path / "a.ckpt") == net.params().names());

    // shape or name mismatch is rejected
    IpnConfig other = cfg;
    other.plm_channels = {3};
    PatchNet net3(other, PlanePerceptronConfig{}, false);
    CHECK_THROWS_AS(load_checkpoint(tmp.path / "a.ckpt", net3.params()), Error);
}

TEST_CASE("manifest round-trips and validates splits") {
    TmpDir tmp;
    const std::vector<ManifestEntry> entries = {{"0001", "train"}, {"0002", "val"}, {"0003", "test"}};
    write_manifest(tmp.path / "m.txt", entries);
    const auto back = read_manifest(tmp.path / "m.txt");
    REQUIRE(back.size() == 3);
    CHECK(back[1].id == "0002");
    CHECK(back[1].split == "val");
    write_manifest(tmp.path / "m2.txt", back);
    CHECK(read_text_file(tmp.path / "m.txt") == read_text_file(tmp.path / "m2.txt"));

    write_text_file(tmp.path / "bad.txt", "0001\tnowhere\n");
    CHECK_THROWS_AS(read_manifest(tmp.path / "bad.txt"), Error);
}

TEST_CASE("truncated payloads are rejected") {
    TmpDir tmp;
    write_text_file(tmp.path / "short.vvol", "VVOL1\n2 2 2 f64\nxx");
    CHECK_THROWS_AS(read_vvol(tmp.path / "short.vvol"), Error);
    write_text_file(tmp.path / "bad.vmap", "VMAP1\n4 4\n");
    CHECK_THROWS_AS(read_vmap(tmp.path / "bad.vmap"), Error);
}

}  // TEST_SUITE
