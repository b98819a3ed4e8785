#include <doctest.h>

#include <algorithm>
#include <set>

#include "projseg/projection.hpp"
#include "projseg/rng.hpp"

using namespace projseg;

namespace {

Volume3D random_volume(Rng& rng, int L, int W, int H, double lo = 0.0, double hi = 10.0) {
    Volume3D v(L, W, H);
    for (double& x : v.data) x = rng.uniform(lo, hi);
    return v;
}

LayerSurfaces random_surfaces(Rng& rng, int L, int W, int H) {
    LayerSurfaces s(L, W);
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y) {
            const std::size_t i = s.idx(x, y);
            s.ilm[i] = rng.range(0, H / 3);
            s.opl[i] = s.ilm[i] + rng.range(0, H / 3);
            s.bm[i] = s.opl[i] + rng.range(0, H - 1 - s.opl[i]);
        }
    return s;
}

// independent per-pixel reduction loop
double reduce_oracle(const Volume3D& v, int x, int y, int z0, int z1, ReduceMode mode) {
    if (mode == ReduceMode::Average) {
        double s = 0.0;
        for (int z = z0; z <= z1; ++z) s += v.at(x, y, z);
        return s / (z1 - z0 + 1);
    }
    double m = v.at(x, y, z0);
    for (int z = z0 + 1; z <= z1; ++z) m = std::max(m, v.at(x, y, z));
    return m;
}

}  // namespace

TEST_SUITE("projection") {

TEST_CASE("constant volume projects to a constant map in every region and mode") {
    Volume3D v(6, 6, 10);
    for (double& x : v.data) x = 5.0;
    Rng rng(61);
    const LayerSurfaces s = random_surfaces(rng, 6, 6, 10);
    for (Region region : {Region::Full, Region::IlmOpl, Region::OplBm})
        for (ReduceMode mode : {ReduceMode::Average, ReduceMode::Maximum}) {
            const Map2D m = project(v, region, mode, &s);
            for (double x : m.v) CHECK(x == 5.0);
        }
}

TEST_CASE("maximum projection picks the column maximum") {
    Volume3D v(1, 1, 3);
    v.at(0, 0, 0) = 1.0;
    v.at(0, 0, 1) = 9.0;
    v.at(0, 0, 2) = 3.0;
    CHECK(project(v, Region::Full, ReduceMode::Maximum).at(0, 0) == 9.0);
}

TEST_CASE("projection equals the brute-force reduction loop exactly") {
    Rng rng(62);
    for (int rep = 0; rep < 20; ++rep) {
        const Volume3D v = random_volume(rng, 8, 8, 12);
        const LayerSurfaces s = random_surfaces(rng, 8, 8, 12);
        for (Region region : {Region::Full, Region::IlmOpl, Region::OplBm})
            for (ReduceMode mode : {ReduceMode::Average, ReduceMode::Maximum}) {
                const Map2D got = project(v, region, mode, &s);
                for (int x = 0; x < 8; ++x)
                    for (int y = 0; y < 8; ++y) {
                        const std::size_t i = s.idx(x, y);
                        int z0 = 0, z1 = 11;
                        if (region == Region::IlmOpl) { z0 = s.ilm[i]; z1 = s.opl[i]; }
                        if (region == Region::OplBm) { z0 = s.opl[i]; z1 = s.bm[i]; }
                        CHECK(got.at(x, y) == reduce_oracle(v, x, y, z0, z1, mode));
                    }
            }
    }
}

TEST_CASE("surface ordering violations name the offending pixel") {
    Volume3D v(4, 4, 8);
    LayerSurfaces s(4, 4);
    for (std::size_t i = 0; i < s.ilm.size(); ++i) {
        s.ilm[i] = 2;
        s.opl[i] = 4;
        s.bm[i] = 6;
    }
    s.opl[s.idx(2, 3)] = 1;  // opl above ilm
    try {
        project(v, Region::IlmOpl, ReduceMode::Average, &s);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("(2,3)") != std::string::npos);
    }
}

TEST_CASE("B5 excludes signal below the OPL") {
    Volume3D octa(4, 4, 10);
    LayerSurfaces s(4, 4);
    for (std::size_t i = 0; i < s.ilm.size(); ++i) {
        s.ilm[i] = 1;
        s.opl[i] = 4;
        s.bm[i] = 8;
    }
    // only voxels strictly below the OPL carry signal
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y)
            for (int z = 5; z < 10; ++z) octa.at(x, y, z) = 7.0;
    Volume3D oct(4, 4, 10);
    const auto maps = generate_all(oct, octa, s);
    for (double v : maps[4].v) CHECK(v == 0.0);  // B5
    for (double v : maps[5].v) CHECK(v == 7.0);  // B6 sees it instead
}

TEST_CASE("generate_all: definitions, tags, and distinctness") {
    Rng rng(63);
    const Volume3D oct = random_volume(rng, 6, 6, 12);
    const Volume3D octa = random_volume(rng, 6, 6, 12);
    const LayerSurfaces s = random_surfaces(rng, 6, 6, 12);
    const auto maps = generate_all(oct, octa, s);

    CHECK(maps[0].v == project(oct, Region::Full, ReduceMode::Average).v);  // B1 by definition
    CHECK(maps[0].kind == MapKind::B1);
    CHECK(maps[1].kind == MapKind::B2);
    CHECK(maps[2].kind == MapKind::B3);
    CHECK(maps[3].kind == MapKind::B4);
    CHECK(maps[4].kind == MapKind::B5);
    CHECK(maps[5].kind == MapKind::B6);

    // all six maps differ for random input
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) CHECK(maps[static_cast<std::size_t>(i)].v != maps[static_cast<std::size_t>(j)].v);

    // per-map brute-force agreement
    for (int x = 0; x < 6; ++x)
        for (int y = 0; y < 6; ++y) {
            const std::size_t i = s.idx(x, y);
            CHECK(maps[1].at(x, y) == reduce_oracle(oct, x, y, s.ilm[i], s.opl[i], ReduceMode::Average));
            CHECK(maps[4].at(x, y) == reduce_oracle(octa, x, y, s.ilm[i], s.opl[i], ReduceMode::Maximum));
            CHECK(maps[5].at(x, y) == reduce_oracle(octa, x, y, s.opl[i], s.bm[i], ReduceMode::Maximum));
        }
}

TEST_CASE("max projections dominate averages over the same region") {
    Rng rng(64);
    const Volume3D v = random_volume(rng, 6, 6, 10);
    const LayerSurfaces s = random_surfaces(rng, 6, 6, 10);
    for (Region region : {Region::Full, Region::IlmOpl, Region::OplBm}) {
        const Map2D avg = project(v, region, ReduceMode::Average, &s);
        const Map2D mx = project(v, region, ReduceMode::Maximum, &s);
        for (std::size_t i = 0; i < avg.v.size(); ++i) CHECK(mx.v[i] >= avg.v[i]);
    }
}

TEST_CASE("projections scale linearly with the volume") {
    Rng rng(65);
    Volume3D v = random_volume(rng, 5, 5, 8);
    const LayerSurfaces s = random_surfaces(rng, 5, 5, 8);
    const Map2D base = project(v, Region::IlmOpl, ReduceMode::Maximum, &s);
    const double alpha = 3.5;
    for (double& x : v.data) x *= alpha;
    const Map2D scaled = project(v, Region::IlmOpl, ReduceMode::Maximum, &s);
    for (std::size_t i = 0; i < base.v.size(); ++i)
        CHECK(scaled.v[i] == doctest::Approx(alpha * base.v[i]).epsilon(1e-12));
}

TEST_CASE("full average projection equals the column mean") {
    Rng rng(66);
    const Volume3D v = random_volume(rng, 5, 5, 9);
    const Map2D m = project(v, Region::Full, ReduceMode::Average);
    for (int x = 0; x < 5; ++x)
        for (int y = 0; y < 5; ++y) CHECK(m.at(x, y) == reduce_oracle(v, x, y, 0, 8, ReduceMode::Average));
}

TEST_CASE("mismatched volumes are rejected") {
    Volume3D a(4, 4, 8), b(4, 5, 8);
    LayerSurfaces s(4, 4);
    CHECK_THROWS_AS(generate_all(a, b, s), Error);
}

}  // TEST_SUITE
