#include "projseg/projection.hpp"

#include <algorithm>

namespace projseg {

void LayerSurfaces::validate(int H) const {
    check(static_cast<std::size_t>(L) * W == ilm.size() && ilm.size() == opl.size() && opl.size() == bm.size(),
          "surface plane size mismatch");
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y) {
            const std::size_t i = idx(x, y);
            check(0 <= ilm[i] && ilm[i] <= opl[i] && opl[i] <= bm[i] && bm[i] < H,
                  "surface ordering violated at pixel (", x, ",", y, "): ilm=", ilm[i], " opl=", opl[i],
                  " bm=", bm[i], " H=", H);
        }
}

std::string to_string(MapKind k) {
    switch (k) {
        case MapKind::B1: return "B1";
        case MapKind::B2: return "B2";
        case MapKind::B3: return "B3";
        case MapKind::B4: return "B4";
        case MapKind::B5: return "B5";
        case MapKind::B6: return "B6";
        case MapKind::Probability: return "prob";
        case MapKind::Label: return "label";
    }
    return "?";
}

Map2D project(const Volume3D& volume, Region region, ReduceMode mode, const LayerSurfaces* surfaces) {
    if (region != Region::Full) {
        check(surfaces != nullptr, "layer surfaces required for region projections");
        check(surfaces->L == volume.L && surfaces->W == volume.W, "surface plane ", surfaces->L, "x",
              surfaces->W, " does not match volume ", volume.L, "x", volume.W);
        surfaces->validate(volume.H);
    }

    Map2D out(volume.L, volume.W);
    for (int x = 0; x < volume.L; ++x)
        for (int y = 0; y < volume.W; ++y) {
            int z0 = 0, z1 = volume.H - 1;
            if (region != Region::Full) {
                const std::size_t i = surfaces->idx(x, y);
                if (region == Region::IlmOpl) {
                    z0 = surfaces->ilm[i];
                    z1 = surfaces->opl[i];
                } else {
                    z0 = surfaces->opl[i];
                    z1 = surfaces->bm[i];
                }
            }
            if (mode == ReduceMode::Average) {
                double s = 0.0;
                for (int z = z0; z <= z1; ++z) s += volume.at(x, y, z);
                out.at(x, y) = s / static_cast<double>(z1 - z0 + 1);
            } else {
                double m = volume.at(x, y, z0);
                for (int z = z0 + 1; z <= z1; ++z) m = std::max(m, volume.at(x, y, z));
                out.at(x, y) = m;
            }
        }
    return out;
}

std::array<Map2D, 6> generate_all(const Volume3D& oct, const Volume3D& octa, const LayerSurfaces& surfaces) {
    check(oct.L == octa.L && oct.W == octa.W && oct.H == octa.H, "oct volume ", oct.L, "x", oct.W, "x", oct.H,
          " and octa volume ", octa.L, "x", octa.W, "x", octa.H, " are not registered");

    std::array<Map2D, 6> maps = {
        project(oct, Region::Full, ReduceMode::Average),
        project(oct, Region::IlmOpl, ReduceMode::Average, &surfaces),
        project(oct, Region::OplBm, ReduceMode::Average, &surfaces),
        project(octa, Region::Full, ReduceMode::Average),
        project(octa, Region::IlmOpl, ReduceMode::Maximum, &surfaces),
        project(octa, Region::OplBm, ReduceMode::Maximum, &surfaces),
    };
    maps[0].kind = MapKind::B1;
    maps[1].kind = MapKind::B2;
    maps[2].kind = MapKind::B3;
    maps[3].kind = MapKind::B4;
    maps[4].kind = MapKind::B5;
    maps[5].kind = MapKind::B6;
    return maps;
}

}  // namespace projseg
