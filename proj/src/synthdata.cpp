#include "projseg/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include "projseg/rng.hpp"

namespace projseg {

void PhantomSpec::validate() const {
    check(L >= 16 && W >= 16 && H >= 16, "phantom extents must be >= 16, got ", L, "x", W, "x", H);
    check(vessel_count >= 0, "vessel_count must be >= 0");
    check(vessel_radius_min >= 1.0 && vessel_radius_max >= vessel_radius_min,
          "vessel radius range must satisfy 1 <= min <= max, got [", vessel_radius_min, ",",
          vessel_radius_max, "]");
    check(faz_radius >= 1.0, "faz_radius must be >= 1");
    check(faz_radius < std::min(L, W) / 4.0, "faz_radius ", faz_radius, " must be < min(L,W)/4 = ",
          std::min(L, W) / 4.0);
    check(vessel_intensity > 0.0, "vessel_intensity must be positive");
    check(noise_sigma >= 0.0, "noise_sigma must be >= 0");
    check(ilm_base >= 0 && inner_thickness >= 1 && outer_thickness >= 1, "slab parameters out of range");
}

namespace {

// smooth pseudo-random field: a few low-frequency sinusoids
struct SmoothField {
    struct Wave {
        double fx, fy, phase, amp;
    };
    std::vector<Wave> waves;

    static SmoothField make(Rng& rng, double amplitude) {
        SmoothField f;
        for (int k = 0; k < 3; ++k)
            f.waves.push_back({rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0), rng.uniform(0.0, 6.283185307),
                               amplitude * rng.uniform(0.3, 1.0)});
        return f;
    }

    double at(double u, double v) const {  // u, v in [0,1]
        double s = 0.0;
        for (const Wave& w : waves) s += w.amp * std::sin(6.283185307 * (w.fx * u + w.fy * v) + w.phase);
        return s;
    }
};

struct Vec2 {
    double x, y;
};

Vec2 normalize(Vec2 v) {
    const double n = std::sqrt(v.x * v.x + v.y * v.y);
    if (n < 1e-12) return {1.0, 0.0};
    return {v.x / n, v.y / n};
}

Vec2 rotate(Vec2 v, double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

struct WalkSeg {
    Vec2 pos, dir;
    double radius;
    int steps_left;
};

void stamp_disk(Map2D& mask, double px, double py, double r, double cx, double cy, double faz_r) {
    const int x0 = std::max(0, static_cast<int>(std::floor(px - r)));
    const int x1 = std::min(mask.L - 1, static_cast<int>(std::ceil(px + r)));
    const int y0 = std::max(0, static_cast<int>(std::floor(py - r)));
    const int y1 = std::min(mask.W - 1, static_cast<int>(std::ceil(py + r)));
    for (int x = x0; x <= x1; ++x)
        for (int y = y0; y <= y1; ++y) {
            const double dx = x - px, dy = y - py;
            if (dx * dx + dy * dy > r * r) continue;
            const double fx = x - cx, fy = y - cy;
            if (fx * fx + fy * fy <= faz_r * faz_r) continue;  // vessels never enter the avascular disk
            mask.at(x, y) = 1.0;
        }
}

}  // namespace

Sample gen_phantom(const PhantomSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const int L = spec.L, W = spec.W, H = spec.H;
    const double cx = (L - 1) / 2.0, cy = (W - 1) / 2.0;

    Sample s;
    s.oct = Volume3D(L, W, H);
    s.oct.modality = Modality::OCT;
    s.octa = Volume3D(L, W, H);
    s.octa.modality = Modality::OCTA;
    s.surfaces = LayerSurfaces(L, W);
    s.rv_gt = Map2D(L, W, MapKind::Label);
    s.faz_gt = Map2D(L, W, MapKind::Label);

    // smooth surfaces with hard ordering ilm < opl <= bm
    const SmoothField f_ilm = SmoothField::make(rng, spec.surface_wobble);
    const SmoothField f_opl = SmoothField::make(rng, spec.surface_wobble);
    const SmoothField f_bm = SmoothField::make(rng, spec.surface_wobble);
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y) {
            const double u = static_cast<double>(x) / L, v = static_cast<double>(y) / W;
            int ilm = static_cast<int>(std::lround(spec.ilm_base + f_ilm.at(u, v)));
            int opl = static_cast<int>(std::lround(ilm + spec.inner_thickness + f_opl.at(u, v)));
            int bm = static_cast<int>(std::lround(opl + spec.outer_thickness + f_bm.at(u, v)));
            ilm = std::clamp(ilm, 0, H - 3);
            opl = std::clamp(opl, ilm + 1, H - 2);
            bm = std::clamp(bm, opl, H - 1);
            const std::size_t i = s.surfaces.idx(x, y);
            s.surfaces.ilm[i] = ilm;
            s.surfaces.opl[i] = opl;
            s.surfaces.bm[i] = bm;
        }

    // the avascular disk: every pixel within faz_radius of the en-face centre
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y) {
            const double dx = x - cx, dy = y - cy;
            if (dx * dx + dy * dy <= spec.faz_radius * spec.faz_radius) s.faz_gt.at(x, y) = 1.0;
        }

    // vessel tree: branching random walks from the border, deflected away
    // from the disk, rasterized with per-vessel radius
    for (int vi = 0; vi < spec.vessel_count; ++vi) {
        const double radius = rng.uniform(spec.vessel_radius_min, spec.vessel_radius_max);
        // random border start
        Vec2 pos;
        const int side = static_cast<int>(rng.below(4));
        if (side == 0) pos = {0.0, rng.uniform(0.0, W - 1.0)};
        else if (side == 1) pos = {L - 1.0, rng.uniform(0.0, W - 1.0)};
        else if (side == 2) pos = {rng.uniform(0.0, L - 1.0), 0.0};
        else pos = {rng.uniform(0.0, L - 1.0), W - 1.0};
        Vec2 dir = normalize({cx - pos.x + rng.uniform(-L / 3.0, L / 3.0),
                              cy - pos.y + rng.uniform(-W / 3.0, W / 3.0)});

        std::vector<WalkSeg> stack{{pos, dir, radius, 2 * (L + W)}};
        int segments = 0;
        while (!stack.empty() && segments < 4) {
            WalkSeg seg = stack.back();
            stack.pop_back();
            ++segments;
            while (seg.steps_left-- > 0) {
                if (seg.pos.x < 0 || seg.pos.x > L - 1 || seg.pos.y < 0 || seg.pos.y > W - 1) break;
                // deflect when heading would cross into the disk
                const Vec2 away = normalize({seg.pos.x - cx, seg.pos.y - cy});
                const double dist = std::sqrt((seg.pos.x - cx) * (seg.pos.x - cx) +
                                              (seg.pos.y - cy) * (seg.pos.y - cy));
                if (dist < spec.faz_radius + seg.radius + 2.0)
                    seg.dir = normalize({seg.dir.x + 0.8 * away.x, seg.dir.y + 0.8 * away.y});
                stamp_disk(s.rv_gt, seg.pos.x, seg.pos.y, seg.radius, cx, cy, spec.faz_radius);
                if (rng.uniform() < 0.12) seg.dir = normalize(rotate(seg.dir, rng.uniform(-0.5, 0.5)));
                if (rng.uniform() < 0.02 && segments + static_cast<int>(stack.size()) < 4)
                    stack.push_back({seg.pos, normalize(rotate(seg.dir, rng.uniform() < 0.5 ? 0.9 : -0.9)),
                                     std::max(1.0, seg.radius * 0.8), seg.steps_left / 2});
                seg.pos = {seg.pos.x + seg.dir.x, seg.pos.y + seg.dir.y};
            }
        }
    }

    // OCT: layered slab reflectivity, no vessel signal
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y) {
            const std::size_t i = s.surfaces.idx(x, y);
            const int ilm = s.surfaces.ilm[i], opl = s.surfaces.opl[i], bm = s.surfaces.bm[i];
            for (int z = 0; z < H; ++z) {
                double v = 0.05;                 // vitreous
                if (z >= ilm && z <= opl) v = 0.6;    // inner retina
                else if (z > opl && z <= bm) v = 0.35;  // outer retina
                else if (z > bm) v = 0.15;             // below bruch's membrane
                s.oct.at(x, y, z) = v;
            }
        }

    // OCTA: vessel intensity inside [ilm, opl-1] at vessel pixels, plus
    // clamped Gaussian speckle; keeping the deposit strictly above the OPL
    // plane is what makes B5 capture it and B6 not
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y) {
            const std::size_t i = s.surfaces.idx(x, y);
            const int ilm = s.surfaces.ilm[i], opl = s.surfaces.opl[i];
            const bool vessel = s.rv_gt.at(x, y) == 1.0;
            for (int z = 0; z < H; ++z) {
                double v = 0.0;
                if (vessel && z >= ilm && z < opl) v = spec.vessel_intensity;
                if (spec.noise_sigma > 0.0) v += std::max(0.0, rng.normal(0.0, spec.noise_sigma));
                s.octa.at(x, y, z) = v;
            }
        }

    return s;
}

std::vector<ManifestEntry> gen_dataset(const PhantomSpec& spec_template, int n, SplitFractions fractions,
                                       std::uint64_t master_seed, const fs::path& out_dir) {
    check(n >= 1, "dataset size must be >= 1, got ", n);
    const double frac_sum = fractions.train + fractions.val + fractions.test;
    check(std::abs(frac_sum - 1.0) < 1e-9, "split fractions must sum to 1, got ", frac_sum);
    const int n_train = static_cast<int>(std::llround(fractions.train * n));
    const int n_val = static_cast<int>(std::llround(fractions.val * n));
    check(n_train >= 0 && n_val >= 0 && n_train + n_val <= n, "degenerate split for n = ", n);

    fs::create_directories(out_dir);
    std::vector<ManifestEntry> manifest;
    for (int i = 1; i <= n; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "%04d", i);
        const std::string id = buf;
        PhantomSpec spec = spec_template;
        spec.seed = mix_seed(master_seed, static_cast<std::uint64_t>(i));
        Sample s = gen_phantom(spec);
        s.id = id;

        const fs::path dir = out_dir / id;
        fs::create_directories(dir);
        write_vvol(dir / "oct.vvol", s.oct);
        write_vvol(dir / "octa.vvol", s.octa);
        write_vsurf(dir / "surfaces.vsurf", s.surfaces);
        write_mask_pgm(dir / "rv.pgm", s.rv_gt);
        write_mask_pgm(dir / "faz.pgm", s.faz_gt);

        const std::string split = i <= n_train ? "train" : (i <= n_train + n_val ? "val" : "test");
        manifest.push_back({id, split});
    }
    write_manifest(out_dir / "manifest.txt", manifest);
    return manifest;
}

Sample load_sample(const fs::path& dataset_dir, const std::string& id) {
    const fs::path dir = dataset_dir / id;
    check(fs::exists(dir), "sample directory '", dir.string(), "' does not exist");
    Sample s;
    s.id = id;
    s.oct = read_vvol(dir / "oct.vvol");
    s.oct.modality = Modality::OCT;
    s.octa = read_vvol(dir / "octa.vvol");
    s.octa.modality = Modality::OCTA;
    s.surfaces = read_vsurf(dir / "surfaces.vsurf");
    s.rv_gt = read_mask_pgm(dir / "rv.pgm");
    s.faz_gt = read_mask_pgm(dir / "faz.pgm");
    s.surfaces.validate(s.oct.H);
    return s;
}

// ------------------------------------------------------------- OCTA-500

Octa500Subset octa500_subset_for_id(const std::string& id) {
    char* end = nullptr;
    const long v = std::strtol(id.c_str(), &end, 10);
    if (end == nullptr || *end != '\0') return Octa500Subset::Other;
    if (v >= 10001 && v <= 10300) return Octa500Subset::SixMM;
    if (v >= 10301 && v <= 10500) return Octa500Subset::ThreeMM;
    return Octa500Subset::Other;
}

namespace {

std::map<std::string, std::string> read_descriptor(const fs::path& path) {
    check(fs::exists(path), "layout descriptor '", path.string(), "' does not exist");
    std::map<std::string, std::string> kv;
    std::istringstream in(read_text_file(path));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        check(eq != std::string::npos, "malformed descriptor line '", line, "'");
        auto trim = [](std::string v) {
            const std::size_t a = v.find_first_not_of(" \t");
            const std::size_t b = v.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    for (const char* key : {"oct", "octa", "surfaces", "rv", "faz"})
        check(kv.count(key) == 1, "layout descriptor misses key '", key, "'");
    return kv;
}

std::string substitute_id(const std::string& pattern, const std::string& id) {
    std::string out = pattern;
    const std::string token = "{id}";
    std::size_t pos;
    while ((pos = out.find(token)) != std::string::npos) out.replace(pos, token.size(), id);
    return out;
}

// a directory of per-B-scan PGMs, one per en-face position, sorted by name
Volume3D read_bscan_stack(const fs::path& dir) {
    check(fs::is_directory(dir), "B-scan stack '", dir.string(), "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".pgm") files.push_back(e.path());
    check(!files.empty(), "B-scan stack '", dir.string(), "' holds no .pgm files");
    std::sort(files.begin(), files.end());

    int W = 0, H = 0;
    std::vector<std::uint8_t> first = read_pgm(files[0], W, H);
    Volume3D v(static_cast<int>(files.size()), W, H, VoxelType::U8);
    for (std::size_t x = 0; x < files.size(); ++x) {
        int w = 0, h = 0;
        const std::vector<std::uint8_t> img = x == 0 ? first : read_pgm(files[x], w, h);
        if (x > 0)
            check(w == W && h == H, "B-scan '", files[x].string(), "' is ", w, "x", h, ", expected ", W, "x", H);
        // image rows are axial depth, columns run along the plane width
        for (int z = 0; z < H; ++z)
            for (int y = 0; y < W; ++y)
                v.at(static_cast<int>(x), y, z) = img[static_cast<std::size_t>(z) * W + y];
    }
    return v;
}

Volume3D load_volume_entry(const fs::path& root, const std::string& pattern, const std::string& id) {
    const std::string rel = substitute_id(pattern, id);
    if (!rel.empty() && rel.back() == '/') return read_bscan_stack(root / rel.substr(0, rel.size() - 1));
    const fs::path p = root / rel;
    check(fs::exists(p), "volume file '", p.string(), "' does not exist");
    return read_vvol(p);
}

}  // namespace

Sample load_octa500_sample(const fs::path& root, const std::string& id, const fs::path& descriptor) {
    const fs::path desc_path = descriptor.empty() ? root / "layout.cfg" : descriptor;
    const std::map<std::string, std::string> layout = read_descriptor(desc_path);

    Sample s;
    s.id = id;
    s.oct = load_volume_entry(root, layout.at("oct"), id);
    s.oct.modality = Modality::OCT;
    s.octa = load_volume_entry(root, layout.at("octa"), id);
    s.octa.modality = Modality::OCTA;
    {
        const fs::path p = root / substitute_id(layout.at("surfaces"), id);
        check(fs::exists(p), "surface file '", p.string(), "' does not exist");
        s.surfaces = read_vsurf(p);
    }
    s.rv_gt = read_mask_pgm(root / substitute_id(layout.at("rv"), id));
    s.faz_gt = read_mask_pgm(root / substitute_id(layout.at("faz"), id));

    check(s.oct.L == s.octa.L && s.oct.W == s.octa.W && s.oct.H == s.octa.H, "sample '", id,
          "': OCT and OCTA volumes are not registered");
    const Octa500Subset subset = octa500_subset_for_id(id);
    if (subset == Octa500Subset::SixMM)
        check(s.oct.L == 400 && s.oct.W == 400 && s.oct.H == 640, "6mm sample '", id, "' must be 400x400x640, got ",
              s.oct.L, "x", s.oct.W, "x", s.oct.H);
    if (subset == Octa500Subset::ThreeMM)
        check(s.oct.L == 304 && s.oct.W == 304 && s.oct.H == 640, "3mm sample '", id, "' must be 304x304x640, got ",
              s.oct.L, "x", s.oct.W, "x", s.oct.H);
    check(s.rv_gt.L == s.oct.L && s.rv_gt.W == s.oct.W, "sample '", id, "': RV mask extent mismatch");
    check(s.faz_gt.L == s.oct.L && s.faz_gt.W == s.oct.W, "sample '", id, "': FAZ mask extent mismatch");
    s.surfaces.validate(s.oct.H);
    return s;
}

}  // namespace projseg
