#include <chrono>
#include <cmath>
#include <iostream>

#include "projseg/cli.hpp"
#include "projseg/gradcheck.hpp"
#include "projseg/metrics.hpp"
#include "projseg/projection.hpp"
#include "projseg/rng.hpp"
#include "projseg/tiling.hpp"

namespace projseg::cli {

namespace {

struct Verifier {
    int failures = 0;

    void report(const std::string& name, bool ok, const std::string& detail) {
        std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << ": " << detail << "\n";
        if (!ok) ++failures;
    }
};

Map2D random_mask(Rng& rng, int L, int W) {
    Map2D m(L, W, MapKind::Label);
    for (double& v : m.v) v = rng.uniform() < 0.3 ? 1.0 : 0.0;
    return m;
}

void check_gradients(Verifier& v, std::vector<GradCheckCase> cases, double tol, const std::string& corrupt) {
    for (GradCheckCase& c : cases) {
        if (c.name == corrupt) {
            auto orig = c.grads;
            c.grads = [orig](const std::vector<Tensor>& x) {
                std::vector<Tensor> g = orig(x);
                g[0][0] += 1e-3;
                return g;
            };
        }
        const double err = grad_check_max_rel_error(c);
        v.report("gradient " + c.name, err < tol, detail::cat("max relative error ", err, " (tol ", tol, ")"));
    }
}

void check_metric_oracles(Verifier& v) {
    Rng rng(20240501);
    bool ok = true;
    std::string detail = "100 random 64x64 mask pairs match the brute-force loop exactly";
    for (int rep = 0; rep < 100 && ok; ++rep) {
        const Map2D pred = random_mask(rng, 64, 64);
        const Map2D gt = random_mask(rng, 64, 64);
        // independent path: plain double loop over pixels
        std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
        for (int x = 0; x < 64; ++x)
            for (int y = 0; y < 64; ++y) {
                const bool p = pred.at(x, y) == 1.0, g = gt.at(x, y) == 1.0;
                if (p && g) ++tp;
                else if (p) ++fp;
                else if (g) ++fn;
                else ++tn;
            }
        const ConfusionCounts c = confusion(pred, gt);
        ok = c.tp == tp && c.fp == fp && c.fn == fn && c.tn == tn;
        if (ok) {
            const double d_oracle = tp + fp + fn == 0 ? 1.0 : 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
            const double j_oracle = tp + fp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
            ok = dice(c) == d_oracle && jaccard(c) == j_oracle;
        }
        if (!ok) detail = detail::cat("mismatch at repetition ", rep);
    }
    v.report("metrics vs brute force", ok, detail);
}

void check_projection_oracles(Verifier& v) {
    Rng rng(20240502);
    bool ok = true;
    std::string detail = "20 random 8x8x12 volumes match the per-pixel reduction loop exactly";
    for (int rep = 0; rep < 20 && ok; ++rep) {
        Volume3D vol(8, 8, 12);
        for (double& x : vol.data) x = rng.uniform(0.0, 10.0);
        LayerSurfaces surf(8, 8);
        for (int x = 0; x < 8; ++x)
            for (int y = 0; y < 8; ++y) {
                const std::size_t i = surf.idx(x, y);
                surf.ilm[i] = rng.range(0, 4);
                surf.opl[i] = surf.ilm[i] + rng.range(0, 4);
                surf.bm[i] = surf.opl[i] + rng.range(0, 11 - surf.opl[i]);
            }
        for (Region region : {Region::Full, Region::IlmOpl, Region::OplBm})
            for (ReduceMode mode : {ReduceMode::Average, ReduceMode::Maximum}) {
                const Map2D got = project(vol, region, mode, &surf);
                for (int x = 0; x < 8 && ok; ++x)
                    for (int y = 0; y < 8 && ok; ++y) {
                        const std::size_t i = surf.idx(x, y);
                        int z0 = 0, z1 = 11;
                        if (region == Region::IlmOpl) { z0 = surf.ilm[i]; z1 = surf.opl[i]; }
                        if (region == Region::OplBm) { z0 = surf.opl[i]; z1 = surf.bm[i]; }
                        double expect;
                        if (mode == ReduceMode::Average) {
                            double s = 0.0;
                            for (int z = z0; z <= z1; ++z) s += vol.at(x, y, z);
                            expect = s / (z1 - z0 + 1);
                        } else {
                            expect = vol.at(x, y, z0);
                            for (int z = z0 + 1; z <= z1; ++z) expect = std::max(expect, vol.at(x, y, z));
                        }
                        ok = got.at(x, y) == expect;
                        if (!ok) detail = detail::cat("mismatch at rep ", rep, " pixel (", x, ",", y, ")");
                    }
            }
    }
    v.report("projections vs brute force", ok, detail);
}

void check_splice_idempotence(Verifier& v) {
    Rng rng(20240503);
    const int L = 48, W = 48, l = 16, w = 16, c = 3;
    Tensor map({L, W, c});
    for (std::int64_t i = 0; i < map.size(); ++i) map[i] = rng.uniform(-5.0, 5.0);

    bool ok = true;
    std::string detail = "patches cut from a map re-splice to it within 1e-12 for d in {l, l/2, l/4}";
    for (int d : {l, l / 2, l / 4}) {
        const PatchGrid grid = plan_patches(L, W, l, w, d);
        std::vector<std::pair<std::pair<int, int>, Tensor>> outputs;
        for (const auto& [x0, y0] : grid.origins) {
            Tensor patch({l, w, c});
            for (int x = 0; x < l; ++x)
                for (int y = 0; y < w; ++y)
                    for (int ch = 0; ch < c; ++ch) patch.at(x, y, ch) = map.at(x0 + x, y0 + y, ch);
            outputs.push_back({{x0, y0}, std::move(patch)});
        }
        const Tensor spliced = splice(outputs, grid);
        for (std::int64_t i = 0; i < map.size() && ok; ++i)
            if (std::abs(spliced[i] - map[i]) > 1e-12) {
                ok = false;
                detail = detail::cat("splice deviates at step d=", d);
            }
    }
    v.report("splice idempotence", ok, detail);
}

void check_seam_ramp(Verifier& v) {
    const int L = 32, W = 32;
    Tensor ramp({L, W});
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y) ramp.at(x, y) = 0.25 * x + 0.5 * y;
    const PatchGrid grid = plan_patches(L, W, 8, 8, 8);
    const double score = seam_score(ramp, grid);
    v.report("seam score on a smooth ramp", score <= 1e-12, detail::cat("score ", score));
}

void check_determinism(Verifier& v) {
    Rng rng(20240504);
    Tensor in({4, 4, 6, 2});
    for (std::int64_t i = 0; i < in.size(); ++i) in[i] = rng.uniform(-1.0, 1.0);
    Tensor w({3, 3, 3, 2, 2});
    for (std::int64_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-1.0, 1.0);
    Tensor b({2});
    const Tensor a1 = conv3d(in, w, b);
    const Tensor a2 = conv3d(in, w, b);
    bool ok = a1.vec() == a2.vec();
    const Sample s1 = gen_phantom(PhantomSpec{});
    const Sample s2 = gen_phantom(PhantomSpec{});
    ok = ok && s1.octa.data == s2.octa.data && s1.rv_gt.v == s2.rv_gt.v;
    v.report("determinism", ok, "identical inputs and seeds give bitwise-identical outputs");
}

}  // namespace

int cmd_verify(const Options& opt) {
    const auto start = std::chrono::steady_clock::now();
    Verifier v;

    std::vector<GradCheckCase> ops = op_grad_cases(77001);
    std::vector<GradCheckCase> nets = network_grad_cases(77002);
    if (!opt.corrupt_op.empty()) {
        bool found = false;
        for (const auto& c : ops) found = found || c.name == opt.corrupt_op;
        for (const auto& c : nets) found = found || c.name == opt.corrupt_op;
        check(found, "--corrupt: no gradient case named '", opt.corrupt_op, "'");
    }
    check_gradients(v, std::move(ops), 1e-5, opt.corrupt_op);
    check_gradients(v, std::move(nets), 1e-4, opt.corrupt_op);

    check_metric_oracles(v);
    check_projection_oracles(v);
    check_splice_idempotence(v);
    check_seam_ramp(v);
    check_determinism(v);

    const double secs =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
            .count() /
        1000.0;
    std::cout << (v.failures == 0 ? "verify passed" : "verify FAILED") << " (" << v.failures
              << " failures, " << secs << "s)\n";
    return v.failures;
}

}  // namespace projseg::cli
