#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "projseg/cli.hpp"
#include "projseg/metrics.hpp"
#include "projseg/network.hpp"
#include "projseg/ops.hpp"
#include "projseg/synthdata.hpp"
#include "projseg/tiling.hpp"

namespace py = pybind11;
using namespace projseg;

namespace {

Tensor tensor_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    Shape shape;
    for (py::ssize_t i = 0; i < a.ndim(); ++i) shape.push_back(static_cast<int>(a.shape(i)));
    std::vector<double> data(a.data(), a.data() + a.size());
    return Tensor(std::move(shape), std::move(data));
}

py::array_t<double> array_from_tensor(const Tensor& t) {
    std::vector<py::ssize_t> shape;
    for (int d : t.shape()) shape.push_back(d);
    py::array_t<double> out(shape);
    std::copy(t.data(), t.data() + t.size(), out.mutable_data());
    return out;
}

Volume3D volume_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 3) throw py::value_error("volume must be a 3D array");
    Volume3D v(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), static_cast<int>(a.shape(2)));
    std::copy(a.data(), a.data() + a.size(), v.data.begin());
    return v;
}

Map2D map_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw py::value_error("map must be a 2D array");
    Map2D m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), m.v.begin());
    return m;
}

py::array_t<double> array_from_map(const Map2D& m) {
    py::array_t<double> out({static_cast<py::ssize_t>(m.L), static_cast<py::ssize_t>(m.W)});
    std::copy(m.v.begin(), m.v.end(), out.mutable_data());
    return out;
}

LayerSurfaces surfaces_from_arrays(const py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>& ilm,
                                   const py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>& opl,
                                   const py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>& bm) {
    if (ilm.ndim() != 2 || opl.ndim() != 2 || bm.ndim() != 2)
        throw py::value_error("surfaces must be 2D integer arrays");
    LayerSurfaces s(static_cast<int>(ilm.shape(0)), static_cast<int>(ilm.shape(1)));
    for (py::ssize_t i = 0; i < ilm.size(); ++i) {
        s.ilm[static_cast<std::size_t>(i)] = static_cast<int>(ilm.data()[i]);
        s.opl[static_cast<std::size_t>(i)] = static_cast<int>(opl.data()[i]);
        s.bm[static_cast<std::size_t>(i)] = static_cast<int>(bm.data()[i]);
    }
    return s;
}

Region region_from_string(const std::string& s) {
    if (s == "full") return Region::Full;
    if (s == "ilm_opl") return Region::IlmOpl;
    if (s == "opl_bm") return Region::OplBm;
    throw py::value_error("region must be full, ilm_opl or opl_bm");
}

ReduceMode mode_from_string(const std::string& s) {
    if (s == "avg") return ReduceMode::Average;
    if (s == "max") return ReduceMode::Maximum;
    throw py::value_error("mode must be avg or max");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "3D-to-2D projection segmentation: tensor ops, tiling, projections, metrics, phantoms";
    m.attr("__version__") = "0.1.0";

    py::register_exception<Error>(m, "ProjsegError");

    // ---- numeric ops ----
    m.def("conv3d", [](py::array_t<double> x, py::array_t<double> w, py::array_t<double> b) {
        return array_from_tensor(conv3d(tensor_from_array(x), tensor_from_array(w), tensor_from_array(b)));
    }, py::arg("input"), py::arg("weights"), py::arg("bias"),
       "same-padding stride-1 3D convolution over [l,w,h,cin]");
    m.def("conv2d", [](py::array_t<double> x, py::array_t<double> w, py::array_t<double> b) {
        return array_from_tensor(conv2d(tensor_from_array(x), tensor_from_array(w), tensor_from_array(b)));
    }, py::arg("input"), py::arg("weights"), py::arg("bias"));
    m.def("uni_pool_h", [](py::array_t<double> x, int stride) {
        return array_from_tensor(uni_pool_h(tensor_from_array(x), stride));
    }, py::arg("input"), py::arg("stride"), "max pool along the height axis only");
    m.def("collapse_conv", [](py::array_t<double> x, py::array_t<double> w, py::array_t<double> b) {
        return array_from_tensor(collapse_conv(tensor_from_array(x), tensor_from_array(w), tensor_from_array(b)));
    }, py::arg("input"), py::arg("weights"), py::arg("bias"),
       "full-height 1x1xh convolution collapsing [l,w,h,cin] to [l,w,cout]");
    m.def("resize_h_linear", [](py::array_t<double> x, int new_h) {
        return array_from_tensor(resize_h_linear(tensor_from_array(x), new_h));
    }, py::arg("input"), py::arg("new_h"));
    m.def("relu", [](py::array_t<double> x) { return array_from_tensor(relu(tensor_from_array(x))); });
    m.def("softmax", [](py::array_t<double> x) { return array_from_tensor(softmax(tensor_from_array(x))); });
    m.def("softmax_ce", [](py::array_t<double> logits,
                           py::array_t<std::int64_t, py::array::c_style | py::array::forcecast> labels) {
        const Tensor lg = tensor_from_array(logits);
        if (labels.ndim() != 2) throw py::value_error("labels must be a 2D integer array");
        LabelMap lm(static_cast<int>(labels.shape(0)), static_cast<int>(labels.shape(1)));
        for (py::ssize_t i = 0; i < labels.size(); ++i)
            lm.values[static_cast<std::size_t>(i)] = static_cast<int>(labels.data()[i]);
        return softmax_ce(lg, lm);
    }, py::arg("logits"), py::arg("labels"), "mean per-pixel cross-entropy");
    m.def("distance_map", [](int L, int W) { return array_from_tensor(build_distance_map(L, W)); },
          py::arg("L"), py::arg("W"), "normalized distance to the en-face centre");

    // ---- projections ----
    m.def("project", [](py::array_t<double> volume, const std::string& region, const std::string& mode,
                        py::object ilm, py::object opl, py::object bm) {
        const Volume3D v = volume_from_array(volume);
        const Region r = region_from_string(region);
        if (r == Region::Full)
            return array_from_map(project(v, r, mode_from_string(mode)));
        if (ilm.is_none() || opl.is_none() || bm.is_none())
            throw py::value_error("layer surfaces required for region projections");
        const LayerSurfaces s = surfaces_from_arrays(ilm.cast<py::array_t<std::int64_t>>(),
                                                     opl.cast<py::array_t<std::int64_t>>(),
                                                     bm.cast<py::array_t<std::int64_t>>());
        return array_from_map(project(v, r, mode_from_string(mode), &s));
    }, py::arg("volume"), py::arg("region"), py::arg("mode"), py::arg("ilm") = py::none(),
       py::arg("opl") = py::none(), py::arg("bm") = py::none());
    m.def("generate_all", [](py::array_t<double> oct_vol, py::array_t<double> octa_vol, py::array_t<std::int64_t> ilm,
                             py::array_t<std::int64_t> opl, py::array_t<std::int64_t> bm) {
        const std::array<Map2D, 6> maps =
            generate_all(volume_from_array(oct_vol), volume_from_array(octa_vol),
                         surfaces_from_arrays(ilm, opl, bm));
        py::dict out;
        for (const Map2D& map : maps) out[py::str(to_string(map.kind))] = array_from_map(map);
        return out;
    }, py::arg("oct"), py::arg("octa"), py::arg("ilm"), py::arg("opl"), py::arg("bm"),
       "the six en-face projection maps B1..B6");

    // ---- metrics ----
    m.def("confusion", [](py::array_t<double> pred, py::array_t<double> gt) {
        const ConfusionCounts c = confusion(map_from_array(pred), map_from_array(gt));
        return py::make_tuple(c.tp, c.fp, c.fn, c.tn);
    }, py::arg("pred"), py::arg("gt"), "returns (tp, fp, fn, tn)");
    m.def("dice", [](std::int64_t tp, std::int64_t fp, std::int64_t fn, std::int64_t tn) {
        return dice(ConfusionCounts{tp, fp, fn, tn});
    });
    m.def("jaccard", [](std::int64_t tp, std::int64_t fp, std::int64_t fn, std::int64_t tn) {
        return jaccard(ConfusionCounts{tp, fp, fn, tn});
    });
    m.def("balanced_accuracy", [](std::int64_t tp, std::int64_t fp, std::int64_t fn, std::int64_t tn) {
        return balanced_accuracy(ConfusionCounts{tp, fp, fn, tn});
    });
    m.def("best_threshold", [](const std::vector<py::array_t<double>>& probs,
                               const std::vector<py::array_t<double>>& gts) {
        std::vector<Map2D> p, g;
        for (const auto& a : probs) p.push_back(map_from_array(a));
        for (const auto& a : gts) g.push_back(map_from_array(a));
        return best_threshold(p, g);
    }, py::arg("probs"), py::arg("gts"));

    // ---- tiling ----
    m.def("plan_patches", [](int L, int W, int l, int w, int d) {
        const PatchGrid grid = plan_patches(L, W, l, w, d);
        return grid.origins;
    }, py::arg("L"), py::arg("W"), py::arg("l"), py::arg("w"), py::arg("d"),
       "row-major patch origins covering the plane");
    m.def("splice", [](const std::vector<std::pair<std::pair<int, int>, py::array_t<double>>>& outputs,
                       int L, int W, int l, int w, int d) {
        const PatchGrid grid = plan_patches(L, W, l, w, d);
        std::vector<std::pair<std::pair<int, int>, Tensor>> tensors;
        for (const auto& [origin, arr] : outputs) tensors.push_back({origin, tensor_from_array(arr)});
        return array_from_tensor(splice(tensors, grid));
    }, py::arg("outputs"), py::arg("L"), py::arg("W"), py::arg("l"), py::arg("w"), py::arg("d"),
       "mean-overlap splicing of per-patch [l,w,c] outputs");
    m.def("seam_score", [](py::array_t<double> map, int l, int w, int d) {
        const Tensor t = tensor_from_array(map);
        const PatchGrid grid = plan_patches(t.dim(0), t.dim(1), l, w, d);
        return seam_score(t, grid);
    }, py::arg("map"), py::arg("l"), py::arg("w"), py::arg("d"));

    // ---- phantom generation ----
    m.def("gen_phantom", [](std::uint64_t seed, int L, int W, int H, int vessel_count, double vessel_radius_min,
                            double vessel_radius_max, double vessel_intensity, double faz_radius,
                            double noise_sigma) {
        PhantomSpec spec;
        spec.seed = seed;
        spec.L = L;
        spec.W = W;
        spec.H = H;
        spec.vessel_count = vessel_count;
        spec.vessel_radius_min = vessel_radius_min;
        spec.vessel_radius_max = vessel_radius_max;
        spec.vessel_intensity = vessel_intensity;
        spec.faz_radius = faz_radius;
        spec.noise_sigma = noise_sigma;
        const Sample s = gen_phantom(spec);
        py::dict out;
        auto vol_array = [](const Volume3D& v) {
            py::array_t<double> a({static_cast<py::ssize_t>(v.L), static_cast<py::ssize_t>(v.W),
                                   static_cast<py::ssize_t>(v.H)});
            std::copy(v.data.begin(), v.data.end(), a.mutable_data());
            return a;
        };
        auto surf_array = [&](const std::vector<int>& plane) {
            py::array_t<std::int64_t> a({static_cast<py::ssize_t>(s.surfaces.L),
                                         static_cast<py::ssize_t>(s.surfaces.W)});
            std::copy(plane.begin(), plane.end(), a.mutable_data());
            return a;
        };
        out["oct"] = vol_array(s.oct);
        out["octa"] = vol_array(s.octa);
        out["ilm"] = surf_array(s.surfaces.ilm);
        out["opl"] = surf_array(s.surfaces.opl);
        out["bm"] = surf_array(s.surfaces.bm);
        out["rv_gt"] = array_from_map(s.rv_gt);
        out["faz_gt"] = array_from_map(s.faz_gt);
        return out;
    }, py::arg("seed") = 1, py::arg("L") = 64, py::arg("W") = 64, py::arg("H") = 32,
       py::arg("vessel_count") = 12, py::arg("vessel_radius_min") = 1.0, py::arg("vessel_radius_max") = 2.0,
       py::arg("vessel_intensity") = 0.9, py::arg("faz_radius") = 10.0, py::arg("noise_sigma") = 0.05,
       "one synthetic OCT/OCTA sample with surfaces and ground-truth masks");

    // ---- the full pipeline ----
    m.def("run_cli", [](const std::vector<std::string>& args) { return projseg::cli::run_cli(args); },
          py::arg("args"), "run a CLI subcommand (gen/train/infer/eval/project/verify); returns the exit code");
}
