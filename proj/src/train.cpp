#include "projseg/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "projseg/adam.hpp"
#include "projseg/io.hpp"
#include "projseg/ops.hpp"
#include "projseg/rng.hpp"

namespace projseg {

PreparedSample prepare_sample(Sample s, const RunConfig& cfg) {
    PreparedSample p;
    p.id = s.id;
    p.L = s.oct.L;
    p.W = s.oct.W;
    p.H = s.oct.H;
    p.oct = std::move(s.oct);
    p.octa = std::move(s.octa);
    for (Volume3D* v : {&p.oct, &p.octa})
        if (v->dtype == VoxelType::U8) {
            for (double& x : v->data) x /= 255.0;
            v->dtype = VoxelType::F64;
        }
    if (cfg.use_distance_map()) p.distance = build_distance_map(p.L, p.W);
    p.rv_gt = std::move(s.rv_gt);
    p.faz_gt = std::move(s.faz_gt);
    return p;
}

TrainData load_train_data(const RunConfig& cfg) {
    const fs::path root = cfg.data_dir;
    check(fs::exists(root / "manifest.txt"), "no manifest at '", (root / "manifest.txt").string(),
          "' (run the gen subcommand first)");
    TrainData data;
    for (const ManifestEntry& e : read_manifest(root / "manifest.txt")) {
        PreparedSample p = prepare_sample(load_sample(root, e.id), cfg);
        if (e.split == "train") data.train.push_back(std::move(p));
        else if (e.split == "val") data.val.push_back(std::move(p));
        else data.test.push_back(std::move(p));
    }
    check(!data.train.empty(), "training split is empty");
    auto check_extents = [&](const std::vector<PreparedSample>& v) {
        for (const PreparedSample& p : v)
            check(p.L == data.train[0].L && p.W == data.train[0].W && p.H == data.train[0].H,
                  "sample '", p.id, "' extents differ from the rest of the dataset");
    };
    check_extents(data.train);
    check_extents(data.val);
    check_extents(data.test);
    return data;
}

Tensor sample_patch_input(const PreparedSample& s, const RunConfig& cfg, std::pair<int, int> origin) {
    std::vector<const Tensor*> maps;
    if (s.distance) maps.push_back(&*s.distance);
    return extract_patch({&s.oct, &s.octa}, maps, origin, cfg.patch_length, cfg.patch_width,
                         cfg.patch_height);
}

LabelMap patch_labels(const PreparedSample& s, const RunConfig& cfg, std::pair<int, int> origin) {
    LabelMap lm(cfg.patch_length, cfg.patch_width);
    const auto [x0, y0] = origin;
    for (int x = 0; x < cfg.patch_length; ++x)
        for (int y = 0; y < cfg.patch_width; ++y) {
            if (cfg.task == Task::Rv) lm.at(x, y) = s.rv_gt.at(x0 + x, y0 + y) == 1.0 ? 1 : 0;
            else if (cfg.task == Task::Faz) lm.at(x, y) = s.faz_gt.at(x0 + x, y0 + y) == 1.0 ? 1 : 0;
            else
                lm.at(x, y) = s.rv_gt.at(x0 + x, y0 + y) == 1.0 ? 1
                              : s.faz_gt.at(x0 + x, y0 + y) == 1.0 ? 2 : 0;
        }
    return lm;
}

LabelMap full_labels(const PreparedSample& s, Task task) {
    LabelMap lm(s.L, s.W);
    for (int x = 0; x < s.L; ++x)
        for (int y = 0; y < s.W; ++y) {
            if (task == Task::Rv) lm.at(x, y) = s.rv_gt.at(x, y) == 1.0 ? 1 : 0;
            else if (task == Task::Faz) lm.at(x, y) = s.faz_gt.at(x, y) == 1.0 ? 1 : 0;
            else lm.at(x, y) = s.rv_gt.at(x, y) == 1.0 ? 1 : s.faz_gt.at(x, y) == 1.0 ? 2 : 0;
        }
    return lm;
}

const Map2D& gt_for_class(const PreparedSample& s, Task task, int cls) {
    if (task == Task::Rv) {
        check(cls == 1, "rv task has foreground class 1 only, got ", cls);
        return s.rv_gt;
    }
    if (task == Task::Faz) {
        check(cls == 1, "faz task has foreground class 1 only, got ", cls);
        return s.faz_gt;
    }
    check(cls == 1 || cls == 2, "multitask foreground classes are 1 (RV) and 2 (FAZ), got ", cls);
    return cls == 1 ? s.rv_gt : s.faz_gt;
}

// -------------------------------------------------------------- inference

namespace {

PatchGrid grid_for(const PreparedSample& s, const RunConfig& cfg, int step) {
    return plan_patches(s.L, s.W, cfg.patch_length, cfg.patch_width, step);
}

}  // namespace

Tensor infer_prob_map(const PatchNet& net, const PreparedSample& s, const RunConfig& cfg, int step) {
    const PatchGrid grid = grid_for(s, cfg, step);
    SpliceAccumulator acc(s.L, s.W, net.config().num_classes);
    for (const auto& origin : grid.origins) {
        const Tensor patch = sample_patch_input(s, cfg, origin);
        acc.add(origin, softmax(net.forward(patch).logits));
    }
    return acc.finish();
}

Tensor infer_features(const PatchNet& net, const PreparedSample& s, const RunConfig& cfg, int step) {
    check(net.with_perceptron(), "penultimate feature splicing needs the plane-perceptron variant");
    const PatchGrid grid = grid_for(s, cfg, step);
    SpliceAccumulator acc(s.L, s.W, net.penultimate_channels());
    for (const auto& origin : grid.origins) {
        const Tensor patch = sample_patch_input(s, cfg, origin);
        acc.add(origin, net.forward(patch).penultimate);
    }
    return acc.finish();
}

Tensor infer_prob_map_global(const PatchNet& pnet, const GlobalNet& gnet, const PreparedSample& s,
                             const RunConfig& cfg, int step) {
    const Tensor features = infer_features(pnet, s, cfg, step);
    return softmax(gnet.forward(features).logits);
}

Map2D prob_channel(const Tensor& prob, int cls, MapKind kind) {
    check(prob.rank() == 3, "probability tensor must be [L,W,K], got ", shape_str(prob.shape()));
    check(cls >= 0 && cls < prob.dim(2), "class ", cls, " out of range for ", prob.dim(2), " classes");
    Map2D out(prob.dim(0), prob.dim(1), kind);
    for (int x = 0; x < prob.dim(0); ++x)
        for (int y = 0; y < prob.dim(1); ++y) out.at(x, y) = prob.at(x, y, cls);
    return out;
}

double sample_dice(const Tensor& prob, const PreparedSample& s, Task task, double threshold) {
    const int K = prob.dim(2);
    double total = 0.0;
    int classes = 0;
    for (int cls = 1; cls < K; ++cls) {
        const Map2D pred = binarize(prob_channel(prob, cls), threshold);
        total += dice(confusion(pred, gt_for_class(s, task, cls)));
        ++classes;
    }
    return total / static_cast<double>(classes);
}

// ---------------------------------------------------------------- training

namespace {

std::string format_log_line(const TrainLogLine& l) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d\t%.17g\t%.17g\n", l.iter, l.loss, l.val_dice);
    return buf;
}

// validation at no-overlap step: cheap, and model ranking is what matters here
double validation_dice(const PatchNet& net, const TrainData& data, const RunConfig& cfg) {
    if (data.val.empty()) return 0.0;
    double total = 0.0;
    for (const PreparedSample& s : data.val)
        total += sample_dice(infer_prob_map(net, s, cfg, cfg.patch_length), s, cfg.task, 0.5);
    return total / static_cast<double>(data.val.size());
}

double validation_dice_global(const PatchNet& pnet, const GlobalNet& gnet,
                              const std::vector<Tensor>& val_features, const TrainData& data,
                              const RunConfig& cfg) {
    if (data.val.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < data.val.size(); ++i) {
        const Tensor prob = softmax(gnet.forward(val_features[i]).logits);
        total += sample_dice(prob, data.val[i], cfg.task, 0.5);
    }
    return total / static_cast<double>(data.val.size());
}

struct Snapshot {
    std::vector<Tensor> values;

    static Snapshot take(const ModelParams& params) {
        Snapshot s;
        for (std::size_t i = 0; i < params.count(); ++i) s.values.push_back(params.item(i).param->value);
        return s;
    }
    void restore(const ModelParams& params) const {
        for (std::size_t i = 0; i < params.count(); ++i) params.item(i).param->value = values[i];
    }
};

void scale_grads(const ModelParams& params, double factor) {
    for (std::size_t i = 0; i < params.count(); ++i) {
        Tensor& g = params.item(i).param->grad;
        for (std::int64_t j = 0; j < g.size(); ++j) g[j] *= factor;
    }
}

std::vector<AdamState> make_adam(const ModelParams& params, double lr) {
    std::vector<AdamState> states;
    for (std::size_t i = 0; i < params.count(); ++i)
        states.emplace_back(params.item(i).param->value.shape(), lr);
    return states;
}

void step_all(const ModelParams& params, std::vector<AdamState>& states) {
    for (std::size_t i = 0; i < params.count(); ++i) adam_step(*params.item(i).param, states[i]);
}

fs::path ckpt_path(const fs::path& dir, const char* stage, int iter) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s_iter%06d.ckpt", stage, iter);
    return dir / buf;
}

}  // namespace

std::string log_to_text(const std::vector<TrainLogLine>& log) {
    std::string out;
    for (const TrainLogLine& l : log) out += format_log_line(l);
    return out;
}

TrainResult train_stage1(PatchNet& net, const TrainData& data, const RunConfig& cfg, std::uint64_t seed,
                         const fs::path& checkpoint_dir, bool init_weights) {
    check(!data.train.empty(), "train_stage1: empty dataset");
    const ModelParams params = net.params();
    if (init_weights) init_params(params, seed);
    std::vector<AdamState> adam = make_adam(params, cfg.train_lr);
    Rng rng(mix_seed(seed, 0xA11CE5ULL));

    const PatchGrid grid = plan_patches(data.train[0].L, data.train[0].W, cfg.patch_length, cfg.patch_width,
                                        cfg.patch_step);

    TrainResult result;
    Snapshot best;
    double val = validation_dice(net, data, cfg);
    if (!checkpoint_dir.empty()) fs::create_directories(checkpoint_dir);

    for (int iter = 0; iter < cfg.train_max_iters; ++iter) {
        params.zero_grads();
        double loss = 0.0;
        for (int b = 0; b < cfg.train_batch; ++b) {
            const PreparedSample& s = data.train[rng.below(data.train.size())];
            const auto origin = grid.origins[rng.below(grid.origins.size())];
            const Tensor patch = sample_patch_input(s, cfg, origin);
            const LabelMap labels = patch_labels(s, cfg, origin);
            PatchNet::Acts acts = net.forward(patch);
            loss += softmax_ce(acts.logits, labels);
            net.backward(acts, softmax_ce_backward(acts.logits, labels));
        }
        loss /= cfg.train_batch;
        if (cfg.train_batch > 1) scale_grads(params, 1.0 / cfg.train_batch);
        step_all(params, adam);

        if ((iter + 1) % cfg.train_save_every == 0) {
            val = validation_dice(net, data, cfg);
            if (val > result.best_val_dice) {
                result.best_val_dice = val;
                result.best_iter = iter;
                best = Snapshot::take(params);
            }
            if (!checkpoint_dir.empty()) save_checkpoint(ckpt_path(checkpoint_dir, "stage1", iter), params);
        }
        result.log.push_back({iter, loss, val});
    }

    if (result.best_iter >= 0) best.restore(params);
    else {  // fewer iterations than save_every: keep final weights
        result.best_val_dice = validation_dice(net, data, cfg);
        result.best_iter = cfg.train_max_iters - 1;
    }
    if (!checkpoint_dir.empty()) save_checkpoint(checkpoint_dir / "stage1_best.ckpt", params);
    return result;
}

TrainResult train_stage2(const PatchNet& frozen, GlobalNet& gnet, const TrainData& data, const RunConfig& cfg,
                         std::uint64_t seed, const fs::path& checkpoint_dir) {
    check(!data.train.empty(), "train_stage2: empty dataset");
    check(frozen.with_perceptron(), "stage 2 retrains on IPN-V2 penultimate features");

    // both stages train on the same training split; features are fixed
    // because the stage-1 network is frozen, so they are computed once
    std::vector<Tensor> train_features, val_features;
    std::vector<LabelMap> train_labels;
    for (const PreparedSample& s : data.train) {
        train_features.push_back(infer_features(frozen, s, cfg, cfg.patch_step));
        train_labels.push_back(full_labels(s, cfg.task));
    }
    for (const PreparedSample& s : data.val)
        val_features.push_back(infer_features(frozen, s, cfg, cfg.patch_step));

    const ModelParams params = gnet.params();
    init_params(params, mix_seed(seed, 0x6C0BA1ULL));
    std::vector<AdamState> adam = make_adam(params, cfg.stage2_lr);
    Rng rng(mix_seed(seed, 0x57A6E2ULL));

    TrainResult result;
    Snapshot best;
    double val = validation_dice_global(frozen, gnet, val_features, data, cfg);
    if (!checkpoint_dir.empty()) fs::create_directories(checkpoint_dir);

    for (int iter = 0; iter < cfg.stage2_max_iters; ++iter) {
        params.zero_grads();
        double loss = 0.0;
        for (int b = 0; b < cfg.stage2_batch; ++b) {
            const std::size_t vi = rng.below(train_features.size());
            GlobalNet::Acts acts = gnet.forward(train_features[vi]);
            loss += softmax_ce(acts.logits, train_labels[vi]);
            gnet.backward(acts, softmax_ce_backward(acts.logits, train_labels[vi]));
        }
        loss /= cfg.stage2_batch;
        if (cfg.stage2_batch > 1) scale_grads(params, 1.0 / cfg.stage2_batch);
        step_all(params, adam);

        if ((iter + 1) % cfg.stage2_save_every == 0) {
            val = validation_dice_global(frozen, gnet, val_features, data, cfg);
            if (val > result.best_val_dice) {
                result.best_val_dice = val;
                result.best_iter = iter;
                best = Snapshot::take(params);
            }
            if (!checkpoint_dir.empty()) save_checkpoint(ckpt_path(checkpoint_dir, "stage2", iter), params);
        }
        result.log.push_back({iter, loss, val});
    }

    if (result.best_iter >= 0) best.restore(params);
    else {
        result.best_val_dice = validation_dice_global(frozen, gnet, val_features, data, cfg);
        result.best_iter = cfg.stage2_max_iters - 1;
    }
    if (!checkpoint_dir.empty()) save_checkpoint(checkpoint_dir / "stage2_best.ckpt", params);
    return result;
}

}  // namespace projseg
