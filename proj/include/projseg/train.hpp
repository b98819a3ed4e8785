#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "projseg/config.hpp"
#include "projseg/metrics.hpp"
#include "projseg/network.hpp"
#include "projseg/synthdata.hpp"
#include "projseg/tiling.hpp"

namespace projseg {

// A sample made ready for the networks: channel volumes normalized to [0,1]
// (u8 data divided by 255), the distance-map channel when the task uses it,
// and the ground-truth masks.
struct PreparedSample {
    std::string id;
    Volume3D oct, octa;
    std::optional<Tensor> distance;
    Map2D rv_gt, faz_gt;
    int L = 0, W = 0, H = 0;
};

struct TrainData {
    std::vector<PreparedSample> train, val, test;
};

PreparedSample prepare_sample(Sample s, const RunConfig& cfg);
TrainData load_train_data(const RunConfig& cfg);

// input tensor for one grid origin: [l, w, patch_height, channels]
Tensor sample_patch_input(const PreparedSample& s, const RunConfig& cfg, std::pair<int, int> origin);
// label crop for the same window
LabelMap patch_labels(const PreparedSample& s, const RunConfig& cfg, std::pair<int, int> origin);
// full-plane labels (stage-2 supervision)
LabelMap full_labels(const PreparedSample& s, Task task);
// ground truth for one foreground class (1 = RV or FAZ depending on task;
// multitask uses 1 = RV, 2 = FAZ)
const Map2D& gt_for_class(const PreparedSample& s, Task task, int cls);

// ---- inference ----

// spliced per-class probability map [L, W, K]
Tensor infer_prob_map(const PatchNet& net, const PreparedSample& s, const RunConfig& cfg, int step);
// spliced penultimate features [L, W, c]
Tensor infer_features(const PatchNet& net, const PreparedSample& s, const RunConfig& cfg, int step);
// the two-stage pipeline: features -> global net -> softmax
Tensor infer_prob_map_global(const PatchNet& pnet, const GlobalNet& gnet, const PreparedSample& s,
                             const RunConfig& cfg, int step);

Map2D prob_channel(const Tensor& prob, int cls, MapKind kind = MapKind::Probability);

// mean Dice over foreground classes at the given binarization threshold
double sample_dice(const Tensor& prob, const PreparedSample& s, Task task, double threshold);

// ---- training ----

struct TrainLogLine {
    int iter = 0;
    double loss = 0.0;
    double val_dice = 0.0;
};

std::string log_to_text(const std::vector<TrainLogLine>& log);

struct TrainResult {
    std::vector<TrainLogLine> log;
    int best_iter = -1;
    double best_val_dice = -1.0;
};

// Runs Adam over the softmax cross-entropy on randomly sampled patches.
// Evaluates validation Dice every save_every iterations, keeps the best
// checkpoint, and leaves the best parameters loaded in the net on return.
// Pass init_weights = false to train from the parameters already in the net.
TrainResult train_stage1(PatchNet& net, const TrainData& data, const RunConfig& cfg, std::uint64_t seed,
                         const fs::path& checkpoint_dir = {}, bool init_weights = true);

// Global retraining on spliced penultimate features with complete labels.
// The stage-1 network is taken const and is never touched.
TrainResult train_stage2(const PatchNet& frozen, GlobalNet& gnet, const TrainData& data, const RunConfig& cfg,
                         std::uint64_t seed, const fs::path& checkpoint_dir = {});

}  // namespace projseg
