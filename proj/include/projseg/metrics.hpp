#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "projseg/projection.hpp"

namespace projseg {

struct ConfusionCounts {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Exact pixelwise counts; both maps must be strictly 0/1 valued.
ConfusionCounts confusion(const Map2D& pred, const Map2D& gt);

// 2TP/(2TP+FP+FN); both-empty masks score 1 by convention
double dice(const ConfusionCounts& c);
// TP/(TP+FP+FN); both-empty masks score 1
double jaccard(const ConfusionCounts& c);
// (TPR+TNR)/2 with absent-class rates treated as 1
double balanced_accuracy(const ConfusionCounts& c);

// pixel positive iff probability >= threshold
Map2D binarize(const Map2D& prob, double threshold);

// default sweep grid {0.01, 0.02, ..., 0.99}
std::vector<double> default_threshold_sweep();

// Threshold from the sweep maximizing mean Dice over the set; ties go to the
// smallest threshold.
double best_threshold(const std::vector<Map2D>& probs, const std::vector<Map2D>& gts,
                      const std::vector<double>& sweep = default_threshold_sweep());

struct MetricReport {
    std::vector<std::string> ids;
    std::vector<double> dice, jac, bacc;
    double dice_mean = 0, dice_sd = 0;
    double jac_mean = 0, jac_sd = 0;
    double bacc_mean = 0, bacc_sd = 0;

    // aligned text table, mean +/- sd footer
    std::string to_text() const;
    // one row per sample: sample_id, dice, jac, bacc
    std::string to_csv() const;
};

// Per-sample metrics at the given threshold plus population mean and SD.
MetricReport evaluate_split(const std::vector<std::string>& ids, const std::vector<Map2D>& probs,
                            const std::vector<Map2D>& gts, double threshold);

}  // namespace projseg
