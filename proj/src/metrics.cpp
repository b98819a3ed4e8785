#include "projseg/metrics.hpp"

#include <cmath>
#include <cstdio>

namespace projseg {

ConfusionCounts confusion(const Map2D& pred, const Map2D& gt) {
    check(pred.L == gt.L && pred.W == gt.W, "confusion extent mismatch: ", pred.L, "x", pred.W, " vs ", gt.L,
          "x", gt.W);
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.v.size(); ++i) {
        const double p = pred.v[i], g = gt.v[i];
        check(p == 0.0 || p == 1.0, "prediction mask not binary: value ", p, " at index ", i);
        check(g == 0.0 || g == 1.0, "ground-truth mask not binary: value ", g, " at index ", i);
        if (p == 1.0 && g == 1.0)
            ++c.tp;
        else if (p == 1.0)
            ++c.fp;
        else if (g == 1.0)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

double dice(const ConfusionCounts& c) {
    const std::int64_t denom = 2 * c.tp + c.fp + c.fn;
    if (denom == 0) return 1.0;
    return 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

double jaccard(const ConfusionCounts& c) {
    const std::int64_t denom = c.tp + c.fp + c.fn;
    if (denom == 0) return 1.0;
    return static_cast<double>(c.tp) / static_cast<double>(denom);
}

double balanced_accuracy(const ConfusionCounts& c) {
    const double tpr = (c.tp + c.fn == 0) ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    const double tnr = (c.tn + c.fp == 0) ? 1.0 : static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
    return 0.5 * (tpr + tnr);
}

Map2D binarize(const Map2D& prob, double threshold) {
    Map2D out(prob.L, prob.W, MapKind::Label);
    for (std::size_t i = 0; i < prob.v.size(); ++i) out.v[i] = prob.v[i] >= threshold ? 1.0 : 0.0;
    return out;
}

std::vector<double> default_threshold_sweep() {
    std::vector<double> sweep;
    for (int i = 1; i <= 99; ++i) sweep.push_back(i / 100.0);
    return sweep;
}

double best_threshold(const std::vector<Map2D>& probs, const std::vector<Map2D>& gts,
                      const std::vector<double>& sweep) {
    check(!probs.empty(), "best_threshold needs a nonempty validation set");
    check(probs.size() == gts.size(), "best_threshold got ", probs.size(), " probability maps but ",
          gts.size(), " ground truths");
    check(!sweep.empty(), "best_threshold sweep is empty");

    double best_t = 0.0;
    double best_dice = -1.0;
    for (double t : sweep) {
        double mean = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i)
            mean += dice(confusion(binarize(probs[i], t), gts[i]));
        mean /= static_cast<double>(probs.size());
        // ties go to the smallest threshold, independent of sweep order
        if (mean > best_dice || (mean == best_dice && t < best_t)) {
            best_dice = mean;
            best_t = t;
        }
    }
    return best_t;
}

static void mean_sd(const std::vector<double>& xs, double& mean, double& sd) {
    mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());  // population SD
    sd = std::sqrt(var);
}

MetricReport evaluate_split(const std::vector<std::string>& ids, const std::vector<Map2D>& probs,
                            const std::vector<Map2D>& gts, double threshold) {
    check(ids.size() == probs.size() && probs.size() == gts.size(), "evaluate_split length mismatch: ",
          ids.size(), " ids, ", probs.size(), " maps, ", gts.size(), " ground truths");
    check(!ids.empty(), "evaluate_split needs at least one sample");

    MetricReport r;
    r.ids = ids;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const ConfusionCounts c = confusion(binarize(probs[i], threshold), gts[i]);
        r.dice.push_back(dice(c));
        r.jac.push_back(jaccard(c));
        r.bacc.push_back(balanced_accuracy(c));
    }
    mean_sd(r.dice, r.dice_mean, r.dice_sd);
    mean_sd(r.jac, r.jac_mean, r.jac_sd);
    mean_sd(r.bacc, r.bacc_mean, r.bacc_sd);
    return r;
}

std::string MetricReport::to_text() const {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-12s %10s %10s %10s\n", "sample", "dice", "jac", "bacc");
    out += line;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::snprintf(line, sizeof(line), "%-12s %10.6f %10.6f %10.6f\n", ids[i].c_str(), dice[i], jac[i],
                      bacc[i]);
        out += line;
    }
    std::snprintf(line, sizeof(line), "%-12s %.6f +/- %.6f  %.6f +/- %.6f  %.6f +/- %.6f\n", "mean",
                  dice_mean, dice_sd, jac_mean, jac_sd, bacc_mean, bacc_sd);
    out += line;
    return out;
}

std::string MetricReport::to_csv() const {
    std::string out = "sample_id,dice,jac,bacc\n";
    char line[160];
    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::snprintf(line, sizeof(line), "%s,%.17g,%.17g,%.17g\n", ids[i].c_str(), dice[i], jac[i], bacc[i]);
        out += line;
    }
    return out;
}

}  // namespace projseg
