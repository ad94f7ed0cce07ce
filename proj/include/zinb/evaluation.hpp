#ifndef ZINB_EVALUATION_HPP
#define ZINB_EVALUATION_HPP

#include "zinb/inference.hpp"
#include "zinb/simgen.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace zinb {

/// Mann-Whitney AUC with midranks. Throws SingleClassTruth.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> truth);

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

/// Points from (0,0) to (1,1), one per distinct score, descending threshold.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> truth);

struct Confusion {
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

    std::size_t total() const { return tp + tn + fp + fn; }
    double sensitivity() const;     // 0 when there are no positives
    double specificity() const;     // 0 when there are no negatives
    double false_discovery() const; // 0 for an empty selection
    double false_positive_rate() const;
};

Confusion confusion(std::span<const std::uint8_t> selected, std::span<const std::uint8_t> truth);

/// Matthews correlation; 0 when any denominator factor vanishes.
double mcc(std::span<const std::uint8_t> selected, std::span<const std::uint8_t> truth);
double mcc(const Confusion& c);

struct ScoreReport {
    double auc_gamma = 0.0;  // NaN when gamma truth has one class
    double auc_delta = 0.0;  // NaN when delta truth has one class
    Confusion gamma;
    Confusion delta;
    double mcc_gamma = 0.0, mcc_delta = 0.0;
    double sensitivity = 0.0, specificity = 0.0, fdr_empirical = 0.0;
    double fpr = 0.0;  // share of null delta_rj selected
    bool delta_null = false;
};

ScoreReport score_run(const PosteriorSummary& summary, const SimTruth& truth);

}  // namespace zinb

#endif
