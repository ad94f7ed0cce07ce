#include "zinb/evaluation.hpp"

#include "zinb/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace zinb {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
    if (a != b) throw Error(ErrorCode::DimensionMismatch, std::to_string(a) + " scores vs " + std::to_string(b) + " labels");
}

bool two_classes(std::span<const std::uint8_t> truth) {
    const auto pos = std::count_if(truth.begin(), truth.end(), [](auto t) { return t != 0; });
    return pos > 0 && pos < static_cast<std::ptrdiff_t>(truth.size());
}

double ratio(std::size_t num, std::size_t den) {
    return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> truth) {
    check_lengths(scores.size(), truth.size());
    if (!two_classes(truth)) throw Error(ErrorCode::SingleClassTruth, "truth needs both classes");
    const std::size_t m = scores.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double pos_rank_sum = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t s = 0; s < m;) {
        std::size_t e = s;
        while (e < m && scores[order[e]] == scores[order[s]]) ++e;
        const double midrank = 0.5 * static_cast<double>(s + 1 + e);
        for (std::size_t t = s; t < e; ++t) {
            if (truth[order[t]]) {
                pos_rank_sum += midrank;
                ++n_pos;
            }
        }
        s = e;
    }
    const double n1 = static_cast<double>(n_pos);
    const double n0 = static_cast<double>(m - n_pos);
    return (pos_rank_sum - n1 * (n1 + 1.0) / 2.0) / (n1 * n0);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> truth) {
    check_lengths(scores.size(), truth.size());
    if (!two_classes(truth)) throw Error(ErrorCode::SingleClassTruth, "truth needs both classes");
    const std::size_t m = scores.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const auto n_pos = static_cast<std::size_t>(std::count_if(truth.begin(), truth.end(), [](auto t) { return t != 0; }));
    const std::size_t n_neg = m - n_pos;
    std::vector<RocPoint> out;
    out.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    for (std::size_t s = 0; s < m;) {
        std::size_t e = s;
        while (e < m && scores[order[e]] == scores[order[s]]) {
            if (truth[order[e]]) ++tp;
            else ++fp;
            ++e;
        }
        out.push_back({scores[order[s]], ratio(fp, n_neg), ratio(tp, n_pos)});
        s = e;
    }
    return out;
}

double Confusion::sensitivity() const { return ratio(tp, tp + fn); }
double Confusion::specificity() const { return ratio(tn, tn + fp); }
double Confusion::false_discovery() const { return ratio(fp, tp + fp); }
double Confusion::false_positive_rate() const { return ratio(fp, fp + tn); }

Confusion confusion(std::span<const std::uint8_t> selected, std::span<const std::uint8_t> truth) {
    check_lengths(selected.size(), truth.size());
    Confusion c;
    for (std::size_t i = 0; i < selected.size(); ++i) {
        const bool s = selected[i] != 0, t = truth[i] != 0;
        if (s && t) ++c.tp;
        else if (s) ++c.fp;
        else if (t) ++c.fn;
        else ++c.tn;
    }
    return c;
}

double mcc(const Confusion& c) {
    const double tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn);
    const double fp = static_cast<double>(c.fp), fn = static_cast<double>(c.fn);
    const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (den == 0.0) return 0.0;
    return (tp * tn - fp * fn) / std::sqrt(den);
}

double mcc(std::span<const std::uint8_t> selected, std::span<const std::uint8_t> truth) {
    return mcc(confusion(selected, truth));
}

ScoreReport score_run(const PosteriorSummary& summary, const SimTruth& truth) {
    if (summary.p != truth.gamma_true.size() || summary.n_cov != truth.delta_true.rows() ||
        summary.p != truth.delta_true.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "summary and truth dimensions differ");
    }
    ScoreReport out;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.auc_gamma = two_classes(truth.gamma_true) ? roc_auc(summary.ppi_gamma, truth.gamma_true) : nan;
    out.auc_delta = two_classes(truth.delta_true.data()) ? roc_auc(summary.ppi_delta.data(), truth.delta_true.data()) : nan;
    out.gamma = confusion(summary.selected_gamma, truth.gamma_true);
    out.delta = confusion(summary.selected_delta.data(), truth.delta_true.data());
    out.mcc_gamma = mcc(out.gamma);
    out.mcc_delta = mcc(out.delta);
    out.sensitivity = out.gamma.sensitivity();
    out.specificity = out.gamma.specificity();
    out.fdr_empirical = out.gamma.false_discovery();
    out.fpr = out.delta.false_positive_rate();
    out.delta_null = out.delta.tp + out.delta.fn == 0;
    return out;
}

}  // namespace zinb
