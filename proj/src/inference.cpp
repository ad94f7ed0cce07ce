#include "zinb/inference.hpp"

#include "zinb/error.hpp"
#include "zinb/normalization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace zinb {

namespace {

void check_traces(std::span<const ChainTrace> traces) {
    if (traces.empty()) throw Error(ErrorCode::EmptyTrace, "no chains");
    const auto& first = traces.front();
    for (const auto& t : traces) {
        if (t.n_draws == 0) throw Error(ErrorCode::EmptyTrace, "chain with seed " + std::to_string(t.seed));
        if (t.p != first.p || t.n_cov != first.n_cov || t.k != first.k || t.n != first.n) {
            throw Error(ErrorCode::DimensionMismatch, "chains disagree in dimensions");
        }
        if (t.n_draws != first.n_draws) throw Error(ErrorCode::DimensionMismatch, "chains have unequal recorded lengths");
    }
}

double round12(double x) { return std::round(x * 1e12) / 1e12; }

double mean_of(double sum, double n) { return sum / n; }

double sd_of(double sum, double sumsq, double n) {
    if (n < 2.0) return 0.0;
    const double var = (sumsq - sum * sum / n) / (n - 1.0);
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

}  // namespace

std::vector<double> chain_gamma_ppi(const ChainTrace& trace) {
    if (trace.n_draws == 0) throw Error(ErrorCode::EmptyTrace, "chain has no recorded draws");
    std::vector<double> out(trace.p);
    for (std::size_t j = 0; j < trace.p; ++j) {
        out[j] = static_cast<double>(trace.gamma_sums[j]) / static_cast<double>(trace.n_draws);
    }
    return out;
}

std::vector<double> chain_delta_ppi(const ChainTrace& trace) {
    if (trace.n_draws == 0) throw Error(ErrorCode::EmptyTrace, "chain has no recorded draws");
    std::vector<double> out;
    out.reserve(trace.n_cov * trace.p);
    for (std::size_t j = 0; j < trace.p; ++j) {
        for (std::size_t r = 0; r < trace.n_cov; ++r) {
            out.push_back(static_cast<double>(trace.delta_sums(r, j)) / static_cast<double>(trace.n_draws));
        }
    }
    return out;
}

PpiResult compute_ppi(std::span<const ChainTrace> traces) {
    check_traces(traces);
    const auto& first = traces.front();
    PpiResult out;
    out.gamma.assign(first.p, 0.0);
    out.delta = Matrix<double>(first.n_cov, first.p);
    double draws = 0.0;
    for (const auto& t : traces) {
        draws += static_cast<double>(t.n_draws);
        for (std::size_t j = 0; j < t.p; ++j) {
            out.gamma[j] += static_cast<double>(t.gamma_sums[j]);
            for (std::size_t r = 0; r < t.n_cov; ++r) out.delta(r, j) += static_cast<double>(t.delta_sums(r, j));
        }
    }
    for (auto& v : out.gamma) v /= draws;
    for (auto& v : out.delta.data()) v /= draws;
    return out;
}

FdrSelection bayesian_fdr_threshold(std::span<const double> ppis, double target) {
    if (!(target > 0.0 && target < 1.0)) throw Error(ErrorCode::InvalidArgument, "FDR target must lie in (0, 1)");
    const std::size_t m = ppis.size();
    std::vector<double> rounded(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(ppis[i] >= 0.0 && ppis[i] <= 1.0)) throw Error(ErrorCode::DomainError, "PPI outside [0, 1]");
        rounded[i] = round12(ppis[i]);
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rounded[a] > rounded[b]; });

    FdrSelection out;
    out.selected.assign(m, 0);
    out.threshold = std::nextafter(1.0, 2.0);
    std::size_t best_end = 0;
    double best_fdr = 0.0;
    double sum = 0.0;
    for (std::size_t s = 0; s < m;) {
        std::size_t e = s;
        while (e < m && rounded[order[e]] == rounded[order[s]]) {
            sum += 1.0 - rounded[order[e]];
            ++e;
        }
        const double fdr = sum / static_cast<double>(e);
        if (fdr <= target) {
            best_end = e;
            best_fdr = fdr;
        }
        s = e;
    }
    if (best_end > 0) {
        out.empty = false;
        out.threshold = rounded[order[best_end - 1]];
        out.estimated_fdr = best_fdr;
        for (std::size_t t = 0; t < best_end; ++t) out.selected[order[t]] = 1;
    }
    return out;
}

PosteriorSummary summarize(std::span<const ChainTrace> traces, double fdr_target) {
    check_traces(traces);
    const auto& first = traces.front();
    const std::size_t p = first.p, n_cov = first.n_cov, k = first.k;

    PosteriorSummary s;
    s.p = p;
    s.n_cov = n_cov;
    s.k = k;
    s.fdr_target = fdr_target;

    auto ppi = compute_ppi(traces);
    s.ppi_gamma = ppi.gamma;
    s.ppi_delta = ppi.delta;

    auto sel_gamma = bayesian_fdr_threshold(s.ppi_gamma, fdr_target);
    s.selected_gamma = sel_gamma.selected;
    s.threshold_gamma = sel_gamma.threshold;
    s.empty_gamma = sel_gamma.empty;

    auto sel_delta = bayesian_fdr_threshold(s.ppi_delta.data(), fdr_target);
    s.selected_delta = Matrix<std::uint8_t>(n_cov, p);
    std::copy(sel_delta.selected.begin(), sel_delta.selected.end(), s.selected_delta.data().begin());
    s.threshold_delta = sel_delta.threshold;
    s.empty_delta = sel_delta.empty;

    double draws = 0.0;
    std::vector<double> mu0_sum(p), mu0_sumsq(p), phi_sum(p), phi_sumsq(p);
    Matrix<double> mu_k_sum(k, p), beta_sum(n_cov, p), beta_sumsq(n_cov, p);
    for (const auto& t : traces) {
        draws += static_cast<double>(t.n_draws);
        for (std::size_t j = 0; j < p; ++j) {
            mu0_sum[j] += t.mu0_sum[j];
            mu0_sumsq[j] += t.mu0_sumsq[j];
            phi_sum[j] += t.phi_sum[j];
            phi_sumsq[j] += t.phi_sumsq[j];
            for (std::size_t g = 0; g < k; ++g) mu_k_sum(g, j) += t.mu_k_sum(g, j);
            for (std::size_t r = 0; r < n_cov; ++r) {
                beta_sum(r, j) += t.beta_sum(r, j);
                beta_sumsq(r, j) += t.beta_sumsq(r, j);
            }
        }
    }

    s.mu0_mean.resize(p);
    s.mu0_sd.resize(p);
    s.phi_mean.resize(p);
    s.phi_sd.resize(p);
    s.mu_k_mean = Matrix<double>(k, p);
    s.mu_k_lower = Matrix<double>(k, p);
    s.mu_k_upper = Matrix<double>(k, p);
    s.beta_mean = Matrix<double>(n_cov, p);
    s.beta_sd = Matrix<double>(n_cov, p);

    std::vector<double> pooled;
    pooled.reserve(static_cast<std::size_t>(draws));
    for (std::size_t j = 0; j < p; ++j) {
        s.mu0_mean[j] = mean_of(mu0_sum[j], draws);
        s.mu0_sd[j] = sd_of(mu0_sum[j], mu0_sumsq[j], draws);
        s.phi_mean[j] = mean_of(phi_sum[j], draws);
        s.phi_sd[j] = sd_of(phi_sum[j], phi_sumsq[j], draws);
        for (std::size_t r = 0; r < n_cov; ++r) {
            s.beta_mean(r, j) = mean_of(beta_sum(r, j), draws);
            s.beta_sd(r, j) = sd_of(beta_sum(r, j), beta_sumsq(r, j), draws);
        }
        for (std::size_t g = 0; g < k; ++g) {
            const double mean = mean_of(mu_k_sum(g, j), draws);
            pooled.clear();
            for (const auto& t : traces) {
                for (std::size_t d = 0; d < t.n_draws; ++d) pooled.push_back(t.mu_k_draw(d, g, j));
            }
            std::sort(pooled.begin(), pooled.end());
            // A shift that is mostly switched off has a point mass at zero; the
            // interval is widened to contain the model-averaged mean.
            s.mu_k_mean(g, j) = mean;
            s.mu_k_lower(g, j) = std::min(sorted_quantile(pooled, 0.025), mean);
            s.mu_k_upper(g, j) = std::max(sorted_quantile(pooled, 0.975), mean);
        }
    }
    return s;
}

double pearson_correlation(std::span<const double> a, std::span<const double> b, bool* degenerate) {
    if (a.size() != b.size() || a.empty()) throw Error(ErrorCode::DimensionMismatch, "correlation inputs");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    // Test constancy directly: a rounded mean leaves tiny nonzero squares behind.
    auto constant = [](std::span<const double> v) {
        return std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
    };
    const bool degen = constant(a) || constant(b) || saa <= 0.0 || sbb <= 0.0;
    if (degenerate) *degenerate = degen;
    if (degen) return std::nan("");
    return sab / std::sqrt(saa * sbb);
}

ConcordanceReport chain_concordance(std::span<const ChainTrace> traces, double floor) {
    if (traces.size() < 2) throw Error(ErrorCode::InvalidArgument, "concordance needs at least two chains");
    check_traces(traces);
    ConcordanceReport out;
    out.floor = floor;
    std::vector<std::vector<double>> gammas, deltas;
    for (const auto& t : traces) {
        gammas.push_back(chain_gamma_ppi(t));
        deltas.push_back(chain_delta_ppi(t));
    }
    out.converged = true;
    for (std::size_t a = 0; a < traces.size(); ++a) {
        for (std::size_t b = a + 1; b < traces.size(); ++b) {
            PairCorrelation g{a, b, 0.0, false};
            g.correlation = pearson_correlation(gammas[a], gammas[b], &g.degenerate);
            if (g.degenerate || g.correlation < floor) out.converged = false;
            out.gamma.push_back(g);
            if (!deltas[a].empty()) {
                PairCorrelation d{a, b, 0.0, false};
                d.correlation = pearson_correlation(deltas[a], deltas[b], &d.degenerate);
                out.delta.push_back(d);
            }
        }
    }
    return out;
}

}  // namespace zinb
