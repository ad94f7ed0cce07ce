#ifndef ZINB_INFERENCE_HPP
#define ZINB_INFERENCE_HPP

#include "zinb/matrix.hpp"
#include "zinb/sampler.hpp"

#include <span>
#include <vector>

namespace zinb {

struct PpiResult {
    std::vector<double> gamma;  // p
    Matrix<double> delta;       // R x p
};

/// Pooled inclusion frequencies over all chains' recorded draws.
PpiResult compute_ppi(std::span<const ChainTrace> traces);

/// PPI vector of a single chain.
std::vector<double> chain_gamma_ppi(const ChainTrace& trace);
std::vector<double> chain_delta_ppi(const ChainTrace& trace);

struct FdrSelection {
    double threshold = 1.0;       // selected = {ppi >= threshold}
    double estimated_fdr = 0.0;   // mean of 1 - PPI over the selection
    std::vector<std::uint8_t> selected;
    bool empty = true;
};

/**
 * Bayesian FDR control: the largest selection of the form {1 - PPI < c} whose
 * average 1 - PPI stays at or below the target. PPIs are rounded to 12
 * decimals first; ties never straddle the cutoff.
 */
FdrSelection bayesian_fdr_threshold(std::span<const double> ppis, double target);

struct PosteriorSummary {
    std::size_t p = 0, n_cov = 0, k = 0;
    std::vector<double> ppi_gamma;
    Matrix<double> ppi_delta;
    std::vector<std::uint8_t> selected_gamma;
    Matrix<std::uint8_t> selected_delta;
    std::vector<double> mu0_mean, mu0_sd;
    Matrix<double> mu_k_mean, mu_k_lower, mu_k_upper;  // K x p, 95% equal-tailed
    Matrix<double> beta_mean, beta_sd;                 // R x p
    std::vector<double> phi_mean, phi_sd;
    double fdr_target = 0.05;
    double threshold_gamma = 1.0, threshold_delta = 1.0;
    bool empty_gamma = true, empty_delta = true;
};

PosteriorSummary summarize(std::span<const ChainTrace> traces, double fdr_target = 0.05);

struct PairCorrelation {
    std::size_t chain_a = 0, chain_b = 0;
    double correlation = 0.0;
    bool degenerate = false;  // a PPI vector had zero variance
};

struct ConcordanceReport {
    std::vector<PairCorrelation> gamma;
    std::vector<PairCorrelation> delta;
    double floor = 0.95;
    bool converged = false;  // every gamma pair non-degenerate and >= floor
};

ConcordanceReport chain_concordance(std::span<const ChainTrace> traces, double floor = 0.95);

double pearson_correlation(std::span<const double> a, std::span<const double> b, bool* degenerate = nullptr);

}  // namespace zinb

#endif
