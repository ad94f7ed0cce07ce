#ifndef ZINB_LIKELIHOOD_HPP
#define ZINB_LIKELIHOOD_HPP

#include "zinb/data_model.hpp"
#include "zinb/normalization.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace zinb {

/// log NB(y; mean lambda, dispersion 1/phi). Variance is lambda + lambda^2 / phi.
double nb_log_pmf(std::int64_t y, double lambda, double phi);

/// log of pi * I(y = 0) + (1 - pi) * NB(y; lambda, phi).
double zinb_log_pmf(std::int64_t y, double pi, double lambda, double phi);

double log_normal_density(double x, double mean, double variance);

/// Gamma density in the shape-rate parameterization (mean shape / rate).
double log_gamma_density(double x, double shape, double rate);

/**
 * Scaled Student-t with 2a degrees of freedom and squared scale b/a: the
 * marginal of N(0, sigma^2) after integrating sigma^2 ~ IG(a, b).
 */
double log_t_marginal_density(double x, double a, double b);

double log_beta_function(double a, double b);

/// Parameters of one feature (taxon). Group shifts are indexed by zero-based group.
struct TaxonParams {
    double mu0 = 0.0;
    std::vector<double> mu_k;
    std::vector<double> beta;
    double phi = 1.0;
    bool gamma = false;
    std::vector<std::uint8_t> delta;

    bool operator==(const TaxonParams&) const = default;
};

/// Throws InvariantViolation if the spike-and-slab zeroing or reference constraint fails.
void check_taxon_params(const TaxonParams& params, std::size_t reference_group);

/// Normalized abundance exp(mu0 + gamma * mu_k[group] + x . beta) for a zero-based group.
double mean_alpha(const TaxonParams& params, std::span<const double> x_row, std::size_t group,
                  std::size_t reference_group);

/**
 * NB log-likelihood of one feature column over the samples whose extra-zero
 * indicator is 0. Samples flagged r = 1 contribute nothing.
 */
double taxon_log_lik(std::span<const std::int64_t> y_col, std::span<const std::uint8_t> r_col,
                     const TaxonParams& params, const SizeFactors& s, const CovariateMatrix& x,
                     const GroupAssignment& groups);

struct LogPriorTerms {
    double mu0 = 0.0;
    double mu_k = 0.0;
    double beta = 0.0;
    double phi = 0.0;

    double total() const { return mu0 + mu_k + beta + phi; }
};

LogPriorTerms log_prior_terms(const TaxonParams& params, const Hyperparameters& hp, std::size_t reference_group);

}  // namespace zinb

#endif
