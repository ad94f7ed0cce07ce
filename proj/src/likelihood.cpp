#include "zinb/likelihood.hpp"

#include "zinb/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace zinb {

double nb_log_pmf(std::int64_t y, double lambda, double phi) {
    if (!(lambda > 0.0) || !(phi > 0.0)) throw Error(ErrorCode::DomainError, "NB mean and dispersion must be positive");
    if (y < 0) throw Error(ErrorCode::DomainError, "negative count");
    const double yd = static_cast<double>(y);
    const double log_sum = std::log(lambda + phi);
    double out = phi * (std::log(phi) - log_sum);
    if (y > 0) {
        out += std::lgamma(yd + phi) - std::lgamma(yd + 1.0) - std::lgamma(phi) + yd * (std::log(lambda) - log_sum);
    }
    return out;
}

double zinb_log_pmf(std::int64_t y, double pi, double lambda, double phi) {
    if (!(pi >= 0.0 && pi <= 1.0)) throw Error(ErrorCode::DomainError, "zero-inflation weight outside [0, 1]");
    const double nb = nb_log_pmf(y, lambda, phi);
    if (y > 0) return pi == 1.0 ? -INFINITY : std::log1p(-pi) + nb;
    return std::log(pi + (1.0 - pi) * std::exp(nb));
}

double log_normal_density(double x, double mean, double variance) {
    const double d = x - mean;
    return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + d * d / variance);
}

double log_gamma_density(double x, double shape, double rate) {
    if (!(x > 0.0)) return -INFINITY;
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_t_marginal_density(double x, double a, double b) {
    return std::lgamma(a + 0.5) - std::lgamma(a) - 0.5 * std::log(2.0 * std::numbers::pi * b) -
           (a + 0.5) * std::log1p(x * x / (2.0 * b));
}

double log_beta_function(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

void check_taxon_params(const TaxonParams& params, std::size_t reference_group) {
    if (!(params.phi > 0.0)) throw Error(ErrorCode::InvariantViolation, "phi must be positive");
    if (reference_group >= params.mu_k.size()) throw Error(ErrorCode::InvariantViolation, "reference group out of range");
    if (params.mu_k[reference_group] != 0.0) throw Error(ErrorCode::InvariantViolation, "reference group shift is nonzero");
    if (!params.gamma) {
        for (double m : params.mu_k) {
            if (m != 0.0) throw Error(ErrorCode::InvariantViolation, "gamma = 0 with a nonzero group shift");
        }
    }
    if (params.delta.size() != params.beta.size()) throw Error(ErrorCode::InvariantViolation, "delta and beta sizes differ");
    for (std::size_t r = 0; r < params.beta.size(); ++r) {
        if (!params.delta[r] && params.beta[r] != 0.0) {
            throw Error(ErrorCode::InvariantViolation, "delta = 0 with nonzero beta for covariate " + std::to_string(r));
        }
    }
}

double mean_alpha(const TaxonParams& params, std::span<const double> x_row, std::size_t group,
                  std::size_t reference_group) {
    check_taxon_params(params, reference_group);
    if (group >= params.mu_k.size()) throw Error(ErrorCode::InvalidArgument, "group out of range");
    if (x_row.size() != params.beta.size()) throw Error(ErrorCode::DimensionMismatch, "covariate row length");
    double eta = params.mu0;
    if (params.gamma) eta += params.mu_k[group];
    for (std::size_t r = 0; r < x_row.size(); ++r) eta += x_row[r] * params.beta[r];
    return std::exp(eta);
}

double taxon_log_lik(std::span<const std::int64_t> y_col, std::span<const std::uint8_t> r_col,
                     const TaxonParams& params, const SizeFactors& s, const CovariateMatrix& x,
                     const GroupAssignment& groups) {
    const std::size_t n = y_col.size();
    if (r_col.size() != n || s.size() != n || x.n() != n || groups.n() != n) {
        throw Error(ErrorCode::DimensionMismatch, "taxon log-likelihood inputs disagree in length");
    }
    std::vector<double> row(x.r());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (r_col[i]) {
            if (y_col[i] != 0) throw Error(ErrorCode::InconsistentZeroIndicator, "sample " + std::to_string(i));
            continue;
        }
        for (std::size_t r = 0; r < x.r(); ++r) row[r] = x(i, r);
        const double alpha = mean_alpha(params, row, groups.index(i), groups.reference_index());
        total += nb_log_pmf(y_col[i], s[i] * alpha, params.phi);
    }
    return total;
}

LogPriorTerms log_prior_terms(const TaxonParams& params, const Hyperparameters& hp, std::size_t reference_group) {
    check_taxon_params(params, reference_group);
    LogPriorTerms out;
    out.mu0 = log_normal_density(params.mu0, 0.0, hp.sigma0_sq);
    if (params.gamma) {
        for (std::size_t k = 0; k < params.mu_k.size(); ++k) {
            if (k != reference_group) out.mu_k += log_t_marginal_density(params.mu_k[k], hp.a_t, hp.b_t);
        }
    }
    for (std::size_t r = 0; r < params.beta.size(); ++r) {
        if (params.delta[r]) out.beta += log_t_marginal_density(params.beta[r], hp.a_t, hp.b_t);
    }
    out.phi = log_gamma_density(params.phi, hp.a_phi, hp.b_phi);
    return out;
}

}  // namespace zinb
