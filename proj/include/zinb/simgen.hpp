#ifndef ZINB_SIMGEN_HPP
#define ZINB_SIMGEN_HPP

#include "zinb/data_model.hpp"
#include "zinb/matrix.hpp"
#include "zinb/normalization.hpp"
#include "zinb/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace zinb {

/// Dirichlet-multinomial design with two equal groups.
struct SimConfig {
    int n = 60;
    int p = 100;
    int n_disc = 20;
    double sigma_e = 1.0;
    double pi0 = 0.4;
    int n_cov = 7;
    int m_active = 4;
    std::int64_t total_min = 20000000;
    std::int64_t total_max = 60000000;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SimTruth {
    std::vector<std::uint8_t> gamma_true;       // p
    Matrix<std::uint8_t> delta_true;            // R x p
    std::vector<double> mu0_true, mu2_true;     // p
    Matrix<double> beta_true;                   // R x p
    Matrix<std::uint8_t> structural_zero_mask;  // n x p

    bool operator==(const SimTruth&) const = default;
};

struct SimData {
    CountMatrix counts;
    CovariateMatrix covariates;  // standardized
    GroupAssignment groups;
    SimTruth truth;
    std::vector<double> true_size_factors;  // only set by generate_zinb
};

/// Covariate rows to resample from; labels 1 and 2 split the pool.
struct CovariatePool {
    CovariateMatrix covariates;
    GroupAssignment groups;
};

/// Normalized Gamma(a_j, 1) draws.
std::vector<double> dirichlet_draw(std::span<const double> a, Rng& rng);

/// Multinomial(total, prob) by sequential binomials.
std::vector<std::int64_t> multinomial_draw(std::int64_t total, std::span<const double> prob, Rng& rng);

/**
 * Dirichlet-multinomial dataset. Without a pool, covariates are i.i.d.
 * standard normal. With a pool, n/2 rows are drawn without replacement from
 * each pool group. Covariates are standardized before use.
 */
SimData generate(const SimConfig& config, const std::optional<CovariatePool>& pool = std::nullopt);

/// Data drawn from the fitted model itself: ZINB counts around known size factors.
struct ZinbSimConfig {
    int n = 200;
    int p = 20;
    int n_disc = 5;
    int n_cov = 3;
    int m_active = 1;
    double pi = 0.2;
    double phi = 10.0;
    double mu0_lo = 2.0, mu0_hi = 4.0;
    double mu2_abs = 2.0;
    double size_factor_sd = 0.3;
    std::uint64_t seed = 1;

    void validate() const;
};

SimData generate_zinb(const ZinbSimConfig& config);

}  // namespace zinb

#endif
