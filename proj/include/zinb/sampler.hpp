#ifndef ZINB_SAMPLER_HPP
#define ZINB_SAMPLER_HPP

#include "zinb/data_model.hpp"
#include "zinb/likelihood.hpp"
#include "zinb/matrix.hpp"
#include "zinb/normalization.hpp"
#include "zinb/rng.hpp"

#include <cstdint>
#include <vector>

namespace zinb {

/// Latent configuration of one chain. pi, omega and p_rj are integrated out.
struct ModelState {
    Matrix<std::uint8_t> r;  // n x p extra-zero indicators
    std::vector<TaxonParams> taxa;

    bool operator==(const ModelState&) const = default;
};

struct ChainConfig {
    int n_iter = 20000;
    int burn_in = -1;  // negative: n_iter / 2
    std::uint64_t seed = 1;
    int thin = 1;
    bool prior_only = false;
    bool adapt = false;               // Robbins-Monro scale tuning during burn-in
    bool record_diagnostics = false;  // per-sweep rows in ChainTrace::diagnostics

    int effective_burn_in() const { return burn_in < 0 ? n_iter / 2 : burn_in; }
    int recorded_draws() const;
    void validate() const;
};

struct MoveCounter {
    std::uint64_t proposed = 0;
    std::uint64_t accepted = 0;

    double rate() const { return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
    bool operator==(const MoveCounter&) const = default;
};

struct AcceptanceStats {
    MoveCounter mu0;
    MoveCounter gamma_add;
    MoveCounter gamma_delete;
    MoveCounter mu_k;
    MoveCounter delta_add;
    MoveCounter delta_delete;
    MoveCounter beta;
    MoveCounter phi;

    bool operator==(const AcceptanceStats&) const = default;
};

struct DiagnosticRow {
    int iteration = 0;
    double log_posterior = 0.0;
    int gamma_count = 0;
    int delta_count = 0;
    AcceptanceStats acceptance;

    bool operator==(const DiagnosticRow&) const = default;
};

/**
 * Post-burn-in summary of one chain: indicator counts, running moments and the
 * stored group-shift draws needed for credible intervals.
 */
struct ChainTrace {
    std::size_t n = 0, p = 0, n_cov = 0, k = 0, reference = 0;
    std::uint64_t seed = 0;
    std::size_t n_draws = 0;

    std::vector<std::uint64_t> gamma_sums;  // p
    Matrix<std::uint64_t> delta_sums;       // R x p
    Matrix<std::uint64_t> r_sums;           // n x p

    std::vector<double> mu0_sum, mu0_sumsq;  // p
    Matrix<double> mu_k_sum, mu_k_sumsq;     // K x p
    Matrix<double> beta_sum, beta_sumsq;     // R x p
    std::vector<double> phi_sum, phi_sumsq;  // p

    /// Draws of mu_kj, laid out [draw][group][feature] with all K groups present.
    std::vector<double> mu_k_draws;

    AcceptanceStats acceptance;
    ProposalScales final_scales;
    std::vector<DiagnosticRow> diagnostics;
    ModelState final_state;

    double mu_k_draw(std::size_t draw, std::size_t group, std::size_t feature) const {
        return mu_k_draws[(draw * k + group) * p + feature];
    }

    bool operator==(const ChainTrace&) const = default;
};

/**
 * One MCMC chain over a validated dataset with plug-in size factors.
 * A sweep applies, in order: extra-zero indicators, baselines, group-shift
 * add-delete plus within-model walks, covariate add-delete plus within-model
 * walks, dispersions.
 */
class Sampler {
public:
    Sampler(const Dataset& data, const SizeFactors& size_factors, const Hyperparameters& hp,
            const ProposalScales& scales, bool prior_only, std::uint64_t seed);

    /// Random initial state; resets all caches.
    void init_state();
    /// Replaces the state (caches recomputed). Throws on invariant violations.
    void set_state(ModelState state);
    const ModelState& state() const noexcept { return state_; }

    void update_r();
    void update_mu0();
    void update_gamma_mu();
    void update_delta_beta();
    void update_phi();
    void sweep();

    /// Throws InvariantViolation if any state invariant fails.
    void check_invariants() const;

    double log_posterior() const;

    const AcceptanceStats& acceptance() const noexcept { return acceptance_; }
    const ProposalScales& scales() const noexcept { return scales_; }
    void set_scales(const ProposalScales& scales) { scales_ = scales; }
    Rng& rng() noexcept { return rng_; }
    int iteration() const noexcept { return iteration_; }

    /// Log-likelihood of feature j from the caches (r = 0 samples).
    double cached_log_lik(std::size_t j) const;

private:
    void refresh_taxon_cache(std::size_t j);
    bool accept(double log_ratio);
    double delta_loglik_shift(std::size_t j, std::span<const std::size_t> rows, double shift);
    double delta_loglik_covariate(std::size_t j, std::size_t r, double change);
    void commit_rows(std::size_t j, std::span<const std::size_t> rows, double shift);
    void commit_covariate(std::size_t j, std::size_t r, double change);
    void shuffle_order();

    const Dataset& data_;
    const SizeFactors& size_factors_;
    Hyperparameters hp_;
    ProposalScales scales_;
    bool prior_only_;
    Rng rng_;
    int iteration_ = 0;

    std::size_t n_, p_, n_cov_, k_, ref_;
    std::vector<double> log_s_;
    std::vector<std::vector<std::size_t>> group_rows_;
    std::vector<std::size_t> all_rows_;
    std::vector<double> y_sum_;        // p
    Matrix<double> y_group_sum_;       // K x p
    Matrix<double> yx_sum_;            // R x p

    ModelState state_;
    Matrix<double> eta_;     // log(s_i alpha_ij)
    Matrix<double> lambda_;  // s_i alpha_ij
    Matrix<double> log_lp_;  // log(lambda_ij + phi_j), valid where r_ij = 0
    std::vector<double> scratch_lambda_, scratch_log_lp_;
    std::vector<std::size_t> order_;
    int gamma_count_ = 0;

    AcceptanceStats acceptance_;
};

ModelState init_state(const Dataset& data, const SizeFactors& size_factors, const Hyperparameters& hp,
                      std::uint64_t seed);

ChainTrace run_chain(const Dataset& data, const SizeFactors& size_factors, const Hyperparameters& hp,
                     const ProposalScales& scales, const ChainConfig& config);

/// Runs chains on up to `threads` workers (0: hardware concurrency). Traces
/// equal those of sequential run_chain calls.
std::vector<ChainTrace> run_chains_parallel(const Dataset& data, const SizeFactors& size_factors,
                                            const Hyperparameters& hp, const ProposalScales& scales,
                                            const std::vector<ChainConfig>& configs, unsigned threads = 0);

}  // namespace zinb

#endif
