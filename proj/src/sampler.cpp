#include "zinb/sampler.hpp"

#include "zinb/error.hpp"
#include "zinb/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

namespace zinb {

namespace {

constexpr int kCacheRefreshInterval = 50;
constexpr int kAdaptBatch = 50;
constexpr double kAdaptTarget = 0.3;

double log_std_normal_cdf(double x) { return std::log(0.5 * std::erfc(-x / std::sqrt(2.0))); }

}  // namespace

int ChainConfig::recorded_draws() const {
    const int post = n_iter - effective_burn_in();
    return post <= 0 ? 0 : (post + thin - 1) / thin;
}

void ChainConfig::validate() const {
    if (n_iter < 1) throw Error(ErrorCode::InvalidArgument, "n_iter must be positive");
    if (thin < 1) throw Error(ErrorCode::InvalidArgument, "thin must be >= 1");
    if (effective_burn_in() >= n_iter) throw Error(ErrorCode::InvalidArgument, "burn_in must be smaller than n_iter");
}

Sampler::Sampler(const Dataset& data, const SizeFactors& size_factors, const Hyperparameters& hp,
                 const ProposalScales& scales, bool prior_only, std::uint64_t seed)
    : data_(data),
      size_factors_(size_factors),
      hp_(hp),
      scales_(scales),
      prior_only_(prior_only),
      rng_(seed),
      n_(data.counts.n()),
      p_(data.counts.p()),
      n_cov_(data.covariates.r()),
      k_(static_cast<std::size_t>(data.groups.k())),
      ref_(data.groups.reference_index()) {
    hp_.validate();
    scales_.validate();
    if (size_factors_.size() != n_) throw Error(ErrorCode::DimensionMismatch, "size factors do not match samples");

    log_s_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) log_s_[i] = std::log(size_factors_[i]);
    group_rows_.assign(k_, {});
    for (std::size_t i = 0; i < n_; ++i) group_rows_[data_.groups.index(i)].push_back(i);
    all_rows_.resize(n_);
    std::iota(all_rows_.begin(), all_rows_.end(), std::size_t{0});

    y_sum_.assign(p_, 0.0);
    y_group_sum_ = Matrix<double>(k_, p_);
    yx_sum_ = Matrix<double>(n_cov_, p_);
    for (std::size_t j = 0; j < p_; ++j) {
        for (std::size_t i = 0; i < n_; ++i) {
            const double y = static_cast<double>(data_.counts(i, j));
            y_sum_[j] += y;
            y_group_sum_(data_.groups.index(i), j) += y;
            for (std::size_t r = 0; r < n_cov_; ++r) yx_sum_(r, j) += y * data_.covariates(i, r);
        }
    }

    eta_ = Matrix<double>(n_, p_);
    lambda_ = Matrix<double>(n_, p_);
    log_lp_ = Matrix<double>(n_, p_);
    scratch_lambda_.assign(n_, 0.0);
    scratch_log_lp_.assign(n_, 0.0);
    order_.resize(p_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});

    init_state();
}

void Sampler::init_state() {
    state_.r = Matrix<std::uint8_t>(n_, p_, 0);
    state_.taxa.assign(p_, TaxonParams{});
    for (std::size_t j = 0; j < p_; ++j) {
        auto& t = state_.taxa[j];
        t.mu_k.assign(k_, 0.0);
        t.beta.assign(n_cov_, 0.0);
        t.delta.assign(n_cov_, 0);
        t.phi = 10.0;
        t.gamma = rng_.bernoulli(0.5);
        if (t.gamma) {
            for (std::size_t k = 0; k < k_; ++k) {
                if (k != ref_) t.mu_k[k] = rng_.normal();
            }
        }
        for (std::size_t r = 0; r < n_cov_; ++r) {
            t.delta[r] = rng_.bernoulli(0.5) ? 1 : 0;
            if (t.delta[r]) t.beta[r] = rng_.normal();
        }
        double mean = 0.0;
        for (std::size_t i = 0; i < n_; ++i) mean += static_cast<double>(data_.counts(i, j)) / size_factors_[i];
        t.mu0 = std::log(mean / static_cast<double>(n_) + 0.01);
    }
    for (std::size_t j = 0; j < p_; ++j) {
        for (std::size_t i = 0; i < n_; ++i) {
            if (data_.counts(i, j) == 0) state_.r(i, j) = rng_.bernoulli(0.5) ? 1 : 0;
        }
    }
    gamma_count_ = 0;
    for (std::size_t j = 0; j < p_; ++j) {
        gamma_count_ += state_.taxa[j].gamma ? 1 : 0;
        refresh_taxon_cache(j);
    }
}

void Sampler::set_state(ModelState state) {
    if (state.r.rows() != n_ || state.r.cols() != p_ || state.taxa.size() != p_) {
        throw Error(ErrorCode::DimensionMismatch, "state does not match the dataset");
    }
    state_ = std::move(state);
    check_invariants();
    gamma_count_ = 0;
    for (std::size_t j = 0; j < p_; ++j) {
        gamma_count_ += state_.taxa[j].gamma ? 1 : 0;
        refresh_taxon_cache(j);
    }
}

void Sampler::check_invariants() const {
    for (std::size_t j = 0; j < p_; ++j) {
        const auto& t = state_.taxa[j];
        if (t.mu_k.size() != k_ || t.beta.size() != n_cov_) {
            throw Error(ErrorCode::InvariantViolation, "parameter sizes for feature " + std::to_string(j));
        }
        check_taxon_params(t, ref_);
        for (std::size_t i = 0; i < n_; ++i) {
            if (state_.r(i, j) && data_.counts(i, j) != 0) {
                throw Error(ErrorCode::InvariantViolation, "r = 1 on a nonzero count");
            }
        }
    }
}

void Sampler::refresh_taxon_cache(std::size_t j) {
    const auto& t = state_.taxa[j];
    for (std::size_t i = 0; i < n_; ++i) {
        double eta = log_s_[i] + t.mu0;
        if (t.gamma) eta += t.mu_k[data_.groups.index(i)];
        for (std::size_t r = 0; r < n_cov_; ++r) eta += data_.covariates(i, r) * t.beta[r];
        eta_(i, j) = eta;
        lambda_(i, j) = std::exp(eta);
        log_lp_(i, j) = std::log(lambda_(i, j) + t.phi);
    }
}

double Sampler::cached_log_lik(std::size_t j) const {
    const double phi = state_.taxa[j].phi;
    const double log_phi = std::log(phi);
    const double lg_phi = std::lgamma(phi);
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        if (state_.r(i, j)) continue;
        const auto y = data_.counts(i, j);
        const double lp = std::log(lambda_(i, j) + phi);
        total += phi * (log_phi - lp);
        if (y > 0) {
            const double yd = static_cast<double>(y);
            total += std::lgamma(yd + phi) - std::lgamma(yd + 1.0) - lg_phi + yd * (eta_(i, j) - lp);
        }
    }
    return total;
}

bool Sampler::accept(double log_ratio) {
    const double u = rng_.uniform();
    return std::log(u) < log_ratio;
}

double Sampler::delta_loglik_shift(std::size_t j, std::span<const std::size_t> rows, double shift) {
    if (prior_only_) return 0.0;
    const double factor = std::exp(shift);
    const double phi = state_.taxa[j].phi;
    const auto y_col = data_.counts.counts().col(j);
    const auto r_col = state_.r.col(j);
    const auto lam_col = lambda_.col(j);
    const auto lp_col = log_lp_.col(j);
    double y_total = 0.0;
    double change = 0.0;
    for (std::size_t i : rows) {
        const double y = static_cast<double>(y_col[i]);
        y_total += y;
        if (r_col[i]) continue;
        const double lp = std::log(lam_col[i] * factor + phi);
        scratch_log_lp_[i] = lp;
        change += (phi + y) * (lp - lp_col[i]);
    }
    return shift * y_total - change;
}

void Sampler::commit_rows(std::size_t j, std::span<const std::size_t> rows, double shift) {
    const double factor = std::exp(shift);
    const double phi = state_.taxa[j].phi;
    const auto r_col = state_.r.col(j);
    auto eta_col = eta_.col(j);
    auto lam_col = lambda_.col(j);
    auto lp_col = log_lp_.col(j);
    for (std::size_t i : rows) {
        eta_col[i] += shift;
        lam_col[i] *= factor;
        if (!r_col[i]) lp_col[i] = prior_only_ ? std::log(lam_col[i] + phi) : scratch_log_lp_[i];
    }
}

double Sampler::delta_loglik_covariate(std::size_t j, std::size_t r, double change) {
    const auto x_col = data_.covariates.values().col(r);
    const auto lam_col = lambda_.col(j);
    for (std::size_t i = 0; i < n_; ++i) scratch_lambda_[i] = lam_col[i] * std::exp(x_col[i] * change);
    if (prior_only_) return 0.0;
    const double phi = state_.taxa[j].phi;
    const auto y_col = data_.counts.counts().col(j);
    const auto r_col = state_.r.col(j);
    const auto lp_col = log_lp_.col(j);
    double delta = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        if (r_col[i]) continue;
        const double lp = std::log(scratch_lambda_[i] + phi);
        scratch_log_lp_[i] = lp;
        delta += (phi + static_cast<double>(y_col[i])) * (lp - lp_col[i]);
    }
    return change * yx_sum_(r, j) - delta;
}

void Sampler::commit_covariate(std::size_t j, std::size_t r, double change) {
    const auto x_col = data_.covariates.values().col(r);
    const double phi = state_.taxa[j].phi;
    const auto r_col = state_.r.col(j);
    auto eta_col = eta_.col(j);
    auto lam_col = lambda_.col(j);
    auto lp_col = log_lp_.col(j);
    for (std::size_t i = 0; i < n_; ++i) {
        eta_col[i] += x_col[i] * change;
        lam_col[i] = scratch_lambda_[i];
        if (!r_col[i]) lp_col[i] = prior_only_ ? std::log(lam_col[i] + phi) : scratch_log_lp_[i];
    }
}

void Sampler::shuffle_order() { std::shuffle(order_.begin(), order_.end(), rng_.engine()); }

void Sampler::update_r() {
    const double w_one = hp_.a_pi / (hp_.a_pi + hp_.b_pi);
    const double w_zero_prior = hp_.b_pi / (hp_.a_pi + hp_.b_pi);
    for (std::size_t j = 0; j < p_; ++j) {
        const double phi = state_.taxa[j].phi;
        const double log_phi = std::log(phi);
        const auto y_col = data_.counts.counts().col(j);
        auto r_col = state_.r.col(j);
        const auto lam_col = lambda_.col(j);
        auto lp_col = log_lp_.col(j);
        for (std::size_t i = 0; i < n_; ++i) {
            if (y_col[i] != 0) continue;
            const double lp = std::log(lam_col[i] + phi);
            lp_col[i] = lp;
            double w_zero = w_zero_prior;
            if (!prior_only_) w_zero *= std::exp(phi * (log_phi - lp));
            r_col[i] = rng_.bernoulli(w_one / (w_one + w_zero)) ? 1 : 0;
        }
    }
}

void Sampler::update_mu0() {
    const double tau = scales_.tau_mu0;
    for (std::size_t j : order_) {
        auto& t = state_.taxa[j];
        const double proposal = t.mu0 + tau * rng_.normal();
        const double shift = proposal - t.mu0;
        double log_ratio = delta_loglik_shift(j, all_rows_, shift);
        log_ratio += log_normal_density(proposal, 0.0, hp_.sigma0_sq) - log_normal_density(t.mu0, 0.0, hp_.sigma0_sq);
        ++acceptance_.mu0.proposed;
        if (accept(log_ratio)) {
            commit_rows(j, all_rows_, shift);
            t.mu0 = proposal;
            ++acceptance_.mu0.accepted;
        }
    }
}

void Sampler::update_gamma_mu() {
    if (k_ < 2) return;
    const double p = static_cast<double>(p_);
    const double tau = scales_.tau_mu;
    const double tau_sq = tau * tau;
    std::vector<double> proposal(k_, 0.0);

    for (std::size_t j : order_) {
        auto& t = state_.taxa[j];
        const double s = static_cast<double>(gamma_count_);
        double log_ratio = 0.0;
        if (!t.gamma) {
            log_ratio += std::log((hp_.a_omega + s) / (hp_.b_omega + p - s - 1.0));
            for (std::size_t k = 0; k < k_; ++k) {
                if (k == ref_) continue;
                proposal[k] = tau * rng_.normal();
                log_ratio += log_t_marginal_density(proposal[k], hp_.a_t, hp_.b_t) -
                             log_normal_density(proposal[k], 0.0, tau_sq);
            }
            // Group row sets are disjoint, so the scratch buffers do not collide.
            for (std::size_t k = 0; k < k_; ++k) {
                if (k != ref_) log_ratio += delta_loglik_shift(j, group_rows_[k], proposal[k]);
            }
            ++acceptance_.gamma_add.proposed;
            if (accept(log_ratio)) {
                for (std::size_t k = 0; k < k_; ++k) {
                    if (k == ref_) continue;
                    commit_rows(j, group_rows_[k], proposal[k]);
                    t.mu_k[k] = proposal[k];
                }
                t.gamma = true;
                ++gamma_count_;
                ++acceptance_.gamma_add.accepted;
            }
        } else {
            log_ratio += std::log((hp_.b_omega + p - s) / (hp_.a_omega + s - 1.0));
            for (std::size_t k = 0; k < k_; ++k) {
                if (k == ref_) continue;
                log_ratio += log_normal_density(t.mu_k[k], 0.0, tau_sq) -
                             log_t_marginal_density(t.mu_k[k], hp_.a_t, hp_.b_t);
                log_ratio += delta_loglik_shift(j, group_rows_[k], -t.mu_k[k]);
            }
            ++acceptance_.gamma_delete.proposed;
            if (accept(log_ratio)) {
                for (std::size_t k = 0; k < k_; ++k) {
                    if (k == ref_) continue;
                    commit_rows(j, group_rows_[k], -t.mu_k[k]);
                    t.mu_k[k] = 0.0;
                }
                t.gamma = false;
                --gamma_count_;
                ++acceptance_.gamma_delete.accepted;
            }
        }
    }

    const double within_sd = 0.5 * tau;
    for (std::size_t j : order_) {
        auto& t = state_.taxa[j];
        if (!t.gamma) continue;
        for (std::size_t k = 0; k < k_; ++k) {
            if (k == ref_) continue;
            const double current = t.mu_k[k];
            const double prop = current + within_sd * rng_.normal();
            double log_ratio = delta_loglik_shift(j, group_rows_[k], prop - current);
            log_ratio += log_t_marginal_density(prop, hp_.a_t, hp_.b_t) -
                         log_t_marginal_density(current, hp_.a_t, hp_.b_t);
            ++acceptance_.mu_k.proposed;
            if (accept(log_ratio)) {
                commit_rows(j, group_rows_[k], prop - current);
                t.mu_k[k] = prop;
                ++acceptance_.mu_k.accepted;
            }
        }
    }
}

void Sampler::update_delta_beta() {
    if (n_cov_ == 0) return;
    const double big_r = static_cast<double>(n_cov_);
    const double tau = scales_.tau_beta;
    const double tau_sq = tau * tau;

    for (std::size_t j : order_) {
        auto& t = state_.taxa[j];
        const auto r = static_cast<std::size_t>(rng_.uniform_int(0, n_cov_ - 1));
        double s = 0.0;
        for (auto d : t.delta) s += d;
        if (!t.delta[r]) {
            const double prop = tau * rng_.normal();
            double log_ratio = std::log((hp_.a_p + s) / (hp_.b_p + big_r - s - 1.0));
            log_ratio += log_t_marginal_density(prop, hp_.a_t, hp_.b_t) - log_normal_density(prop, 0.0, tau_sq);
            log_ratio += delta_loglik_covariate(j, r, prop);
            ++acceptance_.delta_add.proposed;
            if (accept(log_ratio)) {
                commit_covariate(j, r, prop);
                t.beta[r] = prop;
                t.delta[r] = 1;
                ++acceptance_.delta_add.accepted;
            }
        } else {
            const double current = t.beta[r];
            double log_ratio = std::log((hp_.b_p + big_r - s) / (hp_.a_p + s - 1.0));
            log_ratio += log_normal_density(current, 0.0, tau_sq) - log_t_marginal_density(current, hp_.a_t, hp_.b_t);
            log_ratio += delta_loglik_covariate(j, r, -current);
            ++acceptance_.delta_delete.proposed;
            if (accept(log_ratio)) {
                commit_covariate(j, r, -current);
                t.beta[r] = 0.0;
                t.delta[r] = 0;
                ++acceptance_.delta_delete.accepted;
            }
        }
    }

    const double within_sd = 0.5 * tau;
    for (std::size_t j : order_) {
        auto& t = state_.taxa[j];
        for (std::size_t r = 0; r < n_cov_; ++r) {
            if (!t.delta[r]) continue;
            const double current = t.beta[r];
            const double prop = current + within_sd * rng_.normal();
            double log_ratio = delta_loglik_covariate(j, r, prop - current);
            log_ratio += log_t_marginal_density(prop, hp_.a_t, hp_.b_t) -
                         log_t_marginal_density(current, hp_.a_t, hp_.b_t);
            ++acceptance_.beta.proposed;
            if (accept(log_ratio)) {
                commit_covariate(j, r, prop - current);
                t.beta[r] = prop;
                ++acceptance_.beta.accepted;
            }
        }
    }
}

void Sampler::update_phi() {
    const double tau = scales_.tau_phi;
    for (std::size_t j : order_) {
        auto& t = state_.taxa[j];
        const double phi = t.phi;
        double prop = 0.0;
        do {
            prop = phi + tau * rng_.normal();
        } while (!(prop > 0.0));

        double log_ratio = log_gamma_density(prop, hp_.a_phi, hp_.b_phi) - log_gamma_density(phi, hp_.a_phi, hp_.b_phi);
        // Truncated-normal proposal: J(phi; prop) / J(prop; phi).
        log_ratio += log_std_normal_cdf(phi / tau) - log_std_normal_cdf(prop / tau);

        if (!prior_only_) {
            const auto y_col = data_.counts.counts().col(j);
            const auto r_col = state_.r.col(j);
            const auto lam_col = lambda_.col(j);
            const auto lp_col = log_lp_.col(j);
            const double lg_new = std::lgamma(prop), lg_old = std::lgamma(phi);
            const double plogp_new = prop * std::log(prop), plogp_old = phi * std::log(phi);
            double ll = 0.0;
            for (std::size_t i = 0; i < n_; ++i) {
                if (r_col[i]) continue;
                const double y = static_cast<double>(y_col[i]);
                const double lp = std::log(lam_col[i] + prop);
                scratch_log_lp_[i] = lp;
                ll += plogp_new - plogp_old - (prop + y) * lp + (phi + y) * lp_col[i];
                if (y_col[i] > 0) ll += std::lgamma(y + prop) - lg_new - std::lgamma(y + phi) + lg_old;
            }
            log_ratio += ll;
        }
        ++acceptance_.phi.proposed;
        if (accept(log_ratio)) {
            t.phi = prop;
            const auto r_col = state_.r.col(j);
            const auto lam_col = lambda_.col(j);
            auto lp_col = log_lp_.col(j);
            for (std::size_t i = 0; i < n_; ++i) {
                if (!r_col[i]) lp_col[i] = prior_only_ ? std::log(lam_col[i] + prop) : scratch_log_lp_[i];
            }
            ++acceptance_.phi.accepted;
        }
    }
}

void Sampler::sweep() {
    ++iteration_;
    if (iteration_ % kCacheRefreshInterval == 0) {
        for (std::size_t j = 0; j < p_; ++j) refresh_taxon_cache(j);
    }
    for (std::size_t j = 0; j < p_; ++j) {
        for (double v : lambda_.col(j)) {
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::NumericalFailure, "non-finite mean at iteration " + std::to_string(iteration_) +
                                                             " for feature " + data_.counts.feature_ids()[j]);
            }
        }
    }
    shuffle_order();
    update_r();
    update_mu0();
    update_gamma_mu();
    update_delta_beta();
    update_phi();
}

double Sampler::log_posterior() const {
    double total = 0.0;
    const double log_one = std::log(hp_.a_pi / (hp_.a_pi + hp_.b_pi));
    const double log_zero = std::log(hp_.b_pi / (hp_.a_pi + hp_.b_pi));
    for (std::size_t j = 0; j < p_; ++j) {
        if (!prior_only_) total += cached_log_lik(j);
        total += log_prior_terms(state_.taxa[j], hp_, ref_).total();
        double s = 0.0;
        for (auto d : state_.taxa[j].delta) s += d;
        total += log_beta_function(hp_.a_p + s, hp_.b_p + static_cast<double>(n_cov_) - s) -
                 log_beta_function(hp_.a_p, hp_.b_p);
        for (std::size_t i = 0; i < n_; ++i) {
            if (data_.counts(i, j) == 0) total += state_.r(i, j) ? log_one : log_zero;
        }
    }
    const double g = static_cast<double>(gamma_count_);
    total += log_beta_function(hp_.a_omega + g, hp_.b_omega + static_cast<double>(p_) - g) -
             log_beta_function(hp_.a_omega, hp_.b_omega);
    return total;
}

ModelState init_state(const Dataset& data, const SizeFactors& size_factors, const Hyperparameters& hp,
                      std::uint64_t seed) {
    Sampler sampler(data, size_factors, hp, ProposalScales{}, false, seed);
    return sampler.state();
}

namespace {

void adapt_scales(ProposalScales& scales, const AcceptanceStats& now, const AcceptanceStats& before, int batch) {
    const double step = std::min(0.5, 1.0 / std::sqrt(static_cast<double>(batch)));
    auto tune = [&](double& tau, const MoveCounter& a, const MoveCounter& b) {
        const auto proposed = a.proposed - b.proposed;
        if (proposed == 0) return;
        const double rate = static_cast<double>(a.accepted - b.accepted) / static_cast<double>(proposed);
        tau *= std::exp(step * (rate - kAdaptTarget));
    };
    tune(scales.tau_mu0, now.mu0, before.mu0);
    tune(scales.tau_mu, now.mu_k, before.mu_k);
    tune(scales.tau_beta, now.beta, before.beta);
    tune(scales.tau_phi, now.phi, before.phi);
}

void record_draw(ChainTrace& trace, const ModelState& state) {
    const std::size_t p = trace.p;
    for (std::size_t j = 0; j < p; ++j) {
        const auto& t = state.taxa[j];
        trace.gamma_sums[j] += t.gamma ? 1 : 0;
        trace.mu0_sum[j] += t.mu0;
        trace.mu0_sumsq[j] += t.mu0 * t.mu0;
        trace.phi_sum[j] += t.phi;
        trace.phi_sumsq[j] += t.phi * t.phi;
        for (std::size_t k = 0; k < trace.k; ++k) {
            trace.mu_k_sum(k, j) += t.mu_k[k];
            trace.mu_k_sumsq(k, j) += t.mu_k[k] * t.mu_k[k];
        }
        for (std::size_t r = 0; r < trace.n_cov; ++r) {
            trace.delta_sums(r, j) += t.delta[r];
            trace.beta_sum(r, j) += t.beta[r];
            trace.beta_sumsq(r, j) += t.beta[r] * t.beta[r];
        }
        for (std::size_t i = 0; i < trace.n; ++i) trace.r_sums(i, j) += state.r(i, j);
    }
    const std::size_t base = trace.mu_k_draws.size();
    trace.mu_k_draws.resize(base + trace.k * p);
    for (std::size_t k = 0; k < trace.k; ++k) {
        for (std::size_t j = 0; j < p; ++j) trace.mu_k_draws[base + k * p + j] = state.taxa[j].mu_k[k];
    }
    ++trace.n_draws;
}

}  // namespace

ChainTrace run_chain(const Dataset& data, const SizeFactors& size_factors, const Hyperparameters& hp,
                     const ProposalScales& scales, const ChainConfig& config) {
    config.validate();
    Sampler sampler(data, size_factors, hp, scales, config.prior_only, config.seed);

    ChainTrace trace;
    trace.n = data.counts.n();
    trace.p = data.counts.p();
    trace.n_cov = data.covariates.r();
    trace.k = static_cast<std::size_t>(data.groups.k());
    trace.reference = data.groups.reference_index();
    trace.seed = config.seed;
    trace.gamma_sums.assign(trace.p, 0);
    trace.delta_sums = Matrix<std::uint64_t>(trace.n_cov, trace.p);
    trace.r_sums = Matrix<std::uint64_t>(trace.n, trace.p);
    trace.mu0_sum.assign(trace.p, 0.0);
    trace.mu0_sumsq.assign(trace.p, 0.0);
    trace.phi_sum.assign(trace.p, 0.0);
    trace.phi_sumsq.assign(trace.p, 0.0);
    trace.mu_k_sum = Matrix<double>(trace.k, trace.p);
    trace.mu_k_sumsq = Matrix<double>(trace.k, trace.p);
    trace.beta_sum = Matrix<double>(trace.n_cov, trace.p);
    trace.beta_sumsq = Matrix<double>(trace.n_cov, trace.p);
    trace.mu_k_draws.reserve(static_cast<std::size_t>(config.recorded_draws()) * trace.k * trace.p);

    const int burn_in = config.effective_burn_in();
    AcceptanceStats batch_start;
    ProposalScales current = scales;
    for (int t = 1; t <= config.n_iter; ++t) {
        sampler.sweep();
        if (config.adapt && t <= burn_in && t % kAdaptBatch == 0) {
            adapt_scales(current, sampler.acceptance(), batch_start, t / kAdaptBatch);
            sampler.set_scales(current);
            batch_start = sampler.acceptance();
        }
        if (t > burn_in && (t - burn_in - 1) % config.thin == 0) record_draw(trace, sampler.state());
        if (config.record_diagnostics) {
            DiagnosticRow row;
            row.iteration = t;
            row.log_posterior = sampler.log_posterior();
            for (const auto& taxon : sampler.state().taxa) {
                row.gamma_count += taxon.gamma ? 1 : 0;
                for (auto d : taxon.delta) row.delta_count += d;
            }
            row.acceptance = sampler.acceptance();
            trace.diagnostics.push_back(row);
        }
    }
    trace.acceptance = sampler.acceptance();
    trace.final_scales = sampler.scales();
    trace.final_state = sampler.state();
    return trace;
}

std::vector<ChainTrace> run_chains_parallel(const Dataset& data, const SizeFactors& size_factors,
                                            const Hyperparameters& hp, const ProposalScales& scales,
                                            const std::vector<ChainConfig>& configs, unsigned threads) {
    std::set<std::uint64_t> seeds;
    for (const auto& c : configs) {
        if (!seeds.insert(c.seed).second) throw Error(ErrorCode::InvalidArgument, "chain seeds must be distinct");
    }
    std::vector<ChainTrace> traces(configs.size());
    parallel_for(configs.size(), threads,
                 [&](std::size_t c) { traces[c] = run_chain(data, size_factors, hp, scales, configs[c]); });
    return traces;
}

}  // namespace zinb
