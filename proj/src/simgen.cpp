#include "zinb/simgen.hpp"

#include "zinb/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <numeric>

namespace zinb {

namespace {

std::string padded(const char* prefix, std::size_t index, std::size_t count) {
    int width = 1;
    for (std::size_t c = count; c >= 10; c /= 10) ++width;
    auto digits = std::to_string(index + 1);
    return prefix + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
}

std::vector<std::string> ids(const char* prefix, std::size_t count) {
    std::vector<std::string> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(padded(prefix, i, count));
    return out;
}

/// First k entries of a uniformly random permutation of 0..m-1.
std::vector<std::size_t> sample_without_replacement(std::size_t m, std::size_t k, Rng& rng) {
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t t = 0; t < k; ++t) {
        const auto u = static_cast<std::size_t>(rng.uniform_int(t, m - 1));
        std::swap(idx[t], idx[u]);
    }
    idx.resize(k);
    return idx;
}

double random_sign(Rng& rng) { return rng.bernoulli(0.5) ? 1.0 : -1.0; }

/// Picks n_disc discriminators and m_active covariates per taxon.
void draw_effects(SimTruth& truth, std::size_t p, std::size_t n_cov, std::size_t n_disc, std::size_t m_active,
                  double mu2_abs, Rng& rng) {
    truth.gamma_true.assign(p, 0);
    truth.mu2_true.assign(p, 0.0);
    for (std::size_t j : sample_without_replacement(p, n_disc, rng)) {
        truth.gamma_true[j] = 1;
    }
    for (std::size_t j = 0; j < p; ++j) {
        if (truth.gamma_true[j]) truth.mu2_true[j] = random_sign(rng) * mu2_abs;
    }
    truth.delta_true = Matrix<std::uint8_t>(n_cov, p);
    truth.beta_true = Matrix<double>(n_cov, p);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t r : sample_without_replacement(n_cov, m_active, rng)) {
            truth.delta_true(r, j) = 1;
            const double sign = random_sign(rng);
            truth.beta_true(r, j) = sign * rng.uniform(0.5, 1.0);
        }
    }
}

GroupAssignment half_split(std::size_t n) {
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = i < n / 2 ? 1 : 2;
    return GroupAssignment(std::move(labels), 2, 1);
}

CovariateMatrix draw_covariates(std::size_t n, std::size_t n_cov, const std::optional<CovariatePool>& pool,
                                Rng& rng) {
    if (!pool) {
        Matrix<double> x(n, n_cov);
        for (std::size_t r = 0; r < n_cov; ++r) {
            for (std::size_t i = 0; i < n; ++i) x(i, r) = rng.normal();
        }
        return standardize_covariates(CovariateMatrix(std::move(x), ids("X", n_cov)));
    }
    const auto& pc = pool->covariates;
    const auto& pg = pool->groups;
    if (pc.n() != pg.n()) throw Error(ErrorCode::DimensionMismatch, "covariate pool and its groups differ in rows");
    if (pc.r() != n_cov) throw Error(ErrorCode::DimensionMismatch, "covariate pool has a different covariate count");
    std::vector<std::size_t> rows1, rows2;
    for (std::size_t i = 0; i < pg.n(); ++i) {
        if (pg.labels()[i] == 1) rows1.push_back(i);
        else if (pg.labels()[i] == 2) rows2.push_back(i);
    }
    const std::size_t half = n / 2;
    if (rows1.size() < half || rows2.size() < half) {
        throw Error(ErrorCode::PoolTooSmall, "need " + std::to_string(half) + " pool rows per group, have " +
                                                 std::to_string(rows1.size()) + " and " +
                                                 std::to_string(rows2.size()));
    }
    std::vector<std::size_t> chosen;
    for (std::size_t t : sample_without_replacement(rows1.size(), half, rng)) chosen.push_back(rows1[t]);
    for (std::size_t t : sample_without_replacement(rows2.size(), half, rng)) chosen.push_back(rows2[t]);
    Matrix<double> x(n, n_cov);
    for (std::size_t r = 0; r < n_cov; ++r) {
        for (std::size_t i = 0; i < n; ++i) x(i, r) = pc(chosen[i], r);
    }
    return standardize_covariates(CovariateMatrix(std::move(x), pc.covariate_ids()));
}

double linear_predictor(const SimTruth& truth, const CovariateMatrix& x, std::size_t i, std::size_t j,
                        bool second_group) {
    double eta = truth.mu0_true[j] + (second_group ? truth.mu2_true[j] : 0.0);
    for (std::size_t r = 0; r < x.r(); ++r) eta += x(i, r) * truth.beta_true(r, j);
    return eta;
}

}  // namespace

void SimConfig::validate() const {
    if (n < 4 || n % 2 != 0) throw Error(ErrorCode::InvalidArgument, "n must be even and >= 4");
    if (p < 1) throw Error(ErrorCode::InvalidArgument, "p must be >= 1");
    if (n_disc < 0 || n_disc > p) throw Error(ErrorCode::InvalidArgument, "n_disc must lie in 0..p");
    if (n_cov < 1) throw Error(ErrorCode::InvalidArgument, "R must be >= 1");
    if (m_active < 0 || m_active > n_cov) throw Error(ErrorCode::InvalidArgument, "m_active must lie in 0..R");
    if (!(pi0 >= 0.0 && pi0 < 1.0)) throw Error(ErrorCode::InvalidArgument, "pi0 must lie in [0, 1)");
    if (!(sigma_e >= 0.0) || !std::isfinite(sigma_e)) throw Error(ErrorCode::InvalidArgument, "sigma_e must be >= 0");
    if (total_min < 1 || total_max < total_min) throw Error(ErrorCode::InvalidArgument, "bad total-count range");
}

void ZinbSimConfig::validate() const {
    if (n < 4 || n % 2 != 0) throw Error(ErrorCode::InvalidArgument, "n must be even and >= 4");
    if (p < 1) throw Error(ErrorCode::InvalidArgument, "p must be >= 1");
    if (n_disc < 0 || n_disc > p) throw Error(ErrorCode::InvalidArgument, "n_disc must lie in 0..p");
    if (n_cov < 1) throw Error(ErrorCode::InvalidArgument, "R must be >= 1");
    if (m_active < 0 || m_active > n_cov) throw Error(ErrorCode::InvalidArgument, "m_active must lie in 0..R");
    if (!(pi >= 0.0 && pi < 1.0)) throw Error(ErrorCode::InvalidArgument, "pi must lie in [0, 1)");
    if (!(phi > 0.0)) throw Error(ErrorCode::InvalidArgument, "phi must be > 0");
    if (!(mu0_hi >= mu0_lo)) throw Error(ErrorCode::InvalidArgument, "bad mu0 range");
    if (!(size_factor_sd >= 0.0)) throw Error(ErrorCode::InvalidArgument, "size_factor_sd must be >= 0");
}

std::vector<double> dirichlet_draw(std::span<const double> a, Rng& rng) {
    if (a.empty()) throw Error(ErrorCode::DomainError, "empty Dirichlet parameter");
    std::vector<double> out(a.size());
    double total = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (!(a[j] > 0.0) || !std::isfinite(a[j])) throw Error(ErrorCode::DomainError, "Dirichlet parameter must be positive");
        out[j] = rng.gamma(a[j]);
        total += out[j];
    }
    if (!(total > 0.0) || !std::isfinite(total)) throw Error(ErrorCode::NumericalFailure, "degenerate Dirichlet draw");
    for (auto& v : out) v /= total;
    return out;
}

std::vector<std::int64_t> multinomial_draw(std::int64_t total, std::span<const double> prob, Rng& rng) {
    std::vector<std::int64_t> out(prob.size(), 0);
    std::vector<double> tail(prob.size() + 1, 0.0);
    for (std::size_t j = prob.size(); j-- > 0;) tail[j] = tail[j + 1] + prob[j];
    std::int64_t left = total;
    for (std::size_t j = 0; j + 1 < prob.size() && left > 0; ++j) {
        const double q = tail[j] > 0.0 ? std::clamp(prob[j] / tail[j], 0.0, 1.0) : 1.0;
        out[j] = rng.binomial(left, q);
        left -= out[j];
    }
    if (!prob.empty()) out.back() += left;
    return out;
}

SimData generate(const SimConfig& config, const std::optional<CovariatePool>& pool) {
    config.validate();
    Rng rng(config.seed);
    const auto n = static_cast<std::size_t>(config.n);
    const auto p = static_cast<std::size_t>(config.p);
    const auto n_cov = static_cast<std::size_t>(config.n_cov);

    auto covariates = draw_covariates(n, n_cov, pool, rng);
    auto groups = half_split(n);

    SimTruth truth;
    truth.mu0_true.resize(p);
    for (auto& v : truth.mu0_true) v = rng.uniform(8.0, 10.0);
    draw_effects(truth, p, n_cov, static_cast<std::size_t>(config.n_disc), static_cast<std::size_t>(config.m_active),
                 2.0, rng);

    Matrix<std::int64_t> y(n, p);
    std::vector<double> a(p);
    for (std::size_t i = 0; i < n; ++i) {
        const bool second = groups.index(i) == 1;
        for (std::size_t j = 0; j < p; ++j) {
            a[j] = std::exp(rng.normal(linear_predictor(truth, covariates, i, j, second), config.sigma_e));
        }
        const auto prob = dirichlet_draw(a, rng);
        const auto total = static_cast<std::int64_t>(
            rng.uniform_int(static_cast<std::uint64_t>(config.total_min), static_cast<std::uint64_t>(config.total_max)));
        const auto row = multinomial_draw(total, prob, rng);
        for (std::size_t j = 0; j < p; ++j) y(i, j) = row[j];
    }

    truth.structural_zero_mask = Matrix<std::uint8_t>(n, p);
    const auto cells = n * p;
    const auto n_zero = static_cast<std::size_t>(std::ceil(config.pi0 * static_cast<double>(cells) - 1e-9));
    for (std::size_t c : sample_without_replacement(cells, n_zero, rng)) {
        truth.structural_zero_mask.data()[c] = 1;
        y.data()[c] = 0;
    }

    return SimData{CountMatrix(std::move(y), ids("S", n), ids("F", p)), std::move(covariates), std::move(groups),
                   std::move(truth), {}};
}

SimData generate_zinb(const ZinbSimConfig& config) {
    config.validate();
    Rng rng(config.seed);
    const auto n = static_cast<std::size_t>(config.n);
    const auto p = static_cast<std::size_t>(config.p);
    const auto n_cov = static_cast<std::size_t>(config.n_cov);

    auto covariates = draw_covariates(n, n_cov, std::nullopt, rng);
    auto groups = half_split(n);

    std::vector<double> raw(n);
    for (auto& v : raw) v = std::exp(rng.normal(0.0, config.size_factor_sd));
    auto s = renormalize_log_sum_zero(raw);

    SimTruth truth;
    truth.mu0_true.resize(p);
    for (auto& v : truth.mu0_true) v = rng.uniform(config.mu0_lo, config.mu0_hi);
    draw_effects(truth, p, n_cov, static_cast<std::size_t>(config.n_disc), static_cast<std::size_t>(config.m_active),
                 config.mu2_abs, rng);

    Matrix<std::int64_t> y(n, p);
    truth.structural_zero_mask = Matrix<std::uint8_t>(n, p);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const double lambda = s[i] * std::exp(linear_predictor(truth, covariates, i, j, groups.index(i) == 1));
            const bool extra_zero = rng.bernoulli(config.pi);
            const double rate = std::gamma_distribution<double>(config.phi, lambda / config.phi)(rng.engine());
            const std::int64_t count =
                rate > 0.0 ? std::poisson_distribution<std::int64_t>(rate)(rng.engine()) : 0;
            truth.structural_zero_mask(i, j) = extra_zero ? 1 : 0;
            y(i, j) = extra_zero ? 0 : count;
        }
    }

    return SimData{CountMatrix(std::move(y), ids("S", n), ids("F", p)), std::move(covariates), std::move(groups),
                   std::move(truth), std::move(s)};
}

}  // namespace zinb
