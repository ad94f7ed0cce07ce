#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "generators.hpp"
#include "oracles.hpp"
#include "zinb/error.hpp"
#include "zinb/inference.hpp"

#include <cmath>

using namespace zinb;

namespace {

/// Trace with given per-feature gamma counts over `draws` draws; no covariates are active.
ChainTrace fake_trace(const std::vector<std::uint64_t>& gamma_sums, std::size_t draws, std::size_t n_cov = 1) {
    ChainTrace t;
    t.n = 2;
    t.p = gamma_sums.size();
    t.n_cov = n_cov;
    t.k = 2;
    t.n_draws = draws;
    t.gamma_sums = gamma_sums;
    t.delta_sums = Matrix<std::uint64_t>(n_cov, t.p, 0);
    t.r_sums = Matrix<std::uint64_t>(t.n, t.p, 0);
    t.mu0_sum.assign(t.p, 0.0);
    t.mu0_sumsq.assign(t.p, 0.0);
    t.mu_k_sum = Matrix<double>(2, t.p, 0.0);
    t.mu_k_sumsq = Matrix<double>(2, t.p, 0.0);
    t.beta_sum = Matrix<double>(n_cov, t.p, 0.0);
    t.beta_sumsq = Matrix<double>(n_cov, t.p, 0.0);
    t.phi_sum.assign(t.p, static_cast<double>(draws));
    t.phi_sumsq.assign(t.p, static_cast<double>(draws));
    t.mu_k_draws.assign(draws * 2 * t.p, 0.0);
    return t;
}

/// Trace filled from explicit draws of (mu0, mu_2, phi) for one feature.
ChainTrace trace_from_draws(const std::vector<double>& mu0, const std::vector<double>& mu2,
                            const std::vector<double>& phi) {
    const std::size_t T = mu0.size();
    auto t = fake_trace({0}, T);
    t.phi_sum[0] = t.phi_sumsq[0] = 0.0;
    for (std::size_t d = 0; d < T; ++d) {
        t.gamma_sums[0] += mu2[d] != 0.0 ? 1 : 0;
        t.mu0_sum[0] += mu0[d];
        t.mu0_sumsq[0] += mu0[d] * mu0[d];
        t.mu_k_sum(1, 0) += mu2[d];
        t.mu_k_sumsq(1, 0) += mu2[d] * mu2[d];
        t.phi_sum[0] += phi[d];
        t.phi_sumsq[0] += phi[d] * phi[d];
        t.mu_k_draws[(d * 2 + 1) * 1 + 0] = mu2[d];
    }
    return t;
}

}  // namespace

TEST_CASE("FDR example: (0.99, 0.98, 0.50) selects the top two") {
    std::vector<double> ppi{0.99, 0.98, 0.50};
    auto s = bayesian_fdr_threshold(ppi, 0.05);
    CHECK(s.selected == std::vector<std::uint8_t>{1, 1, 0});
    CHECK(s.estimated_fdr == doctest::Approx(0.015));
    CHECK(s.threshold == doctest::Approx(0.98));
    CHECK_FALSE(s.empty);
}

TEST_CASE("FDR edge cases") {
    std::vector<double> ones(5, 1.0), zeros(5, 0.0);
    auto all = bayesian_fdr_threshold(ones, 0.05);
    CHECK(all.selected == std::vector<std::uint8_t>(5, 1));
    CHECK(all.estimated_fdr == 0.0);
    auto none = bayesian_fdr_threshold(zeros, 0.05);
    CHECK(none.empty);
    CHECK(none.selected == std::vector<std::uint8_t>(5, 0));
    CHECK(none.threshold > 1.0);
    // Ties never straddle the cutoff: three tied at 0.9 cannot be split.
    std::vector<double> tied{0.99, 0.9, 0.9, 0.9};
    auto t = bayesian_fdr_threshold(tied, 0.05);
    CHECK(t.selected == std::vector<std::uint8_t>{1, 0, 0, 0});
}

TEST_CASE("FDR selection matches the brute-force cutoff scan") {
    Rng rng(100);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t m = 1 + rng.uniform_int(0, 60);
        const int grid = trial % 3 == 0 ? 20 : 0;
        auto ppi = gen::probabilities(rng, m, grid);
        // Push some mass towards 1 so that nonempty selections are common.
        for (auto& v : ppi) v = rng.bernoulli(0.4) ? 1.0 - 0.1 * (1.0 - v) : v;
        const double target = rng.uniform(0.01, 0.3);
        auto got = bayesian_fdr_threshold(ppi, target);
        REQUIRE(got.selected == oracle::fdr_select(ppi, target));
        for (std::size_t i = 0; i < m; ++i) {
            CHECK((std::round(ppi[i] * 1e12) / 1e12 >= got.threshold) == static_cast<bool>(got.selected[i]));
        }
    }
}

TEST_CASE("raising the target never shrinks the selection") {
    Rng rng(101);
    for (int trial = 0; trial < 300; ++trial) {
        auto ppi = gen::probabilities(rng, 40, trial % 2 ? 10 : 0);
        double lo = rng.uniform(0.0, 0.5), hi = lo + rng.uniform(0.0, 0.4);
        auto a = bayesian_fdr_threshold(ppi, lo), b = bayesian_fdr_threshold(ppi, hi);
        for (std::size_t i = 0; i < ppi.size(); ++i) CHECK(a.selected[i] <= b.selected[i]);
    }
}

TEST_CASE("compute_ppi pools chains") {
    std::vector<ChainTrace> t{fake_trace({2, 10}, 10), fake_trace({4, 10}, 10)};
    auto ppi = compute_ppi(t);
    CHECK(ppi.gamma[0] == doctest::Approx(0.3));
    CHECK(ppi.gamma[1] == 1.0);
    CHECK_THROWS_WITH_AS(compute_ppi(std::span<const ChainTrace>{}), doctest::Contains("EmptyTrace"), Error);
    std::vector<ChainTrace> empty{fake_trace({0}, 0)};
    CHECK_THROWS_AS(compute_ppi(empty), Error);
}

TEST_CASE("compute_ppi is invariant to chain order and to pooling vs averaging") {
    Rng rng(102);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t p = 1 + rng.uniform_int(0, 20), draws = 1 + rng.uniform_int(0, 50);
        const std::size_t chains = 2 + rng.uniform_int(0, 3);
        std::vector<ChainTrace> traces;
        for (std::size_t c = 0; c < chains; ++c) {
            std::vector<std::uint64_t> sums;
            for (std::size_t j = 0; j < p; ++j) sums.push_back(rng.uniform_int(0, draws));
            traces.push_back(fake_trace(sums, draws));
        }
        auto pooled = compute_ppi(traces).gamma;
        auto reversed = traces;
        std::reverse(reversed.begin(), reversed.end());
        auto rev = compute_ppi(reversed).gamma;
        for (std::size_t j = 0; j < p; ++j) {
            double avg = 0.0;
            for (const auto& t : traces) avg += chain_gamma_ppi(t)[j] / static_cast<double>(chains);
            CHECK(pooled[j] == doctest::Approx(avg).epsilon(1e-14));
            CHECK(pooled[j] == doctest::Approx(rev[j]).epsilon(1e-15));
        }
    }
}

TEST_CASE("single-draw summary equals the draw") {
    auto t = trace_from_draws({2.5}, {-1.25}, {7.0});
    std::vector<ChainTrace> v{t};
    auto s = summarize(v);
    CHECK(s.mu0_mean[0] == 2.5);
    CHECK(s.phi_mean[0] == 7.0);
    CHECK(s.mu_k_mean(1, 0) == -1.25);
    CHECK(s.mu_k_lower(1, 0) == -1.25);
    CHECK(s.mu_k_upper(1, 0) == -1.25);
    CHECK(s.ppi_gamma[0] == 1.0);
}

TEST_CASE("summary moments and interval ordering") {
    Rng rng(103);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t T = 2 + rng.uniform_int(0, 300);
        std::vector<double> mu0, mu2, phi;
        for (std::size_t d = 0; d < T; ++d) {
            mu0.push_back(rng.normal(3.0, 1.0));
            mu2.push_back(rng.bernoulli(0.6) ? rng.normal(1.0, 0.5) : 0.0);
            phi.push_back(rng.uniform(1.0, 20.0));
        }
        std::vector<ChainTrace> v{trace_from_draws(mu0, mu2, phi)};
        auto s = summarize(v);
        double m = 0.0, ss = 0.0;
        for (double x : mu0) m += x / static_cast<double>(T);
        for (double x : mu0) ss += (x - m) * (x - m);
        CHECK(s.mu0_mean[0] == doctest::Approx(m).epsilon(1e-12));
        CHECK(s.mu0_sd[0] == doctest::Approx(std::sqrt(ss / static_cast<double>(T - 1))).epsilon(1e-8));
        CHECK(s.mu_k_lower(1, 0) <= s.mu_k_mean(1, 0));
        CHECK(s.mu_k_mean(1, 0) <= s.mu_k_upper(1, 0));
        CHECK(s.mu_k_lower(1, 0) >= oracle::percentile7(mu2, 0.0));
        CHECK(s.mu_k_upper(1, 0) <= oracle::percentile7(mu2, 1.0));
        CHECK(s.mu_k_lower(0, 0) == 0.0);
        CHECK(s.mu_k_upper(0, 0) == 0.0);
        CHECK(s.ppi_gamma[0] >= 0.0);
        CHECK(s.ppi_gamma[0] <= 1.0);
    }
}

TEST_CASE("selections are exactly the PPIs at or above the threshold") {
    Rng rng(104);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<ChainTrace> traces;
        std::vector<std::uint64_t> sums;
        for (int j = 0; j < 30; ++j) sums.push_back(rng.bernoulli(0.3) ? 100 - rng.uniform_int(0, 3) : rng.uniform_int(0, 100));
        traces.push_back(fake_trace(sums, 100));
        auto s = summarize(traces, 0.05);
        for (std::size_t j = 0; j < 30; ++j) CHECK(static_cast<bool>(s.selected_gamma[j]) == (s.ppi_gamma[j] >= s.threshold_gamma));
    }
}

TEST_CASE("chain concordance") {
    std::vector<ChainTrace> same{fake_trace({1, 5, 9}, 10), fake_trace({1, 5, 9}, 10), fake_trace({1, 5, 9}, 10)};
    auto r = chain_concordance(same);
    REQUIRE(r.gamma.size() == 3);
    for (const auto& pc : r.gamma) CHECK(pc.correlation == doctest::Approx(1.0));
    CHECK(r.converged);
    std::vector<ChainTrace> flat{fake_trace({1, 5, 9}, 10), fake_trace({4, 4, 4}, 10)};
    auto d = chain_concordance(flat);
    CHECK(d.gamma[0].degenerate);
    CHECK(std::isnan(d.gamma[0].correlation));
    CHECK_FALSE(d.converged);
    std::vector<ChainTrace> opposite{fake_trace({1, 5, 9}, 10), fake_trace({9, 5, 1}, 10)};
    CHECK_FALSE(chain_concordance(opposite).converged);
    std::vector<ChainTrace> one{fake_trace({1}, 10)};
    CHECK_THROWS_AS(chain_concordance(one), Error);
}

TEST_CASE("pearson_correlation") {
    std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8.5};
    bool degenerate = true;
    const double r = pearson_correlation(a, b, &degenerate);
    CHECK_FALSE(degenerate);
    CHECK(r == doctest::Approx(0.9983814394570298).epsilon(1e-14));
}
