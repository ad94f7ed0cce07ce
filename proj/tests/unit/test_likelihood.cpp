#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "generators.hpp"
#include "zinb/error.hpp"
#include "zinb/likelihood.hpp"

#include <cmath>

using namespace zinb;

namespace {

double direct_nb_pmf(int y, double lambda, double phi) {
    // Gamma ratio written out with tgamma; valid while the factorial stays finite.
    return std::tgamma(y + phi) / (std::tgamma(y + 1.0) * std::tgamma(phi)) * std::pow(phi / (lambda + phi), phi) *
           std::pow(lambda / (lambda + phi), y);
}

double poisson_pmf(int y, double lambda) { return std::exp(y * std::log(lambda) - lambda - std::lgamma(y + 1.0)); }

struct Fixture {
    CovariateMatrix x;
    GroupAssignment g;
    SizeFactors s;
};

Fixture unit_fixture(std::size_t n, std::size_t r, Rng& rng) {
    std::vector<double> ones(n, 1.0);
    return {gen::covariates(rng, n, r), GroupAssignment(gen::labels(n, 2), 2), SizeFactors(ones, NormMethod::CSS)};
}

}  // namespace

TEST_CASE("nb_log_pmf examples") {
    CHECK(nb_log_pmf(0, 1.0, 1.0) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
    CHECK(nb_log_pmf(2, 1.0, 1.0) == doctest::Approx(std::log(1.0 / 8.0)).epsilon(1e-15));
    CHECK_THROWS_WITH_AS(nb_log_pmf(1, 0.0, 1.0), doctest::Contains("DomainError"), Error);
    CHECK_THROWS_WITH_AS(nb_log_pmf(1, 1.0, -2.0), doctest::Contains("DomainError"), Error);
}

TEST_CASE("nb_log_pmf matches the Gamma-function formula") {
    for (double lambda : {0.3, 2.0, 17.0, 120.0}) {
        for (double phi : {0.2, 1.0, 6.5, 40.0}) {
            for (int y = 0; y <= 170; y += 7) {
                const double direct = direct_nb_pmf(y, lambda, phi);
                if (!(direct > 0.0) || !std::isfinite(direct)) continue;
                CHECK(std::fabs(nb_log_pmf(y, lambda, phi) - std::log(direct)) < 1e-10);
            }
        }
    }
}

TEST_CASE("nb_log_pmf stays finite for huge counts") {
    for (std::int64_t y : {std::int64_t{1000000}, std::int64_t{1000000000}}) {
        const double v = nb_log_pmf(y, static_cast<double>(y), 5.0);
        CHECK(std::isfinite(v));
        CHECK(v < 0.0);
    }
}

TEST_CASE("NB variance is lambda + lambda^2 / phi") {
    const double lambda = 4.0, phi = 2.5;
    double m1 = 0.0, m2 = 0.0;
    for (int y = 0; y < 2000; ++y) {
        const double pmf = std::exp(nb_log_pmf(y, lambda, phi));
        m1 += y * pmf;
        m2 += static_cast<double>(y) * y * pmf;
    }
    CHECK(m1 == doctest::Approx(lambda).epsilon(1e-10));
    CHECK(m2 - m1 * m1 == doctest::Approx(lambda + lambda * lambda / phi).epsilon(1e-9));
}

TEST_CASE("zinb_log_pmf examples") {
    CHECK(zinb_log_pmf(0, 0.5, 1.0, 1.0) == doctest::Approx(std::log(0.75)).epsilon(1e-15));
    CHECK(zinb_log_pmf(3, 0.3, 2.0, 1.5) == doctest::Approx(std::log(0.7) + nb_log_pmf(3, 2.0, 1.5)).epsilon(1e-15));
    CHECK_THROWS_AS(zinb_log_pmf(0, 1.5, 1.0, 1.0), Error);
}

TEST_CASE("zinb pmf normalizes over a truncated support") {
    for (double pi : {0.0, 0.3, 0.7}) {
        for (double lambda : {0.5, 5.0, 50.0}) {
            for (double phi : {0.1, 1.0, 100.0}) {
                double total = 0.0, tail = 1.0;
                std::int64_t y = 0;
                // Extend until the NB tail beyond y is provably tiny: terms are eventually decreasing.
                for (; y < 5000000 && !(y > lambda && tail < 1e-12); ++y) {
                    tail = std::exp(zinb_log_pmf(y, pi, lambda, phi));
                    total += tail;
                }
                CHECK(std::fabs(total - 1.0) < 1e-6);
            }
        }
    }
}

TEST_CASE("NB with phi = 1000 against Poisson") {
    // Total-variation distances from an independent scipy evaluation over y in [0, 400).
    const double lambdas[] = {1.0, 5.0, 20.0};
    const double expected[] = {0.0002757487370241263, 0.0012206389148160498, 0.00476964166277179};
    for (int c = 0; c < 3; ++c) {
        double tv = 0.0;
        for (int y = 0; y < 400; ++y) {
            tv += std::fabs(std::exp(nb_log_pmf(y, lambdas[c], 1000.0)) - poisson_pmf(y, lambdas[c]));
        }
        CHECK(0.5 * tv == doctest::Approx(expected[c]).epsilon(1e-8));
    }
}

TEST_CASE("prior densities") {
    // Values from independent evaluations (closed-form t density and IG-mixture quadrature).
    CHECK(log_t_marginal_density(0.0, 2.0, 10.0) == doctest::Approx(-1.7855482092287764).epsilon(1e-13));
    CHECK(log_t_marginal_density(1.3, 2.0, 10.0) == doctest::Approx(-1.9883458374407565).epsilon(1e-12));
    CHECK(log_gamma_density(100.0, 1.0, 0.01) == doctest::Approx(std::log(0.01) - 1.0).epsilon(1e-14));
    CHECK(log_normal_density(0.0, 0.0, 1.0) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)));
    CHECK(log_beta_function(2.0, 3.0) == doctest::Approx(std::log(1.0 / 12.0)).epsilon(1e-14));
}

TEST_CASE("t marginal integrates to one") {
    double total = 0.0;
    const double h = 0.01;
    for (double x = -4000.0; x <= 4000.0; x += h) total += std::exp(log_t_marginal_density(x, 2.0, 10.0)) * h;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("log_prior_terms") {
    Hyperparameters hp;
    TaxonParams t;
    t.mu0 = 0.5;
    t.mu_k = {0.0, 0.0};
    t.beta = {0.0, 0.0};
    t.delta = {0, 0};
    t.phi = 100.0;
    auto off = log_prior_terms(t, hp, 0);
    CHECK(off.mu_k == 0.0);
    CHECK(off.beta == 0.0);
    CHECK(off.phi == doctest::Approx(std::log(0.01) - 1.0));
    CHECK(off.mu0 == doctest::Approx(log_normal_density(0.5, 0.0, 100.0)));
    t.gamma = true;
    t.mu_k = {0.0, 0.0};
    CHECK(log_prior_terms(t, hp, 0).mu_k == doctest::Approx(-1.7855482092287764));
    t.delta = {1, 0};
    t.beta = {1.3, 0.0};
    CHECK(log_prior_terms(t, hp, 0).beta == doctest::Approx(-1.9883458374407565));
}

TEST_CASE("mean_alpha") {
    TaxonParams t;
    t.mu_k = {0.0, 0.0};
    t.beta = {0.0};
    t.delta = {0};
    std::vector<double> x{0.7};
    CHECK(mean_alpha(t, x, 1, 0) == 1.0);
    t.mu0 = 1.0;
    t.gamma = true;
    t.mu_k = {0.0, 2.0};
    t.delta = {1};
    t.beta = {-0.5};
    std::vector<double> one{1.0};
    CHECK(mean_alpha(t, one, 1, 0) == doctest::Approx(std::exp(2.5)));
    CHECK(mean_alpha(t, one, 0, 0) == doctest::Approx(std::exp(0.5)));
}

TEST_CASE("mean_alpha with gamma = 0 ignores the group") {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        TaxonParams t;
        t.mu0 = rng.normal();
        t.mu_k = {0.0, 0.0, 0.0};
        t.beta = {rng.normal(), 0.0};
        t.delta = {1, 0};
        std::vector<double> x{rng.normal(), rng.normal()};
        CHECK(mean_alpha(t, x, 0, 0) == mean_alpha(t, x, 2, 0));
    }
}

TEST_CASE("invariant violations are rejected") {
    TaxonParams t;
    t.mu_k = {0.0, 1.5};
    t.beta = {0.0};
    t.delta = {0};
    CHECK_THROWS_WITH_AS(check_taxon_params(t, 0), doctest::Contains("InvariantViolation"), Error);
    t.mu_k = {0.0, 0.0};
    t.beta = {0.4};
    CHECK_THROWS_AS(check_taxon_params(t, 0), Error);
    t.beta = {0.0};
    t.phi = 0.0;
    CHECK_THROWS_AS(check_taxon_params(t, 0), Error);
    t.phi = 1.0;
    t.gamma = true;
    t.mu_k = {0.3, 1.0};
    CHECK_THROWS_AS(check_taxon_params(t, 0), Error);
}

TEST_CASE("taxon_log_lik examples") {
    Rng rng(1);
    TaxonParams t;
    t.mu_k = {0.0, 0.0};
    t.beta = {0.0};
    t.delta = {0};
    t.phi = 1.0;
    Matrix<double> xv(2, 1);
    xv(0, 0) = -1.0;
    xv(1, 0) = 1.0;
    CovariateMatrix x(xv, {"X1"});
    GroupAssignment g({1, 2}, 2);
    SizeFactors s({1.0, 1.0}, NormMethod::CSS);
    std::vector<std::int64_t> y{0, 0};
    std::vector<std::uint8_t> all_r{1, 1}, one_r{0, 1};
    CHECK(taxon_log_lik(y, all_r, t, s, x, g) == 0.0);
    CHECK(taxon_log_lik(y, one_r, t, s, x, g) == doctest::Approx(std::log(0.5)));
    std::vector<std::int64_t> y_pos{0, 3};
    CHECK_THROWS_WITH_AS(taxon_log_lik(y_pos, all_r, t, s, x, g), doctest::Contains("InconsistentZeroIndicator"),
                         Error);
}

TEST_CASE("taxon_log_lik matches a naive product and is additive") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 6 + rng.uniform_int(0, 10);
        auto f = unit_fixture(n, 2, rng);
        std::vector<double> sf;
        for (std::size_t i = 0; i < n; ++i) sf.push_back(std::exp(rng.normal(0.0, 0.3)));
        SizeFactors s(renormalize_log_sum_zero(sf), NormMethod::CSS);
        TaxonParams t;
        t.mu0 = rng.uniform(0.0, 2.0);
        t.gamma = true;
        t.mu_k = {0.0, rng.normal()};
        t.delta = {1, 0};
        t.beta = {rng.normal(0.0, 0.5), 0.0};
        t.phi = rng.uniform(0.5, 20.0);
        std::vector<std::int64_t> y(n);
        std::vector<std::uint8_t> r(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = static_cast<std::int64_t>(rng.uniform_int(0, 12));
            if (y[i] == 0) r[i] = rng.bernoulli(0.5) ? 1 : 0;
        }
        double product = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (r[i]) continue;
            const double lin = t.mu0 + t.mu_k[f.g.index(i)] + f.x(i, 0) * t.beta[0];
            product *= direct_nb_pmf(static_cast<int>(y[i]), s[i] * std::exp(lin), t.phi);
        }
        const double ll = taxon_log_lik(y, r, t, s, f.x, f.g);
        CHECK(ll == doctest::Approx(std::log(product)).epsilon(1e-10));
        // Masking disjoint halves splits the sum.
        std::vector<std::uint8_t> first = r, second = r;
        std::vector<std::int64_t> y1 = y, y2 = y;
        for (std::size_t i = 0; i < n; ++i) {
            if (i < n / 2) {
                y2[i] = 0;
                second[i] = 1;
            } else {
                y1[i] = 0;
                first[i] = 1;
            }
        }
        CHECK(taxon_log_lik(y1, first, t, s, f.x, f.g) + taxon_log_lik(y2, second, t, s, f.x, f.g) ==
              doctest::Approx(ll).epsilon(1e-12));
    }
}
