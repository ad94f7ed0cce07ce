#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "generators.hpp"
#include "zinb/error.hpp"
#include "zinb/inference.hpp"
#include "zinb/sampler.hpp"
#include "zinb/simgen.hpp"

#include <cmath>
#include <random>

using namespace zinb;

namespace {

Dataset make_dataset(const std::vector<std::vector<std::int64_t>>& rows, const CovariateMatrix& x,
                     const std::vector<int>& labels, int k) {
    return validate_inputs(gen::to_matrix(rows), standardize_covariates(x), GroupAssignment(labels, k));
}

SizeFactors unit_factors(std::size_t n) { return SizeFactors(std::vector<double>(n, 1.0), NormMethod::CSS); }

std::int64_t nb_draw(Rng& rng, double mean, double phi) {
    const double rate = std::gamma_distribution<double>(phi, mean / phi)(rng.engine());
    return rate > 0.0 ? std::poisson_distribution<std::int64_t>(rate)(rng.engine()) : 0;
}

/// Null state: every indicator off, mu0 = 0, phi = 1, r = 0.
ModelState null_state(const Dataset& d) {
    ModelState s;
    s.r = Matrix<std::uint8_t>(d.counts.n(), d.counts.p(), 0);
    for (std::size_t j = 0; j < d.counts.p(); ++j) {
        TaxonParams t;
        t.mu_k.assign(static_cast<std::size_t>(d.groups.k()), 0.0);
        t.beta.assign(d.covariates.r(), 0.0);
        t.delta.assign(d.covariates.r(), 0);
        t.phi = 1.0;
        s.taxa.push_back(t);
    }
    return s;
}

/// One feature of zeros (plus one positive entry) next to a filler feature.
Dataset zero_heavy(std::size_t n) {
    Rng rng(77);
    std::vector<std::vector<std::int64_t>> rows(n, std::vector<std::int64_t>{0, 5});
    rows[0][0] = 1;
    return make_dataset(rows, gen::covariates(rng, n, 1), gen::labels(n, 2), 2);
}

double share_of_r(Sampler& s, const Dataset& d, int rounds) {
    double ones = 0.0, cells = 0.0;
    for (int t = 0; t < rounds; ++t) {
        s.update_r();
        for (std::size_t i = 0; i < d.counts.n(); ++i) {
            if (d.counts(i, 0) != 0) continue;
            ones += s.state().r(i, 0);
            cells += 1.0;
        }
    }
    return ones / cells;
}

struct Small {
    Dataset data;
    SizeFactors sf;
};

Small random_small(std::uint64_t seed, std::size_t n = 10, std::size_t p = 10, std::size_t r = 2) {
    Rng rng(seed);
    auto rows = gen::count_rows(rng, n, p, 0.4, 50);
    auto d = make_dataset(rows, gen::covariates(rng, n, r), gen::labels(n, 2), 2);
    return {d, unit_factors(n)};
}

}  // namespace

TEST_CASE("init_state is deterministic and consistent with the counts") {
    auto s = random_small(1, 12, 30);
    Hyperparameters hp;
    auto a = init_state(s.data, s.sf, hp, 42);
    auto b = init_state(s.data, s.sf, hp, 42);
    CHECK(a == b);
    for (std::size_t j = 0; j < 30; ++j) {
        CHECK(a.taxa[j].phi == 10.0);
        CHECK_NOTHROW(check_taxon_params(a.taxa[j], 0));
        for (std::size_t i = 0; i < 12; ++i) {
            if (s.data.counts(i, j) > 0) CHECK(a.r(i, j) == 0);
        }
    }
    auto c = init_state(s.data, s.sf, hp, 43);
    std::vector<bool> ga, gc;
    for (std::size_t j = 0; j < 30; ++j) {
        ga.push_back(a.taxa[j].gamma);
        gc.push_back(c.taxa[j].gamma);
    }
    CHECK(ga != gc);
}

TEST_CASE("update_r two-point conditional") {
    auto d = zero_heavy(40);
    auto sf = unit_factors(40);
    Hyperparameters hp;
    ProposalScales scales;

    SUBCASE("lambda = phi = 1 gives 2/3") {
        Sampler s(d, sf, hp, scales, false, 3);
        s.set_state(null_state(d));
        const double share = share_of_r(s, d, 20000);
        // 39 cells x 20000 draws: standard error about 0.0004.
        CHECK(share == doctest::Approx(2.0 / 3.0).epsilon(0.005));
    }
    SUBCASE("prior only gives a_pi / (a_pi + b_pi)") {
        hp.a_pi = 3.0;
        hp.b_pi = 1.0;
        Sampler s(d, sf, hp, scales, true, 4);
        s.set_state(null_state(d));
        CHECK(share_of_r(s, d, 20000) == doctest::Approx(0.75).epsilon(0.005));
    }
    SUBCASE("huge mean forces r = 1") {
        Sampler s(d, sf, hp, scales, false, 5);
        auto st = null_state(d);
        st.taxa[0].mu0 = 30.0;
        s.set_state(st);
        CHECK(share_of_r(s, d, 200) == 1.0);
    }
}

TEST_CASE("state invariants hold after every sweep") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto s = random_small(seed, 14, 12, 3);
        Sampler sampler(s.data, s.sf, Hyperparameters{}, ProposalScales{}, false, seed);
        sampler.init_state();
        for (int t = 0; t < 300; ++t) {
            sampler.sweep();
            REQUIRE_NOTHROW(sampler.check_invariants());
            for (const auto& taxon : sampler.state().taxa) REQUIRE(taxon.phi > 0.0);
        }
        CHECK(std::isfinite(sampler.log_posterior()));
    }
}

TEST_CASE("set_state rejects invalid states") {
    auto d = zero_heavy(6);
    auto sf = unit_factors(6);
    Sampler s(d, sf, Hyperparameters{}, ProposalScales{}, false, 1);
    auto bad = null_state(d);
    bad.r(0, 1) = 1;  // y = 5 there
    CHECK_THROWS_WITH_AS(s.set_state(bad), doctest::Contains("InvariantViolation"), Error);
    bad = null_state(d);
    bad.taxa[0].mu_k[1] = 0.7;  // gamma is 0
    CHECK_THROWS_AS(s.set_state(bad), Error);
    bad = null_state(d);
    bad.taxa[0].beta[0] = 0.2;  // delta is 0
    CHECK_THROWS_AS(s.set_state(bad), Error);
}

TEST_CASE("run_chain records the configured draws") {
    auto s = random_small(2);
    ChainConfig c;
    c.n_iter = 11;
    c.burn_in = 10;
    c.seed = 9;
    auto t = run_chain(s.data, s.sf, Hyperparameters{}, ProposalScales{}, c);
    CHECK(t.n_draws == 1);
    CHECK(t.mu_k_draws.size() == t.k * t.p);
    c.n_iter = 100;
    c.burn_in = 40;
    c.thin = 7;
    t = run_chain(s.data, s.sf, Hyperparameters{}, ProposalScales{}, c);
    CHECK(t.n_draws == static_cast<std::size_t>(c.recorded_draws()));
    for (auto g : t.gamma_sums) CHECK(g <= t.n_draws);
    c.burn_in = 100;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("chains are pure functions of their seed") {
    auto s = random_small(3, 12, 15, 2);
    std::vector<ChainConfig> configs;
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        ChainConfig c;
        c.n_iter = 200;
        c.seed = seed;
        configs.push_back(c);
    }
    Hyperparameters hp;
    ProposalScales sc;
    auto a = run_chain(s.data, s.sf, hp, sc, configs[0]);
    auto b = run_chain(s.data, s.sf, hp, sc, configs[0]);
    CHECK(a == b);
    auto parallel = run_chains_parallel(s.data, s.sf, hp, sc, configs, 3);
    REQUIRE(parallel.size() == 3);
    for (std::size_t c = 0; c < 3; ++c) CHECK(parallel[c] == run_chain(s.data, s.sf, hp, sc, configs[c]));
    auto single = run_chains_parallel(s.data, s.sf, hp, sc, {configs[1]}, 4);
    CHECK(single[0] == run_chain(s.data, s.sf, hp, sc, configs[1]));
    CHECK(!(parallel[0] == parallel[1]));
}

TEST_CASE("prior-only chains recover the prior means") {
    auto s = random_small(4);
    Hyperparameters hp;
    const int chains = 10;
    std::vector<ChainConfig> configs;
    for (int c = 0; c < chains; ++c) {
        ChainConfig cfg;
        cfg.n_iter = 30000;
        cfg.burn_in = 5000;
        cfg.seed = 500 + static_cast<std::uint64_t>(c);
        cfg.prior_only = true;
        cfg.adapt = true;
        configs.push_back(cfg);
    }
    auto traces = run_chains_parallel(s.data, s.sf, hp, ProposalScales{}, configs, 0);
    std::vector<double> gamma, delta, r, phi, mu0;
    for (const auto& t : traces) {
        const double T = static_cast<double>(t.n_draws);
        double g = 0, dl = 0, rr = 0, zeros = 0, ph = 0, m0 = 0;
        for (std::size_t j = 0; j < t.p; ++j) {
            g += t.gamma_sums[j] / T;
            ph += t.phi_sum[j] / T;
            m0 += t.mu0_sum[j] / T;
            for (std::size_t c = 0; c < t.n_cov; ++c) dl += t.delta_sums(c, j) / T;
            for (std::size_t i = 0; i < t.n; ++i) {
                if (s.data.counts(i, j) != 0) continue;
                rr += t.r_sums(i, j) / T;
                zeros += 1.0;
            }
        }
        const double p = static_cast<double>(t.p);
        gamma.push_back(g / p);
        delta.push_back(dl / (p * static_cast<double>(t.n_cov)));
        r.push_back(rr / zeros);
        phi.push_back(ph / p);
        mu0.push_back(m0 / p);
    }
    auto within_3se = [&](const std::vector<double>& v, double target) {
        double m = 0.0, ss = 0.0;
        for (double x : v) m += x / static_cast<double>(v.size());
        for (double x : v) ss += (x - m) * (x - m);
        const double se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
        INFO("mean " << m << " target " << target << " se " << se);
        CHECK(std::fabs(m - target) <= 3.0 * se);
    };
    within_3se(gamma, hp.a_omega / (hp.a_omega + hp.b_omega));
    within_3se(delta, hp.a_p / (hp.a_p + hp.b_p));
    within_3se(r, hp.a_pi / (hp.a_pi + hp.b_pi));
    within_3se(phi, hp.a_phi / hp.b_phi);
    within_3se(mu0, 0.0);
}

TEST_CASE("baseline recovery from a single simulated feature") {
    Rng rng(31);
    const std::size_t n = 50;
    std::vector<std::vector<std::int64_t>> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back({nb_draw(rng, std::exp(9.0), 10.0)});
    auto d = make_dataset(rows, gen::covariates(rng, n, 1), gen::labels(n, 2), 2);
    auto sf = unit_factors(n);
    ChainConfig c;
    c.n_iter = 4000;
    c.seed = 2;
    auto t = run_chain(d, sf, Hyperparameters{}, ProposalScales{}, c);
    CHECK(t.mu0_sum[0] / static_cast<double>(t.n_draws) == doctest::Approx(9.0).epsilon(0.5 / 9.0));
}

TEST_CASE("dispersion recovery from a single simulated feature") {
    Rng rng(32);
    const std::size_t n = 200;
    std::vector<std::vector<std::int64_t>> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back({nb_draw(rng, std::exp(3.0), 10.0)});
    auto d = make_dataset(rows, gen::covariates(rng, n, 1), gen::labels(n, 2), 2);
    auto sf = unit_factors(n);
    ChainConfig c;
    c.n_iter = 6000;
    c.seed = 3;
    auto t = run_chain(d, sf, Hyperparameters{}, ProposalScales{}, c);
    const double phi = t.phi_sum[0] / static_cast<double>(t.n_draws);
    CHECK(phi >= 5.0);
    CHECK(phi <= 20.0);
}

TEST_CASE("strong group shifts are found") {
    ZinbSimConfig cfg;
    cfg.n = 60;
    cfg.p = 20;
    cfg.n_disc = 5;
    cfg.seed = 8;
    auto sim = generate_zinb(cfg);
    Dataset d{sim.counts, sim.covariates, sim.groups};
    SizeFactors sf(sim.true_size_factors, NormMethod::CSS);
    ChainConfig c;
    c.n_iter = 4000;
    c.seed = 10;
    auto t = run_chain(d, sf, Hyperparameters{}, ProposalScales{}, c);
    auto ppi = chain_gamma_ppi(t);
    for (std::size_t j = 0; j < ppi.size(); ++j) {
        if (sim.truth.gamma_true[j]) CHECK(ppi[j] > 0.9);
    }
}

TEST_CASE("default proposal scales accept at sane rates on the reference design") {
    SimConfig cfg;
    cfg.n = 60;
    cfg.p = 100;
    cfg.n_disc = 10;
    cfg.seed = 3;
    auto sim = generate(cfg);
    auto kept = filter_low_abundance_indices(sim.counts, sim.groups, 2, 2);
    auto d = validate_inputs(select_features(sim.counts, kept.retained), sim.covariates, sim.groups);
    auto sf = estimate_css(d.counts);
    ChainConfig c;
    c.n_iter = 2000;
    c.seed = 1;
    auto t = run_chain(d, sf, Hyperparameters{}, ProposalScales{}, c);
    for (const auto* m : {&t.acceptance.mu0, &t.acceptance.mu_k, &t.acceptance.beta, &t.acceptance.phi}) {
        INFO("rate " << m->rate());
        CHECK(m->proposed > 0);
        CHECK(m->rate() > 0.05);
        CHECK(m->rate() < 0.95);
    }
}

TEST_CASE("swapping two non-reference labels swaps their shifts") {
    Rng rng(61);
    const std::size_t n = 90, p = 6;
    const double shift2[p] = {1.5, 0.0, -1.5, 0.0, 1.0, 0.0};
    const double shift3[p] = {-1.5, 0.0, 0.0, 1.5, 1.0, 0.0};
    auto labels = gen::labels(n, 3);
    std::vector<std::vector<std::int64_t>> rows(n, std::vector<std::int64_t>(p));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            const double shift = labels[i] == 2 ? shift2[j] : labels[i] == 3 ? shift3[j] : 0.0;
            rows[i][j] = nb_draw(rng, std::exp(4.0 + shift), 10.0);
        }
    }
    auto x = gen::covariates(rng, n, 1);
    auto swapped = labels;
    for (auto& l : swapped) l = l == 2 ? 3 : l == 3 ? 2 : l;
    auto a = make_dataset(rows, x, labels, 3);
    auto b = make_dataset(rows, x, swapped, 3);
    auto sf = unit_factors(n);
    ChainConfig c;
    c.n_iter = 4000;
    c.seed = 5;
    auto ta = run_chain(a, sf, Hyperparameters{}, ProposalScales{}, c);
    auto tb = run_chain(b, sf, Hyperparameters{}, ProposalScales{}, c);
    std::vector<ChainTrace> va{ta}, vb{tb};
    auto sa = summarize(va), sb = summarize(vb);
    for (std::size_t j = 0; j < p; ++j) {
        CHECK(std::fabs(sa.mu_k_mean(1, j) - sb.mu_k_mean(2, j)) < 0.3);
        CHECK(std::fabs(sa.mu_k_mean(2, j) - sb.mu_k_mean(1, j)) < 0.3);
        CHECK(std::fabs(sa.ppi_gamma[j] - sb.ppi_gamma[j]) < 0.2);
    }
}
