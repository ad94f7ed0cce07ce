#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "generators.hpp"
#include "zinb/data_model.hpp"
#include "zinb/error.hpp"

#include <cmath>

using namespace zinb;

namespace {

CountMatrix counts_of(const std::vector<std::vector<std::int64_t>>& rows) { return gen::to_matrix(rows); }

CovariateMatrix column(std::vector<double> v) {
    Matrix<double> m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    return CovariateMatrix(std::move(m), {"X1"});
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("validate_inputs accepts consistent dimensions") {
    auto d = validate_inputs(counts_of({{1, 0}, {0, 2}, {3, 4}}), column({1, 2, 4}), GroupAssignment({1, 1, 2}, 2));
    CHECK(d.counts.n() == 3);
    CHECK(d.counts.p() == 2);
}

TEST_CASE("validate_inputs rejects mismatched rows") {
    Matrix<double> x(4, 1);
    for (std::size_t i = 0; i < 4; ++i) x(i, 0) = static_cast<double>(i);
    CHECK(code_of([&] {
              validate_inputs(counts_of({{1, 2}, {3, 4}, {5, 6}}), CovariateMatrix(x, {"X1"}),
                              GroupAssignment({1, 1, 2}, 2));
          }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("validate_inputs names an all-zero feature") {
    try {
        validate_inputs(counts_of({{1, 0}, {2, 0}, {3, 0}}), column({1, 2, 3}), GroupAssignment({1, 1, 2}, 2));
        FAIL("expected AllZeroFeature");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AllZeroFeature);
        CHECK(std::string(e.what()).find("F2") != std::string::npos);
    }
}

TEST_CASE("validate_inputs rejects a constant covariate") {
    CHECK(code_of([&] {
              validate_inputs(counts_of({{1, 2}, {3, 4}, {5, 6}}), column({5, 5, 5}), GroupAssignment({1, 1, 2}, 2));
          }) == ErrorCode::ConstantCovariate);
}

TEST_CASE("group labels outside 1..K are rejected") {
    CHECK(code_of([] { GroupAssignment({1, 3}, 2); }) == ErrorCode::InvalidGroups);
    CHECK(code_of([] { GroupAssignment({1, 1}, 2); }) == ErrorCode::InvalidGroups);
}

TEST_CASE("standardize_covariates") {
    auto s = standardize_covariates(column({1, 2, 3}));
    CHECK(s.standardized());
    CHECK(s(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(s(1, 0) == doctest::Approx(0.0));
    CHECK(s(2, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(code_of([] { standardize_covariates(column({5, 5, 5})); }) == ErrorCode::ConstantCovariate);
}

TEST_CASE("standardize_covariates is idempotent") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        auto x = gen::covariates(rng, 3 + rng.uniform_int(0, 30), 1 + rng.uniform_int(0, 4));
        auto once = standardize_covariates(x);
        auto twice = standardize_covariates(once);
        for (std::size_t i = 0; i < once.values().data().size(); ++i) {
            CHECK(std::fabs(once.values().data()[i] - twice.values().data()[i]) < 1e-12);
        }
    }
}

TEST_CASE("filter_low_abundance examples") {
    // Feature 1: nonzero in 5 samples of each group. Feature 2: group 1 only.
    std::vector<std::vector<std::int64_t>> rows;
    for (int i = 0; i < 10; ++i) rows.push_back({1 + i, i < 5 ? 3 : 0});
    auto y = counts_of(rows);
    GroupAssignment g(gen::labels(10, 2), 2);
    auto kept = filter_low_abundance(y, g, 2, 2);
    REQUIRE(kept.p() == 1);
    CHECK(kept.feature_ids()[0] == "F1");
    CHECK(filter_low_abundance(y, g, 2, 1).p() == 2);
}

TEST_CASE("filter_low_abundance never grows p and keeps column order") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 4 + rng.uniform_int(0, 12), p = 1 + rng.uniform_int(0, 20);
        auto rows = gen::count_rows(rng, n, p, 0.6, 5);
        auto y = counts_of(rows);
        GroupAssignment g(gen::labels(n, 2), 2);
        const int min_count = 1 + static_cast<int>(rng.uniform_int(0, 2));
        const int min_groups = 1 + static_cast<int>(rng.uniform_int(0, 1));
        auto f = filter_low_abundance_indices(y, g, min_count, min_groups);
        CHECK(f.retained.size() <= p);
        for (std::size_t a = 1; a < f.retained.size(); ++a) CHECK(f.retained[a - 1] < f.retained[a]);
        for (std::size_t j = 0; j < p; ++j) {
            int groups_ok = 0;
            for (int k = 1; k <= 2; ++k) {
                int nz = 0;
                for (std::size_t i = 0; i < n; ++i) nz += (g.labels()[i] == k && rows[i][j] > 0) ? 1 : 0;
                groups_ok += nz >= min_count ? 1 : 0;
            }
            const bool kept = std::find(f.retained.begin(), f.retained.end(), j) != f.retained.end();
            CHECK(kept == (groups_ok >= min_groups));
        }
        // Filtering twice changes nothing.
        if (!f.retained.empty()) {
            auto once = select_features(y, f.retained);
            auto again = filter_low_abundance_indices(once, g, min_count, min_groups);
            CHECK(again.retained.size() == f.retained.size());
        }
    }
}

TEST_CASE("validate, standardize, filter are deterministic") {
    Rng rng(8);
    auto rows = gen::count_rows(rng, 12, 15, 0.3);
    auto x = gen::covariates(rng, 12, 3);
    auto run = [&] {
        GroupAssignment g(gen::labels(12, 2), 2);
        auto y = filter_low_abundance(counts_of(rows), g, 2, 2);
        return validate_inputs(y, standardize_covariates(x), g);
    };
    auto a = run(), b = run();
    CHECK(a.counts == b.counts);
    CHECK(a.covariates == b.covariates);
    CHECK(a.groups == b.groups);
}

TEST_CASE("hyperparameter and scale defaults") {
    Hyperparameters hp;
    CHECK(hp.a_omega == 0.2);
    CHECK(hp.b_omega == 1.8);
    CHECK(hp.a_p == 0.4);
    CHECK(hp.b_p == 0.6);
    CHECK(hp.a_phi == 1.0);
    CHECK(hp.b_phi == 0.01);
    CHECK(hp.sigma0_sq == 100.0);
    CHECK(hp.a_t == 2.0);
    CHECK(hp.b_t == 10.0);
    hp.b_t = 0.0;
    CHECK_THROWS_AS(hp.validate(), Error);
    ProposalScales s;
    CHECK(s.tau_mu0 == 0.5);
    CHECK(s.tau_mu == 1.0);
    s.tau_phi = -1.0;
    CHECK_THROWS_AS(s.validate(), Error);
}
