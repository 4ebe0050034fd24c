#include <doctest.h>

#include <cmath>

#include "synthetic.hpp"
#include "sphsmooth/error.hpp"
#include "sphsmooth/model_select.hpp"

using namespace sphsmooth;

TEST_SUITE("model_select") {

TEST_CASE("K_max and defaults") {
    CHECK(max_truncation(300) == 16);  // 17^2 = 289 < 300
    CHECK(max_truncation(289) == 15);
    CHECK(max_truncation(10) == 2);
    const auto g = default_p_grid();
    CHECK(g == std::vector<double>{0.5, 0.8, 0.9, 0.95, 0.995});
}

TEST_CASE("log marginal: p = 1 uses only the invariant branch, permutation invariance") {
    Rng rng(1);
    const RegressionData d = synth::draw_from_model(2, 60, 0.05, 5.0, 0.5, rng);
    const BasisSpec spec(2, 2.0, WeightScheme::Iota);
    const PriorSpec p1 = PriorSpec::defaults(2, 1.0);
    const BayesFit f = fit_hierarchical(d, spec, p1);
    CHECK(log_marginal(d, 2, p1) == doctest::Approx(f.log_m0).epsilon(1e-12));

    RegressionData perm = d;
    std::vector<int> idx(60);
    for (int i = 0; i < 60; ++i) idx[i] = (i * 37) % 60;
    for (int i = 0; i < 60; ++i) {
        perm.points[i] = d.points[idx[i]];
        perm.y(i) = d.y(idx[i]);
    }
    const PriorSpec ph = PriorSpec::defaults(2, 0.5);
    CHECK(std::abs(log_marginal(d, 2, ph) - log_marginal(perm, 2, ph)) < 1e-8);
    CHECK_THROWS_AS(log_marginal(d, 8, ph), DomainError);
}

TEST_CASE("Bayes factor table") {
    Rng rng(2);
    const RegressionData d = synth::draw_from_model(2, 80, 0.05, 5.0, 0.5, rng);
    const SelectionTable t = bayes_factor_table(d, {1, 2, 3, 4}, default_p_grid());
    REQUIRE(t.scores.size() == 4);
    CHECK(t.K_max == 4);
    CHECK(t.scores.back().log_bayes_factor == 0.0);  // B_{K_max} = 1 exactly
    for (const auto& s : t.scores) {
        CHECK(std::isfinite(s.log_marginal));
        CHECK(s.log_bayes_factor <= t.scores[t.best_K - 1].log_bayes_factor);
    }
    const SelectionTable one = bayes_factor_table(d, {3}, default_p_grid());
    CHECK(one.best_K == 3);
    CHECK(one.scores[0].log_bayes_factor == 0.0);
    // deterministic
    const SelectionTable again = bayes_factor_table(d, {1, 2, 3, 4}, default_p_grid());
    CHECK(again.best_K == t.best_K);
    for (std::size_t i = 0; i < 4; ++i) CHECK(again.scores[i].log_marginal == t.scores[i].log_marginal);
}

TEST_CASE("Schwarz criterion") {
    Rng rng(3);
    const RegressionData d = synth::draw_from_model(2, 120, 0.05, 5.0, 0.5, rng);
    CHECK(schwarz_criterion(d, 3, 3) == 0.0);
    CHECK(schwarz_criterion(d, 3, 3, SchwarzFit::Ols) == 0.0);
    // the penalty part for (4, 9) is 37.5 log n
    const double l4 = max_log_likelihood(d, 4, SchwarzFit::Ols), l9 = max_log_likelihood(d, 9, SchwarzFit::Ols);
    CHECK(schwarz_criterion(d, 4, 9, SchwarzFit::Ols) == doctest::Approx(l4 - l9 + 37.5 * std::log(120.0)).epsilon(1e-12));
    CHECK(std::isfinite(schwarz_criterion(d, 1, 5)));
}

TEST_CASE("Schwarz prefers the generating level over K = 6") {
    int wins = 0;
    for (int rep = 0; rep < 30; ++rep) {
        Rng rng(derive_seed(4, rep));
        const RegressionData d = synth::draw_from_model(2, 300, 0.05, 5.0, 0.5, rng);
        wins += schwarz_criterion(d, 2, 6) > 0.0;
    }
    MESSAGE("S_{2,6} > 0 in " << wins << "/30");
    CHECK(wins >= 21);
}

TEST_CASE("selection is invariant to y -> 2y") {
    int same = 0;
    for (int rep = 0; rep < 10; ++rep) {
        Rng rng(derive_seed(5, rep));
        RegressionData d = synth::draw_from_model(2, 100, 0.05, 5.0, 0.5, rng);
        const int k1 = bayes_factor_table(d, {1, 2, 3, 4}, {0.5, 0.9}).best_K;
        d.y *= 2.0;
        same += bayes_factor_table(d, {1, 2, 3, 4}, {0.5, 0.9}).best_K == k1;
    }
    CHECK(same >= 9);
}

}  // TEST_SUITE
