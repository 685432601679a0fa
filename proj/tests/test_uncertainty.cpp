// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oracle.hpp"
#include "spk/error.hpp"
#include "spk/rng.hpp"
#include "spk/uncertainty.hpp"

using namespace spk;

TEST_SUITE("uncertainty") {

TEST_CASE("softplus") {
    CHECK(softplus(0.0) == doctest::Approx(0.6931472).epsilon(1e-7));
    CHECK(softplus(-800.0) >= 0.0);
    CHECK(softplus(800.0) == doctest::Approx(800.0));
    CHECK(std::isfinite(softplus(1e6)));
    double prev = softplus(-50);
    for (double l = -49; l <= 50; l += 1) {
        CHECK(softplus(l) > prev);
        prev = softplus(l);
    }
}

TEST_CASE("uncertainty examples") {
    const DenseTensor u0 = uncertainty_from_evidence(evidence_from_logits(DenseTensor(Shape{1, 10})));
    CHECK(u0[0] == doctest::Approx(0.5906161).epsilon(1e-6));
    const DenseTensor u1 = uncertainty_from_evidence(evidence_from_logits(DenseTensor(Shape{2}, {40, -40})));
    CHECK(u1.shape() == Shape{1});
    CHECK(u1[0] == doctest::Approx(2.0 / 42.0).epsilon(1e-6));
    const DenseTensor none = uncertainty_from_evidence(DenseTensor(Shape{3, 4}));
    for (float v : none.data()) CHECK(v == 1.0f);
    CHECK_THROWS_AS(uncertainty_from_evidence(DenseTensor(Shape{2}, {1, -1})), ContractError);
    CHECK_THROWS_AS(uncertainty_from_evidence(DenseTensor(Shape{2, 1})), ArgumentError);
}

TEST_CASE("uncertainty agrees with the scalar oracle and stays in (0,1]") {
    Rng rng(8);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t C = 2 + rng.below(9);
        std::vector<float> l(C);
        std::vector<double> ld(C);
        for (std::size_t c = 0; c < C; ++c) ld[c] = l[c] = rng.uniform(-20.0f, 20.0f);
        const DenseTensor u = uncertainty_from_evidence(evidence_from_logits(DenseTensor(Shape{C}, l)));
        REQUIRE(u[0] == doctest::Approx(oracle::uncertainty(ld)).epsilon(1e-6));
        REQUIRE(u[0] > 0.0f);
        REQUIRE(u[0] <= 1.0f);
    }
}

TEST_CASE("trajectory statistics and score") {
    const std::vector<double> x = {0.2, 0.4, 0.6, 0.8};
    const TokenStats s = trajectory_stats(x);
    CHECK(s.mu == doctest::Approx(0.5));
    CHECK(s.sigma == doctest::Approx(0.2236068).epsilon(1e-6));
    CHECK(importance_score(s, 0.9) == doctest::Approx(0.7012461).epsilon(1e-6));
    CHECK(importance_score(s, 0.0) == s.mu);
    CHECK(trajectory_stats(std::vector<double>{0.3, 0.3}).sigma == 0.0);
    CHECK_THROWS_AS(importance_score(s, -0.1), ArgumentError);
    CHECK_THROWS_AS(trajectory_stats(std::vector<double>{}), ArgumentError);
}

TEST_CASE("score modes") {
    // U[T=4,B=1,N=2]
    const DenseTensor u(Shape{4, 1, 2}, {0.2f, 0.5f, 0.4f, 0.5f, 0.6f, 0.5f, 0.8f, 0.5f});
    const DenseTensor full = scores_from_uncertainty(u, 0.9);
    CHECK(full[0] == doctest::Approx(0.7012461).epsilon(1e-6));
    CHECK(full[1] == doctest::Approx(0.5));
    CHECK(scores_from_uncertainty(u, 0.9, ScoreMode::mean_only)[0] == doctest::Approx(0.5));
    CHECK(scores_from_uncertainty(u, 0.9, ScoreMode::std_only)[0] == doctest::Approx(0.2236068).epsilon(1e-6));
    CHECK(scores_from_uncertainty(u, 0.9, ScoreMode::last_step)[0] == doctest::Approx(0.8));
    CHECK(parse_score_mode("std") == ScoreMode::std_only);
    CHECK(to_string(ScoreMode::last_step) == "last");
    CHECK_THROWS_AS(parse_score_mode("median"), ArgumentError);
}

TEST_CASE("token uncertainty shapes and CSV rows") {
    const HeadWeights h{DenseTensor(Shape{3, 2}, {1, -1, 0, 0, 2, -2}), DenseTensor(Shape{2})};
    SpikeTensor z(Shape{2, 1, 2, 3});
    z.set({1, 0, 1, 0}, true);
    const DenseTensor u = token_uncertainty(z, h);
    CHECK(u.shape() == Shape{2, 1, 2});
    CHECK(u.at({0, 0, 0}) == doctest::Approx(2.0 / (2 + 2 * std::log(2.0))));
    CHECK(u.at({1, 0, 1}) < u.at({0, 0, 1}));
    std::ostringstream out;
    write_uncertainty_rows(out, u, 10);
    const std::string csv = out.str();
    CHECK(csv.rfind("10,0,0,0.590616\n10,0,1,0.590616\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

}  // TEST_SUITE
