// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "oracle.hpp"
#include "spk/error.hpp"
#include "spk/neuron.hpp"
#include "spk/rng.hpp"

using namespace spk;

TEST_SUITE("neuron") {

TEST_CASE("constant 0.6 current fires on the third step") {
    const SpikeTensor s = lif_sequence(LifParams{}, DenseTensor::filled(Shape{4, 1}, 0.6f));
    CHECK(std::vector<std::uint8_t>(s.data().begin(), s.data().end()) == std::vector<std::uint8_t>{0, 0, 1, 0});

    LifState st(Shape{1}, LifParams{});
    const float expect[] = {0.6f, 0.9f, 0.0f, 0.6f};
    for (float e : expect) {
        lif_step(st, DenseTensor::filled(Shape{1}, 0.6f));
        CHECK(st.membrane()[0] == doctest::Approx(e));
    }
}

TEST_CASE("threshold equality fires") {
    const SpikeTensor s = lif_sequence(LifParams{}, DenseTensor::filled(Shape{1, 1}, 1.0f));
    CHECK(s[0] == 1);
}

TEST_CASE("leak without input") {
    LifState st(Shape{1}, LifParams{});
    st.membrane().mutable_data()[0] = 0.8f;
    for (int t = 0; t < 2; ++t) CHECK(lif_step(st, DenseTensor(Shape{1})).nnz() == 0);
    CHECK(st.membrane()[0] == doctest::Approx(0.2f));
}

TEST_CASE("zero input never fires and large input always fires") {
    CHECK(lif_sequence(LifParams{}, DenseTensor(Shape{8, 3})).nnz() == 0);
    CHECK(lif_sequence(LifParams{}, DenseTensor::filled(Shape{8, 3}, 5.0f)).nnz() == 24);
}

TEST_CASE("parameter and shape validation") {
    CHECK_THROWS_AS(LifState(Shape{1}, LifParams{1.0f, 1.0f}), ConfigError);
    CHECK_THROWS_AS(LifState(Shape{1}, LifParams{0.5f, 0.0f}), ConfigError);
    LifState st(Shape{2}, LifParams{});
    CHECK_THROWS_AS(lif_step(st, DenseTensor(Shape{3})), ShapeError);
}

TEST_CASE("lif_sequence matches the scalar recurrence") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t T = 1 + rng.below(6), n = 1 + rng.below(10);
        const LifParams p{rng.uniform(0.05f, 0.95f), rng.uniform(0.2f, 2.0f)};
        std::vector<std::vector<float>> cur(T, std::vector<float>(n));
        std::vector<float> flat;
        for (auto& row : cur) {
            for (float& v : row) {
                v = rng.uniform(-1.0f, 2.0f);
                flat.push_back(v);
            }
        }
        const SpikeTensor got = lif_sequence(p, DenseTensor(Shape{T, n}, flat));
        const auto want = oracle::lif(cur, p.tau, p.v_th);
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t i = 0; i < n; ++i) REQUIRE(got.at({t, i}) == want[t][i]);
        }
    }
}

}  // TEST_SUITE
