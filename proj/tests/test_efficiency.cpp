// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdint>

#include "spk/efficiency.hpp"
#include "spk/error.hpp"

using namespace spk;

TEST_SUITE("efficiency") {

TEST_CASE("counting rules") {
    CHECK(count_linear(4, 8) == 32);
    CHECK(count_linear(0, 8) == 0);
    CHECK(count_attention(3, 4, 2) == OpCounts{12, 32});
    CHECK(count_attention(0, 4, 2) == OpCounts{0, 32});
    CHECK(count_attention(3, 4, 2, AttentionCounting::data_dependent, 5) == OpCounts{12, 10});
}

TEST_CASE("energy") {
    CHECK(energy_mj(OpCounts{1000000000, 0}) == doctest::Approx(0.9));
    CHECK(energy_mj(OpCounts{400000000, 600000000}) == doctest::Approx(0.9));
    CHECK(energy_mj(OpCounts{}) == 0.0);
    CHECK_THROWS_AS(energy_mj(OpCounts{1, 0}, EnergyModel{0.0}), ArgumentError);
}

TEST_CASE("reduction percent") {
    CHECK(reduction_percent(200, 150) == doctest::Approx(25.0));
    CHECK(reduction_percent(200, 200) == 0.0);
    CHECK_THROWS_AS(reduction_percent(0, 0), ArgumentError);
}

TEST_CASE("checked arithmetic") {
    CHECK(checked_add(UINT64_MAX - 1, 1) == UINT64_MAX);
    CHECK_THROWS_AS(checked_add(UINT64_MAX, 1), CountingError);
    CHECK_THROWS_AS(checked_mul(UINT64_MAX / 2 + 1, 2), CountingError);
    CHECK(checked_mul(0, UINT64_MAX) == 0);
    SopLedger ledger;
    ledger.credit_accumulates("a", UINT64_MAX);
    CHECK_THROWS_AS(ledger.credit_accumulates("a", 1), CountingError);
}

TEST_CASE("ledger bookkeeping") {
    SopLedger a, b;
    CHECK(a.empty());
    a.credit_accumulates("s3.b1.q", 10);
    a.credit_macs("s3.b1.attn", 4);
    a.credit_accumulates("s3.b10.q", 100);
    b.credit_accumulates("embed", 7);
    CHECK(a.total_with_prefix("s3.b1.") == OpCounts{10, 4});
    CHECK(a.total() == OpCounts{110, 4});
    SopLedger ab = a, ba = b;
    ab.merge(b);
    ba.merge(a);
    CHECK(ab == ba);
    CHECK(ab.total() == OpCounts{117, 4});
}

}  // TEST_SUITE
