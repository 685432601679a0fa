// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <memory>

#include "oracle.hpp"
#include "spk/error.hpp"
#include "spk/head.hpp"
#include "spk/rng.hpp"
#include "spk/ssa.hpp"

using namespace spk;

namespace {

DenseTensor random_dense(Rng& rng, Shape s, float a) {
    std::vector<float> v(s.numel());
    for (float& x : v) x = rng.uniform(-a, a);
    return DenseTensor(s, std::move(v));
}

SpikeTensor random_spikes(Rng& rng, Shape s, double p) {
    std::vector<std::uint8_t> v(s.numel());
    for (auto& x : v) x = rng.uniform() < p;
    return SpikeTensor(s, std::move(v));
}

// Scalar reference of one SSA block over [T,1,N,D].
std::vector<int> reference_ssa(const SpikeTensor& x, const SsaBlockWeights& w, const SsaOptions& opt) {
    const std::size_t T = x.shape()[0], N = x.shape()[2], D = x.shape()[3];
    auto vec = [](const DenseTensor& t) { return std::vector<float>(t.data().begin(), t.data().end()); };
    const auto wq = vec(w.w_q), wk = vec(w.w_k), wv = vec(w.w_v), wp = vec(w.w_proj);
    auto lif_over_time = [&](const std::vector<std::vector<float>>& cur) { return oracle::lif(cur, opt.lif.tau, opt.lif.v_th); };
    std::vector<std::vector<float>> cq(T), ck(T), cv(T);
    for (std::size_t t = 0; t < T; ++t) {
        std::vector<float> xt(N * D);
        for (std::size_t i = 0; i < N * D; ++i) xt[i] = x.data()[t * N * D + i];
        cq[t] = oracle::matmul(xt, wq, N, D, D);
        ck[t] = oracle::matmul(xt, wk, N, D, D);
        cv[t] = oracle::matmul(xt, wv, N, D, D);
    }
    const auto q = lif_over_time(cq), k = lif_over_time(ck), v = lif_over_time(cv);
    std::vector<std::vector<float>> co(T);
    for (std::size_t t = 0; t < T; ++t) {
        std::vector<float> y(N * D, 0.0f);
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t c = 0; c < D; ++c) {
                long long s = 0;
                for (std::size_t j = 0; j < N; ++j) {
                    long long a = 0;
                    for (std::size_t e = 0; e < D; ++e) a += q[t][i * D + e] * k[t][j * D + e];
                    s += a * v[t][j * D + c];
                }
                y[i * D + c] = static_cast<float>(s);
            }
        }
        co[t] = oracle::matmul(y, wp, N, D, D);
        for (std::size_t i = 0; i < N * D; ++i) {
            co[t][i] = co[t][i] * std::ldexp(1.0f, -opt.attn_shift) + x.data()[t * N * D + i];
        }
    }
    std::vector<int> out;
    for (const auto& row : lif_over_time(co)) out.insert(out.end(), row.begin(), row.end());
    return out;
}

}  // namespace

TEST_SUITE("ssa") {

TEST_CASE("hand attention N=1 d=2") {
    const SpikeTensor ones(Shape{1, 2}, {1, 1});
    SopLedger ledger;
    const DenseTensor y = spike_attention(ones, ones, ones, &ledger, "a");
    CHECK(y[0] == 2.0f);
    CHECK(y[1] == 2.0f);
    CHECK(ledger.total() == OpCounts{2, 2});
    CHECK_THROWS_AS(spike_attention(ones, SpikeTensor(Shape{2, 2}), ones), ShapeError);
}

TEST_CASE("attention is computed beyond one 64-bit word") {
    Rng rng(4);
    const std::size_t n = 3, d = 130;
    const SpikeTensor q = random_spikes(rng, Shape{n, d}, 0.5), k = random_spikes(rng, Shape{n, d}, 0.5),
                      v = random_spikes(rng, Shape{n, d}, 0.5);
    const DenseTensor y = spike_attention(q, k, v);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < d; ++c) {
            long long s = 0;
            for (std::size_t j = 0; j < n; ++j) {
                long long a = 0;
                for (std::size_t e = 0; e < d; ++e) a += q.at({i, e}) * k.at({j, e});
                s += a * v.at({j, c});
            }
            REQUIRE(y.at({i, c}) == static_cast<float>(s));
        }
    }
}

TEST_CASE("zero input gives zero output and no accumulates") {
    Rng rng(1);
    const std::size_t D = 8;
    SsaBlockWeights w{random_dense(rng, Shape{D, D}, 1), random_dense(rng, Shape{D, D}, 1),
                      random_dense(rng, Shape{D, D}, 1), random_dense(rng, Shape{D, D}, 1)};
    SopLedger ledger;
    const SpikeTensor out = ssa_forward(SpikeTensor(Shape{2, 1, 5, D}), w, SsaOptions{}, ledger, "b");
    CHECK(out.nnz() == 0);
    CHECK(ledger.total().spike_accumulates == 0);
}

TEST_CASE("ssa_forward matches the scalar reference") {
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t T = 1 + rng.below(4), N = 1 + rng.below(7), D = 1 + rng.below(9);
        SsaBlockWeights w{random_dense(rng, Shape{D, D}, 1.5f), random_dense(rng, Shape{D, D}, 1.5f),
                          random_dense(rng, Shape{D, D}, 1.5f), random_dense(rng, Shape{D, D}, 1.0f)};
        SsaOptions opt;
        opt.attn_shift = static_cast<int>(rng.below(4));
        const SpikeTensor x = random_spikes(rng, Shape{T, 1, N, D}, 0.4);
        SopLedger ledger;
        const SpikeTensor got = ssa_forward(x, w, opt, ledger, "blk");
        const auto want = reference_ssa(x, w, opt);
        REQUIRE(std::vector<int>(got.data().begin(), got.data().end()) == want);
        CHECK(ledger.total_with_prefix("blk.q").spike_accumulates == x.nnz() * D);
    }
}

TEST_CASE("ssa ledger labels and dense input charge MACs") {
    Rng rng(2);
    const std::size_t D = 4;
    SsaBlockWeights w{random_dense(rng, Shape{D, D}, 1), random_dense(rng, Shape{D, D}, 1),
                      random_dense(rng, Shape{D, D}, 1), random_dense(rng, Shape{D, D}, 1)};
    SopLedger ledger;
    ssa_forward(random_spikes(rng, Shape{2, 1, 3, D}, 0.5), w, SsaOptions{}, ledger, "s1.b0");
    const auto e = ledger.entries();
    CHECK(e.count("s1.b0.q"));
    CHECK(e.count("s1.b0.k"));
    CHECK(e.count("s1.b0.v"));
    CHECK(e.count("s1.b0.attn"));
    CHECK(e.count("s1.b0.proj"));

    SopLedger dense;
    ssa_forward(DenseTensor::filled(Shape{1, 1, 3, D}, 0.5f), w, SsaOptions{}, dense, "m");
    CHECK(dense.total_with_prefix("m.q") == OpCounts{0, 3 * D * D});
}

TEST_CASE("weight validation") {
    const DenseTensor a(Shape{4, 4}), b(Shape{4, 3});
    CHECK_THROWS_AS(ssa_forward(SpikeTensor(Shape{1, 1, 2, 4}), SsaBlockWeights{a, a, b, a}, SsaOptions{},
                                *std::make_unique<SopLedger>(), "x"),
                    ShapeError);
    CHECK_THROWS_AS(ssa_forward(SpikeTensor(Shape{1, 1, 2, 3}), SsaBlockWeights{a, a, a, a}, SsaOptions{},
                                *std::make_unique<SopLedger>(), "x"),
                    ShapeError);
}

TEST_CASE("token logits") {
    const HeadWeights h{DenseTensor(Shape{3, 2}, {1, 2, 10, 20, 100, 200}), DenseTensor(Shape{2}, {0.5f, -0.5f})};
    const DenseTensor l = token_logits(SpikeTensor(Shape{1, 3}, {1, 0, 1}), h);
    CHECK(l[0] == 101.5f);
    CHECK(l[1] == 201.5f);
    const DenseTensor z = token_logits(SpikeTensor(Shape{2, 2, 3}), h);
    CHECK(z.shape() == Shape{2, 2, 2});
    CHECK(z.at({1, 1, 0}) == 0.5f);
    const HeadWeights id{DenseTensor(Shape{2, 2}, {1, 0, 0, 1}), DenseTensor(Shape{2})};
    const DenseTensor d = token_logits(DenseTensor(Shape{1, 2}, {0.25f, 3}), id);
    CHECK(d[0] == 0.25f);
    CHECK(d[1] == 3.0f);
    CHECK_THROWS_AS(token_logits(SpikeTensor(Shape{1, 2}), h), ShapeError);
}

}  // TEST_SUITE
