// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>

#include "spk/error.hpp"
#include "spk/head_training.hpp"
#include "spk/model.hpp"
#include "spk/model_io.hpp"
#include "spk/rng.hpp"

using namespace spk;

namespace {

ModelConfig small_config() {
    ModelConfig c;
    c.stages = {{8, 1, 1}, {12, 1, 2}, {12, 2, 1}};
    c.steps = 3;
    c.seed = 9;
    return c;
}

DenseTensor random_frames(std::uint64_t seed, std::size_t T0, std::size_t B, const ModelConfig& c) {
    Rng rng(seed);
    std::vector<float> v(T0 * B * c.in_channels * c.input_height * c.input_width);
    for (float& x : v) x = rng.uniform() < 0.3 ? 1.0f : 0.0f;
    return DenseTensor(Shape{T0, B, c.in_channels, c.input_height, c.input_width}, std::move(v));
}

HeadWeights random_head(std::uint64_t seed, std::size_t D, std::size_t C) {
    Rng rng(seed);
    std::vector<float> w(D * C), b(C);
    for (float& x : w) x = rng.uniform(-1.0f, 1.0f);
    for (float& x : b) x = rng.uniform(-0.1f, 0.1f);
    return {DenseTensor(Shape{D, C}, std::move(w)), DenseTensor(Shape{C}, std::move(b))};
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("block ids") {
    CHECK(BlockId::parse("3.1") == BlockId{3, 1});
    CHECK(BlockId{2, 0}.str() == "2.0");
    CHECK(block_label({3, 1}) == "s3.b1");
    CHECK_THROWS_AS(BlockId::parse("3"), ArgumentError);
    CHECK_THROWS_AS(BlockId::parse("0.1"), ArgumentError);
}

TEST_CASE("config validation and token grids") {
    const ModelConfig c = small_config();
    CHECK_NOTHROW(c.validate());
    CHECK(c.tokens(0) == 64);
    CHECK(c.tokens(1) == 16);
    CHECK(c.tokens(2) == 16);
    ModelConfig bad = c;
    bad.stages[0].downsample = 2;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.stages[1].downsample = 3;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.num_classes = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("initialization is deterministic and seed dependent") {
    const ModelConfig c = small_config();
    const Model a = Model::initialize(c), b = Model::initialize(c);
    CHECK(bitwise_equal(a.weights().w_embed, b.weights().w_embed));
    CHECK(bitwise_equal(a.weights().stages[2].blocks[1].w_proj, b.weights().stages[2].blocks[1].w_proj));
    ModelConfig c2 = c;
    c2.seed = 10;
    CHECK_FALSE(bitwise_equal(a.weights().w_embed, Model::initialize(c2).weights().w_embed));
    CHECK(a.weights().w_embed.shape() == Shape{2, 8});
    CHECK(a.weights().pos_embed.shape() == Shape{64, 8});
    CHECK(a.weights().stages[1].w_down->shape() == Shape{32, 12});
    CHECK_FALSE(a.weights().stages[0].w_down.has_value());
}

TEST_CASE("static frames are repeated over steps") {
    const ModelConfig c = small_config();
    const Model m = Model::initialize(c);
    const DenseTensor one = random_frames(1, 1, 2, c);
    const DenseTensor cur = patch_project(one, 1, 3, m.weights().w_embed, m.weights().pos_embed);
    CHECK(cur.shape() == Shape{3, 2, 64, 8});
    const std::size_t slice = 2 * 64 * 8;
    for (std::size_t t = 1; t < 3; ++t) {
        for (std::size_t i = 0; i < slice; ++i) REQUIRE(cur[t * slice + i] == cur[i]);
    }
    std::vector<float> rep;
    for (int t = 0; t < 3; ++t) rep.insert(rep.end(), one.data().begin(), one.data().end());
    const DenseTensor three(Shape{3, 2, 2, 8, 8}, std::move(rep));
    CHECK(bitwise_equal(cur, patch_project(three, 1, 3, m.weights().w_embed, m.weights().pos_embed)));
    CHECK_THROWS_AS(patch_project(random_frames(1, 2, 2, c), 1, 3, m.weights().w_embed, m.weights().pos_embed),
                    ConfigError);
}

TEST_CASE("downsampling halves each grid side") {
    Rng rng(4);
    std::vector<std::uint8_t> v(2 * 1 * 16 * 3);
    for (auto& x : v) x = rng.uniform() < 0.5;
    const SpikeTensor x(Shape{2, 1, 16, 3}, std::move(v));
    std::vector<float> w(12 * 5);
    for (float& e : w) e = rng.uniform(-1.0f, 1.0f);
    SopLedger ledger;
    const SpikeTensor y = downsample_tokens(x, 4, 4, 2, DenseTensor(Shape{12, 5}, w), LifParams{}, &ledger);
    CHECK(y.shape() == Shape{2, 1, 4, 5});
    CHECK(ledger.total().spike_accumulates == x.nnz() * 5);
    CHECK(downsample_tokens(x, 4, 4, 1, DenseTensor(Shape{3, 5}), LifParams{}).shape() == Shape{2, 1, 16, 5});
    CHECK_THROWS_AS(downsample_tokens(x, 3, 5, 2, DenseTensor(Shape{12, 5}, w), LifParams{}), ShapeError);
}

TEST_CASE("forward is deterministic and reduction at ratio 1 is the identity") {
    const ModelConfig c = small_config();
    Model m = Model::initialize(c);
    m.set_head(random_head(3, 12, 4));
    const DenseTensor frames = random_frames(2, 1, 3, c);
    const ForwardResult base = forward_full(m, frames);
    const ForwardResult again = forward_full(m, frames);
    REQUIRE(base.logits);
    CHECK(base.logits->shape() == Shape{3, 4});
    CHECK(base.features.shape() == Shape{3, 12});
    CHECK(bitwise_equal(*base.logits, *again.logits));
    CHECK(base.ledger == again.ledger);
    for (StrategyKind k : {StrategyKind::uncert_prune, StrategyKind::random_prune, StrategyKind::low_uncert_prune,
                           StrategyKind::uncert_merge}) {
        ReductionConfig r;
        r.strategy.kind = k;
        r.keep_ratio = 1.0;
        const ForwardResult full = forward_full(m, frames, r);
        CHECK(bitwise_equal(*full.logits, *base.logits));
        CHECK(full.ledger.total_with_prefix("s3.b1.") == base.ledger.total_with_prefix("s3.b1."));
    }
    ReductionConfig r;
    r.strategy.kind = StrategyKind::uncert_prune;
    r.keep_ratio = 0.5;
    const ForwardResult pruned = forward_full(m, frames, r);
    CHECK(pruned.masks.size() == 3);
    CHECK(pruned.masks[0].keep_indices.size() == 8);
    CHECK(pruned.ledger.total_with_prefix("s3.b1.").total() < base.ledger.total_with_prefix("s3.b1.").total());
    CHECK(pruned.ledger.total_with_prefix("s3.b0.") == base.ledger.total_with_prefix("s3.b0."));
}

TEST_CASE("prefix reuse matches the full forward pass") {
    const ModelConfig c = small_config();
    Model m = Model::initialize(c);
    m.set_head(random_head(5, 12, 4));
    const DenseTensor frames = random_frames(6, 1, 2, c);
    ReductionConfig r;
    r.strategy.kind = StrategyKind::random_prune;
    r.keep_ratio = 0.6;
    r.insert = {2, 0};
    const PrefixState prefix = forward_prefix(m, frames, r.insert);
    CHECK(prefix.tokens.shape() == Shape{3, 2, 16, 12});
    const ForwardResult a = forward_suffix(m, prefix, r, 7);
    const ForwardResult b = forward_full(m, frames, r, 7);
    CHECK(bitwise_equal(*a.logits, *b.logits));
    CHECK(a.ledger == b.ledger);
}

TEST_CASE("reduction configuration errors") {
    const ModelConfig c = small_config();
    Model m = Model::initialize(c);
    const DenseTensor frames = random_frames(6, 1, 1, c);
    ReductionConfig r;
    r.strategy.kind = StrategyKind::uncert_prune;
    r.keep_ratio = 0.5;
    CHECK_THROWS_AS(forward_full(m, frames, r), ConfigError);  // no head to score with
    m.set_head(random_head(5, 12, 4));
    r.insert = {3, 2};
    CHECK_THROWS_AS(forward_full(m, frames, r), ConfigError);
    r.insert = {1, 0};
    r.strategy.kind = StrategyKind::uncert_merge;
    CHECK_THROWS_AS(forward_full(m, frames, r), ConfigError);  // merge before a downsampling stage
    r.insert = {2, 0};
    CHECK_NOTHROW(forward_full(m, frames, r));
    CHECK_THROWS_AS(m.set_head(random_head(5, 8, 4)), ConfigError);
}

TEST_CASE("model directories round trip") {
    const ModelConfig c = small_config();
    Model m = Model::initialize(c);
    m.set_head(random_head(8, 12, 4));
    const auto dir = std::filesystem::temp_directory_path() / "spk_test_model_rt";
    std::filesystem::remove_all(dir);
    save_model(dir, m);
    const Model back = load_model(dir);
    CHECK(back.config().stages.size() == 3);
    CHECK(back.config().seed == c.seed);
    CHECK(bitwise_equal(back.weights().stages[1].blocks[0].w_v, m.weights().stages[1].blocks[0].w_v));
    REQUIRE(back.head());
    const DenseTensor frames = random_frames(9, 1, 2, c);
    CHECK(bitwise_equal(*forward_full(back, frames).logits, *forward_full(m, frames).logits));
    std::filesystem::remove(dir / "s2.down.spkt");
    CHECK_THROWS_AS(load_model(dir), Error);
    std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
