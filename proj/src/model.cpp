// SPDX-License-Identifier: Apache-2.0
#include "spk/model.hpp"

#include <cmath>
#include <cstdio>

#include "spk/head_training.hpp"
#include "spk/rng.hpp"
#include "spk/tensor_ops.hpp"

namespace spk {

std::string BlockId::str() const { return std::to_string(stage) + "." + std::to_string(block); }

BlockId BlockId::parse(std::string_view text) {
    const auto dot = text.find('.');
    auto number = [&](std::string_view s) -> std::size_t {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string_view::npos) {
            throw ArgumentError("block id '" + std::string(text) + "' must look like <stage>.<block>, e.g. 3.1");
        }
        return std::stoul(std::string(s));
    };
    if (dot == std::string_view::npos) number({});
    BlockId id{number(text.substr(0, dot)), number(text.substr(dot + 1))};
    if (id.stage == 0) throw ArgumentError("stage numbers start at 1");
    return id;
}

std::string block_label(BlockId id) { return "s" + std::to_string(id.stage) + ".b" + std::to_string(id.block); }

void ModelConfig::validate() const {
    if (steps < 1) throw ConfigError("steps must be >= 1");
    if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
    if (stages.empty()) throw ConfigError("at least one stage is required");
    if (in_channels < 1 || patch < 1) throw ConfigError("in_channels and patch must be >= 1");
    lif.validate();
    if (input_height % patch || input_width % patch) {
        throw ConfigError("input " + std::to_string(input_height) + "x" + std::to_string(input_width) +
                          " is not divisible by patch " + std::to_string(patch));
    }
    std::size_t h = input_height / patch, w = input_width / patch;
    for (std::size_t s = 0; s < stages.size(); ++s) {
        const auto& st = stages[s];
        if (st.channels < 1 || st.blocks < 1) throw ConfigError("stage channels and blocks must be >= 1");
        if (st.downsample != 1 && st.downsample != 2) throw ConfigError("downsample factor must be 1 or 2");
        if (s == 0 && st.downsample != 1) throw ConfigError("the first stage cannot downsample");
        if (h % st.downsample || w % st.downsample) {
            throw ConfigError("stage " + std::to_string(s + 1) + " grid " + std::to_string(h) + "x" +
                              std::to_string(w) + " does not divide by " + std::to_string(st.downsample));
        }
        h /= st.downsample;
        w /= st.downsample;
    }
    if (attn_shift < 0 || attn_shift > 30) throw ConfigError("attn_shift must lie in [0, 30]");
}

std::size_t ModelConfig::token_grid_h(std::size_t stage) const {
    std::size_t h = input_height / patch;
    for (std::size_t s = 0; s <= stage && s < stages.size(); ++s) h /= stages[s].downsample;
    return h;
}

std::size_t ModelConfig::token_grid_w(std::size_t stage) const {
    std::size_t w = input_width / patch;
    for (std::size_t s = 0; s <= stage && s < stages.size(); ++s) w /= stages[s].downsample;
    return w;
}

Model::Model(ModelConfig config, ModelWeights weights, std::optional<HeadWeights> head)
    : config_(std::move(config)), weights_(std::move(weights)), head_(std::move(head)) {
    validate();
}

void Model::validate() const {
    config_.validate();
    const auto& c = config_;
    auto expect = [](const DenseTensor& t, std::size_t r, std::size_t k, const std::string& what) {
        if (t.shape().rank() != 2 || t.shape()[0] != r || t.shape()[1] != k) {
            throw ConfigError(what + " has shape " + t.shape().str() + ", expected [" + std::to_string(r) + "," +
                              std::to_string(k) + "]");
        }
    };
    expect(weights_.w_embed, c.in_channels * c.patch * c.patch, c.stages[0].channels, "patch embedding");
    expect(weights_.pos_embed, c.tokens(0), c.stages[0].channels, "position embedding");
    if (weights_.stages.size() != c.stages.size()) throw ConfigError("stage count mismatch between config and weights");
    for (std::size_t s = 0; s < c.stages.size(); ++s) {
        const auto& sw = weights_.stages[s];
        const std::size_t D = c.stages[s].channels;
        if (s == 0 && sw.w_down) throw ConfigError("first stage has no transition weights");
        if (s > 0) {
            if (!sw.w_down) throw ConfigError("stage " + std::to_string(s + 1) + " is missing transition weights");
            const std::size_t f = c.stages[s].downsample;
            expect(*sw.w_down, f * f * c.stages[s - 1].channels, D, "stage transition");
        }
        if (sw.blocks.size() != c.stages[s].blocks) throw ConfigError("block count mismatch");
        for (const auto& b : sw.blocks) {
            b.validate();
            if (b.dim() != D) throw ConfigError("block width does not match stage channels");
        }
    }
    if (head_) {
        head_->validate();
        if (head_->dim() != c.final_dim() || head_->classes() != c.num_classes) {
            throw ConfigError("head " + head_->w.shape().str() + " does not match the final stage width and classes");
        }
    }
}

void Model::set_head(HeadWeights head) {
    head_ = std::move(head);
    validate();
}

namespace {

DenseTensor init_uniform(std::size_t rows, std::size_t cols, float half_width, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<float> v(rows * cols);
    for (float& x : v) x = rng.uniform(-half_width, half_width);
    return DenseTensor(Shape{rows, cols}, std::move(v));
}

float fan_in_scale(float gain, std::size_t fan_in) {
    return gain * static_cast<float>(std::sqrt(3.0 / static_cast<double>(fan_in)));
}

}  // namespace

Model Model::initialize(const ModelConfig& config) {
    config.validate();
    const std::uint64_t seed = config.seed;
    const std::size_t in = config.in_channels * config.patch * config.patch;
    const std::size_t d0 = config.stages[0].channels;
    ModelWeights w{init_uniform(in, d0, fan_in_scale(config.embed_gain, in), mix_seed(seed, 1)),
                   init_uniform(config.tokens(0), d0, config.pos_gain, mix_seed(seed, 2)),
                   {}};
    for (std::size_t s = 0; s < config.stages.size(); ++s) {
        StageWeights sw;
        const std::size_t D = config.stages[s].channels;
        if (s > 0) {
            const std::size_t f = config.stages[s].downsample;
            const std::size_t fan = f * f * config.stages[s - 1].channels;
            sw.w_down = init_uniform(fan, D, fan_in_scale(config.down_gain, fan), mix_seed(seed, 100 + s));
        }
        for (std::size_t b = 0; b < config.stages[s].blocks; ++b) {
            const std::uint64_t tag = 1000 + 100 * s + 10 * b;
            const float a = fan_in_scale(config.qkv_gain, D);
            sw.blocks.push_back(SsaBlockWeights{init_uniform(D, D, a, mix_seed(seed, tag)),
                                                init_uniform(D, D, a, mix_seed(seed, tag + 1)),
                                                init_uniform(D, D, a, mix_seed(seed, tag + 2)),
                                                init_uniform(D, D, fan_in_scale(config.proj_gain, D),
                                                             mix_seed(seed, tag + 3))});
        }
        w.stages.push_back(std::move(sw));
    }
    return Model(config, std::move(w));
}

DenseTensor patch_project(const DenseTensor& frames, std::size_t patch, std::size_t steps, const DenseTensor& w_embed,
                          const DenseTensor& pos_embed, SopLedger* ledger) {
    if (frames.shape().rank() != 5) {
        throw ShapeError("frames must be [T0,B,n,H,W], got " + frames.shape().str());
    }
    const std::size_t T0 = frames.shape()[0], B = frames.shape()[1], n = frames.shape()[2], H = frames.shape()[3],
                      W = frames.shape()[4];
    if (T0 != 1 && T0 != steps) {
        throw ConfigError("frames carry " + std::to_string(T0) + " steps; expected 1 or " + std::to_string(steps));
    }
    if (patch == 0 || H % patch || W % patch) {
        throw ShapeError("frame size " + std::to_string(H) + "x" + std::to_string(W) + " not divisible by patch " +
                         std::to_string(patch));
    }
    const std::size_t gh = H / patch, gw = W / patch, N = gh * gw, F = n * patch * patch;
    if (w_embed.shape().rank() != 2 || w_embed.shape()[0] != F) {
        throw ShapeError("patch weights " + w_embed.shape().str() + " do not take " + std::to_string(F) + " inputs");
    }
    const std::size_t D = w_embed.shape()[1];
    if (pos_embed.shape().rank() != 2 || pos_embed.shape()[0] != N || pos_embed.shape()[1] != D) {
        throw ShapeError("position embedding " + pos_embed.shape().str() + " does not match " + std::to_string(N) +
                         " tokens of width " + std::to_string(D));
    }
    // Static frames are repeated over the simulation steps before projection.
    std::vector<float> rows(steps * B * N * F);
    auto fv = frames.data();
    for (std::size_t t = 0; t < steps; ++t) {
        const std::size_t ts = T0 == 1 ? 0 : t;
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t ph = 0; ph < gh; ++ph) {
                for (std::size_t pw = 0; pw < gw; ++pw) {
                    float* dst = rows.data() + (((t * B + b) * N) + ph * gw + pw) * F;
                    std::size_t f = 0;
                    for (std::size_t c = 0; c < n; ++c) {
                        for (std::size_t dy = 0; dy < patch; ++dy) {
                            for (std::size_t dx = 0; dx < patch; ++dx) {
                                dst[f++] = fv[(((ts * B + b) * n + c) * H + ph * patch + dy) * W + pw * patch + dx];
                            }
                        }
                    }
                }
            }
        }
    }
    DenseTensor cur = dense_matmul(DenseTensor(Shape{steps * B * N, F}, std::move(rows)), w_embed, ledger, "embed");
    auto cv = cur.mutable_data();
    auto pv = pos_embed.data();
    for (std::size_t r = 0; r < steps * B; ++r) {
        for (std::size_t i = 0; i < N * D; ++i) cv[r * N * D + i] += pv[i];
    }
    return std::move(cur).reshaped(Shape{steps, B, N, D});
}

SpikeTensor patch_embed(const DenseTensor& frames, std::size_t patch, std::size_t steps, const DenseTensor& w_embed,
                        const DenseTensor& pos_embed, const LifParams& lif, SopLedger* ledger) {
    return lif_sequence(lif, patch_project(frames, patch, steps, w_embed, pos_embed, ledger));
}

SpikeTensor downsample_tokens(const SpikeTensor& tokens, std::size_t grid_h, std::size_t grid_w, std::size_t factor,
                              const DenseTensor& w_down, const LifParams& lif, SopLedger* ledger,
                              std::string_view label) {
    detail::check_rank4(tokens.shape(), "downsample_tokens");
    const std::size_t T = tokens.shape()[0], B = tokens.shape()[1], N = tokens.shape()[2], D = tokens.shape()[3];
    if (N != grid_h * grid_w || (factor != 1 && factor != 2) || grid_h % factor || grid_w % factor) {
        throw ShapeError("downsample: " + std::to_string(N) + " tokens on a " + std::to_string(grid_h) + "x" +
                         std::to_string(grid_w) + " grid with factor " + std::to_string(factor));
    }
    const std::size_t oh = grid_h / factor, ow = grid_w / factor, M = oh * ow, F = factor * factor * D;
    std::vector<std::uint8_t> rows(T * B * M * F);
    auto v = tokens.data();
    for (std::size_t tb = 0; tb < T * B; ++tb) {
        for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t x = 0; x < ow; ++x) {
                std::uint8_t* dst = rows.data() + (tb * M + y * ow + x) * F;
                for (std::size_t dy = 0; dy < factor; ++dy) {
                    for (std::size_t dx = 0; dx < factor; ++dx) {
                        const std::size_t src = (y * factor + dy) * grid_w + x * factor + dx;
                        std::copy_n(v.data() + (tb * N + src) * D, D, dst + (dy * factor + dx) * D);
                    }
                }
            }
        }
    }
    DenseTensor cur = spike_dense_matmul(SpikeTensor(Shape{T * B * M, F}, std::move(rows)), w_down, ledger, label);
    const std::size_t Ds = w_down.shape()[1];
    return lif_sequence(lif, std::move(cur).reshaped(Shape{T, B, M, Ds}));
}

namespace {

void check_insert(const ModelConfig& c, BlockId id) {
    if (id.stage < 1 || id.stage > c.stages.size() || id.block >= c.stages[id.stage - 1].blocks) {
        throw ConfigError("insertion block " + id.str() + " does not exist in this model");
    }
}

}  // namespace

PrefixState forward_prefix(const Model& model, const DenseTensor& frames, BlockId insert) {
    const ModelConfig& c = model.config();
    check_insert(c, insert);
    if (frames.shape().rank() != 5 || frames.shape()[2] != c.in_channels || frames.shape()[3] != c.input_height ||
        frames.shape()[4] != c.input_width) {
        throw ConfigError("input frames " + frames.shape().str() + " do not match the model input [T0,B," +
                          std::to_string(c.in_channels) + "," + std::to_string(c.input_height) + "," +
                          std::to_string(c.input_width) + "]");
    }
    const auto& w = model.weights();
    const SsaOptions opt = model.ssa_options();
    SopLedger ledger;
    SpikeTensor tokens = patch_embed(frames, c.patch, c.steps, w.w_embed, w.pos_embed, c.lif, &ledger);
    std::size_t gh = c.token_grid_h(0), gw = c.token_grid_w(0);
    std::vector<SpikeTensor> stage_tokens;
    for (std::size_t s = 0; s < c.stages.size(); ++s) {
        if (s > 0) {
            const std::size_t f = c.stages[s].downsample;
            tokens = downsample_tokens(tokens, gh, gw, f, *w.stages[s].w_down, c.lif, &ledger,
                                       "s" + std::to_string(s + 1) + ".down");
            gh /= f;
            gw /= f;
        }
        for (std::size_t b = 0; b < c.stages[s].blocks; ++b) {
            const BlockId id{s + 1, b};
            if (id == insert) {
                return PrefixState{std::move(tokens), gh, gw, insert, std::move(stage_tokens), std::move(ledger)};
            }
            tokens = ssa_forward(tokens, w.stages[s].blocks[b], opt, ledger, block_label(id));
        }
        stage_tokens.push_back(tokens);
    }
    throw ConfigError("insertion block " + insert.str() + " not reached");
}

ForwardResult forward_suffix(const Model& model, const PrefixState& prefix, const ReductionConfig& reduction,
                             std::size_t first_sample) {
    const ModelConfig& c = model.config();
    const auto& w = model.weights();
    const SsaOptions opt = model.ssa_options();
    const BlockId insert = prefix.insert;
    if (reduction.active() && !(reduction.insert == insert)) {
        throw ConfigError("prefix was computed for block " + insert.str() + ", reduction targets " +
                          reduction.insert.str());
    }
    const Strategy& strategy = reduction.strategy;
    const bool merging = reduction.active() && strategy.kind == StrategyKind::uncert_merge;
    const std::size_t s_ins = insert.stage - 1;
    if (merging) {
        for (std::size_t s = s_ins + 1; s < c.stages.size(); ++s) {
            if (c.stages[s].downsample != 1) {
                throw ConfigError("token merging before a downsampling stage is not supported");
            }
        }
    }

    ForwardResult r{std::nullopt, DenseTensor(Shape{1}), prefix.stage_tokens, prefix.ledger, prefix.tokens,
                    std::nullopt, std::nullopt, {}, {}};
    SopLedger& ledger = r.ledger;
    SpikeTensor tokens = prefix.tokens;
    std::size_t gh = prefix.grid_h, gw = prefix.grid_w;
    const std::size_t B = tokens.shape()[1], N = tokens.shape()[2];

    const bool want_u = (reduction.active() && strategy.needs_scores()) || reduction.record_uncertainty;
    if (want_u) {
        if (!model.head()) {
            throw ConfigError("strategy " + strategy.label() + " needs a trained head");
        }
        if (tokens.shape()[3] != model.head()->dim()) {
            throw ConfigError("head width " + std::to_string(model.head()->dim()) +
                              " does not match insertion block width " + std::to_string(tokens.shape()[3]));
        }
        r.uncertainty = token_uncertainty(tokens, *model.head());
        r.scores = scores_from_uncertainty(*r.uncertainty, strategy.lambda, strategy.score);
    }

    const std::string label = block_label(insert);
    const auto& block_w = w.stages[s_ins].blocks[insert.block];
    if (!reduction.active()) {
        tokens = ssa_forward(tokens, block_w, opt, ledger, label);
    } else {
        const std::size_t k = keep_count(N, reduction.keep_ratio);
        const DenseTensor scores = r.scores ? *r.scores : DenseTensor(Shape{B, N});
        if (merging) {
            if (k == N) {
                // Nothing to merge: every token is its own anchor.
                tokens = ssa_forward(tokens, block_w, opt, ledger, label);
            } else {
                r.merges = build_merge_assignment(scores, tokens, reduction.keep_ratio);
                const DenseTensor merged = apply_merge(tokens, r.merges, &ledger, label + ".merge");
                tokens = ssa_forward(merged, block_w, opt, ledger, label);
                gh = 1;
                gw = tokens.shape()[2];
            }
        } else {
            r.masks = build_keep_mask(scores, reduction.keep_ratio, strategy, first_sample);
            tokens = pruned_ssa(tokens, r.masks, block_w, opt, ledger, label);
        }
    }

    for (std::size_t s = s_ins; s < c.stages.size(); ++s) {
        if (s > s_ins) {
            const std::size_t f = c.stages[s].downsample;
            tokens = downsample_tokens(tokens, gh, gw, f, *w.stages[s].w_down, c.lif, &ledger,
                                       "s" + std::to_string(s + 1) + ".down");
            gh /= f;
            gw /= f;
        }
        const std::size_t first = s == s_ins ? insert.block + 1 : 0;
        for (std::size_t b = first; b < c.stages[s].blocks; ++b) {
            tokens = ssa_forward(tokens, w.stages[s].blocks[b], opt, ledger, block_label(BlockId{s + 1, b}));
        }
        r.stage_tokens.push_back(tokens);
    }

    r.features = pool_features(tokens);
    if (model.head()) r.logits = token_logits(r.features, *model.head());
    return r;
}

ForwardResult forward_full(const Model& model, const DenseTensor& frames, const ReductionConfig& reduction,
                           std::size_t first_sample) {
    return forward_suffix(model, forward_prefix(model, frames, reduction.insert), reduction, first_sample);
}

}  // namespace spk
