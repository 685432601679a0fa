// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spk/efficiency.hpp"
#include "spk/head.hpp"
#include "spk/neuron.hpp"
#include "spk/selection.hpp"
#include "spk/ssa.hpp"

namespace spk {

struct StageConfig {
    std::size_t channels = 32;
    std::size_t blocks = 1;
    std::size_t downsample = 1;  // 1 or 2; the first stage must use 1
};

// Block address: 1-based stage, 0-based block within the stage ("3.1" = stage 3, second block).
struct BlockId {
    std::size_t stage = 3;
    std::size_t block = 1;

    std::string str() const;
    static BlockId parse(std::string_view text);
    friend bool operator==(const BlockId&, const BlockId&) = default;
};

struct ModelConfig {
    std::size_t steps = 4;
    std::vector<StageConfig> stages = {{64, 1, 1}, {64, 1, 1}, {64, 2, 1}};
    std::size_t num_classes = 4;
    LifParams lif;
    std::uint64_t seed = 1;

    std::size_t in_channels = 2;
    std::size_t input_height = 8;
    std::size_t input_width = 8;
    std::size_t patch = 1;

    int attn_shift = 6;
    AttentionCounting counting = AttentionCounting::structural;

    // Uniform init U(-a, a) with a = gain * sqrt(3 / fan_in); pos_gain is the half-width of
    // the absolute position current added at patch embedding.
    float embed_gain = 2.0f;
    float pos_gain = 2.0f;
    float down_gain = 2.0f;
    float qkv_gain = 1.0f;
    float proj_gain = 0.5f;

    void validate() const;
    std::size_t token_grid_h(std::size_t stage) const;  // 0-based stage
    std::size_t token_grid_w(std::size_t stage) const;
    std::size_t tokens(std::size_t stage) const { return token_grid_h(stage) * token_grid_w(stage); }
    std::size_t final_dim() const { return stages.back().channels; }
};

struct StageWeights {
    std::optional<DenseTensor> w_down;  // absent for the first stage
    std::vector<SsaBlockWeights> blocks;
};

struct ModelWeights {
    DenseTensor w_embed;    // [n*P*P, D_1]
    DenseTensor pos_embed;  // [N_1, D_1]
    std::vector<StageWeights> stages;
};

class Model {
public:
    Model(ModelConfig config, ModelWeights weights, std::optional<HeadWeights> head = std::nullopt);

    // Deterministic pseudo-random weights from config.seed.
    static Model initialize(const ModelConfig& config);

    const ModelConfig& config() const noexcept { return config_; }
    ModelConfig& mutable_config() noexcept { return config_; }
    const ModelWeights& weights() const noexcept { return weights_; }
    const std::optional<HeadWeights>& head() const noexcept { return head_; }
    void set_head(HeadWeights head);

    SsaOptions ssa_options() const { return {config_.lif, config_.attn_shift, config_.counting}; }

private:
    void validate() const;

    ModelConfig config_;
    ModelWeights weights_;
    std::optional<HeadWeights> head_;
};

// Patch projection currents [T,B,N,D] before the LIF. Frames are [T0,B,n,H,W] with T0 = 1
// (repeated over `steps`) or T0 = steps.
DenseTensor patch_project(const DenseTensor& frames, std::size_t patch, std::size_t steps, const DenseTensor& w_embed,
                          const DenseTensor& pos_embed, SopLedger* ledger = nullptr);

SpikeTensor patch_embed(const DenseTensor& frames, std::size_t patch, std::size_t steps, const DenseTensor& w_embed,
                        const DenseTensor& pos_embed, const LifParams& lif, SopLedger* ledger = nullptr);

// Stage transition: optional 2x2 token merge (channel concat), linear to the stage width, LIF.
SpikeTensor downsample_tokens(const SpikeTensor& tokens, std::size_t grid_h, std::size_t grid_w,
                              std::size_t factor, const DenseTensor& w_down, const LifParams& lif,
                              SopLedger* ledger = nullptr, std::string_view label = "down");

struct ReductionConfig {
    Strategy strategy;
    double keep_ratio = 1.0;
    BlockId insert;
    // Compute U at the insertion block even when the strategy does not need it.
    bool record_uncertainty = false;

    bool active() const { return strategy.kind != StrategyKind::none; }
};

// Activations entering a given block, reusable across reduction settings.
struct PrefixState {
    SpikeTensor tokens;  // [T,B,N,D] input of the insertion block
    std::size_t grid_h = 0;
    std::size_t grid_w = 0;
    BlockId insert;
    std::vector<SpikeTensor> stage_tokens;  // outputs of the stages completed before `insert`
    SopLedger ledger;
};

struct ForwardResult {
    std::optional<DenseTensor> logits;  // [B,C], present when the model has a head
    DenseTensor features;               // pooled final tokens [B,D]
    std::vector<SpikeTensor> stage_tokens;
    SopLedger ledger;
    std::optional<SpikeTensor> insertion_tokens;
    std::optional<DenseTensor> uncertainty;  // U[T,B,N] at the insertion block
    std::optional<DenseTensor> scores;       // [B,N]
    std::vector<KeepMask> masks;
    std::vector<MergeAssignment> merges;
};

std::string block_label(BlockId id);

PrefixState forward_prefix(const Model& model, const DenseTensor& frames, BlockId insert);

// `first_sample` is the dataset index of batch row 0 (seeds the random baseline).
ForwardResult forward_suffix(const Model& model, const PrefixState& prefix, const ReductionConfig& reduction,
                             std::size_t first_sample = 0);

ForwardResult forward_full(const Model& model, const DenseTensor& frames, const ReductionConfig& reduction = {},
                           std::size_t first_sample = 0);

}  // namespace spk
