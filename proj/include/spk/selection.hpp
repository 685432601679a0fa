// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spk/ssa.hpp"
#include "spk/uncertainty.hpp"

namespace spk {

enum class StrategyKind { none, uncert_prune, uncert_merge, random_prune, low_uncert_prune };

struct Strategy {
    StrategyKind kind = StrategyKind::none;
    double lambda = kDefaultLambda;
    std::uint64_t seed = 0;  // random_prune only
    ScoreMode score = ScoreMode::uncert;

    // "uncert_prune", or "uncert_prune:std" for a non-default score mode.
    std::string label() const;
    bool needs_scores() const;
};

std::string_view to_string(StrategyKind kind);
// Accepts both "uncert-prune" and "uncert_prune", optionally suffixed ":<score mode>".
Strategy parse_strategy(std::string_view text);

// floor(r * N), with a 1e-9 guard so ratios such as 0.29 * 100 do not round down to 28.
std::size_t keep_count(std::size_t n, double ratio);

// Tokens kept for one sample; the same indices are used at every timestep.
struct KeepMask {
    std::vector<std::size_t> keep_indices;  // ascending
    std::size_t n_total = 0;
    double ratio = 1.0;
};

// One mask per row of scores [B,N]. `first_sample` is the dataset index of row 0 and seeds
// the random baseline so masks do not depend on how samples are batched. For a fixed seed
// the random masks are nested across ratios.
std::vector<KeepMask> build_keep_mask(const DenseTensor& scores, double ratio, const Strategy& strategy,
                                      std::size_t first_sample = 0);

// SSA over the kept tokens only; updated rows are scattered back and pruned rows pass through.
SpikeTensor pruned_ssa(const SpikeTensor& x, std::span<const KeepMask> masks, const SsaBlockWeights& w,
                       const SsaOptions& opt, SopLedger& ledger, std::string_view label);

struct MergeAssignment {
    std::vector<std::size_t> anchors;               // ascending
    std::vector<std::size_t> assign;                // token -> anchor token id (anchors map to themselves)
    std::vector<std::vector<std::size_t>> members;  // per anchor, ascending, includes the anchor
    std::vector<std::vector<double>> weights;       // aligned with members, each sums to 1
    std::size_t n_total = 0;
};

// Anchors are the top floor(rN) tokens by score. Every other token joins the anchor with the
// highest cosine similarity of time-averaged features (ties -> smaller anchor, zero vector -> 0).
// Weights are a softmax of similarity to the anchor over its members, with self-similarity 1.
std::vector<MergeAssignment> build_merge_assignment(const DenseTensor& scores, const SpikeTensor& features,
                                                    double ratio);

// Per timestep, merged token i = sum_j w_ij z_j: [T,B,N,D] -> [T,B,N_keep,D].
DenseTensor apply_merge(const SpikeTensor& x, std::span<const MergeAssignment> assignments,
                        SopLedger* ledger = nullptr, std::string_view label = "merge");

// CSV rows `sample,token,kept,anchor` (no header). Pruned tokens report anchor -1.
void write_mask_rows(std::ostream& out, std::span<const KeepMask> masks, std::size_t first_sample);
void write_merge_rows(std::ostream& out, std::span<const MergeAssignment> merges, std::size_t first_sample);

}  // namespace spk
