// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "spk/evaluate.hpp"
#include "spk/kv_file.hpp"
#include "spk/selection.hpp"

namespace spk {

struct SweepConfig {
    std::vector<Strategy> strategies = {
        {StrategyKind::uncert_prune}, {StrategyKind::random_prune}, {StrategyKind::low_uncert_prune},
        {StrategyKind::uncert_merge}};
    std::vector<double> keep_ratios = {1.0, 0.8, 0.6, 0.4, 0.2};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    double lambda = kDefaultLambda;
    BlockId insert;
    SyntheticSpec data;
    ModelConfig model;
    RidgeConfig ridge;
    std::size_t batch = kDefaultBatch;

    void validate() const;

    // Keys: strategies, keep_ratios, seeds, lambda, insert_block, batch, l2, plus the model
    // and data keys. Unknown keys are rejected.
    static SweepConfig from_kv(const KvFile& kv);
    KvFile to_kv() const;
};

struct ResultRow {
    std::string strategy;
    double keep_ratio = 1.0;
    std::uint64_t seed = 0;
    double acc1 = 0.0;
    double acc5 = 0.0;
    std::uint64_t block_sops = 0;  // spike accumulates inside the insertion block
    double energy_mj = 0.0;        // whole network over the test split
};

// A seeded experiment: dataset, initialized model with trained head, cached test prefix.
struct SeedContext {
    std::uint64_t seed;
    SyntheticData data;
    Model model;
    PrefixCache cache;
};

SeedContext prepare_seed(const SweepConfig& cfg, std::uint64_t seed);

ResultRow run_cell(const SweepConfig& cfg, const SeedContext& ctx, const Strategy& strategy, double keep_ratio);

// One row per (strategy, ratio, seed), sorted by strategy label, ratio, then seed.
std::vector<ResultRow> run_sweep(const SweepConfig& cfg);

void write_sweep_csv(std::ostream& out, const std::vector<ResultRow>& rows, std::size_t num_classes);

struct SopRow {
    double keep_ratio = 1.0;
    std::uint64_t block_sops = 0;
    std::uint64_t block_macs = 0;
    std::uint64_t block_total = 0;
    double reduction_pct = 0.0;  // block_total relative to keep ratio 1.0
    double energy_mj = 0.0;      // whole network
};

// Ratios are reported in the given order; the 1.0 reference is always computed.
std::vector<SopRow> sop_report(const Model& model, const PrefixCache& cache, const Strategy& strategy,
                               std::span<const double> keep_ratios);

void write_sop_csv(std::ostream& out, const std::vector<SopRow>& rows);

}  // namespace spk
