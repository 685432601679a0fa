// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "spk/head_training.hpp"
#include "spk/model.hpp"
#include "spk/synth.hpp"

namespace spk {

constexpr std::size_t kDefaultBatch = 64;

struct EvalResult {
    double acc1 = 0.0;
    double acc5 = 0.0;  // top-5 when C >= 5, otherwise equal to acc1
    DenseTensor logits{Shape{1}};  // [S,C]
    SopLedger ledger;
};

// Pooled final-stage features of every sample [S,D], unreduced.
DenseTensor dataset_features(const Model& model, const Dataset& data, std::size_t batch = kDefaultBatch);

// Fit the ridge head on pooled training features and attach it to the model.
void train_head(Model& model, const Dataset& train, const RidgeConfig& ridge = {},
                std::size_t batch = kDefaultBatch);

// Activations entering the insertion block, cached per batch.
struct PrefixCache {
    std::vector<PrefixState> batches;
    std::vector<std::size_t> first;  // dataset index of each batch's row 0
    std::vector<int> labels;
};

PrefixCache build_prefix_cache(const Model& model, const Dataset& data, BlockId insert,
                               std::size_t batch = kDefaultBatch);

EvalResult evaluate_cached(const Model& model, const PrefixCache& cache, const ReductionConfig& reduction);

EvalResult evaluate(const Model& model, const Dataset& data, const ReductionConfig& reduction = {},
                    std::size_t batch = kDefaultBatch);

// Top-1 accuracy of the unreduced model; requires a head.
double eval_accuracy(const Model& model, const Dataset& data);

}  // namespace spk
