// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spk/tensor.hpp"

namespace spk {

struct SyntheticSpec {
    std::size_t grid = 8;
    std::size_t classes = 4;
    std::size_t signature_tokens = 4;
    double p_signal = 0.9;
    double p_background = 0.1;
    std::size_t channels = 2;
    std::size_t steps = 4;
    std::size_t train_samples = 512;
    std::size_t test_samples = 256;

    void validate() const;
    std::size_t tokens() const { return grid * grid; }
};

struct Dataset {
    SpikeTensor frames;  // [S,T,n,g,g]
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
};

struct SyntheticData {
    Dataset train;
    Dataset test;
    std::vector<std::vector<std::size_t>> signatures;  // per class, ascending token ids (y*grid + x)
};

// Per-class signature positions from a seeded permutation; disjoint across classes whenever
// classes * signature_tokens <= grid^2.
std::vector<std::vector<std::size_t>> signature_positions(const SyntheticSpec& spec, std::uint64_t seed);

SyntheticData synth_dataset(const SyntheticSpec& spec, std::uint64_t seed);

// Samples [first, first+count) as model input frames [T,count,n,g,g].
DenseTensor batch_frames(const Dataset& data, std::size_t first, std::size_t count);

// Per-token spike counts over time and channels for one sample: [grid^2].
std::vector<std::size_t> token_counts(const Dataset& data, std::size_t sample);

// Exact posterior argmax under the generative model (uniform class prior; ties -> smaller class).
int bayes_classify(const SyntheticSpec& spec, std::span<const std::vector<std::size_t>> signatures,
                   std::span<const std::size_t> counts);

}  // namespace spk
