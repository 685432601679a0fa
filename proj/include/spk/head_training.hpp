// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "spk/head.hpp"
#include "spk/tensor.hpp"
#include "spk/tensor_ops.hpp"

namespace spk {

struct RidgeConfig {
    double l2 = 1e-3;
};

// Mean over time and tokens: [T,B,N,D] -> [B,D].
DenseTensor pool_features(const SpikeTensor& tokens);

// Ridge regression onto arbitrary targets Y [M,C] with an unpenalized, centered intercept:
// (Xc^T Xc + l2 I) W = Xc^T Yc, b = mean(Y) - mean(X) W. Solved by Cholesky in double precision.
HeadWeights fit_ridge_targets(const DenseTensor& features, const DenseTensor& targets, const RidgeConfig& cfg);

// One-hot targets from class labels.
HeadWeights fit_ridge(const DenseTensor& features, std::span<const int> labels, std::size_t num_classes,
                      const RidgeConfig& cfg = {});

// Index of the largest value; ties go to the smaller index.
std::size_t argmax_first(std::span<const float> values);

// Fraction of rows whose label is among the k best logits (ties ranked by smaller index).
double topk_accuracy(const DenseTensor& logits, std::span<const int> labels, std::size_t k);
inline double top1_accuracy(const DenseTensor& logits, std::span<const int> labels) {
    return topk_accuracy(logits, labels, 1);
}

}  // namespace spk
