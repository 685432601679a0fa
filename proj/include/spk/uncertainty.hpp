// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <span>
#include <string_view>

#include "spk/head.hpp"
#include "spk/tensor.hpp"

namespace spk {

inline constexpr double kDefaultLambda = 0.9;

// Overflow-safe log(1 + exp(l)).
double softplus(double l);

// Elementwise softplus: [..., C] -> [..., C], every value >= 0.
DenseTensor evidence_from_logits(const DenseTensor& logits);

// alpha = e + 1, S = sum_c alpha, U = C / S over the last axis: [..., C] -> [...] (rank-1 input gives [1]).
DenseTensor uncertainty_from_evidence(const DenseTensor& evidence);

struct TokenStats {
    double mu = 0.0;
    double sigma = 0.0;
};

// Temporal mean and population standard deviation of one token's U trajectory.
TokenStats trajectory_stats(std::span<const double> trajectory);

// mu + lambda * sigma
double importance_score(const TokenStats& stats, double lambda);

// Which statistic of the trajectory ranks tokens.
enum class ScoreMode {
    uncert,     // mu + lambda * sigma
    mean_only,  // mu
    std_only,   // sigma
    last_step,  // U at the final timestep
};

std::string_view to_string(ScoreMode mode);
ScoreMode parse_score_mode(std::string_view name);

// Per-timestep token uncertainty U[t,b,n] from tokens [T,B,N,D] through the head.
DenseTensor token_uncertainty(const SpikeTensor& tokens, const HeadWeights& head);

// Importance scores [B,N]; each sample's scores depend only on its own tokens.
DenseTensor score_tokens(const SpikeTensor& tokens, const HeadWeights& head, std::size_t num_classes, double lambda,
                         ScoreMode mode = ScoreMode::uncert);

// Reduces a U[T,B,N] tensor to scores [B,N].
DenseTensor scores_from_uncertainty(const DenseTensor& u, double lambda, ScoreMode mode = ScoreMode::uncert);

// CSV rows `sample,token,t,U` (no header) for U[T,B,N]; sample ids start at first_sample.
void write_uncertainty_rows(std::ostream& out, const DenseTensor& u, std::size_t first_sample);

}  // namespace spk
