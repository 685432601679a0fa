// SPDX-License-Identifier: Apache-2.0
#include "spk/uncertainty.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

#include "spk/tensor_ops.hpp"

namespace spk {

double softplus(double l) {
    if (l > 0.0) return l + std::log1p(std::exp(-l));
    return std::log1p(std::exp(l));
}

DenseTensor evidence_from_logits(const DenseTensor& logits) {
    logits.check_finite();
    std::vector<float> e(logits.size());
    auto l = logits.data();
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = static_cast<float>(softplus(l[i]));
    return DenseTensor(logits.shape(), std::move(e));
}

DenseTensor uncertainty_from_evidence(const DenseTensor& evidence) {
    const auto& dims = evidence.shape().dims();
    const std::size_t C = dims.back();
    if (C < 2) {
        throw ArgumentError("uncertainty needs at least 2 classes, got " + std::to_string(C));
    }
    const std::size_t rows = evidence.size() / C;
    auto e = evidence.data();
    std::vector<float> u(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            const float ev = e[r * C + c];
            if (ev < 0.0f) {
                throw ContractError("negative evidence " + std::to_string(ev));
            }
            s += static_cast<double>(ev) + 1.0;
        }
        u[r] = static_cast<float>(static_cast<double>(C) / s);
    }
    std::vector<std::size_t> od(dims.begin(), dims.end() - 1);
    if (od.empty()) od.push_back(1);
    return DenseTensor(Shape(od), std::move(u));
}

TokenStats trajectory_stats(std::span<const double> trajectory) {
    if (trajectory.empty()) {
        throw ArgumentError("empty uncertainty trajectory");
    }
    const MeanStd ms = reduce_mean_std(trajectory);
    return {ms.mean, ms.std};
}

double importance_score(const TokenStats& stats, double lambda) {
    if (!(lambda >= 0.0)) {
        throw ArgumentError("lambda must be non-negative");
    }
    return stats.mu + lambda * stats.sigma;
}

std::string_view to_string(ScoreMode mode) {
    switch (mode) {
        case ScoreMode::uncert: return "uncert";
        case ScoreMode::mean_only: return "mean";
        case ScoreMode::std_only: return "std";
        case ScoreMode::last_step: return "last";
    }
    return "uncert";
}

ScoreMode parse_score_mode(std::string_view name) {
    if (name == "uncert") return ScoreMode::uncert;
    if (name == "mean") return ScoreMode::mean_only;
    if (name == "std") return ScoreMode::std_only;
    if (name == "last") return ScoreMode::last_step;
    throw ArgumentError("unknown score mode '" + std::string(name) + "' (expected uncert|mean|std|last)");
}

DenseTensor token_uncertainty(const SpikeTensor& tokens, const HeadWeights& head) {
    if (tokens.shape().rank() != 4) {
        throw ShapeError("token_uncertainty expects [T,B,N,D], got " + tokens.shape().str());
    }
    return uncertainty_from_evidence(evidence_from_logits(token_logits(tokens, head)));
}

DenseTensor scores_from_uncertainty(const DenseTensor& u, double lambda, ScoreMode mode) {
    if (u.shape().rank() != 3) {
        throw ShapeError("scores_from_uncertainty expects [T,B,N], got " + u.shape().str());
    }
    if (!(lambda >= 0.0)) {
        throw ArgumentError("lambda must be non-negative");
    }
    const std::size_t T = u.shape()[0], B = u.shape()[1], N = u.shape()[2];
    auto uv = u.data();
    std::vector<float> out(B * N);
    std::vector<double> traj(T);
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t t = 0; t < T; ++t) traj[t] = uv[(t * B + b) * N + n];
            const TokenStats st = trajectory_stats(traj);
            double score = 0.0;
            switch (mode) {
                case ScoreMode::uncert: score = importance_score(st, lambda); break;
                case ScoreMode::mean_only: score = st.mu; break;
                case ScoreMode::std_only: score = st.sigma; break;
                case ScoreMode::last_step: score = traj.back(); break;
            }
            out[b * N + n] = static_cast<float>(score);
        }
    }
    return DenseTensor(Shape{B, N}, std::move(out));
}

DenseTensor score_tokens(const SpikeTensor& tokens, const HeadWeights& head, std::size_t num_classes, double lambda,
                         ScoreMode mode) {
    if (head.classes() != num_classes) {
        throw ShapeError("score_tokens: head has " + std::to_string(head.classes()) + " classes, expected " +
                         std::to_string(num_classes));
    }
    return scores_from_uncertainty(token_uncertainty(tokens, head), lambda, mode);
}

void write_uncertainty_rows(std::ostream& out, const DenseTensor& u, std::size_t first_sample) {
    const std::size_t T = u.shape()[0], B = u.shape()[1], N = u.shape()[2];
    char buf[96];
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t t = 0; t < T; ++t) {
                std::snprintf(buf, sizeof(buf), "%zu,%zu,%zu,%.6f\n", first_sample + b, n, t,
                              static_cast<double>(u.data()[(t * B + b) * N + n]));
                out << buf;
            }
        }
    }
}

}  // namespace spk
