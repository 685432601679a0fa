// SPDX-License-Identifier: Apache-2.0
#include "spk/head_training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace spk {

DenseTensor pool_features(const SpikeTensor& tokens) {
    if (tokens.shape().rank() != 4) {
        throw ShapeError("pool_features expects [T,B,N,D], got " + tokens.shape().str());
    }
    const std::size_t T = tokens.shape()[0], B = tokens.shape()[1], N = tokens.shape()[2], D = tokens.shape()[3];
    std::vector<std::uint64_t> counts(B * D, 0);
    auto v = tokens.data();
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t n = 0; n < N; ++n) {
                const std::uint8_t* row = v.data() + ((t * B + b) * N + n) * D;
                for (std::size_t d = 0; d < D; ++d) counts[b * D + d] += row[d];
            }
        }
    }
    const double denom = static_cast<double>(T * N);
    std::vector<float> out(B * D);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(static_cast<double>(counts[i]) / denom);
    return DenseTensor(Shape{B, D}, std::move(out));
}

HeadWeights fit_ridge_targets(const DenseTensor& features, const DenseTensor& targets, const RidgeConfig& cfg) {
    if (features.shape().rank() != 2 || targets.shape().rank() != 2 || features.shape()[0] != targets.shape()[0]) {
        throw ShapeError("fit_ridge: features " + features.shape().str() + " vs targets " + targets.shape().str());
    }
    if (!(cfg.l2 >= 0.0) || !std::isfinite(cfg.l2)) {
        throw ArgumentError("ridge l2 must be a finite non-negative value");
    }
    const std::size_t M = features.shape()[0], D = features.shape()[1], C = targets.shape()[1];
    auto x = features.data();
    auto y = targets.data();

    std::vector<double> xm(D, 0.0), ym(C, 0.0);
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t d = 0; d < D; ++d) xm[d] += x[m * D + d];
        for (std::size_t c = 0; c < C; ++c) ym[c] += y[m * C + c];
    }
    for (double& v : xm) v /= static_cast<double>(M);
    for (double& v : ym) v /= static_cast<double>(M);

    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(D, D), r = Eigen::MatrixXd::Zero(D, C);
    Eigen::VectorXd xc(D);
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t d = 0; d < D; ++d) xc[d] = x[m * D + d] - xm[d];
        for (std::size_t i = 0; i < D; ++i) {
            if (xc[i] == 0.0) continue;
            for (std::size_t j = 0; j <= i; ++j) g(i, j) += xc[i] * xc[j];
            for (std::size_t c = 0; c < C; ++c) r(i, c) += xc[i] * (y[m * C + c] - ym[c]);
        }
    }
    g.diagonal().array() += cfg.l2;
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();

    const Eigen::LLT<Eigen::MatrixXd> llt(g);
    const double tol = std::max(g.diagonal().cwiseAbs().maxCoeff(), 1.0) * 1e-12;
    const Eigen::VectorXd pivots = llt.matrixL().toDenseMatrix().diagonal();
    if (llt.info() != Eigen::Success || !((pivots.array() * pivots.array()) > tol).all()) {
        throw NumericalError("ridge system is singular; use a positive l2");
    }
    const Eigen::MatrixXd w = llt.solve(r);

    std::vector<float> wf(D * C), bf(C);
    for (std::size_t c = 0; c < C; ++c) {
        double b = ym[c];
        for (std::size_t d = 0; d < D; ++d) b -= xm[d] * w(d, c);
        bf[c] = static_cast<float>(b);
    }
    for (std::size_t d = 0; d < D; ++d) {
        for (std::size_t c = 0; c < C; ++c) wf[d * C + c] = static_cast<float>(w(d, c));
    }
    return HeadWeights{DenseTensor(Shape{D, C}, std::move(wf)), DenseTensor(Shape{C}, std::move(bf))};
}

HeadWeights fit_ridge(const DenseTensor& features, std::span<const int> labels, std::size_t num_classes,
                      const RidgeConfig& cfg) {
    if (features.shape().rank() != 2 || labels.size() != features.shape()[0]) {
        throw ShapeError("fit_ridge: " + std::to_string(labels.size()) + " labels for features " +
                         features.shape().str());
    }
    if (labels.empty()) {
        throw ArgumentError("fit_ridge needs at least one sample");
    }
    std::vector<float> y(labels.size() * num_classes, 0.0f);
    for (std::size_t m = 0; m < labels.size(); ++m) {
        if (labels[m] < 0 || static_cast<std::size_t>(labels[m]) >= num_classes) {
            throw ArgumentError("label " + std::to_string(labels[m]) + " outside [0, " + std::to_string(num_classes) +
                                ")");
        }
        y[m * num_classes + static_cast<std::size_t>(labels[m])] = 1.0f;
    }
    return fit_ridge_targets(features, DenseTensor(Shape{labels.size(), num_classes}, std::move(y)), cfg);
}

std::size_t argmax_first(std::span<const float> values) {
    if (values.empty()) throw ArgumentError("argmax of empty list");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

double topk_accuracy(const DenseTensor& logits, std::span<const int> labels, std::size_t k) {
    if (logits.shape().rank() != 2 || logits.shape()[0] != labels.size()) {
        throw ShapeError("accuracy: logits " + logits.shape().str() + " vs " + std::to_string(labels.size()) +
                         " labels");
    }
    if (labels.empty()) throw ArgumentError("accuracy over an empty set");
    const std::size_t C = logits.shape()[1];
    k = std::min(k, C);
    std::size_t hits = 0;
    for (std::size_t m = 0; m < labels.size(); ++m) {
        auto row = logits.data().subspan(m * C, C);
        const auto top = topk_indices(row, k);
        hits += std::find(top.begin(), top.end(), static_cast<std::size_t>(labels[m])) != top.end();
    }
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace spk
