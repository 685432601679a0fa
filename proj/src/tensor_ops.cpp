// SPDX-License-Identifier: Apache-2.0
#include "spk/tensor_ops.hpp"

#include <cmath>
#include <numeric>

namespace spk {

SpikeTensor flatten_spatial(const SpikeTensor& x) {
    if (x.shape().rank() != 5) {
        throw ShapeError("flatten_spatial expects [T,B,C,H,W], got " + x.shape().str());
    }
    const std::size_t T = x.shape()[0], B = x.shape()[1], C = x.shape()[2], H = x.shape()[3], W = x.shape()[4];
    const std::size_t N = H * W;
    std::vector<std::uint8_t> out(x.size());
    auto src = x.data();
    for (std::size_t tb = 0; tb < T * B; ++tb) {
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t n = 0; n < N; ++n) {
                out[(tb * N + n) * C + c] = src[(tb * C + c) * N + n];
            }
        }
    }
    return SpikeTensor(Shape{T, B, N, C}, std::move(out));
}

std::vector<std::size_t> topk_indices(std::span<const float> scores, std::size_t k) {
    if (k > scores.size()) {
        throw ArgumentError("topk: k=" + std::to_string(k) + " exceeds " + std::to_string(scores.size()) + " scores");
    }
    for (float s : scores) {
        if (!std::isfinite(s)) throw ArgumentError("topk: non-finite score");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return a < b;
                      });
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

namespace {

void check_matmul(const Shape& a, const Shape& w) {
    if (a.rank() != 2 || w.rank() != 2 || a[1] != w[0]) {
        throw ShapeError("matmul shape mismatch: " + a.str() + " x " + w.str());
    }
}

}  // namespace

DenseTensor spike_dense_matmul(const SpikeTensor& a, const DenseTensor& w, SopLedger* ledger, std::string_view label) {
    check_matmul(a.shape(), w.shape());
    const std::size_t M = a.shape()[0], K = a.shape()[1], P = w.shape()[1];
    std::vector<float> out(M * P, 0.0f);
    auto av = a.data();
    auto wv = w.data();
    std::uint64_t nnz = 0;
    for (std::size_t m = 0; m < M; ++m) {
        float* row = out.data() + m * P;
        for (std::size_t k = 0; k < K; ++k) {
            if (!av[m * K + k]) continue;
            ++nnz;
            const float* wr = wv.data() + k * P;
            for (std::size_t p = 0; p < P; ++p) row[p] += wr[p];
        }
    }
    if (ledger) ledger->credit_accumulates(label, count_linear(nnz, P));
    return DenseTensor(Shape{M, P}, std::move(out));
}

DenseTensor dense_matmul(const DenseTensor& a, const DenseTensor& w, SopLedger* ledger, std::string_view label) {
    check_matmul(a.shape(), w.shape());
    const std::size_t M = a.shape()[0], K = a.shape()[1], P = w.shape()[1];
    std::vector<float> out(M * P, 0.0f);
    auto av = a.data();
    auto wv = w.data();
    std::uint64_t nnz = 0;
    for (std::size_t m = 0; m < M; ++m) {
        float* row = out.data() + m * P;
        for (std::size_t k = 0; k < K; ++k) {
            const float x = av[m * K + k];
            if (x == 0.0f) continue;
            ++nnz;
            const float* wr = wv.data() + k * P;
            for (std::size_t p = 0; p < P; ++p) row[p] += x * wr[p];
        }
    }
    if (ledger) ledger->credit_macs(label, checked_mul(nnz, P));
    return DenseTensor(Shape{M, P}, std::move(out));
}

MeanStd reduce_mean_std(std::span<const double> x) {
    if (x.empty()) {
        throw ArgumentError("reduce_mean_std needs at least one value");
    }
    const double n = static_cast<double>(x.size());
    double sum = 0.0;
    for (double v : x) sum += v;
    const double mean = sum / n;
    double sq = 0.0;
    for (double v : x) sq += (v - mean) * (v - mean);
    return {mean, std::sqrt(sq / n)};
}

MeanStd reduce_mean_std(std::span<const float> x) {
    std::vector<double> d(x.begin(), x.end());
    return reduce_mean_std(std::span<const double>(d));
}

}  // namespace spk
