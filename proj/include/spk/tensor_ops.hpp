// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <span>
#include <string_view>
#include <vector>

#include "spk/efficiency.hpp"
#include "spk/tensor.hpp"

namespace spk {

// [T,B,C,H,W] -> [T,B,H*W,C]; token (h,w) lands at index h*W + w.
SpikeTensor flatten_spatial(const SpikeTensor& x);

namespace detail {

inline void check_token_indices(std::span<const std::size_t> idx, std::size_t n) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= n) {
            throw IndexError("token index " + std::to_string(idx[i]) + " out of range for " + std::to_string(n) +
                             " tokens");
        }
        if (i > 0 && idx[i] <= idx[i - 1]) {
            throw IndexError("token indices must be strictly increasing");
        }
    }
}

inline void check_rank4(const Shape& s, const char* what) {
    if (s.rank() != 4) {
        throw ShapeError(std::string(what) + " expects a [T,B,N,D] tensor, got " + s.str());
    }
}

}  // namespace detail

// Rows idx of every (t,b) slice, in index order: [T,B,N,D] -> [T,B,|idx|,D].
template <typename Tensor>
Tensor gather_tokens(const Tensor& x, std::span<const std::size_t> idx) {
    detail::check_rank4(x.shape(), "gather_tokens");
    const std::size_t T = x.shape()[0], B = x.shape()[1], N = x.shape()[2], D = x.shape()[3];
    if (idx.empty()) {
        throw ArgumentError("gather_tokens needs at least one index");
    }
    detail::check_token_indices(idx, N);
    const std::size_t K = idx.size();
    std::vector<typename Tensor::value_type> out(T * B * K * D);
    auto src = x.data();
    for (std::size_t tb = 0; tb < T * B; ++tb) {
        for (std::size_t k = 0; k < K; ++k) {
            auto first = src.begin() + static_cast<std::ptrdiff_t>((tb * N + idx[k]) * D);
            std::copy(first, first + static_cast<std::ptrdiff_t>(D), out.begin() + static_cast<std::ptrdiff_t>((tb * K + k) * D));
        }
    }
    return Tensor(Shape{T, B, K, D}, std::move(out));
}

// Copy of `base` with rows idx replaced by the rows of `src`.
template <typename Tensor>
Tensor scatter_tokens(const Tensor& src, std::span<const std::size_t> idx, const Tensor& base) {
    detail::check_rank4(src.shape(), "scatter_tokens");
    detail::check_rank4(base.shape(), "scatter_tokens");
    const std::size_t T = base.shape()[0], B = base.shape()[1], N = base.shape()[2], D = base.shape()[3];
    const std::size_t K = src.shape()[2];
    if (src.shape()[0] != T || src.shape()[1] != B || src.shape()[3] != D || idx.size() != K) {
        throw ShapeError("scatter_tokens: source " + src.shape().str() + " with " + std::to_string(idx.size()) +
                         " indices does not fit base " + base.shape().str());
    }
    detail::check_token_indices(idx, N);
    std::vector<typename Tensor::value_type> out(base.data().begin(), base.data().end());
    auto s = src.data();
    for (std::size_t tb = 0; tb < T * B; ++tb) {
        for (std::size_t k = 0; k < K; ++k) {
            auto first = s.begin() + static_cast<std::ptrdiff_t>((tb * K + k) * D);
            std::copy(first, first + static_cast<std::ptrdiff_t>(D), out.begin() + static_cast<std::ptrdiff_t>((tb * N + idx[k]) * D));
        }
    }
    return Tensor(base.shape(), std::move(out));
}

// Sample b of a [T,B,...] tensor as [T,1,...].
template <typename Tensor>
Tensor select_batch(const Tensor& x, std::size_t b) {
    const auto& dims = x.shape().dims();
    if (dims.size() < 2 || b >= dims[1]) {
        throw IndexError("select_batch: sample " + std::to_string(b) + " not in " + x.shape().str());
    }
    const std::size_t T = dims[0], B = dims[1];
    const std::size_t inner = x.size() / (T * B);
    std::vector<typename Tensor::value_type> out(T * inner);
    auto src = x.data();
    for (std::size_t t = 0; t < T; ++t) {
        auto first = src.begin() + static_cast<std::ptrdiff_t>((t * B + b) * inner);
        std::copy(first, first + static_cast<std::ptrdiff_t>(inner), out.begin() + static_cast<std::ptrdiff_t>(t * inner));
    }
    std::vector<std::size_t> od = dims;
    od[1] = 1;
    return Tensor(Shape(od), std::move(out));
}

// Concatenate [T,1,...] tensors along the batch axis.
template <typename Tensor>
Tensor stack_batch(std::span<const Tensor> parts) {
    if (parts.empty()) {
        throw ArgumentError("stack_batch needs at least one part");
    }
    std::vector<std::size_t> dims = parts[0].shape().dims();
    const std::size_t T = dims[0];
    std::size_t B = 0;
    for (const auto& p : parts) {
        auto pd = p.shape().dims();
        auto ref = dims;
        pd[1] = ref[1] = 0;
        if (pd != ref) {
            throw ShapeError("stack_batch: mismatched part " + p.shape().str());
        }
        B += p.shape()[1];
    }
    const std::size_t inner = parts[0].size() / (T * dims[1]);
    std::vector<typename Tensor::value_type> out(T * B * inner);
    std::size_t b0 = 0;
    for (const auto& p : parts) {
        const std::size_t pb = p.shape()[1];
        auto src = p.data();
        for (std::size_t t = 0; t < T; ++t) {
            auto first = src.begin() + static_cast<std::ptrdiff_t>(t * pb * inner);
            std::copy(first, first + static_cast<std::ptrdiff_t>(pb * inner),
                      out.begin() + static_cast<std::ptrdiff_t>((t * B + b0) * inner));
        }
        b0 += pb;
    }
    dims[1] = B;
    return Tensor(Shape(dims), std::move(out));
}

// Indices of the k largest scores (ties -> smaller index), returned in ascending index order.
std::vector<std::size_t> topk_indices(std::span<const float> scores, std::size_t k);

// out[m,p] = sum_k a[m,k] * w[k,p], accumulated in ascending k. Credits nnz(a)*P spike
// accumulates to `label` when a ledger is given.
DenseTensor spike_dense_matmul(const SpikeTensor& a, const DenseTensor& w, SopLedger* ledger = nullptr,
                               std::string_view label = "linear");

// Same contract for a real-valued left operand; credits nnz(a)*P dense MACs.
DenseTensor dense_matmul(const DenseTensor& a, const DenseTensor& w, SopLedger* ledger = nullptr,
                         std::string_view label = "linear");

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

// Population mean and standard deviation (divisor T).
MeanStd reduce_mean_std(std::span<const double> x);
MeanStd reduce_mean_std(std::span<const float> x);

}  // namespace spk
