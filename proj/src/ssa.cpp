// SPDX-License-Identifier: Apache-2.0
#include "spk/ssa.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "spk/tensor_ops.hpp"

namespace spk {

void SsaBlockWeights::validate() const {
    const std::size_t D = w_q.shape()[0];
    for (const DenseTensor* m : {&w_q, &w_k, &w_v, &w_proj}) {
        if (m->shape().rank() != 2 || m->shape()[0] != D || m->shape()[1] != D) {
            throw ShapeError("SSA weights must all be [" + std::to_string(D) + "," + std::to_string(D) + "], got " +
                             m->shape().str());
        }
    }
}

namespace {

// Rows of a binary [N, d] slice packed into 64-bit words.
std::vector<std::uint64_t> pack_rows(std::span<const std::uint8_t> s, std::size_t n, std::size_t d,
                                     std::size_t words) {
    std::vector<std::uint64_t> out(n * words, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (s[i * d + j]) out[i * words + j / 64] |= std::uint64_t{1} << (j % 64);
        }
    }
    return out;
}

// Y[i,:] = sum_j (q_i . k_j) v_j for one slice. Writes n*d floats into y.
void attention_slice(std::span<const std::uint8_t> q, std::span<const std::uint8_t> k, std::span<const std::uint8_t> v,
                     std::size_t n, std::size_t d, float* y, SopLedger* ledger, std::string_view label,
                     AttentionCounting counting) {
    const std::size_t words = (d + 63) / 64;
    const auto qp = pack_rows(q, n, d, words);
    const auto kp = pack_rows(k, n, d, words);
    std::uint64_t nnz_q = 0;
    for (std::size_t i = 0; i < n * d; ++i) nnz_q += q[i];

    std::vector<std::int64_t> a(n * n, 0);
    std::uint64_t nnz_a = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            std::int64_t dot = 0;
            for (std::size_t w = 0; w < words; ++w) dot += std::popcount(qp[i * words + w] & kp[j * words + w]);
            a[i * n + j] = dot;
            nnz_a += dot != 0;
        }
    }
    std::vector<std::int64_t> acc(d);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(acc.begin(), acc.end(), 0);
        for (std::size_t j = 0; j < n; ++j) {
            const std::int64_t aij = a[i * n + j];
            if (aij == 0) continue;
            const std::uint8_t* vj = v.data() + j * d;
            for (std::size_t c = 0; c < d; ++c) acc[c] += aij * vj[c];
        }
        for (std::size_t c = 0; c < d; ++c) y[i * d + c] = static_cast<float>(acc[c]);
    }
    if (ledger) ledger->credit(label, count_attention(nnz_q, n, d, counting, nnz_a));
}

template <typename Input>
SpikeTensor ssa_impl(const Input& x, const SsaBlockWeights& w, const SsaOptions& opt, SopLedger& ledger,
                     std::string_view label) {
    w.validate();
    const Shape& s = x.shape();
    if (s.rank() != 4) {
        throw ShapeError("ssa_forward expects [T,B,N,D], got " + s.str());
    }
    const std::size_t T = s[0], B = s[1], N = s[2], D = s[3];
    if (D != w.dim()) {
        throw ShapeError("ssa_forward: token dim " + std::to_string(D) + " vs weights " + std::to_string(w.dim()));
    }
    const std::string base(label);
    const auto rows = x.reshaped(Shape{T * B * N, D});
    auto project = [&](const DenseTensor& m, const char* tag) {
        if constexpr (std::is_same_v<Input, SpikeTensor>) {
            return spike_dense_matmul(rows, m, &ledger, base + tag);
        } else {
            return dense_matmul(rows, m, &ledger, base + tag);
        }
    };
    const SpikeTensor q = lif_sequence(opt.lif, project(w.w_q, ".q").reshaped(s));
    const SpikeTensor k = lif_sequence(opt.lif, project(w.w_k, ".k").reshaped(s));
    const SpikeTensor v = lif_sequence(opt.lif, project(w.w_v, ".v").reshaped(s));

    std::vector<float> y(T * B * N * D);
    const std::size_t slice = N * D;
    const std::string attn_label = base + ".attn";
    for (std::size_t tb = 0; tb < T * B; ++tb) {
        attention_slice(q.data().subspan(tb * slice, slice), k.data().subspan(tb * slice, slice),
                        v.data().subspan(tb * slice, slice), N, D, y.data() + tb * slice, &ledger, attn_label,
                        opt.counting);
    }
    DenseTensor current = dense_matmul(DenseTensor(Shape{T * B * N, D}, std::move(y)), w.w_proj, &ledger, base + ".proj");
    auto cur = current.mutable_data();
    auto xin = x.data();
    for (std::size_t i = 0; i < cur.size(); ++i) {
        cur[i] = std::ldexp(cur[i], -opt.attn_shift) + static_cast<float>(xin[i]);
    }
    current.check_finite();
    return lif_sequence(opt.lif, std::move(current).reshaped(s));
}

}  // namespace

DenseTensor spike_attention(const SpikeTensor& q, const SpikeTensor& k, const SpikeTensor& v, SopLedger* ledger,
                            std::string_view label, AttentionCounting counting) {
    if (q.shape().rank() != 2 || !(q.shape() == k.shape()) || !(q.shape() == v.shape())) {
        throw ShapeError("spike_attention expects equal [N,d] operands");
    }
    const std::size_t n = q.shape()[0], d = q.shape()[1];
    std::vector<float> y(n * d);
    attention_slice(q.data(), k.data(), v.data(), n, d, y.data(), ledger, label, counting);
    return DenseTensor(q.shape(), std::move(y));
}

SpikeTensor ssa_forward(const SpikeTensor& x, const SsaBlockWeights& w, const SsaOptions& opt, SopLedger& ledger,
                        std::string_view label) {
    return ssa_impl(x, w, opt, ledger, label);
}

SpikeTensor ssa_forward(const DenseTensor& x, const SsaBlockWeights& w, const SsaOptions& opt, SopLedger& ledger,
                        std::string_view label) {
    return ssa_impl(x, w, opt, ledger, label);
}

}  // namespace spk
