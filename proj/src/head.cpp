// SPDX-License-Identifier: Apache-2.0
#include "spk/head.hpp"

namespace spk {

void HeadWeights::validate() const {
    if (w.shape().rank() != 2 || b.shape().rank() != 1 || b.shape()[0] != w.shape()[1]) {
        throw ShapeError("head weights " + w.shape().str() + " / bias " + b.shape().str() + " are inconsistent");
    }
    w.check_finite();
    b.check_finite();
}

namespace {

template <typename Tensor>
DenseTensor logits_impl(const Tensor& z, const HeadWeights& head) {
    head.validate();
    const auto& dims = z.shape().dims();
    const std::size_t D = dims.back();
    if (D != head.dim()) {
        throw ShapeError("token_logits: feature dim " + std::to_string(D) + " vs head dim " +
                         std::to_string(head.dim()));
    }
    const std::size_t C = head.classes();
    const std::size_t rows = z.size() / D;
    auto zv = z.data();
    auto wv = head.w.data();
    auto bv = head.b.data();
    std::vector<float> out(rows * C);
    std::vector<float> acc(C);
    for (std::size_t r = 0; r < rows; ++r) {
        std::fill(acc.begin(), acc.end(), 0.0f);
        for (std::size_t d = 0; d < D; ++d) {
            const float x = static_cast<float>(zv[r * D + d]);
            if (x == 0.0f) continue;
            for (std::size_t c = 0; c < C; ++c) acc[c] += x * wv[d * C + c];
        }
        for (std::size_t c = 0; c < C; ++c) out[r * C + c] = acc[c] + bv[c];
    }
    std::vector<std::size_t> od = dims;
    od.back() = C;
    return DenseTensor(Shape(od), std::move(out));
}

}  // namespace

DenseTensor token_logits(const SpikeTensor& z, const HeadWeights& head) { return logits_impl(z, head); }

DenseTensor token_logits(const DenseTensor& z, const HeadWeights& head) { return logits_impl(z, head); }

}  // namespace spk
