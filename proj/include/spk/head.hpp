// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "spk/tensor.hpp"

namespace spk {

// Linear classifier g(z) = z W + b, shared by pooled classification and per-token evidence.
struct HeadWeights {
    DenseTensor w;  // [D, C]
    DenseTensor b;  // [C]

    std::size_t dim() const { return w.shape()[0]; }
    std::size_t classes() const { return w.shape()[1]; }
    void validate() const;
};

// Affine map over the last axis: [..., D] -> [..., C]. Sum in ascending feature order, then + b.
DenseTensor token_logits(const SpikeTensor& z, const HeadWeights& head);
DenseTensor token_logits(const DenseTensor& z, const HeadWeights& head);

}  // namespace spk
