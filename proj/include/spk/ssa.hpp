// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

#include "spk/efficiency.hpp"
#include "spk/neuron.hpp"
#include "spk/tensor.hpp"

namespace spk {

struct SsaBlockWeights {
    DenseTensor w_q;     // [D, D]
    DenseTensor w_k;     // [D, D]
    DenseTensor w_v;     // [D, D]
    DenseTensor w_proj;  // [D, D]

    std::size_t dim() const { return w_q.shape()[0]; }
    void validate() const;
};

struct SsaOptions {
    LifParams lif;
    // The projected A.V current is multiplied by 2^-attn_shift before the output LIF.
    int attn_shift = 0;
    AttentionCounting counting = AttentionCounting::structural;
};

// Softmax-free spike attention on one slice: A = Q K^T (integer), Y = A V. q, k, v are [N, d].
DenseTensor spike_attention(const SpikeTensor& q, const SpikeTensor& k, const SpikeTensor& v,
                            SopLedger* ledger = nullptr, std::string_view label = "attn",
                            AttentionCounting counting = AttentionCounting::structural);

// Spike-driven self-attention block over x [T,B,N,D]:
//   Q,K,V = LIF(x W_{q,k,v});  Y = (Q K^T) V per (t, b);  out = LIF(2^-shift * Y W_proj + x).
// Output is binary. Ledger entries are `label` + ".q" / ".k" / ".v" / ".attn" / ".proj".
SpikeTensor ssa_forward(const SpikeTensor& x, const SsaBlockWeights& w, const SsaOptions& opt, SopLedger& ledger,
                        std::string_view label);
// Real-valued input (merged tokens); the input projections are charged as dense MACs.
SpikeTensor ssa_forward(const DenseTensor& x, const SsaBlockWeights& w, const SsaOptions& opt, SopLedger& ledger,
                        std::string_view label);

}  // namespace spk
