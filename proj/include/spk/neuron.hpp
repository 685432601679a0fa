// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "spk/tensor.hpp"

namespace spk {

struct LifParams {
    float tau = 0.5f;  // membrane decay, 0 < tau < 1
    float v_th = 1.0f;

    void validate() const;
};

// Membrane potentials of one neuron population. Confined to a single evaluation.
class LifState {
public:
    LifState(Shape shape, LifParams params);

    const DenseTensor& membrane() const noexcept { return membrane_; }
    DenseTensor& membrane() noexcept { return membrane_; }
    const LifParams& params() const noexcept { return params_; }

private:
    DenseTensor membrane_;
    LifParams params_;
};

// One step: u <- tau*u + I; s = [u >= v_th]; u <- u*(1-s). Mutates `state`.
SpikeTensor lif_step(LifState& state, const DenseTensor& current);

// Runs lif_step over the leading (time) axis of `currents` from a zero membrane.
SpikeTensor lif_sequence(const LifParams& params, const DenseTensor& currents);

}  // namespace spk
