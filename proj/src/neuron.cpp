// SPDX-License-Identifier: Apache-2.0
#include "spk/neuron.hpp"

#include <cmath>

namespace spk {

void LifParams::validate() const {
    if (!(tau > 0.0f && tau < 1.0f)) {
        throw ConfigError("LIF decay tau must lie in (0, 1), got " + std::to_string(tau));
    }
    if (!(v_th > 0.0f) || !std::isfinite(v_th)) {
        throw ConfigError("LIF threshold must be positive, got " + std::to_string(v_th));
    }
}

LifState::LifState(Shape shape, LifParams params) : membrane_(std::move(shape)), params_(params) {
    params_.validate();
}

SpikeTensor lif_step(LifState& state, const DenseTensor& current) {
    if (!(current.shape() == state.membrane().shape())) {
        throw ShapeError("lif_step: current " + current.shape().str() + " vs membrane " +
                         state.membrane().shape().str());
    }
    const float tau = state.params().tau;
    const float v_th = state.params().v_th;
    auto u = state.membrane().mutable_data();
    auto in = current.data();
    std::vector<std::uint8_t> spikes(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        float v = tau * u[i] + in[i];
        const bool fired = v >= v_th;
        spikes[i] = fired;
        u[i] = fired ? 0.0f : v;
    }
    return SpikeTensor(current.shape(), std::move(spikes));
}

SpikeTensor lif_sequence(const LifParams& params, const DenseTensor& currents) {
    params.validate();
    const auto& dims = currents.shape().dims();
    const std::size_t T = dims[0];
    const std::size_t step = currents.size() / T;
    const float tau = params.tau;
    const float v_th = params.v_th;
    std::vector<float> u(step, 0.0f);
    std::vector<std::uint8_t> out(currents.size());
    auto in = currents.data();
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < step; ++i) {
            float v = tau * u[i] + in[t * step + i];
            const bool fired = v >= v_th;
            out[t * step + i] = fired;
            u[i] = fired ? 0.0f : v;
        }
    }
    return SpikeTensor(currents.shape(), std::move(out));
}

}  // namespace spk
