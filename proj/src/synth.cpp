// SPDX-License-Identifier: Apache-2.0
#include "spk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spk/error.hpp"
#include "spk/rng.hpp"

namespace spk {

void SyntheticSpec::validate() const {
    if (grid < 1 || classes < 2 || channels < 1 || steps < 1) {
        throw ConfigError("synthetic spec needs grid >= 1, classes >= 2, channels >= 1, steps >= 1");
    }
    if (signature_tokens < 1 || signature_tokens > tokens()) {
        throw ConfigError("signature_tokens=" + std::to_string(signature_tokens) + " does not fit a " +
                          std::to_string(grid) + "x" + std::to_string(grid) + " grid");
    }
    if (!(p_background >= 0.0 && p_background <= p_signal && p_signal <= 1.0)) {
        throw ConfigError("spike probabilities must satisfy 0 <= p_background <= p_signal <= 1");
    }
    if (train_samples < 1 || test_samples < 1) throw ConfigError("both splits need at least one sample");
}

std::vector<std::vector<std::size_t>> signature_positions(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::size_t N = spec.tokens(), k = spec.signature_tokens;
    std::vector<std::size_t> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(mix_seed(seed, 0x5167));
    for (std::size_t i = N; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    std::vector<std::vector<std::size_t>> sig(spec.classes);
    for (std::size_t c = 0; c < spec.classes; ++c) {
        for (std::size_t j = 0; j < k; ++j) sig[c].push_back(perm[(c * k + j) % N]);
        std::sort(sig[c].begin(), sig[c].end());
    }
    return sig;
}

namespace {

Dataset make_split(const SyntheticSpec& spec, const std::vector<std::vector<std::size_t>>& sig, std::size_t samples,
                   std::uint64_t seed) {
    const std::size_t g = spec.grid, T = spec.steps, n = spec.channels, N = g * g;
    Dataset d{SpikeTensor(Shape{samples, T, n, g, g}), {}};
    Rng rng(seed);
    std::vector<std::uint8_t> is_sig(N);
    for (std::size_t s = 0; s < samples; ++s) {
        const int label = static_cast<int>(rng.below(spec.classes));
        d.labels.push_back(label);
        std::fill(is_sig.begin(), is_sig.end(), 0);
        for (std::size_t p : sig[label]) is_sig[p] = 1;
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t c = 0; c < n; ++c) {
                for (std::size_t p = 0; p < N; ++p) {
                    const double prob = is_sig[p] ? spec.p_signal : spec.p_background;
                    d.frames.set(((s * T + t) * n + c) * N + p, rng.uniform() < prob);
                }
            }
        }
    }
    return d;
}

}  // namespace

SyntheticData synth_dataset(const SyntheticSpec& spec, std::uint64_t seed) {
    auto sig = signature_positions(spec, seed);
    Dataset train = make_split(spec, sig, spec.train_samples, mix_seed(seed, 0x7a1));
    Dataset test = make_split(spec, sig, spec.test_samples, mix_seed(seed, 0x7e5));
    return {std::move(train), std::move(test), std::move(sig)};
}

DenseTensor batch_frames(const Dataset& data, std::size_t first, std::size_t count) {
    const Shape& s = data.frames.shape();
    if (count == 0 || first + count > s[0]) {
        throw IndexError("batch [" + std::to_string(first) + ", " + std::to_string(first + count) +
                         ") outside dataset of " + std::to_string(s[0]));
    }
    const std::size_t T = s[1], per = s[2] * s[3] * s[4];
    std::vector<float> v(T * count * per);
    auto src = data.frames.data();
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t b = 0; b < count; ++b) {
            const std::uint8_t* in = src.data() + ((first + b) * T + t) * per;
            float* out = v.data() + (t * count + b) * per;
            for (std::size_t i = 0; i < per; ++i) out[i] = in[i];
        }
    }
    return DenseTensor(Shape{T, count, s[2], s[3], s[4]}, std::move(v));
}

std::vector<std::size_t> token_counts(const Dataset& data, std::size_t sample) {
    const Shape& s = data.frames.shape();
    if (sample >= s[0]) throw IndexError("sample " + std::to_string(sample) + " outside dataset");
    const std::size_t N = s[3] * s[4], per = s[1] * s[2];
    std::vector<std::size_t> counts(N, 0);
    auto v = data.frames.data();
    for (std::size_t r = 0; r < per; ++r) {
        for (std::size_t p = 0; p < N; ++p) counts[p] += v[(sample * per + r) * N + p];
    }
    return counts;
}

int bayes_classify(const SyntheticSpec& spec, std::span<const std::vector<std::size_t>> signatures,
                   std::span<const std::size_t> counts) {
    const double trials = static_cast<double>(spec.steps * spec.channels);
    // Log-likelihood ratio of one token being a signature vs background, given its count.
    auto llr = [&](std::size_t k) {
        auto logp = [](double p, double x) { return x == 0.0 ? 0.0 : x * std::log(p); };
        const double kk = static_cast<double>(k), m = trials - kk;
        const double sig = logp(spec.p_signal, kk) + logp(1.0 - spec.p_signal, m);
        const double bg = logp(spec.p_background, kk) + logp(1.0 - spec.p_background, m);
        if (std::isinf(sig) && std::isinf(bg)) return 0.0;
        return sig - bg;
    };
    int best = 0;
    double best_v = -INFINITY;
    for (std::size_t c = 0; c < signatures.size(); ++c) {
        double v = 0.0;
        for (std::size_t p : signatures[c]) v += llr(counts[p]);
        if (v > best_v) {
            best_v = v;
            best = static_cast<int>(c);
        }
    }
    return best;
}

}  // namespace spk
