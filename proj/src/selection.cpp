// SPDX-License-Identifier: Apache-2.0
#include "spk/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "spk/rng.hpp"
#include "spk/tensor_ops.hpp"

namespace spk {

std::string_view to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::none: return "none";
        case StrategyKind::uncert_prune: return "uncert_prune";
        case StrategyKind::uncert_merge: return "uncert_merge";
        case StrategyKind::random_prune: return "random_prune";
        case StrategyKind::low_uncert_prune: return "low_uncert_prune";
    }
    return "none";
}

std::string Strategy::label() const {
    std::string s(to_string(kind));
    if (needs_scores() && score != ScoreMode::uncert) {
        s += ":";
        s += to_string(score);
    }
    return s;
}

bool Strategy::needs_scores() const {
    return kind == StrategyKind::uncert_prune || kind == StrategyKind::uncert_merge ||
           kind == StrategyKind::low_uncert_prune;
}

Strategy parse_strategy(std::string_view text) {
    Strategy s;
    std::string_view name = text;
    if (auto colon = text.find(':'); colon != std::string_view::npos) {
        name = text.substr(0, colon);
        s.score = parse_score_mode(text.substr(colon + 1));
    }
    std::string norm(name);
    std::replace(norm.begin(), norm.end(), '-', '_');
    for (StrategyKind k : {StrategyKind::none, StrategyKind::uncert_prune, StrategyKind::uncert_merge,
                           StrategyKind::random_prune, StrategyKind::low_uncert_prune}) {
        if (norm == to_string(k)) {
            s.kind = k;
            return s;
        }
    }
    throw ArgumentError("unknown strategy '" + std::string(text) + "'");
}

std::size_t keep_count(std::size_t n, double ratio) {
    if (!(ratio > 0.0 && ratio <= 1.0)) {
        throw ArgumentError("keep ratio must lie in (0, 1], got " + std::to_string(ratio));
    }
    const auto k = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
    return std::min(k, n);
}

std::vector<KeepMask> build_keep_mask(const DenseTensor& scores, double ratio, const Strategy& strategy,
                                      std::size_t first_sample) {
    if (scores.shape().rank() != 2) {
        throw ShapeError("build_keep_mask expects scores [B,N], got " + scores.shape().str());
    }
    const std::size_t B = scores.shape()[0], N = scores.shape()[1];
    const std::size_t k = keep_count(N, ratio);
    if (k == 0) {
        throw ArgumentError("keep ratio " + std::to_string(ratio) + " keeps no token out of " + std::to_string(N));
    }
    std::vector<KeepMask> masks(B);
    std::vector<float> row(N);
    for (std::size_t b = 0; b < B; ++b) {
        auto src = scores.data().subspan(b * N, N);
        KeepMask& m = masks[b];
        m.n_total = N;
        m.ratio = ratio;
        switch (strategy.kind) {
            case StrategyKind::none:
                m.keep_indices.resize(N);
                std::iota(m.keep_indices.begin(), m.keep_indices.end(), std::size_t{0});
                m.ratio = 1.0;
                break;
            case StrategyKind::uncert_prune:
            case StrategyKind::uncert_merge:
                m.keep_indices = topk_indices(src, k);
                break;
            case StrategyKind::low_uncert_prune:
                std::transform(src.begin(), src.end(), row.begin(), [](float s) { return -s; });
                m.keep_indices = topk_indices(row, k);
                break;
            case StrategyKind::random_prune: {
                // Seeded Fisher-Yates; the first k entries of one permutation serve every ratio.
                std::vector<std::size_t> perm(N);
                std::iota(perm.begin(), perm.end(), std::size_t{0});
                Rng rng(mix_seed(strategy.seed, first_sample + b));
                for (std::size_t i = 0; i + 1 < N; ++i) {
                    const std::size_t j = i + static_cast<std::size_t>(rng.below(N - i));
                    std::swap(perm[i], perm[j]);
                }
                perm.resize(k);
                std::sort(perm.begin(), perm.end());
                m.keep_indices = std::move(perm);
                break;
            }
        }
    }
    return masks;
}

SpikeTensor pruned_ssa(const SpikeTensor& x, std::span<const KeepMask> masks, const SsaBlockWeights& w,
                       const SsaOptions& opt, SopLedger& ledger, std::string_view label) {
    if (x.shape().rank() != 4) {
        throw ShapeError("pruned_ssa expects [T,B,N,D], got " + x.shape().str());
    }
    const std::size_t B = x.shape()[1], N = x.shape()[2];
    if (masks.size() != B) {
        throw ShapeError("pruned_ssa: " + std::to_string(masks.size()) + " masks for batch " + std::to_string(B));
    }
    std::vector<SpikeTensor> parts;
    parts.reserve(B);
    for (std::size_t b = 0; b < B; ++b) {
        const KeepMask& m = masks[b];
        if (m.n_total != N) {
            throw ShapeError("keep mask built for " + std::to_string(m.n_total) + " tokens, input has " +
                             std::to_string(N));
        }
        SpikeTensor xb = select_batch(x, b);
        // One index list serves every timestep of the sample.
        const SpikeTensor kept = gather_tokens(xb, std::span<const std::size_t>(m.keep_indices));
        const SpikeTensor updated = ssa_forward(kept, w, opt, ledger, label);
        parts.push_back(scatter_tokens(updated, std::span<const std::size_t>(m.keep_indices), xb));
    }
    return stack_batch(std::span<const SpikeTensor>(parts));
}

namespace {

double cosine(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

std::vector<MergeAssignment> build_merge_assignment(const DenseTensor& scores, const SpikeTensor& features,
                                                    double ratio) {
    if (features.shape().rank() != 4) {
        throw ShapeError("build_merge_assignment expects features [T,B,N,D], got " + features.shape().str());
    }
    const std::size_t T = features.shape()[0], B = features.shape()[1], N = features.shape()[2],
                      D = features.shape()[3];
    if (scores.shape().rank() != 2 || scores.shape()[0] != B || scores.shape()[1] != N) {
        throw ShapeError("merge scores " + scores.shape().str() + " do not match features " + features.shape().str());
    }
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw ArgumentError("merge keep ratio must lie in (0, 1), got " + std::to_string(ratio));
    }
    Strategy top{StrategyKind::uncert_prune};
    const auto masks = build_keep_mask(scores, ratio, top);

    std::vector<MergeAssignment> out(B);
    std::vector<double> mean(N * D);
    auto f = features.data();
    for (std::size_t b = 0; b < B; ++b) {
        std::fill(mean.begin(), mean.end(), 0.0);
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t i = 0; i < N * D; ++i) mean[i] += f[(t * B + b) * N * D + i];
        }
        for (double& m : mean) m /= static_cast<double>(T);
        auto feat = [&](std::size_t tok) { return std::span<const double>(mean).subspan(tok * D, D); };

        MergeAssignment& a = out[b];
        a.n_total = N;
        a.anchors = masks[b].keep_indices;
        if (a.anchors.empty()) {
            throw ArgumentError("merge needs at least one anchor");
        }
        const std::size_t K = a.anchors.size();
        a.assign.assign(N, N);
        std::vector<std::vector<double>> sims(K);
        a.members.assign(K, {});
        std::vector<std::size_t> slot(N, K);
        for (std::size_t s = 0; s < K; ++s) slot[a.anchors[s]] = s;

        for (std::size_t j = 0; j < N; ++j) {
            std::size_t best = K;
            double best_sim = 0.0;
            if (slot[j] != K) {
                best = slot[j];
                best_sim = 1.0;
            } else {
                for (std::size_t s = 0; s < K; ++s) {
                    const double c = cosine(feat(j), feat(a.anchors[s]));
                    if (best == K || c > best_sim) {
                        best = s;
                        best_sim = c;
                    }
                }
            }
            a.assign[j] = a.anchors[best];
            a.members[best].push_back(j);
            sims[best].push_back(best_sim);
        }
        a.weights.resize(K);
        for (std::size_t s = 0; s < K; ++s) {
            double z = 0.0;
            for (double c : sims[s]) z += std::exp(c);
            a.weights[s].reserve(sims[s].size());
            for (double c : sims[s]) a.weights[s].push_back(std::exp(c) / z);
        }
    }
    return out;
}

DenseTensor apply_merge(const SpikeTensor& x, std::span<const MergeAssignment> assignments, SopLedger* ledger,
                        std::string_view label) {
    if (x.shape().rank() != 4) {
        throw ShapeError("apply_merge expects [T,B,N,D], got " + x.shape().str());
    }
    const std::size_t T = x.shape()[0], B = x.shape()[1], N = x.shape()[2], D = x.shape()[3];
    if (assignments.size() != B) {
        throw ShapeError("apply_merge: assignment count does not match batch");
    }
    const std::size_t K = assignments[0].anchors.size();
    for (const auto& a : assignments) {
        if (a.n_total != N || a.anchors.size() != K || a.members.size() != K || a.weights.size() != K) {
            throw ShapeError("apply_merge: inconsistent assignment for " + std::to_string(N) + " tokens");
        }
    }
    std::vector<float> out(T * B * K * D, 0.0f);
    auto xv = x.data();
    std::uint64_t macs = 0;
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t b = 0; b < B; ++b) {
            const auto& a = assignments[b];
            for (std::size_t s = 0; s < K; ++s) {
                float* dst = out.data() + ((t * B + b) * K + s) * D;
                std::vector<double> sum(D, 0.0);
                for (std::size_t m = 0; m < a.members[s].size(); ++m) {
                    const std::size_t j = a.members[s][m];
                    if (j >= N) throw IndexError("merge member out of range");
                    const double w = a.weights[s][m];
                    const std::uint8_t* src = xv.data() + ((t * B + b) * N + j) * D;
                    for (std::size_t d = 0; d < D; ++d) sum[d] += w * src[d];
                }
                for (std::size_t d = 0; d < D; ++d) dst[d] = static_cast<float>(sum[d]);
                macs = checked_add(macs, checked_mul(a.members[s].size(), D));
            }
        }
    }
    if (ledger) ledger->credit_macs(label, macs);
    return DenseTensor(Shape{T, B, K, D}, std::move(out));
}

void write_mask_rows(std::ostream& out, std::span<const KeepMask> masks, std::size_t first_sample) {
    for (std::size_t b = 0; b < masks.size(); ++b) {
        std::vector<char> kept(masks[b].n_total, 0);
        for (std::size_t i : masks[b].keep_indices) kept[i] = 1;
        for (std::size_t n = 0; n < kept.size(); ++n) {
            out << (first_sample + b) << ',' << n << ',' << int(kept[n]) << ',';
            if (kept[n]) {
                out << n;
            } else {
                out << -1;
            }
            out << '\n';
        }
    }
}

void write_merge_rows(std::ostream& out, std::span<const MergeAssignment> merges, std::size_t first_sample) {
    for (std::size_t b = 0; b < merges.size(); ++b) {
        const auto& a = merges[b];
        for (std::size_t n = 0; n < a.n_total; ++n) {
            const bool anchor = a.assign[n] == n;
            out << (first_sample + b) << ',' << n << ',' << int(anchor) << ',' << a.assign[n] << '\n';
        }
    }
}

}  // namespace spk
