// SPDX-License-Identifier: Apache-2.0
#include "spk/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "spk/efficiency.hpp"
#include "spk/error.hpp"
#include "spk/evaluate.hpp"
#include "spk/head_training.hpp"
#include "spk/neuron.hpp"
#include "spk/selection.hpp"
#include "spk/ssa.hpp"
#include "spk/svg.hpp"
#include "spk/synth.hpp"
#include "spk/tensor_ops.hpp"
#include "spk/uncertainty.hpp"

namespace spk {

namespace {

class Checks {
public:
    void run(const std::string& name, const std::function<std::string()>& body) {
        try {
            const std::string failure = body();
            out_.push_back({name, failure.empty(), failure});
        } catch (const std::exception& e) {
            out_.push_back({name, false, std::string("threw: ") + e.what()});
        }
    }
    std::vector<CheckResult> take() { return std::move(out_); }

private:
    std::vector<CheckResult> out_;
};

std::string near(double got, double want, double tol) {
    if (std::fabs(got - want) <= tol) return {};
    char buf[128];
    std::snprintf(buf, sizeof buf, "got %.9g, expected %.9g (tol %.1g)", got, want, tol);
    return buf;
}

template <typename T>
std::string list(const std::vector<T>& v) {
    std::ostringstream s;
    s << '[';
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
    s << ']';
    return s.str();
}

template <typename T>
std::string same(const std::vector<T>& got, const std::vector<T>& want) {
    return got == want ? std::string() : "got " + list(got) + ", expected " + list(want);
}

std::string all_of(std::initializer_list<std::string> parts) {
    for (const auto& p : parts) {
        if (!p.empty()) return p;
    }
    return {};
}

}  // namespace

std::vector<CheckResult> run_selftest() {
    Checks c;

    c.run("flatten_spatial index h*W+w", [] {
        SpikeTensor x(Shape{1, 1, 3, 2, 3});
        x.set({0, 0, 2, 1, 0}, true);
        const SpikeTensor y = flatten_spatial(x);
        if (y.shape() != Shape{1, 1, 6, 3}) return "shape " + y.shape().str();
        return y.nnz() == 1 && y.at({0, 0, 3, 2}) == 1 ? std::string() : std::string("spike not at token 3, channel 2");
    });

    c.run("gather/scatter round trip", [] {
        DenseTensor x(Shape{2, 1, 4, 2});
        for (std::size_t i = 0; i < x.size(); ++i) x.mutable_data()[i] = static_cast<float>(i);
        const std::vector<std::size_t> idx = {1, 3};
        const DenseTensor back = scatter_tokens(gather_tokens(x, std::span(idx)), std::span(idx), x);
        return bitwise_equal(back, x) ? std::string() : std::string("base not restored");
    });

    c.run("scatter ones into zeros at [1,3]", [] {
        const std::vector<std::size_t> idx = {1, 3};
        const DenseTensor out =
            scatter_tokens(DenseTensor::filled(Shape{1, 1, 2, 1}, 1.0f), std::span(idx), DenseTensor(Shape{1, 1, 4, 1}));
        return same(std::vector<float>(out.data().begin(), out.data().end()), {0, 1, 0, 1});
    });

    c.run("topk [0.9,0.1,0.5,0.5,0.3] k=3", [] {
        const std::vector<float> s = {0.9f, 0.1f, 0.5f, 0.5f, 0.3f};
        return same(topk_indices(s, 3), {0, 2, 3});
    });

    c.run("topk ties [0.5,0.5,0.5,0.1] k=2", [] {
        const std::vector<float> s = {0.5f, 0.5f, 0.5f, 0.1f};
        return same(topk_indices(s, 2), {0, 1});
    });

    c.run("spike_dense_matmul credits nnz*P", [] {
        SopLedger ledger;
        spike_dense_matmul(SpikeTensor(Shape{1, 4}, {1, 0, 1, 1}), DenseTensor::filled(Shape{4, 8}, 0.5f), &ledger,
                           "lin");
        return near(static_cast<double>(ledger.total().spike_accumulates), 24, 0);
    });

    c.run("reduce_mean_std [0.2,0.4,0.6,0.8]", [] {
        const std::vector<double> x = {0.2, 0.4, 0.6, 0.8};
        const MeanStd m = reduce_mean_std(std::span<const double>(x));
        return all_of({near(m.mean, 0.5, 1e-6), near(m.std, 0.2236068, 1e-6)});
    });

    c.run("LIF constant 0.6 -> [0,0,1,0]", [] {
        const SpikeTensor s = lif_sequence(LifParams{}, DenseTensor::filled(Shape{4, 1}, 0.6f));
        return same(std::vector<int>(s.data().begin(), s.data().end()), {0, 0, 1, 0});
    });

    c.run("LIF leak tau^2 * 0.8", [] {
        LifState st(Shape{1}, LifParams{});
        st.membrane().mutable_data()[0] = 0.8f;
        std::size_t spikes = 0;
        for (int t = 0; t < 2; ++t) spikes += lif_step(st, DenseTensor(Shape{1})).nnz();
        if (spikes) return std::string("unexpected spike");
        return near(st.membrane()[0], 0.2, 1e-6);
    });

    c.run("spike attention N=1 d=2", [] {
        const SpikeTensor ones(Shape{1, 2}, {1, 1});
        const DenseTensor y = spike_attention(ones, ones, ones);
        return same(std::vector<float>(y.data().begin(), y.data().end()), {2, 2});
    });

    c.run("token_logits binary z=[1,0,1]", [] {
        HeadWeights h{DenseTensor(Shape{3, 2}, {1, 2, 10, 20, 100, 200}), DenseTensor(Shape{2})};
        const DenseTensor l = token_logits(SpikeTensor(Shape{1, 3}, {1, 0, 1}), h);
        return same(std::vector<float>(l.data().begin(), l.data().end()), {101, 202});
    });

    c.run("softplus(0) = ln 2", [] { return near(softplus(0.0), 0.6931472, 1e-6); });

    c.run("U for C=10 zero logits", [] {
        const DenseTensor u = uncertainty_from_evidence(evidence_from_logits(DenseTensor(Shape{1, 10})));
        return near(u[0], 0.5906161, 1e-6);
    });

    c.run("U for C=2 logits (40,-40)", [] {
        const DenseTensor u = uncertainty_from_evidence(evidence_from_logits(DenseTensor(Shape{1, 2}, {40, -40})));
        return near(u[0], 2.0 / 42.0, 1e-6);
    });

    c.run("trajectory stats [0.2,0.4,0.6,0.8]", [] {
        const std::vector<double> x = {0.2, 0.4, 0.6, 0.8};
        const TokenStats s = trajectory_stats(x);
        return all_of({near(s.mu, 0.5, 1e-6), near(s.sigma, 0.2236068, 1e-6)});
    });

    c.run("score mu + 0.9 sigma", [] { return near(importance_score({0.5, 0.2236068}, 0.9), 0.7012461, 1e-6); });

    c.run("prune masks at r=0.6", [] {
        const DenseTensor s(Shape{1, 5}, {0.9f, 0.1f, 0.5f, 0.5f, 0.3f});
        const auto hi = build_keep_mask(s, 0.6, Strategy{StrategyKind::uncert_prune});
        const auto lo = build_keep_mask(s, 0.6, Strategy{StrategyKind::low_uncert_prune});
        return all_of({same(hi[0].keep_indices, {0, 2, 3}), same(lo[0].keep_indices, {1, 2, 4})});
    });

    c.run("pruned SSA uses fewer ops", [] {
        const std::size_t D = 4, N = 6;
        SsaBlockWeights w{DenseTensor::filled(Shape{D, D}, 0.6f), DenseTensor::filled(Shape{D, D}, 0.6f),
                          DenseTensor::filled(Shape{D, D}, 0.6f), DenseTensor::filled(Shape{D, D}, 0.1f)};
        const SpikeTensor x = SpikeTensor(Shape{1, 1, N, D}, std::vector<std::uint8_t>(N * D, 1));
        SopLedger full, part;
        ssa_forward(x, w, SsaOptions{}, full, "b");
        const DenseTensor s(Shape{1, N}, {6, 5, 4, 3, 2, 1});
        pruned_ssa(x, build_keep_mask(s, 0.5, Strategy{StrategyKind::uncert_prune}), w, SsaOptions{}, part, "b");
        return part.total().total() < full.total().total() ? std::string() : std::string("no reduction");
    });

    c.run("merge weights {0.7310586, 0.2689414}", [] {
        const SpikeTensor x(Shape{1, 1, 2, 2}, {1, 0, 0, 1});
        const DenseTensor s(Shape{1, 2}, {1.0f, 0.0f});
        const auto m = build_merge_assignment(s, x, 0.5);
        const DenseTensor merged = apply_merge(x, m);
        return all_of({near(m[0].weights[0][0], 0.7310586, 1e-6), near(m[0].weights[0][1], 0.2689414, 1e-6),
                       near(merged[0], 0.7310586, 1e-6), near(merged[1], 0.2689414, 1e-6)});
    });

    c.run("count_linear nnz 4 fan_out 8", [] { return near(static_cast<double>(count_linear(4, 8)), 32, 0); });

    c.run("count_attention nnz_q=3 N=4 d=2", [] {
        const OpCounts a = count_attention(3, 4, 2), z = count_attention(0, 4, 2);
        return a == OpCounts{12, 32} && z == OpCounts{0, 32} ? std::string() : std::string("wrong counts");
    });

    c.run("1e9 ops at 0.9 pJ", [] { return near(energy_mj(OpCounts{1000000000, 0}), 0.9, 1e-12); });

    c.run("pool_features single spike", [] {
        SpikeTensor z(Shape{2, 1, 3, 2});
        z.set({1, 0, 2, 1}, true);
        const DenseTensor f = pool_features(z);
        return all_of({near(f[0], 0.0, 0), near(f[1], 1.0 / 6.0, 1e-7)});
    });

    c.run("ridge X=[[1],[-1]] y=[1,-1]", [] {
        const HeadWeights h =
            fit_ridge_targets(DenseTensor(Shape{2, 1}, {1, -1}), DenseTensor(Shape{2, 1}, {1, -1}), RidgeConfig{0.0});
        return all_of({near(h.w[0], 1.0, 1e-6), near(h.b[0], 0.0, 1e-6)});
    });

    c.run("ridge duplicated rows", [] {
        const DenseTensor x(Shape{3, 2}, {1, 0, 0, 1, 1, 1});
        const DenseTensor x2(Shape{6, 2}, {1, 0, 0, 1, 1, 1, 1, 0, 0, 1, 1, 1});
        const std::vector<int> y = {0, 1, 1}, y2 = {0, 1, 1, 0, 1, 1};
        const HeadWeights a = fit_ridge(x, y, 2, RidgeConfig{0.1});
        const HeadWeights b = fit_ridge(x2, y2, 2, RidgeConfig{0.2});
        std::string r;
        for (std::size_t i = 0; i < a.w.size() && r.empty(); ++i) r = near(a.w.data()[i], b.w.data()[i], 1e-5);
        return r;
    });

    c.run("Bayes accuracy with p_signal=1, p_background=0, T=1", [] {
        SyntheticSpec spec;
        spec.p_signal = 1.0;
        spec.p_background = 0.0;
        spec.steps = 1;
        spec.train_samples = 16;
        spec.test_samples = 16;
        const SyntheticData d = synth_dataset(spec, 3);
        for (std::size_t s = 0; s < d.test.size(); ++s) {
            const auto counts = token_counts(d.test, s);
            const auto& sig = d.signatures[d.test.labels[s]];
            for (std::size_t p = 0; p < counts.size(); ++p) {
                const bool on = std::find(sig.begin(), sig.end(), p) != sig.end();
                if (counts[p] != (on ? spec.channels : 0)) return std::string("frame is not the signature pattern");
            }
            if (bayes_classify(spec, d.signatures, counts) != d.test.labels[s]) return std::string("Bayes error");
        }
        return std::string();
    });

    c.run("svg three strategies x five ratios", [] {
        std::vector<ResultRow> rows;
        for (const char* s : {"a", "b", "c"}) {
            for (double r : {1.0, 0.8, 0.6, 0.4, 0.2}) rows.push_back({s, r, 1, r, r, 0, 0.0});
        }
        const std::string svg = emit_svg_lines(rows);
        std::size_t lines = 0, markers = 0;
        for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++lines;
        for (auto p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1)) ++markers;
        return lines == 3 && markers == 15 ? std::string() : std::string("wrong element counts");
    });

    c.run("forward determinism", [] {
        ModelConfig cfg;
        cfg.stages = {{8, 1, 1}, {8, 1, 1}};
        cfg.seed = 11;
        const Model m = Model::initialize(cfg);
        SyntheticSpec spec;
        spec.train_samples = spec.test_samples = 4;
        const DenseTensor frames = batch_frames(synth_dataset(spec, 11).test, 0, 4);
        const ForwardResult a = forward_full(m, frames, ReductionConfig{{}, 1.0, BlockId{2, 0}});
        const ForwardResult b = forward_full(m, frames, ReductionConfig{{}, 1.0, BlockId{2, 0}});
        return bitwise_equal(a.features, b.features) && a.ledger == b.ledger ? std::string()
                                                                             : std::string("runs differ");
    });

    return c.take();
}

std::size_t report_checks(std::ostream& out, const std::vector<CheckResult>& checks) {
    std::size_t failed = 0;
    for (const auto& ch : checks) {
        out << (ch.pass ? "PASS  " : "FAIL  ") << ch.name;
        if (!ch.pass) {
            out << "  (" << ch.detail << ')';
            ++failed;
        }
        out << '\n';
    }
    out << checks.size() - failed << '/' << checks.size() << " checks passed\n";
    return failed;
}

}  // namespace spk
