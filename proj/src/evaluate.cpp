// SPDX-License-Identifier: Apache-2.0
#include "spk/evaluate.hpp"

#include <algorithm>

#include "spk/error.hpp"

namespace spk {

namespace {

template <typename F>
void for_batches(std::size_t n, std::size_t batch, F&& f) {
    if (batch == 0) throw ArgumentError("batch size must be positive");
    for (std::size_t first = 0; first < n; first += batch) f(first, std::min(batch, n - first));
}

}  // namespace

DenseTensor dataset_features(const Model& model, const Dataset& data, std::size_t batch) {
    if (data.size() == 0) throw ArgumentError("dataset is empty");
    const std::size_t D = model.config().final_dim();
    std::vector<float> out;
    out.reserve(data.size() * D);
    const BlockId insert{1, 0};
    for_batches(data.size(), batch, [&](std::size_t first, std::size_t count) {
        const ForwardResult r = forward_full(model, batch_frames(data, first, count), ReductionConfig{{}, 1.0, insert});
        const auto f = r.features.data();
        out.insert(out.end(), f.begin(), f.end());
    });
    return DenseTensor(Shape{data.size(), D}, std::move(out));
}

void train_head(Model& model, const Dataset& train, const RidgeConfig& ridge, std::size_t batch) {
    const DenseTensor x = dataset_features(model, train, batch);
    model.set_head(fit_ridge(x, train.labels, model.config().num_classes, ridge));
}

PrefixCache build_prefix_cache(const Model& model, const Dataset& data, BlockId insert, std::size_t batch) {
    if (data.size() == 0) throw ArgumentError("dataset is empty");
    PrefixCache cache;
    cache.labels = data.labels;
    for_batches(data.size(), batch, [&](std::size_t first, std::size_t count) {
        cache.batches.push_back(forward_prefix(model, batch_frames(data, first, count), insert));
        cache.first.push_back(first);
    });
    return cache;
}

EvalResult evaluate_cached(const Model& model, const PrefixCache& cache, const ReductionConfig& reduction) {
    if (!model.head()) throw ConfigError("evaluation needs a trained head");
    const std::size_t C = model.config().num_classes;
    std::vector<float> logits;
    logits.reserve(cache.labels.size() * C);
    SopLedger ledger;
    for (std::size_t i = 0; i < cache.batches.size(); ++i) {
        const ForwardResult r = forward_suffix(model, cache.batches[i], reduction, cache.first[i]);
        const auto l = r.logits->data();
        logits.insert(logits.end(), l.begin(), l.end());
        ledger.merge(r.ledger);
    }
    EvalResult out;
    out.logits = DenseTensor(Shape{cache.labels.size(), C}, std::move(logits));
    out.acc1 = top1_accuracy(out.logits, cache.labels);
    out.acc5 = C >= 5 ? topk_accuracy(out.logits, cache.labels, 5) : out.acc1;
    out.ledger.merge(ledger);
    return out;
}

EvalResult evaluate(const Model& model, const Dataset& data, const ReductionConfig& reduction, std::size_t batch) {
    return evaluate_cached(model, build_prefix_cache(model, data, reduction.insert, batch), reduction);
}

double eval_accuracy(const Model& model, const Dataset& data) {
    const BlockId insert{1, 0};
    return evaluate(model, data, ReductionConfig{{}, 1.0, insert}).acc1;
}

}  // namespace spk
