// SPDX-License-Identifier: Apache-2.0
#include "spk/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <tuple>

#include "spk/config.hpp"
#include "spk/error.hpp"

namespace spk {

void SweepConfig::validate() const {
    if (strategies.empty()) throw ConfigError("sweep needs at least one strategy");
    if (keep_ratios.empty()) throw ConfigError("sweep needs at least one keep ratio");
    if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
    for (double r : keep_ratios) {
        if (!(r > 0.0 && r <= 1.0)) throw ConfigError("keep ratios must lie in (0, 1]");
    }
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    if (batch == 0) throw ConfigError("batch must be positive");
    if (ridge.l2 < 0.0) throw ConfigError("l2 must be >= 0");
    data.validate();
    model_for_data(data, model).validate();
}

SweepConfig SweepConfig::from_kv(const KvFile& kv) {
    auto known = model_keys();
    known.insert(data_keys().begin(), data_keys().end());
    known.insert({"strategies", "keep_ratios", "seeds", "lambda", "insert_block", "batch", "l2"});
    kv.require_known(known);
    SweepConfig c;
    c.lambda = kv.get_double("lambda", c.lambda);
    if (kv.has("strategies")) {
        c.strategies.clear();
        for (const auto& s : kv.get_list("strategies")) c.strategies.push_back(parse_strategy(s));
    }
    if (kv.has("keep_ratios")) {
        c.keep_ratios.clear();
        for (const auto& s : kv.get_list("keep_ratios")) c.keep_ratios.push_back(parse_double(s, "keep_ratios"));
    }
    if (kv.has("seeds")) {
        c.seeds.clear();
        for (const auto& s : kv.get_list("seeds")) {
            const long long v = parse_int(s, "seeds");
            if (v < 0) throw ConfigError("seeds must be non-negative");
            c.seeds.push_back(static_cast<std::uint64_t>(v));
        }
    }
    if (kv.has("insert_block")) c.insert = BlockId::parse(kv.get("insert_block"));
    const long long batch = kv.get_int("batch", static_cast<long long>(c.batch));
    if (batch <= 0) throw ConfigError("batch must be positive");
    c.batch = static_cast<std::size_t>(batch);
    c.ridge.l2 = kv.get_double("l2", c.ridge.l2);
    apply_data_keys(kv, c.data);
    apply_model_keys(kv, c.model);
    c.model = model_for_data(c.data, c.model);
    c.validate();
    return c;
}

KvFile SweepConfig::to_kv() const {
    KvFile kv;
    put_model_keys(kv, model_for_data(data, model));
    put_data_keys(kv, data);
    auto join = [](const auto& items, auto fmt) {
        std::string s;
        for (const auto& x : items) s += (s.empty() ? "" : ",") + fmt(x);
        return s;
    };
    char buf[64];
    kv.set("strategies", join(strategies, [](const Strategy& s) { return s.label(); }));
    kv.set("keep_ratios", join(keep_ratios, [&](double r) {
               std::snprintf(buf, sizeof buf, "%.9g", r);
               return std::string(buf);
           }));
    kv.set("seeds", join(seeds, [](std::uint64_t s) { return std::to_string(s); }));
    std::snprintf(buf, sizeof buf, "%.9g", lambda);
    kv.set("lambda", buf);
    kv.set("insert_block", insert.str());
    kv.set("batch", std::to_string(batch));
    std::snprintf(buf, sizeof buf, "%.9g", ridge.l2);
    kv.set("l2", buf);
    kv.set("seed", std::to_string(model.seed));
    return kv;
}

SeedContext prepare_seed(const SweepConfig& cfg, std::uint64_t seed) {
    SyntheticData data = synth_dataset(cfg.data, seed);
    ModelConfig mc = model_for_data(cfg.data, cfg.model);
    mc.seed = seed;
    Model model = Model::initialize(mc);
    train_head(model, data.train, cfg.ridge, cfg.batch);
    PrefixCache cache = build_prefix_cache(model, data.test, cfg.insert, cfg.batch);
    return SeedContext{seed, std::move(data), std::move(model), std::move(cache)};
}

ResultRow run_cell(const SweepConfig& cfg, const SeedContext& ctx, const Strategy& strategy, double keep_ratio) {
    Strategy s = strategy;
    s.lambda = cfg.lambda;
    s.seed = ctx.seed;
    const EvalResult r = evaluate_cached(ctx.model, ctx.cache, ReductionConfig{s, keep_ratio, cfg.insert});
    ResultRow row;
    row.strategy = strategy.label();
    row.keep_ratio = keep_ratio;
    row.seed = ctx.seed;
    row.acc1 = r.acc1;
    row.acc5 = r.acc5;
    row.block_sops = r.ledger.total_with_prefix(block_label(cfg.insert) + ".").spike_accumulates;
    row.energy_mj = energy_mj(r.ledger);
    return row;
}

std::vector<ResultRow> run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    std::vector<ResultRow> rows;
    for (std::uint64_t seed : cfg.seeds) {
        const SeedContext ctx = prepare_seed(cfg, seed);
        for (const auto& s : cfg.strategies) {
            for (double r : cfg.keep_ratios) rows.push_back(run_cell(cfg, ctx, s, r));
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.strategy, a.keep_ratio, a.seed) < std::tie(b.strategy, b.keep_ratio, b.seed);
    });
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<ResultRow>& rows, std::size_t num_classes) {
    out << "strategy,keep_ratio,seed,acc1," << (num_classes >= 5 ? "acc5" : "acc5_eq_acc1")
        << ",block_sops,energy_mj\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.6f,%llu,%.6f,%.6f,%llu,%.6f\n", r.strategy.c_str(), r.keep_ratio,
                      static_cast<unsigned long long>(r.seed), r.acc1, r.acc5,
                      static_cast<unsigned long long>(r.block_sops), r.energy_mj);
        out << buf;
    }
}

std::vector<SopRow> sop_report(const Model& model, const PrefixCache& cache, const Strategy& strategy,
                               std::span<const double> keep_ratios) {
    if (keep_ratios.empty()) throw ArgumentError("sop report needs at least one keep ratio");
    if (cache.batches.empty()) throw ArgumentError("sop report needs at least one batch");
    const BlockId insert = cache.batches.front().insert;
    const std::string prefix = block_label(insert) + ".";
    auto measure = [&](double r) {
        const EvalResult e = evaluate_cached(model, cache, ReductionConfig{strategy, r, insert});
        const OpCounts block = e.ledger.total_with_prefix(prefix);
        return SopRow{r, block.spike_accumulates, block.dense_macs, block.total(), 0.0, energy_mj(e.ledger)};
    };
    const std::uint64_t base = measure(1.0).block_total;
    std::vector<SopRow> rows;
    for (double r : keep_ratios) {
        SopRow row = measure(r);
        row.reduction_pct = reduction_percent(base, row.block_total);
        rows.push_back(row);
    }
    return rows;
}

void write_sop_csv(std::ostream& out, const std::vector<SopRow>& rows) {
    out << "keep_ratio,block_sops,block_macs,block_total,reduction_pct,energy_mj\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.6f,%llu,%llu,%llu,%.6f,%.6f\n", r.keep_ratio,
                      static_cast<unsigned long long>(r.block_sops), static_cast<unsigned long long>(r.block_macs),
                      static_cast<unsigned long long>(r.block_total), r.reduction_pct, r.energy_mj);
        out << buf;
    }
}

}  // namespace spk
