// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "spk/config.hpp"
#include "spk/error.hpp"
#include "spk/evaluate.hpp"
#include "spk/kv_file.hpp"
#include "spk/model_io.hpp"
#include "spk/svg.hpp"
#include "spk/sweep.hpp"
#include "spk/synth.hpp"

using namespace spk;

namespace {

KvFile parse_kv(const std::string& text) {
    std::istringstream in(text);
    return KvFile::parse(in, "test");
}

SweepConfig tiny_sweep() {
    SweepConfig c = SweepConfig::from_kv(parse_kv(
        "strategies=uncert_prune,random_prune,uncert_merge\n"
        "keep_ratios=1.0,0.5\n"
        "seeds=1,2\n"
        "train_samples=48\n"
        "test_samples=16\n"
        "stages=8:1:1,8:1:1,8:2:1\n"
        "batch=8\n"));
    return c;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("key-value files") {
    const KvFile kv = parse_kv("# comment\n a = 1 \n\nlist = x, y ,z\nf=0.25\n");
    CHECK(kv.get("a") == "1");
    CHECK(kv.get_int("a", 0) == 1);
    CHECK(kv.get_double("f", 0.0) == 0.25);
    CHECK(kv.get_double("missing", 3.5) == 3.5);
    CHECK(kv.get_list("list") == std::vector<std::string>{"x", "y", "z"});
    CHECK_THROWS_AS(kv.get("missing"), ConfigError);
    CHECK_THROWS_AS(parse_kv("a=1\na=2\n"), ConfigError);
    CHECK_THROWS_AS(parse_kv("novalue\n"), ConfigError);
    CHECK_THROWS_AS(kv.require_known({"a", "list"}), ConfigError);
    CHECK_THROWS_AS(parse_kv("a=x\n").get_int("a", 0), ConfigError);
    std::ostringstream out;
    kv.write(out);
    const KvFile back = parse_kv(out.str());
    CHECK(back.values() == kv.values());
}

TEST_CASE("stage strings") {
    const auto st = parse_stages("16:1:1,32:2:2");
    REQUIRE(st.size() == 2);
    CHECK(st[1].channels == 32);
    CHECK(st[1].blocks == 2);
    CHECK(st[1].downsample == 2);
    CHECK(format_stages(st) == "16:1:1,32:2:2");
    CHECK_THROWS_AS(parse_stages("16:1"), ConfigError);
}

TEST_CASE("synthetic data is seeded and class signatures are disjoint") {
    SyntheticSpec spec;
    spec.train_samples = 20;
    spec.test_samples = 10;
    const SyntheticData a = synth_dataset(spec, 5), b = synth_dataset(spec, 5), c = synth_dataset(spec, 6);
    CHECK(bitwise_equal(a.train.frames, b.train.frames));
    CHECK(a.test.labels == b.test.labels);
    CHECK_FALSE(bitwise_equal(a.train.frames, c.train.frames));
    CHECK(a.train.frames.shape() == Shape{20, 4, 2, 8, 8});
    std::set<std::size_t> seen;
    for (const auto& sig : a.signatures) {
        CHECK(sig.size() == 4);
        CHECK(std::is_sorted(sig.begin(), sig.end()));
        for (std::size_t t : sig) CHECK(seen.insert(t).second);
    }
    for (int l : a.train.labels) CHECK((l >= 0 && l < 4));
    CHECK(batch_frames(a.test, 2, 3).shape() == Shape{4, 3, 2, 8, 8});
    CHECK_THROWS_AS(batch_frames(a.test, 9, 3), Error);
    SyntheticSpec bad = spec;
    bad.p_signal = 0.05;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = spec;
    bad.signature_tokens = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("Bayes classifier recovers noiseless labels") {
    SyntheticSpec spec;
    spec.p_signal = 1.0;
    spec.p_background = 0.0;
    spec.steps = 1;
    spec.train_samples = 8;
    spec.test_samples = 32;
    const SyntheticData d = synth_dataset(spec, 3);
    for (std::size_t i = 0; i < d.test.size(); ++i) {
        const auto counts = token_counts(d.test, i);
        CHECK(bayes_classify(spec, d.signatures, counts) == d.test.labels[i]);
    }
}

TEST_CASE("datasets round trip") {
    SyntheticSpec spec;
    spec.train_samples = 8;
    spec.test_samples = 4;
    const SyntheticData d = synth_dataset(spec, 11);
    const auto dir = std::filesystem::temp_directory_path() / "spk_test_data_rt";
    std::filesystem::remove_all(dir);
    save_dataset(dir, spec, 11, d);
    const StoredData s = load_dataset(dir);
    CHECK(s.seed == 11);
    CHECK(s.spec.test_samples == 4);
    CHECK(s.data.signatures == d.signatures);
    CHECK(bitwise_equal(s.data.test.frames, d.test.frames));
    CHECK(s.data.train.labels == d.train.labels);
    std::filesystem::remove_all(dir);
}

TEST_CASE("sweep configuration keys") {
    const SweepConfig c = tiny_sweep();
    CHECK(c.strategies.size() == 3);
    CHECK(c.keep_ratios == std::vector<double>{1.0, 0.5});
    CHECK(c.seeds == std::vector<std::uint64_t>{1, 2});
    CHECK(c.model.stages[0].channels == 8);
    CHECK(c.model.num_classes == c.data.classes);
    const SweepConfig back = SweepConfig::from_kv(c.to_kv());
    CHECK(back.to_kv().values() == c.to_kv().values());
    CHECK_THROWS_AS(SweepConfig::from_kv(parse_kv("bogus=1\n")), ConfigError);
    CHECK_THROWS_AS(SweepConfig::from_kv(parse_kv("keep_ratios=1.5\n")), Error);
    CHECK_THROWS_AS(SweepConfig::from_kv(parse_kv("strategies=nope\n")), Error);
}

TEST_CASE("sweep rows, CSV and SVG") {
    const SweepConfig c = tiny_sweep();
    const std::vector<ResultRow> rows = run_sweep(c);
    CHECK(rows.size() == 3 * 2 * 2);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto key = [](const ResultRow& r) { return std::tuple(r.strategy, r.keep_ratio, r.seed); };
        CHECK(key(rows[i - 1]) < key(rows[i]));
    }
    // At ratio 1 every strategy is the unreduced model.
    std::map<std::uint64_t, std::vector<const ResultRow*>> full;
    for (const auto& r : rows) {
        if (r.keep_ratio == 1.0) full[r.seed].push_back(&r);
    }
    for (const auto& [seed, group] : full) {
        const SeedContext ctx = prepare_seed(c, seed);
        const EvalResult none = evaluate_cached(ctx.model, ctx.cache, ReductionConfig{});
        for (const ResultRow* r : group) {
            CHECK(r->acc1 == none.acc1);
            CHECK(r->energy_mj == energy_mj(none.ledger));
        }
    }
    for (const auto& r : rows) {
        CHECK(r.acc5 == r.acc1);
        if (r.keep_ratio < 1.0 && r.strategy != "uncert_merge") {
            const auto ref = std::find_if(rows.begin(), rows.end(), [&](const ResultRow& o) {
                return o.strategy == r.strategy && o.seed == r.seed && o.keep_ratio == 1.0;
            });
            CHECK(r.block_sops < ref->block_sops);
        }
    }

    std::ostringstream csv;
    write_sweep_csv(csv, rows, c.data.classes);
    const std::string text = csv.str();
    CHECK(text.rfind("strategy,keep_ratio,seed,acc1,acc5_eq_acc1,block_sops,energy_mj\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 13);
    std::ostringstream csv5;
    write_sweep_csv(csv5, rows, 10);
    CHECK(csv5.str().rfind("strategy,keep_ratio,seed,acc1,acc5,", 0) == 0);

    const std::string svg = emit_svg_lines(rows);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg == emit_svg_lines(rows));
    CHECK(std::count(svg.begin(), svg.end(), '\n') > 0);
    for (const char* name : {"uncert_prune", "random_prune", "uncert_merge"}) CHECK(svg.find(name) != std::string::npos);
}

TEST_CASE("SVG edge cases") {
    CHECK_THROWS_AS(emit_svg_lines(std::vector<ResultRow>{}), ArgumentError);
    const std::vector<ResultRow> one = {{"uncert_prune", 1.0, 1, 0.5, 0.5, 10, 0.1}};
    const std::string svg = emit_svg_lines(one);
    CHECK(svg.find("<circle") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("SOP report decreases with the keep ratio") {
    const SweepConfig c = tiny_sweep();
    const SeedContext ctx = prepare_seed(c, 1);
    const std::vector<double> ratios = {1.0, 0.8, 0.6, 0.4};
    const auto rows = sop_report(ctx.model, ctx.cache, Strategy{StrategyKind::uncert_prune}, ratios);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].reduction_pct == 0.0);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].block_total < rows[i - 1].block_total);
        CHECK(rows[i].reduction_pct > rows[i - 1].reduction_pct);
        CHECK(rows[i].energy_mj < rows[i - 1].energy_mj);
        CHECK(rows[i].block_total == rows[i].block_sops + rows[i].block_macs);
    }
    std::ostringstream out;
    write_sop_csv(out, rows);
    CHECK(out.str().rfind("keep_ratio,block_sops,block_macs,block_total,reduction_pct,energy_mj\n", 0) == 0);
}

}  // TEST_SUITE
