// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spk/config.hpp"
#include "spk/error.hpp"
#include "spk/evaluate.hpp"
#include "spk/model_io.hpp"
#include "spk/selftest.hpp"
#include "spk/svg.hpp"
#include "spk/sweep.hpp"
#include "spk/tensor_file.hpp"
#include "spk/uncertainty.hpp"

namespace {

using namespace spk;

struct DataOptions {
    std::string dir;
    std::string config;
    std::uint64_t seed = 1;
    std::optional<std::size_t> steps;
    std::optional<std::size_t> train;
    std::optional<std::size_t> test;
};

struct ModelOptions {
    std::string dir;
    std::optional<double> tau;
    std::optional<double> v_th;
    double l2 = RidgeConfig{}.l2;
};

void add_data_flags(CLI::App* cmd, DataOptions& d) {
    cmd->add_option("--data", d.dir, "dataset directory written by `gen`");
    cmd->add_option("--config", d.config, "key=value file with model and data keys");
    cmd->add_option("--seed", d.seed, "seed for data, weights and the random baseline");
    cmd->add_option("--steps", d.steps, "simulation steps T");
    cmd->add_option("--train-samples", d.train, "training split size");
    cmd->add_option("--test-samples", d.test, "test split size");
}

void add_model_flags(CLI::App* cmd, ModelOptions& m) {
    cmd->add_option("--model", m.dir, "model directory written by `train-head`");
    cmd->add_option("--tau", m.tau, "LIF membrane decay");
    cmd->add_option("--vth", m.v_th, "LIF threshold");
    cmd->add_option("--l2", m.l2, "ridge regularization of the head");
}

KvFile config_file(const DataOptions& d) {
    if (d.config.empty()) return {};
    KvFile kv = KvFile::read(d.config);
    auto known = model_keys();
    known.insert(data_keys().begin(), data_keys().end());
    kv.require_known(known);
    return kv;
}

SyntheticSpec data_spec(const DataOptions& d) {
    SyntheticSpec spec;
    apply_data_keys(config_file(d), spec);
    if (d.steps) spec.steps = *d.steps;
    if (d.train) spec.train_samples = *d.train;
    if (d.test) spec.test_samples = *d.test;
    spec.validate();
    return spec;
}

StoredData obtain_data(const DataOptions& d) {
    if (!d.dir.empty()) return load_dataset(d.dir);
    const SyntheticSpec spec = data_spec(d);
    return StoredData{spec, d.seed, synth_dataset(spec, d.seed)};
}

Model obtain_model(const ModelOptions& m, const DataOptions& d, const StoredData& data) {
    if (!m.dir.empty()) {
        Model model = load_model(m.dir);
        if (m.tau) model.mutable_config().lif.tau = static_cast<float>(*m.tau);
        if (m.v_th) model.mutable_config().lif.v_th = static_cast<float>(*m.v_th);
        if (d.steps) model.mutable_config().steps = *d.steps;
        model.mutable_config().validate();
        return model;
    }
    ModelConfig cfg;
    apply_model_keys(config_file(d), cfg);
    cfg = model_for_data(data.spec, cfg);
    cfg.seed = d.seed;
    if (m.tau) cfg.lif.tau = static_cast<float>(*m.tau);
    if (m.v_th) cfg.lif.v_th = static_cast<float>(*m.v_th);
    Model model = Model::initialize(cfg);
    train_head(model, data.data.train, RidgeConfig{m.l2});
    return model;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path);
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    if (!out) throw FormatError("write failed: " + path);
}

int cmd_gen(const DataOptions& d, const std::string& out) {
    const SyntheticSpec spec = data_spec(d);
    save_dataset(out, spec, d.seed, synth_dataset(spec, d.seed));
    std::cout << "wrote " << spec.train_samples << " train and " << spec.test_samples << " test samples to " << out
              << '\n';
    return 0;
}

int cmd_train_head(const DataOptions& d, const ModelOptions& m, const std::string& out) {
    const StoredData data = obtain_data(d);
    Model model = obtain_model(m, d, data);
    if (!m.dir.empty()) train_head(model, data.data.train, RidgeConfig{m.l2});
    save_model(out, model);
    std::printf("train_acc1=%.6f\n", eval_accuracy(model, data.data.train));
    std::cout << "wrote model to " << out << '\n';
    return 0;
}

struct RunOptions {
    double keep_ratio = 1.0;
    std::string strategy = "none";
    double lambda = kDefaultLambda;
    std::string score = "uncert";
    std::string insert = BlockId{}.str();
    std::string dump_uncertainty;
    std::string dump_mask;
    std::string dump_logits;
};

int cmd_run(const DataOptions& d, const ModelOptions& m, const RunOptions& r) {
    const StoredData data = obtain_data(d);
    const Model model = obtain_model(m, d, data);
    Strategy strategy = parse_strategy(r.strategy);
    strategy.lambda = r.lambda;
    strategy.seed = d.seed;
    strategy.score = parse_score_mode(r.score);
    const ReductionConfig reduction{strategy, r.keep_ratio, BlockId::parse(r.insert), !r.dump_uncertainty.empty()};
    if (!(r.keep_ratio > 0.0 && r.keep_ratio <= 1.0)) throw ArgumentError("--keep-ratio must lie in (0, 1]");

    const PrefixCache cache = build_prefix_cache(model, data.data.test, reduction.insert);
    std::optional<std::ofstream> u_out, m_out;
    if (!r.dump_uncertainty.empty()) {
        u_out = open_out(r.dump_uncertainty);
        *u_out << "sample,token,t,U\n";
    }
    if (!r.dump_mask.empty()) {
        m_out = open_out(r.dump_mask);
        *m_out << "sample,token,kept,anchor\n";
    }
    std::vector<float> logits;
    SopLedger ledger;
    for (std::size_t i = 0; i < cache.batches.size(); ++i) {
        const ForwardResult fr = forward_suffix(model, cache.batches[i], reduction, cache.first[i]);
        logits.insert(logits.end(), fr.logits->data().begin(), fr.logits->data().end());
        ledger.merge(fr.ledger);
        if (u_out) write_uncertainty_rows(*u_out, *fr.uncertainty, cache.first[i]);
        if (m_out) {
            if (!fr.merges.empty()) write_merge_rows(*m_out, fr.merges, cache.first[i]);
            else write_mask_rows(*m_out, fr.masks, cache.first[i]);
        }
    }
    const std::size_t C = model.config().num_classes;
    const DenseTensor all(Shape{cache.labels.size(), C}, std::move(logits));
    if (!r.dump_logits.empty()) write_tensor_file(r.dump_logits, all);
    const double acc1 = top1_accuracy(all, cache.labels);
    const double acc5 = C >= 5 ? topk_accuracy(all, cache.labels, 5) : acc1;
    const OpCounts block = ledger.total_with_prefix(block_label(reduction.insert) + ".");
    std::printf("strategy=%s keep_ratio=%.6f acc1=%.6f acc5%s=%.6f block_sops=%llu block_macs=%llu energy_mj=%.6f\n",
                strategy.label().c_str(), r.keep_ratio, acc1, C >= 5 ? "" : "_eq_acc1", acc5,
                static_cast<unsigned long long>(block.spike_accumulates),
                static_cast<unsigned long long>(block.dense_macs), energy_mj(ledger));
    return 0;
}

struct SweepOptions {
    std::string config;
    std::string csv = "sweep.csv";
    std::string svg = "sweep.svg";
    std::string strategies;
    std::string ratios;
    std::string seeds;
    std::optional<double> lambda;
    std::string insert;
};

int cmd_sweep(const SweepOptions& o) {
    KvFile kv = o.config.empty() ? KvFile{} : KvFile::read(o.config);
    if (!o.strategies.empty()) kv.set("strategies", o.strategies);
    if (!o.ratios.empty()) kv.set("keep_ratios", o.ratios);
    if (!o.seeds.empty()) kv.set("seeds", o.seeds);
    if (o.lambda) kv.set("lambda", std::to_string(*o.lambda));
    if (!o.insert.empty()) kv.set("insert_block", o.insert);
    const SweepConfig cfg = SweepConfig::from_kv(kv);
    const auto rows = run_sweep(cfg);
    {
        auto out = open_out(o.csv);
        write_sweep_csv(out, rows, cfg.data.classes);
        if (!out) throw FormatError("write failed: " + o.csv);
    }
    write_text(o.svg, emit_svg_lines(rows));
    std::cout << "wrote " << rows.size() << " rows to " << o.csv << " and " << o.svg << '\n';
    return 0;
}

int cmd_sop(const DataOptions& d, const ModelOptions& m, const std::string& ratios, const std::string& strategy_name,
            const std::string& insert, const std::string& out_path) {
    const StoredData data = obtain_data(d);
    const Model model = obtain_model(m, d, data);
    std::vector<double> rs;
    for (const auto& s : split_list(ratios)) rs.push_back(parse_double(s, "--keep-ratios"));
    Strategy strategy = parse_strategy(strategy_name);
    strategy.seed = d.seed;
    const PrefixCache cache = build_prefix_cache(model, data.data.test, BlockId::parse(insert));
    const auto rows = sop_report(model, cache, strategy, rs);
    if (out_path.empty() || out_path == "-") {
        write_sop_csv(std::cout, rows);
    } else {
        auto out = open_out(out_path);
        write_sop_csv(out, rows);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Uncertainty-aware token reduction for spiking transformers"};
    app.require_subcommand(1);

    DataOptions data;
    ModelOptions model;

    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "synthesize a dataset to TensorFiles");
    add_data_flags(gen, data);
    gen->add_option("--out", gen_out, "output directory")->required();

    std::string train_out;
    auto* train = app.add_subcommand("train-head", "initialize a model and fit its ridge head");
    add_data_flags(train, data);
    add_model_flags(train, model);
    train->add_option("--out", train_out, "output model directory")->required();

    RunOptions run_opts;
    auto* run = app.add_subcommand("run", "evaluate once with an optional token reduction");
    add_data_flags(run, data);
    add_model_flags(run, model);
    run->add_option("--keep-ratio", run_opts.keep_ratio, "fraction of tokens kept");
    run->add_option("--strategy", run_opts.strategy,
                    "none | uncert-prune | uncert-merge | random-prune | low-uncert-prune");
    run->add_option("--lambda", run_opts.lambda, "weight of the temporal standard deviation");
    run->add_option("--score", run_opts.score, "uncert | mean | std | last");
    run->add_option("--insert-block", run_opts.insert, "block where tokens are reduced, e.g. 3.1");
    run->add_option("--dump-uncertainty", run_opts.dump_uncertainty, "CSV of U per sample, token and step");
    run->add_option("--dump-mask", run_opts.dump_mask, "CSV of kept tokens or merge anchors");
    run->add_option("--dump-logits", run_opts.dump_logits, "TensorFile with the test logits");

    SweepOptions sweep_opts;
    auto* sweep = app.add_subcommand("sweep", "strategy x keep ratio x seed grid");
    sweep->add_option("--config", sweep_opts.config, "key=value sweep configuration");
    sweep->add_option("--csv", sweep_opts.csv, "output CSV");
    sweep->add_option("--svg", sweep_opts.svg, "output SVG");
    sweep->add_option("--strategies", sweep_opts.strategies, "comma separated strategies");
    sweep->add_option("--keep-ratios", sweep_opts.ratios, "comma separated keep ratios");
    sweep->add_option("--seeds", sweep_opts.seeds, "comma separated seeds");
    sweep->add_option("--lambda", sweep_opts.lambda, "weight of the temporal standard deviation");
    sweep->add_option("--insert-block", sweep_opts.insert, "block where tokens are reduced");

    std::string sop_ratios = "1.0,0.8,0.6,0.4";
    std::string sop_strategy = "uncert-prune";
    std::string sop_insert = BlockId{}.str();
    std::string sop_out;
    auto* sop = app.add_subcommand("sop", "operation and energy report per keep ratio");
    add_data_flags(sop, data);
    add_model_flags(sop, model);
    sop->add_option("--keep-ratios", sop_ratios, "comma separated keep ratios");
    sop->add_option("--strategy", sop_strategy, "reduction strategy");
    sop->add_option("--insert-block", sop_insert, "block where tokens are reduced");
    sop->add_option("--out", sop_out, "output CSV (default stdout)");

    auto* selftest = app.add_subcommand("selftest", "check hand-derived reference examples");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*gen) return cmd_gen(data, gen_out);
        if (*train) return cmd_train_head(data, model, train_out);
        if (*run) return cmd_run(data, model, run_opts);
        if (*sweep) return cmd_sweep(sweep_opts);
        if (*sop) return cmd_sop(data, model, sop_ratios, sop_strategy, sop_insert, sop_out);
        if (*selftest) return report_checks(std::cout, run_selftest()) == 0 ? 0 : 2;
    } catch (const spk::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
