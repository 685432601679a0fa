// SPDX-License-Identifier: Apache-2.0
#include "spk/config.hpp"

#include <cstdio>

#include "spk/error.hpp"

namespace spk {

namespace {

std::size_t as_size(const KvFile& kv, const std::string& key, std::size_t fallback) {
    const long long v = kv.get_int(key, static_cast<long long>(fallback));
    if (v < 0) throw ConfigError(key + " must be non-negative");
    return static_cast<std::size_t>(v);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

std::string format_stages(const std::vector<StageConfig>& stages) {
    std::string out;
    for (const auto& s : stages) {
        if (!out.empty()) out += ',';
        out += std::to_string(s.channels) + ":" + std::to_string(s.blocks) + ":" + std::to_string(s.downsample);
    }
    return out;
}

std::vector<StageConfig> parse_stages(const std::string& text) {
    std::vector<StageConfig> out;
    for (const auto& item : split_list(text)) {
        const auto parts = split_list(item, ':');
        if (parts.size() != 3) throw ConfigError("stage '" + item + "' must be channels:blocks:downsample");
        StageConfig s;
        s.channels = static_cast<std::size_t>(parse_int(parts[0], "stage channels"));
        s.blocks = static_cast<std::size_t>(parse_int(parts[1], "stage blocks"));
        s.downsample = static_cast<std::size_t>(parse_int(parts[2], "stage downsample"));
        out.push_back(s);
    }
    if (out.empty()) throw ConfigError("stages must list at least one stage");
    return out;
}

const std::set<std::string>& model_keys() {
    static const std::set<std::string> keys = {
        "steps", "num_classes", "seed", "in_channels", "input_height", "input_width", "patch", "stages", "tau",
        "v_th", "attn_shift", "counting", "embed_gain", "pos_gain", "down_gain", "qkv_gain", "proj_gain"};
    return keys;
}

void apply_model_keys(const KvFile& kv, ModelConfig& c) {
    c.steps = as_size(kv, "steps", c.steps);
    c.num_classes = as_size(kv, "num_classes", c.num_classes);
    c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(c.seed)));
    c.in_channels = as_size(kv, "in_channels", c.in_channels);
    c.input_height = as_size(kv, "input_height", c.input_height);
    c.input_width = as_size(kv, "input_width", c.input_width);
    c.patch = as_size(kv, "patch", c.patch);
    if (kv.has("stages")) c.stages = parse_stages(kv.get("stages"));
    c.lif.tau = static_cast<float>(kv.get_double("tau", c.lif.tau));
    c.lif.v_th = static_cast<float>(kv.get_double("v_th", c.lif.v_th));
    c.attn_shift = static_cast<int>(kv.get_int("attn_shift", c.attn_shift));
    if (kv.has("counting")) {
        const std::string& v = kv.get("counting");
        if (v == "structural") c.counting = AttentionCounting::structural;
        else if (v == "data_dependent") c.counting = AttentionCounting::data_dependent;
        else throw ConfigError("counting must be structural or data_dependent, got '" + v + "'");
    }
    c.embed_gain = static_cast<float>(kv.get_double("embed_gain", c.embed_gain));
    c.pos_gain = static_cast<float>(kv.get_double("pos_gain", c.pos_gain));
    c.down_gain = static_cast<float>(kv.get_double("down_gain", c.down_gain));
    c.qkv_gain = static_cast<float>(kv.get_double("qkv_gain", c.qkv_gain));
    c.proj_gain = static_cast<float>(kv.get_double("proj_gain", c.proj_gain));
}

void put_model_keys(KvFile& kv, const ModelConfig& c) {
    kv.set("steps", std::to_string(c.steps));
    kv.set("num_classes", std::to_string(c.num_classes));
    kv.set("seed", std::to_string(c.seed));
    kv.set("in_channels", std::to_string(c.in_channels));
    kv.set("input_height", std::to_string(c.input_height));
    kv.set("input_width", std::to_string(c.input_width));
    kv.set("patch", std::to_string(c.patch));
    kv.set("stages", format_stages(c.stages));
    kv.set("tau", fmt(c.lif.tau));
    kv.set("v_th", fmt(c.lif.v_th));
    kv.set("attn_shift", std::to_string(c.attn_shift));
    kv.set("counting", c.counting == AttentionCounting::structural ? "structural" : "data_dependent");
    kv.set("embed_gain", fmt(c.embed_gain));
    kv.set("pos_gain", fmt(c.pos_gain));
    kv.set("down_gain", fmt(c.down_gain));
    kv.set("qkv_gain", fmt(c.qkv_gain));
    kv.set("proj_gain", fmt(c.proj_gain));
}

const std::set<std::string>& data_keys() {
    static const std::set<std::string> keys = {"grid",     "classes",  "signature_tokens", "p_signal",    "p_background",
                                               "channels", "steps",    "train_samples",    "test_samples"};
    return keys;
}

void apply_data_keys(const KvFile& kv, SyntheticSpec& s) {
    s.grid = as_size(kv, "grid", s.grid);
    s.classes = as_size(kv, "classes", s.classes);
    s.signature_tokens = as_size(kv, "signature_tokens", s.signature_tokens);
    s.p_signal = kv.get_double("p_signal", s.p_signal);
    s.p_background = kv.get_double("p_background", s.p_background);
    s.channels = as_size(kv, "channels", s.channels);
    s.steps = as_size(kv, "steps", s.steps);
    s.train_samples = as_size(kv, "train_samples", s.train_samples);
    s.test_samples = as_size(kv, "test_samples", s.test_samples);
}

void put_data_keys(KvFile& kv, const SyntheticSpec& s) {
    kv.set("grid", std::to_string(s.grid));
    kv.set("classes", std::to_string(s.classes));
    kv.set("signature_tokens", std::to_string(s.signature_tokens));
    kv.set("p_signal", fmt(s.p_signal));
    kv.set("p_background", fmt(s.p_background));
    kv.set("channels", std::to_string(s.channels));
    kv.set("steps", std::to_string(s.steps));
    kv.set("train_samples", std::to_string(s.train_samples));
    kv.set("test_samples", std::to_string(s.test_samples));
}

ModelConfig model_for_data(const SyntheticSpec& spec, ModelConfig base) {
    base.num_classes = spec.classes;
    base.in_channels = spec.channels;
    base.input_height = spec.grid;
    base.input_width = spec.grid;
    base.steps = spec.steps;
    return base;
}

}  // namespace spk
