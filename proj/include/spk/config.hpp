// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "spk/head_training.hpp"
#include "spk/kv_file.hpp"
#include "spk/model.hpp"
#include "spk/synth.hpp"

namespace spk {

// Model keys: steps, num_classes, seed, in_channels, input_height, input_width, patch,
// stages (channels:blocks:downsample,...), tau, v_th, attn_shift, counting, *_gain.
void apply_model_keys(const KvFile& kv, ModelConfig& cfg);
void put_model_keys(KvFile& kv, const ModelConfig& cfg);
const std::set<std::string>& model_keys();

// Data keys: grid, classes, signature_tokens, p_signal, p_background, channels, steps,
// train_samples, test_samples. `steps` and `classes` are shared with the model.
void apply_data_keys(const KvFile& kv, SyntheticSpec& spec);
void put_data_keys(KvFile& kv, const SyntheticSpec& spec);
const std::set<std::string>& data_keys();

// A model config consistent with a synthetic spec (classes, channels, input size, steps).
ModelConfig model_for_data(const SyntheticSpec& spec, ModelConfig base = {});

std::string format_stages(const std::vector<StageConfig>& stages);
std::vector<StageConfig> parse_stages(const std::string& text);

}  // namespace spk
