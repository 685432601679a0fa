// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>

#include "spk/model.hpp"
#include "spk/synth.hpp"

namespace spk {

// A model directory holds manifest.txt (key=value config) and one TensorFile per weight:
// embed, pos, s<k>.down, s<k>.b<j>.{q,k,v,proj}, and head.w / head.b when a head is present.
void save_model(const std::filesystem::path& dir, const Model& model);
Model load_model(const std::filesystem::path& dir);

// A dataset directory holds meta.txt (spec, seed, signatures) and {train,test}.{frames,labels}.
struct StoredData {
    SyntheticSpec spec;
    std::uint64_t seed = 0;
    SyntheticData data;
};

void save_dataset(const std::filesystem::path& dir, const SyntheticSpec& spec, std::uint64_t seed,
                  const SyntheticData& data);
StoredData load_dataset(const std::filesystem::path& dir);

}  // namespace spk
