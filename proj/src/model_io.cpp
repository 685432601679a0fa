// SPDX-License-Identifier: Apache-2.0
#include "spk/model_io.hpp"

#include <fstream>

#include "spk/config.hpp"
#include "spk/error.hpp"
#include "spk/kv_file.hpp"
#include "spk/tensor_file.hpp"

namespace spk {

namespace fs = std::filesystem;

namespace {

void write_kv_file(const fs::path& path, const KvFile& kv) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    kv.write(out);
    if (!out) throw FormatError("write failed: " + path.string());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw FormatError("cannot create directory " + dir.string() + ": " + ec.message());
}

const char* const kParts[] = {"q", "k", "v", "proj"};

}  // namespace

void save_model(const fs::path& dir, const Model& model) {
    ensure_dir(dir);
    KvFile kv;
    put_model_keys(kv, model.config());
    kv.set("format", "spk-model-1");
    kv.set("head", model.head() ? "1" : "0");
    write_kv_file(dir / "manifest.txt", kv);
    const auto& w = model.weights();
    write_tensor_file(dir / "embed.spkt", w.w_embed);
    write_tensor_file(dir / "pos.spkt", w.pos_embed);
    for (std::size_t s = 0; s < w.stages.size(); ++s) {
        const std::string stage = "s" + std::to_string(s + 1);
        if (w.stages[s].w_down) write_tensor_file(dir / (stage + ".down.spkt"), *w.stages[s].w_down);
        for (std::size_t b = 0; b < w.stages[s].blocks.size(); ++b) {
            const auto& bw = w.stages[s].blocks[b];
            const DenseTensor* parts[] = {&bw.w_q, &bw.w_k, &bw.w_v, &bw.w_proj};
            for (int p = 0; p < 4; ++p) {
                write_tensor_file(dir / (stage + ".b" + std::to_string(b) + "." + kParts[p] + ".spkt"), *parts[p]);
            }
        }
    }
    if (model.head()) {
        write_tensor_file(dir / "head.w.spkt", model.head()->w);
        write_tensor_file(dir / "head.b.spkt", model.head()->b);
    }
}

Model load_model(const fs::path& dir) {
    const KvFile kv = KvFile::read(dir / "manifest.txt");
    if (kv.get_or("format", "") != "spk-model-1") throw FormatError(dir.string() + " is not a model directory");
    auto known = model_keys();
    known.insert({"format", "head"});
    kv.require_known(known);
    ModelConfig cfg;
    apply_model_keys(kv, cfg);
    cfg.validate();
    ModelWeights w{read_dense_file(dir / "embed.spkt"), read_dense_file(dir / "pos.spkt"), {}};
    for (std::size_t s = 0; s < cfg.stages.size(); ++s) {
        const std::string stage = "s" + std::to_string(s + 1);
        StageWeights sw;
        if (s > 0) sw.w_down = read_dense_file(dir / (stage + ".down.spkt"));
        for (std::size_t b = 0; b < cfg.stages[s].blocks; ++b) {
            const std::string base = stage + ".b" + std::to_string(b) + ".";
            sw.blocks.push_back(SsaBlockWeights{read_dense_file(dir / (base + "q.spkt")),
                                                read_dense_file(dir / (base + "k.spkt")),
                                                read_dense_file(dir / (base + "v.spkt")),
                                                read_dense_file(dir / (base + "proj.spkt"))});
        }
        w.stages.push_back(std::move(sw));
    }
    std::optional<HeadWeights> head;
    if (kv.get_or("head", "0") == "1") {
        head = HeadWeights{read_dense_file(dir / "head.w.spkt"), read_dense_file(dir / "head.b.spkt")};
    }
    return Model(std::move(cfg), std::move(w), std::move(head));
}

namespace {

DenseTensor labels_tensor(const std::vector<int>& labels) {
    std::vector<float> v(labels.begin(), labels.end());
    return DenseTensor(Shape{labels.size()}, std::move(v));
}

std::vector<int> tensor_labels(const DenseTensor& t, std::size_t classes) {
    if (t.shape().rank() != 1) throw FormatError("labels must be rank 1, got " + t.shape().str());
    std::vector<int> out;
    for (float f : t.data()) {
        const int c = static_cast<int>(f);
        if (static_cast<float>(c) != f || c < 0 || static_cast<std::size_t>(c) >= classes) {
            throw FormatError("label value out of range");
        }
        out.push_back(c);
    }
    return out;
}

std::string join_ids(const std::vector<std::size_t>& ids) {
    std::string s;
    for (std::size_t i : ids) s += (s.empty() ? "" : ",") + std::to_string(i);
    return s;
}

}  // namespace

void save_dataset(const fs::path& dir, const SyntheticSpec& spec, std::uint64_t seed, const SyntheticData& data) {
    ensure_dir(dir);
    KvFile kv;
    put_data_keys(kv, spec);
    kv.set("format", "spk-data-1");
    kv.set("seed", std::to_string(seed));
    for (std::size_t c = 0; c < data.signatures.size(); ++c) {
        kv.set("signature." + std::to_string(c), join_ids(data.signatures[c]));
    }
    write_kv_file(dir / "meta.txt", kv);
    write_tensor_file(dir / "train.frames.spkt", data.train.frames);
    write_tensor_file(dir / "train.labels.spkt", labels_tensor(data.train.labels));
    write_tensor_file(dir / "test.frames.spkt", data.test.frames);
    write_tensor_file(dir / "test.labels.spkt", labels_tensor(data.test.labels));
}

StoredData load_dataset(const fs::path& dir) {
    const KvFile kv = KvFile::read(dir / "meta.txt");
    if (kv.get_or("format", "") != "spk-data-1") throw FormatError(dir.string() + " is not a dataset directory");
    SyntheticSpec spec;
    apply_data_keys(kv, spec);
    spec.validate();
    const auto seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
    std::vector<std::vector<std::size_t>> signatures;
    for (std::size_t c = 0; c < spec.classes; ++c) {
        std::vector<std::size_t> ids;
        for (const auto& s : kv.get_list("signature." + std::to_string(c))) {
            const auto id = parse_int(s, "signature id");
            if (id < 0 || static_cast<std::size_t>(id) >= spec.tokens()) throw FormatError("signature id out of range");
            ids.push_back(static_cast<std::size_t>(id));
        }
        signatures.push_back(std::move(ids));
    }
    auto load_split = [&](const std::string& name) {
        Dataset d{read_spike_file(dir / (name + ".frames.spkt")),
                  tensor_labels(read_dense_file(dir / (name + ".labels.spkt")), spec.classes)};
        const Shape& s = d.frames.shape();
        if (s.rank() != 5 || s[0] != d.labels.size() || s[1] != spec.steps || s[2] != spec.channels ||
            s[3] != spec.grid || s[4] != spec.grid) {
            throw FormatError(name + " frames " + s.str() + " do not match meta.txt");
        }
        return d;
    };
    Dataset train = load_split("train");
    Dataset test = load_split("test");
    spec.train_samples = train.size();
    spec.test_samples = test.size();
    return StoredData{spec, seed, SyntheticData{std::move(train), std::move(test), std::move(signatures)}};
}

}  // namespace spk
