// SPDX-License-Identifier: Apache-2.0
#include "spk/tensor_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace spk {

namespace {

constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kFixedHeader = 8;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + static_cast<std::size_t>(i)]) << (8 * i);
    return v;
}

std::vector<std::uint8_t> header(const Shape& shape, TensorDType dtype) {
    std::vector<std::uint8_t> out = {'S', 'P', 'K', 'T', kVersion, static_cast<std::uint8_t>(dtype),
                                     static_cast<std::uint8_t>(shape.rank()), 0};
    for (std::size_t d : shape.dims()) {
        if (d > std::numeric_limits<std::uint32_t>::max()) {
            throw ShapeError("extent " + std::to_string(d) + " does not fit the 32-bit file field");
        }
        put_u32(out, static_cast<std::uint32_t>(d));
    }
    return out;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open tensor file " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write tensor file " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("short write to " + path.string());
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const DenseTensor& t) {
    auto out = header(t.shape(), TensorDType::float32);
    out.reserve(out.size() + 4 * t.size());
    for (float v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

std::vector<std::uint8_t> encode_tensor(const SpikeTensor& t) {
    auto out = header(t.shape(), TensorDType::binary);
    out.insert(out.end(), t.data().begin(), t.data().end());
    return out;
}

AnyTensor decode_tensor(std::span<const std::uint8_t> b) {
    if (b.size() < kFixedHeader || std::memcmp(b.data(), "SPKT", 4) != 0) {
        throw FormatError("not a tensor file (bad magic)");
    }
    if (b[4] != kVersion) throw FormatError("unsupported tensor file version " + std::to_string(b[4]));
    const std::uint8_t dtype = b[5];
    const std::size_t rank = b[6];
    if (b[7] != 0) throw FormatError("reserved header byte must be 0");
    if (rank < 1 || rank > Shape::kMaxRank) throw FormatError("invalid rank " + std::to_string(rank));
    if (b.size() < kFixedHeader + 4 * rank) throw FormatError("truncated tensor header");
    std::vector<std::size_t> dims(rank);
    for (std::size_t i = 0; i < rank; ++i) dims[i] = get_u32(b, kFixedHeader + 4 * i);
    Shape shape = [&] {
        try {
            return Shape(dims);
        } catch (const ShapeError& e) {
            throw FormatError(std::string("invalid tensor shape: ") + e.what());
        }
    }();
    const std::size_t off = kFixedHeader + 4 * rank;
    const std::size_t payload = b.size() - off;

    if (dtype == static_cast<std::uint8_t>(TensorDType::float32)) {
        if (shape.numel() > payload / 4 || payload != 4 * shape.numel()) {
            throw FormatError("float payload length does not match shape " + shape.str());
        }
        std::vector<float> data(shape.numel());
        for (std::size_t i = 0; i < data.size(); ++i) data[i] = std::bit_cast<float>(get_u32(b, off + 4 * i));
        try {
            return DenseTensor(shape, std::move(data));
        } catch (const NumericalError&) {
            throw FormatError("tensor file holds non-finite values");
        }
    }
    if (dtype == static_cast<std::uint8_t>(TensorDType::binary)) {
        if (payload != shape.numel()) {
            throw FormatError("binary payload length does not match shape " + shape.str());
        }
        std::vector<std::uint8_t> data(b.begin() + static_cast<std::ptrdiff_t>(off), b.end());
        try {
            return SpikeTensor(shape, std::move(data));
        } catch (const ContractError&) {
            throw FormatError("binary payload byte outside {0,1}");
        }
    }
    throw FormatError("unknown dtype " + std::to_string(dtype));
}

void write_tensor_file(const std::filesystem::path& path, const DenseTensor& t) { dump(path, encode_tensor(t)); }

void write_tensor_file(const std::filesystem::path& path, const SpikeTensor& t) { dump(path, encode_tensor(t)); }

AnyTensor read_tensor_file(const std::filesystem::path& path) {
    auto bytes = slurp(path);
    return decode_tensor(bytes);
}

DenseTensor read_dense_file(const std::filesystem::path& path) {
    auto t = read_tensor_file(path);
    if (auto* d = std::get_if<DenseTensor>(&t)) return std::move(*d);
    throw FormatError(path.string() + ": expected float32 tensor");
}

SpikeTensor read_spike_file(const std::filesystem::path& path) {
    auto t = read_tensor_file(path);
    if (auto* s = std::get_if<SpikeTensor>(&t)) return std::move(*s);
    throw FormatError(path.string() + ": expected binary tensor");
}

}  // namespace spk
