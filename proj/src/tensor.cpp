// SPDX-License-Identifier: Apache-2.0
#include "spk/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace spk {

Shape::Shape(std::initializer_list<std::size_t> dims) : dims_(dims) { validate(); }

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) { validate(); }

void Shape::validate() {
    if (dims_.empty() || dims_.size() > kMaxRank) {
        throw ShapeError("rank must be in [1, 5], got " + std::to_string(dims_.size()));
    }
    std::size_t n = 1;
    for (std::size_t d : dims_) {
        if (d == 0) {
            throw ShapeError("zero extent in shape " + str());
        }
        if (n > std::numeric_limits<std::uint64_t>::max() / d) {
            throw ShapeError("element count overflows in shape " + str());
        }
        n *= d;
    }
    numel_ = n;
}

std::size_t Shape::operator[](std::size_t axis) const {
    if (axis >= dims_.size()) {
        throw IndexError("axis " + std::to_string(axis) + " out of range for rank " + std::to_string(dims_.size()));
    }
    return dims_[axis];
}

std::string Shape::str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(dims_[i]);
    }
    return s + "]";
}

DenseTensor::DenseTensor(Shape shape) : BasicTensor(shape, std::vector<float>(shape.numel(), 0.0f)) {}

DenseTensor::DenseTensor(Shape shape, std::vector<float> data) : BasicTensor(std::move(shape), std::move(data)) {
    check_finite();
}

DenseTensor DenseTensor::filled(Shape shape, float value) {
    return DenseTensor(shape, std::vector<float>(shape.numel(), value));
}

DenseTensor DenseTensor::reshaped(Shape shape) const& {
    DenseTensor copy = *this;
    return std::move(copy).reshaped(std::move(shape));
}

DenseTensor DenseTensor::reshaped(Shape shape) && {
    if (shape.numel() != shape_.numel()) {
        throw ShapeError("cannot reshape " + shape_.str() + " to " + shape.str());
    }
    shape_ = std::move(shape);
    return std::move(*this);
}

void DenseTensor::check_finite() const {
    for (float v : data_) {
        if (!std::isfinite(v)) {
            throw NumericalError("non-finite value in tensor " + shape_.str());
        }
    }
}

SpikeTensor::SpikeTensor(Shape shape) : BasicTensor(shape, std::vector<std::uint8_t>(shape.numel(), 0)) {}

SpikeTensor::SpikeTensor(Shape shape, std::vector<std::uint8_t> data)
    : BasicTensor(std::move(shape), std::move(data)) {
    for (std::uint8_t v : data_) {
        if (v > 1) {
            throw ContractError("spike tensor value " + std::to_string(v) + " is not in {0,1}");
        }
    }
}

std::size_t SpikeTensor::nnz() const noexcept {
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

SpikeTensor SpikeTensor::reshaped(Shape shape) const& {
    SpikeTensor copy = *this;
    return std::move(copy).reshaped(std::move(shape));
}

SpikeTensor SpikeTensor::reshaped(Shape shape) && {
    if (shape.numel() != shape_.numel()) {
        throw ShapeError("cannot reshape " + shape_.str() + " to " + shape.str());
    }
    shape_ = std::move(shape);
    return std::move(*this);
}

DenseTensor SpikeTensor::to_dense() const {
    std::vector<float> out(data_.begin(), data_.end());
    return DenseTensor(shape_, std::move(out));
}

bool bitwise_equal(const DenseTensor& a, const DenseTensor& b) {
    return a.shape() == b.shape() &&
           std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(float)) == 0;
}

bool bitwise_equal(const SpikeTensor& a, const SpikeTensor& b) {
    return a.shape() == b.shape() && std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

}  // namespace spk
