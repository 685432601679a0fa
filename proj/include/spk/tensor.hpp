// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "spk/error.hpp"

namespace spk {

// Ordered list of 1..5 positive extents.
class Shape {
public:
    static constexpr std::size_t kMaxRank = 5;

    Shape(std::initializer_list<std::size_t> dims);
    explicit Shape(std::vector<std::size_t> dims);

    std::size_t rank() const noexcept { return dims_.size(); }
    std::size_t operator[](std::size_t axis) const;
    std::size_t numel() const noexcept { return numel_; }
    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    std::string str() const;

    friend bool operator==(const Shape& a, const Shape& b) { return a.dims_ == b.dims_; }

private:
    void validate();

    std::vector<std::size_t> dims_;
    std::size_t numel_ = 0;
};

template <typename T>
class BasicTensor {
public:
    using value_type = T;

    const Shape& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return data_.size(); }
    std::span<const T> data() const noexcept { return data_; }
    T operator[](std::size_t i) const { return data_[i]; }

    // Row-major flat offset of a full multi-index.
    std::size_t offset(std::initializer_list<std::size_t> idx) const {
        if (idx.size() != shape_.rank()) {
            throw IndexError("index rank " + std::to_string(idx.size()) + " does not match tensor " + shape_.str());
        }
        std::size_t off = 0;
        std::size_t axis = 0;
        for (std::size_t i : idx) {
            if (i >= shape_[axis]) {
                throw IndexError("index " + std::to_string(i) + " out of range on axis " + std::to_string(axis) +
                                 " of " + shape_.str());
            }
            off = off * shape_[axis] + i;
            ++axis;
        }
        return off;
    }

    T at(std::initializer_list<std::size_t> idx) const { return data_[offset(idx)]; }

protected:
    BasicTensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != shape_.numel()) {
            throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " + shape_.str());
        }
    }

    Shape shape_;
    std::vector<T> data_;
};

// Real-valued row-major tensor (32-bit). Values are finite after every public operation.
class DenseTensor : public BasicTensor<float> {
public:
    explicit DenseTensor(Shape shape);
    DenseTensor(Shape shape, std::vector<float> data);

    static DenseTensor filled(Shape shape, float value);

    std::span<float> mutable_data() noexcept { return data_; }
    float& at_mut(std::initializer_list<std::size_t> idx) { return data_[offset(idx)]; }

    DenseTensor reshaped(Shape shape) const&;
    DenseTensor reshaped(Shape shape) &&;

    // Throws NumericalError on NaN/Inf.
    void check_finite() const;
};

// Binary row-major tensor; every element is exactly 0 or 1.
class SpikeTensor : public BasicTensor<std::uint8_t> {
public:
    explicit SpikeTensor(Shape shape);
    SpikeTensor(Shape shape, std::vector<std::uint8_t> data);

    void set(std::size_t i, bool fired) { data_[i] = fired ? 1 : 0; }
    void set(std::initializer_list<std::size_t> idx, bool fired) { data_[offset(idx)] = fired ? 1 : 0; }
    std::size_t nnz() const noexcept;

    SpikeTensor reshaped(Shape shape) const&;
    SpikeTensor reshaped(Shape shape) &&;

    DenseTensor to_dense() const;
};

// Exact bit-pattern equality (distinguishes -0.0 from 0.0).
bool bitwise_equal(const DenseTensor& a, const DenseTensor& b);
bool bitwise_equal(const SpikeTensor& a, const SpikeTensor& b);

}  // namespace spk
