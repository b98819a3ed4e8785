#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "projseg/common.hpp"

namespace projseg {

using Shape = std::vector<int>;

std::string shape_str(const Shape& s);

// Dense row-major tensor of 64-bit floats, last axis fastest.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape);  // zero-filled
    Tensor(Shape shape, std::vector<double> data);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
    static Tensor full(Shape shape, double value);

    int rank() const { return static_cast<int>(shape_.size()); }
    const Shape& shape() const { return shape_; }
    int dim(int axis) const { return shape_[static_cast<std::size_t>(axis)]; }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& vec() { return data_; }
    const std::vector<double>& vec() const { return data_; }

    double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

    std::int64_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

    double& at(int i0) { return data_[static_cast<std::size_t>(i0)]; }
    double& at(int i0, int i1) { return data_[static_cast<std::size_t>(i0 * strides_[0] + i1)]; }
    double& at(int i0, int i1, int i2) {
        return data_[static_cast<std::size_t>(i0 * strides_[0] + i1 * strides_[1] + i2)];
    }
    double& at(int i0, int i1, int i2, int i3) {
        return data_[static_cast<std::size_t>(i0 * strides_[0] + i1 * strides_[1] + i2 * strides_[2] + i3)];
    }
    double& at(int i0, int i1, int i2, int i3, int i4) {
        return data_[static_cast<std::size_t>(i0 * strides_[0] + i1 * strides_[1] + i2 * strides_[2] +
                                              i3 * strides_[3] + i4)];
    }
    double at(int i0) const { return data_[static_cast<std::size_t>(i0)]; }
    double at(int i0, int i1) const { return data_[static_cast<std::size_t>(i0 * strides_[0] + i1)]; }
    double at(int i0, int i1, int i2) const {
        return data_[static_cast<std::size_t>(i0 * strides_[0] + i1 * strides_[1] + i2)];
    }
    double at(int i0, int i1, int i2, int i3) const {
        return data_[static_cast<std::size_t>(i0 * strides_[0] + i1 * strides_[1] + i2 * strides_[2] + i3)];
    }
    double at(int i0, int i1, int i2, int i3, int i4) const {
        return data_[static_cast<std::size_t>(i0 * strides_[0] + i1 * strides_[1] + i2 * strides_[2] +
                                              i3 * strides_[3] + i4)];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

    // reinterpret with a new shape of identical element count
    Tensor reshaped(Shape new_shape) const;

    void fill(double value);

private:
    void init_strides();

    Shape shape_;
    std::vector<std::int64_t> strides_;  // per leading axis; last axis stride is 1 and omitted from math above
    std::vector<double> data_;
};

// dst += src, elementwise; shapes must match
void accumulate(Tensor& dst, const Tensor& src);

// Trainable tensor: value plus gradient accumulator of identical shape.
struct Param {
    Tensor value;
    Tensor grad;

    Param() = default;
    explicit Param(Tensor v) : value(std::move(v)), grad(Tensor(value.shape())) {}

    void zero_grad() { grad.fill(0.0); }
};

}  // namespace projseg
