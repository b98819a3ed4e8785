#include "projseg/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace projseg {

std::string shape_str(const Shape& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    out += ")";
    return out;
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
    init_strides();
    std::int64_t n = 1;
    for (int d : shape_) n *= d;
    data_.assign(static_cast<std::size_t>(n), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    init_strides();
    std::int64_t n = 1;
    for (int d : shape_) n *= d;
    check(n == static_cast<std::int64_t>(data_.size()), "tensor data length ", data_.size(),
          " does not match shape ", shape_str(shape_));
}

Tensor Tensor::full(Shape shape, double value) {
    Tensor t(std::move(shape));
    t.fill(value);
    return t;
}

void Tensor::init_strides() {
    check(!shape_.empty(), "tensor rank must be >= 1");
    for (int d : shape_) check(d >= 1, "tensor extents must be positive, got ", shape_str(shape_));
    strides_.assign(shape_.size(), 1);
    for (int i = static_cast<int>(shape_.size()) - 2; i >= 0; --i)
        strides_[static_cast<std::size_t>(i)] =
            strides_[static_cast<std::size_t>(i + 1)] * shape_[static_cast<std::size_t>(i + 1)];
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor Tensor::reshaped(Shape new_shape) const {
    std::int64_t n = 1;
    for (int d : new_shape) n *= d;
    check(n == size(), "cannot reshape ", shape_str(shape_), " to ", shape_str(new_shape));
    return Tensor(std::move(new_shape), data_);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void accumulate(Tensor& dst, const Tensor& src) {
    check(dst.same_shape(src), "accumulate shape mismatch: ", shape_str(dst.shape()), " vs ",
          shape_str(src.shape()));
    double* d = dst.data();
    const double* s = src.data();
    const std::int64_t n = dst.size();
    for (std::int64_t i = 0; i < n; ++i) d[i] += s[i];
}

}  // namespace projseg
