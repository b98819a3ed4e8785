#pragma once

#include "projseg/tensor.hpp"

namespace projseg {

// Bias-corrected Adam state for one parameter tensor.
struct AdamState {
    Tensor m, v;
    long t = 0;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    AdamState() = default;
    explicit AdamState(const Shape& shape, double lr_ = 1e-4) : m(shape), v(shape), lr(lr_) {}
};

// One update from param.grad; increments state.t by exactly 1.
void adam_step(Param& param, AdamState& state);

}  // namespace projseg
