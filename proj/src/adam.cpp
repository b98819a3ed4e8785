#include "projseg/adam.hpp"

#include <cmath>

namespace projseg {

void adam_step(Param& param, AdamState& state) {
    check(param.value.same_shape(param.grad), "param value/grad shape mismatch");
    check(param.value.same_shape(state.m), "adam state shape ", shape_str(state.m.shape()),
          " does not match param ", shape_str(param.value.shape()));

    state.t += 1;
    const double b1 = state.beta1, b2 = state.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.t));

    double* value = param.value.data();
    const double* grad = param.grad.data();
    double* m = state.m.data();
    double* v = state.v.data();
    const std::int64_t n = param.value.size();
    for (std::int64_t i = 0; i < n; ++i) {
        const double g = grad[i];
        m[i] = b1 * m[i] + (1.0 - b1) * g;
        v[i] = b2 * v[i] + (1.0 - b2) * g * g;
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        value[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
}

}  // namespace projseg
