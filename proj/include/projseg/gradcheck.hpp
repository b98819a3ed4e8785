#pragma once

#include <functional>
#include <string>
#include <vector>

#include "projseg/tensor.hpp"

namespace projseg {

// A differentiable scalar objective together with its analytic gradient.
// `value` maps the inputs to a scalar; `grads` returns one gradient tensor
// per input, computed through the closed-form backward passes under test.
struct GradCheckCase {
    std::string name;
    std::vector<Tensor> inputs;
    std::function<double(const std::vector<Tensor>&)> value;
    std::function<std::vector<Tensor>(const std::vector<Tensor>&)> grads;
};

// Central finite differences over every entry of every input.
// Returns the worst relative error |analytic - numeric| / max(1, |a|, |n|).
double grad_check_max_rel_error(const GradCheckCase& c, double fd_eps = 1e-6);

// Seeded objectives covering each differentiable op. Random inputs are kept
// away from max-pool ties and relu kinks so the finite differences are valid.
std::vector<GradCheckCase> op_grad_cases(std::uint64_t seed);

// End-to-end objectives through the assembled networks at toy sizes.
std::vector<GradCheckCase> network_grad_cases(std::uint64_t seed);

}  // namespace projseg
