#include <doctest.h>

#include <cmath>

#include "projseg/adam.hpp"

using namespace projseg;

TEST_SUITE("adam") {

TEST_CASE("zero gradient leaves the parameter unchanged") {
    Param p(Tensor({3}, {1.0, -2.0, 0.5}));
    AdamState st(p.value.shape());
    adam_step(p, st);
    CHECK(st.t == 1);
    CHECK(p.value[0] == 1.0);
    CHECK(p.value[1] == -2.0);
    CHECK(p.value[2] == 0.5);
}

TEST_CASE("single step matches the hand-computed bias-corrected update") {
    // scalar param 0, grad 1: m-hat = v-hat = 1, so the step is lr/(1+eps)
    Param p(Tensor({1}));
    p.grad[0] = 1.0;
    AdamState st(p.value.shape());
    adam_step(p, st);
    const double expect = -st.lr * 1.0 / (std::sqrt(1.0) + st.eps);
    CHECK(p.value[0] == expect);
}

TEST_CASE("two steps with constant gradient match the closed-form moments") {
    const double g = 0.7;
    Param p(Tensor({1}));
    AdamState st(p.value.shape());
    p.grad[0] = g;
    adam_step(p, st);
    p.grad[0] = g;
    adam_step(p, st);
    CHECK(st.t == 2);
    // geometric sums: m2 = (1-b1^2) g, v2 = (1-b2^2) g^2
    CHECK(st.m[0] == doctest::Approx((1.0 - st.beta1 * st.beta1) * g).epsilon(1e-14));
    CHECK(st.v[0] == doctest::Approx((1.0 - st.beta2 * st.beta2) * g * g).epsilon(1e-14));
}

TEST_CASE("state shape mismatch is rejected") {
    Param p(Tensor({2}));
    AdamState st(Shape{3});
    CHECK_THROWS_AS(adam_step(p, st), Error);
}

}  // TEST_SUITE
