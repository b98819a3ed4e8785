#include <doctest.h>

#include <limits>

#include "projseg/tensor.hpp"

using namespace projseg;

TEST_SUITE("tensor") {

TEST_CASE("construction and indexing") {
    Tensor t({2, 3, 4});
    CHECK(t.size() == 24);
    CHECK(t.rank() == 3);
    t.at(1, 2, 3) = 7.0;
    CHECK(t[23] == 7.0);
    CHECK(t.at(0, 0, 0) == 0.0);
}

TEST_CASE("data length must match shape") {
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), Error);
    CHECK_THROWS_AS(Tensor({0, 2}), Error);
}

TEST_CASE("reshape preserves data") {
    Tensor t({2, 6}, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
    Tensor r = t.reshaped({3, 4});
    CHECK(r.at(2, 3) == 11.0);
    CHECK_THROWS_AS(t.reshaped({5, 5}), Error);
}

TEST_CASE("accumulate adds elementwise and checks shapes") {
    Tensor a({2, 2}, {1, 2, 3, 4});
    Tensor b({2, 2}, {10, 20, 30, 40});
    accumulate(a, b);
    CHECK(a[3] == 44.0);
    Tensor c({4});
    CHECK_THROWS_AS(accumulate(a, c), Error);
}

TEST_CASE("all_finite detects bad values") {
    Tensor t({2});
    CHECK(t.all_finite());
    t[0] = std::numeric_limits<double>::infinity();
    CHECK_FALSE(t.all_finite());
}

TEST_CASE("param grad starts zeroed with matching shape") {
    Param p(Tensor({3, 2}, {1, 2, 3, 4, 5, 6}));
    CHECK(p.grad.same_shape(p.value));
    for (std::int64_t i = 0; i < p.grad.size(); ++i) CHECK(p.grad[i] == 0.0);
}

}  // TEST_SUITE
