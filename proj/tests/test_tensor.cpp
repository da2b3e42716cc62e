#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <limits>

#include "dekg/error.hpp"
#include "dekg/tensor.hpp"
#include "doctest.h"

using dekg::NumericError;
using dekg::Tensor;

TEST_CASE("construction and accessors") {
    Tensor t(2, 3, 1.5);
    CHECK(t.rows == 2);
    CHECK(t.cols == 3);
    CHECK(t.numel() == 6);
    CHECK(t.at(1, 2) == 1.5);
    t.at(0, 1) = -2.0;
    CHECK(t.data[1] == -2.0);  // row-major layout

    CHECK(Tensor::scalar(4.0).item() == 4.0);
    CHECK(Tensor::scalar(4.0).is_scalar());

    Tensor r = Tensor::row({1.0, 2.0, 3.0});
    CHECK(r.rows == 1);
    CHECK(r.cols == 3);
    CHECK(r.at(0, 2) == 3.0);
    CHECK(Tensor::row(std::vector<double>{5.0, 6.0}).at(0, 1) == 6.0);

    Tensor m = Tensor::from_rows({{1.0, 2.0}, {3.0, 4.0}});
    CHECK(m.rows == 2);
    CHECK(m.at(1, 0) == 3.0);
    CHECK_THROWS_AS((void)Tensor::from_rows({{1.0}, {2.0, 3.0}}), NumericError);
}

TEST_CASE("item requires a scalar") {
    CHECK_THROWS_AS((void)Tensor(1, 2).item(), NumericError);
}

TEST_CASE("elementwise += and scaling") {
    Tensor a = Tensor::row({1.0, 2.0});
    a += Tensor::row({10.0, 20.0});
    CHECK(a == Tensor::row({11.0, 22.0}));
    a *= -0.5;
    CHECK(a == Tensor::row({-5.5, -11.0}));
    CHECK_THROWS_AS(a += Tensor(2, 2), NumericError);
}

TEST_CASE("shape predicates") {
    CHECK(Tensor(2, 3).same_shape(Tensor(2, 3, 9.0)));
    CHECK_FALSE(Tensor(2, 3).same_shape(Tensor(3, 2)));
}

TEST_CASE("finite flags NaN and infinity") {
    Tensor t = Tensor::row({1.0, 2.0});
    CHECK(t.finite());
    t.at(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(t.finite());
    t.at(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(t.finite());
}
