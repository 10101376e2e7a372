#include <doctest.h>

#include <cmath>
#include <numbers>

#include "chemo/error.hpp"
#include "chemo/numerics.hpp"

using namespace chemo;
using namespace chemo::numerics;

TEST_CASE("adaptive Simpson on known integrals") {
  CHECK(integrate([](double x) { return std::exp(x); }, 0.0, 1.0) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-10));
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi) ==
        doctest::Approx(2.0).epsilon(1e-10));
  CHECK(integrate([](double x) { return std::exp(-1.0 / x); }, 0.0, 2.0, {1e-10, 40, 64}) ==
        doctest::Approx(0.653287724649106).epsilon(1e-9));
  CHECK(integrate([](double) { return 0.0; }, 0.0, 1.0) == 0.0);
  CHECK(integrate([](double x) { return x; }, 1.0, 1.0) == 0.0);
}

TEST_CASE("quadrature depth cap") {
  CHECK_THROWS_AS(integrate([](double x) { return 1.0 / std::sqrt(x + 1e-300); }, 0.0, 1.0, {1e-14, 3, 2}),
                  NumericalError);
}

TEST_CASE("golden-section maximization") {
  const auto r = golden_section_maximize([](double x) { return -(x - 0.3) * (x - 0.3) + 2.0; }, -1.0, 4.0);
  CHECK(r.x == doctest::Approx(0.3).epsilon(1e-8));
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-15));
  const auto edge = golden_section_maximize([](double x) { return x; }, 0.0, 1.0, 1e-12);
  CHECK(edge.x == doctest::Approx(1.0).epsilon(1e-10));
}
