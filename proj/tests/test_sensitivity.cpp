#include <doctest.h>

#include <cmath>
#include <random>

#include "chemo/error.hpp"
#include "chemo/sensitivity.hpp"
#include "oracles.hpp"

using namespace chemo;

TEST_CASE("chi_upper evaluates the bound") {
  CHECK(chi_upper(0.0, {1.0, 1.0, 1.0}) == doctest::Approx(1.0));
  CHECK(chi_upper(1.0, {1.0, 2.0, 1.0}) == doctest::Approx(0.25));
  CHECK(chi_upper(3.0, {0.5, 1.0, 0.0}) == doctest::Approx(0.5 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(chi_upper(0.0, {1.0, 1.0, 0.0}), DomainError);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(SensitivityParams({-1.0, 1.0, 0.0}).validate(), ValidationError);
  CHECK_THROWS_AS(SensitivityParams({1.0, 0.5, 0.0}).validate(), ValidationError);
  CHECK_THROWS_AS(SensitivityParams({1.0, 1.0, -0.1}).validate(), ValidationError);
  CHECK_NOTHROW(SensitivityParams({0.0, 1.0, 0.0}).validate());
  const SensitivityParams sp{1.0, 1.0, 0.0};
  CHECK_THROWS_AS(EnergyParams({1.0, 1.0, 0.0, 1.0}).validate(sp), ValidationError);
  CHECK_THROWS_AS(EnergyParams({2.0, 1.0, 1.0, 1.0}).validate(sp), ValidationError);
  CHECK_THROWS_AS(EnergyParams({2.0, 1.0, 0.0, 0.0}).validate(sp), ValidationError);
}

TEST_CASE("g closed forms") {
  const SensitivityParams k1{1.0, 1.0, 0.0};
  const SensitivityParams k2{1.0, 2.0, 0.0};
  const EnergyParams ep{2.0, 1.0, 0.0, 1.0};
  CHECK(log_weight(1.0, ep, k1) == 0.0);
  CHECK(log_weight(std::exp(1.0), ep, k1) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(log_weight(2.0, ep, k2) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK_THROWS_AS(log_weight(0.5, ep, k1), DomainError);
}

TEST_CASE("phi closed forms and limits") {
  const EnergyParams ep{2.0, 2.0, 0.0, 1.0};
  CHECK(weight(1.0, ep, {1.0, 1.0, 0.0}) == 1.0);
  CHECK(weight(2.0, ep, {1.0, 1.0, 0.0}) == doctest::Approx(0.25).epsilon(1e-14));
  const EnergyParams ep1{2.0, 1.0, 0.0, 1.0};
  CHECK(weight(1e12, ep1, {1.0, 2.0, 0.0}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
  CHECK(weight_infimum(ep1, {1.0, 2.0, 0.0}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("phi matches the k-dependent closed form on random samples") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double k = i % 3 == 0 ? 1.0 : 1.01 + 3.0 * U(rng);
    const double a = 5.0 * U(rng), eta = 0.05 + 2.0 * U(rng), r = 3.0 * U(rng);
    const double s = eta + std::pow(10.0, 4.0 * U(rng) - 1.0);
    const SensitivityParams sp{1.0, k, a};
    const EnergyParams ep{2.0, r, 0.0, eta};
    double expected;
    if (k == 1.0) {
      expected = std::pow(a + eta, r) / std::pow(a + s, r);
    } else {
      // C_phi exp(r / ((k-1)(a+s)^(k-1))), combined in the exponent.
      expected = std::exp(-r / ((k - 1.0) * std::pow(a + eta, k - 1.0)) +
                          r / ((k - 1.0) * std::pow(a + s, k - 1.0)));
    }
    REQUIRE(weight(s, ep, sp) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("phi is nonincreasing, equals 1 at eta, and is bounded below only for k > 1") {
  const EnergyParams ep{2.0, 1.5, 0.0, 0.5};
  for (double k : {1.0, 1.5, 3.0}) {
    const SensitivityParams sp{1.0, k, 0.3};
    CHECK(weight(ep.eta, ep, sp) == 1.0);
    double prev = 1.0;
    for (double s = ep.eta; s < 1e6; s *= 1.3) {
      const double w = weight(s, ep, sp);
      REQUIRE(w <= prev);
      REQUIRE(w >= weight_infimum(ep, sp));
      REQUIRE(w <= 1.0);
      prev = w;
    }
    if (k > 1.0) {
      CHECK(weight_infimum(ep, sp) > 0.0);
      CHECK(weight(1e15, ep, sp) == doctest::Approx(weight_infimum(ep, sp)).epsilon(1e-6));
    } else {
      CHECK(weight_infimum(ep, sp) == 0.0);
      CHECK(weight(1e15, ep, sp) < 1e-20);
    }
  }
}

TEST_CASE("g agrees with quadrature") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double k = 1.0 + 3.0 * U(rng), a = 3.0 * U(rng), eta = 0.1 + U(rng), r = 2.0 * U(rng);
    const double s = eta + 20.0 * U(rng);
    const double g = log_weight(s, {2.0, r, 0.0, eta}, {1.0, k, a});
    REQUIRE(g == doctest::Approx(oracle::g_by_quadrature(s, r, k, a, eta)).epsilon(1e-10));
  }
}

TEST_CASE("g derivatives match centred differences at second order") {
  const SensitivityParams sp{1.0, 2.5, 0.4};
  const EnergyParams ep{2.0, 1.3, 0.0, 0.5};
  const double s = 1.7;
  auto errors = [&](double h) {
    const double gp = log_weight(s + h, ep, sp), g0 = log_weight(s, ep, sp), gm = log_weight(s - h, ep, sp);
    return std::pair{std::abs((gp - gm) / (2 * h) - log_weight_d1(s, ep, sp)),
                     std::abs((gp - 2 * g0 + gm) / (h * h) - log_weight_d2(s, ep, sp))};
  };
  const auto [d1a, d2a] = errors(1e-2);
  const auto [d1b, d2b] = errors(5e-3);
  CHECK(d1a / d1b == doctest::Approx(4.0).epsilon(0.05));
  CHECK(d2a / d2b == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("H_eps examples") {
  // k = 1, eps = 0: (r^2/(p-1) - r + p(p-1)K^2/4) / (a+s)^2.
  CHECK(gradient_coefficient_bound(0.0, {2.0, 0.5, 0.0, 0.0}, {0.5, 1.0, 1.0}) ==
        doctest::Approx(-0.125).epsilon(1e-14));
  for (double s : {0.5, 1.0, 4.0, 100.0}) {
    const double p = 2.7, r = 0.6, K = 0.4, a = 0.2;
    const double expected = (r * r / (p - 1) - r + p * (p - 1) * K * K / 4) / ((a + s) * (a + s));
    CHECK(gradient_coefficient_bound(s, {p, r, 0.0, 0.1}, {K, 1.0, a}) == doctest::Approx(expected).epsilon(1e-13));
  }
  const double p = 3.0, eps = 0.2, K = 0.7, k = 2.0, a = 0.5, s = 1.5;
  CHECK(gradient_coefficient_bound(s, {p, 0.0, eps, 1.0}, {K, k, a}) ==
        doctest::Approx(p * (p - 1) * K * K / (4 * (1 - eps) * std::pow(a + s, 2 * k))).epsilon(1e-14));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double pp = 1.1 + 3 * U(rng), rr = 2 * U(rng), ee = 0.9 * U(rng), KK = U(rng), kk = 1 + 2 * U(rng),
                 aa = U(rng), ss = 0.1 + 10 * U(rng);
    const double h = gradient_coefficient_bound(ss, {pp, rr, ee, 0.1}, {KK, kk, aa});
    REQUIRE(h == doctest::Approx(oracle::H(ss, pp, rr, ee, KK, kk, aa)).epsilon(1e-12).scale(1e-300));
    const QuadraticInR q = gradient_coefficient_quadratic(ss, {pp, rr, ee, 0.1}, {KK, kk, aa});
    REQUIRE(q(rr) == doctest::Approx(h).epsilon(1e-12));
  }
}

TEST_CASE("F_phi equals H_eps phi at the bound and is dominated below it") {
  const SensitivityParams sp{0.8, 1.5, 0.3};
  const EnergyParams ep{2.4, 0.9, 0.3, 0.6};
  for (double s = ep.eta; s < 1e4; s *= 1.5) {
    const double bound = gradient_coefficient_bound(s, ep, sp) * weight(s, ep, sp);
    const double chi = chi_upper(s, sp);
    REQUIRE(gradient_coefficient(s, ep, sp, chi) == doctest::Approx(bound).epsilon(1e-12).scale(1e-300));
    for (double c : {0.5, 0.9, 1.0}) {
      REQUIRE(gradient_coefficient(s, ep, sp, c * chi) <= bound + 1e-13 * std::abs(bound));
    }
  }
}

TEST_CASE("F_phi examples and argument errors") {
  const SensitivityParams sp{0.5, 1.0, 0.0};
  const EnergyParams ep{2.0, 0.5, 0.0, 1.0};
  CHECK(gradient_coefficient(1.0, ep, sp, chi_upper(1.0, sp)) == doctest::Approx(-0.125).epsilon(1e-14));
  const EnergyParams flat{3.0, 0.0, 0.0, 1.0};
  for (double s : {1.0, 2.0, 7.0}) {
    const double chi = chi_upper(s, sp);
    CHECK(gradient_coefficient(s, flat, sp, chi) ==
          doctest::Approx(3.0 * 2.0 * 0.25 / (4.0 * s * s)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(gradient_coefficient(1.0, {1.0, 0.5, 0.0, 1.0}, sp, 0.5), DomainError);
  CHECK_THROWS_AS(gradient_coefficient_bound(1.0, {2.0, 0.5, 1.0, 1.0}, sp), DomainError);
}
