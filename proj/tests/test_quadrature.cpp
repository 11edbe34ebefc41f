#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gge/quadrature.hpp"

using namespace gge;

namespace {
double integrate(const QuadRule& r, double (*f)(double)) {
  double s = 0;
  for (int i = 0; i < r.size(); ++i) s += r.w[i] * f(r.x[i]);
  return s;
}
}  // namespace

TEST_CASE("gauss_legendre is exact for polynomials up to degree 2n-1") {
  QuadRule r = gauss_legendre(6);
  // int_{-1}^{1} x^k dx = 2/(k+1) for even k, 0 for odd k
  for (int k = 0; k <= 11; ++k) {
    double s = 0;
    for (int i = 0; i < r.size(); ++i) s += r.w[i] * std::pow(r.x[i], k);
    double expect = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
    CHECK(s == doctest::Approx(expect).epsilon(1e-13));
  }
  // total mass
  double mass = 0;
  for (int i = 0; i < r.size(); ++i) mass += r.w[i];
  CHECK(mass == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("gauss_jacobi reproduces beta-function moments") {
  // int_{-1}^{1} (1-x)^a (1+x)^b dx = 2^{a+b+1} B(a+1, b+1)
  double a = 1.5, b = -0.5;
  QuadRule r = gauss_jacobi(12, a, b);
  double mass = 0, m1 = 0;
  for (int i = 0; i < r.size(); ++i) {
    mass += r.w[i];
    m1 += r.w[i] * r.x[i];
  }
  double lmass = (a + b + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                 std::lgamma(a + b + 2.0);
  CHECK(mass == doctest::Approx(std::exp(lmass)).epsilon(1e-12));
  // first moment of the Jacobi weight: mass * (b-a)/(a+b+2)
  CHECK(m1 == doctest::Approx(std::exp(lmass) * (b - a) / (a + b + 2.0)).epsilon(1e-12));
}

TEST_CASE("gauss_jacobi rejects exponents at or below -1") {
  CHECK_THROWS_AS(gauss_jacobi(4, -1.0, 0.0), Error);
  CHECK_THROWS_AS(gauss_jacobi(4, 0.0, -2.0), Error);
  CHECK_THROWS_AS(gauss_legendre(0), Error);
}

TEST_CASE("map_to_interval preserves polynomial exactness") {
  QuadRule r = map_to_interval(gauss_legendre(8), 0.0, 3.0);
  // int_0^3 x^2 dx = 9
  double s = 0;
  for (int i = 0; i < r.size(); ++i) s += r.w[i] * r.x[i] * r.x[i];
  CHECK(s == doctest::Approx(9.0).epsilon(1e-13));
  double e = integrate(r, [](double x) { return std::exp(-x); });
  CHECK(e == doctest::Approx(1.0 - std::exp(-3.0)).epsilon(1e-9));
}

TEST_CASE("gauss_power_halfline absorbs the singular factor") {
  // int_0^hi x^p e^{-x} dx with p = -0.5, hi = 8: compare against a fine
  // composite reference in the substituted variable u = sqrt(x).
  double p = -0.5, hi = 8.0;
  QuadRule r = gauss_power_halfline(40, p, hi);
  double s = 0;
  for (int i = 0; i < r.size(); ++i) {
    CHECK(r.x[i] > 0.0);
    CHECK(r.x[i] <= hi);
    s += r.w[i] * std::exp(-r.x[i]);
  }
  // x = u^2: int_0^sqrt(8) u^{2p} e^{-u^2} 2u du = 2 int_0^sqrt(8) e^{-u^2} du
  QuadRule fine = map_to_interval(gauss_legendre(200), 0.0, std::sqrt(hi));
  double ref = 0;
  for (int i = 0; i < fine.size(); ++i) ref += fine.w[i] * 2.0 * std::exp(-fine.x[i] * fine.x[i]);
  CHECK(s == doctest::Approx(ref).epsilon(1e-10));

  // polynomial exactness: int_0^hi x^p * x^k dx = hi^{p+k+1}/(p+k+1)
  for (int k = 0; k <= 5; ++k) {
    double sk = 0;
    for (int i = 0; i < r.size(); ++i) sk += r.w[i] * std::pow(r.x[i], k);
    CHECK(sk == doctest::Approx(std::pow(hi, p + k + 1) / (p + k + 1)).epsilon(1e-11));
  }
}

TEST_CASE("periodic_trapezoid is spectrally exact for trigonometric polynomials") {
  QuadRule r = periodic_trapezoid(16);
  double mass = 0, c3 = 0;
  for (int i = 0; i < r.size(); ++i) {
    mass += r.w[i];
    c3 += r.w[i] * std::cos(3.0 * r.x[i]);
  }
  CHECK(mass == doctest::Approx(2.0 * kPi).epsilon(1e-14));
  CHECK(std::abs(c3) < 1e-13);
  double g = integrate(r, [](double th) { return std::exp(std::cos(th)); });
  // 2 pi I_0(1)
  CHECK(g == doctest::Approx(2.0 * kPi * 1.2660658777520084).epsilon(1e-12));
}

TEST_CASE("composite_legendre splits the range") {
  QuadRule r = composite_legendre(10, {0.0, 1.0, 4.0});
  double s = integrate(r, [](double x) { return std::exp(-x); });
  CHECK(s == doctest::Approx(1.0 - std::exp(-4.0)).epsilon(1e-12));
  CHECK_THROWS_AS(composite_legendre(4, {1.0}), Error);
}
