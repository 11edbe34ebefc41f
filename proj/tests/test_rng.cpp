#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gge/rng.hpp"

using namespace gge;

TEST_CASE("seeded streams are reproducible") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.raw() == b.raw());
  Rng c(42), d(43);
  bool differ = false;
  for (int i = 0; i < 10; ++i) differ |= (c.raw() != d.raw());
  CHECK(differ);
}

TEST_CASE("derive_seed separates streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  // stable across calls
  CHECK(derive_seed(123, 7) == derive_seed(123, 7));
}

TEST_CASE("uniform lies in (0,1) and has correct first moments") {
  Rng r(7);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    double u = r.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    s += u;
    s2 += u * u;
  }
  double m = s / n, v = s2 / n - m * m;
  CHECK(m == doctest::Approx(0.5).epsilon(0.01));
  CHECK(v == doctest::Approx(1.0 / 12.0).epsilon(0.03));
}

TEST_CASE("normal moments") {
  Rng r(11);
  const int n = 200000;
  double s = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    double x = r.normal();
    s += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("gamma moments across shape regimes") {
  Rng r(13);
  const int n = 200000;
  for (double shape : {0.5, 1.0, 2.5}) {
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      double x = r.gamma(shape);
      CHECK(x > 0.0);
      s += x;
      s2 += x * x;
    }
    double m = s / n, v = s2 / n - m * m;
    CHECK(m == doctest::Approx(shape).epsilon(0.03));
    CHECK(v == doctest::Approx(shape).epsilon(0.06));
  }
  // rate parameter scales the mean
  double s = 0;
  for (int i = 0; i < n; ++i) s += r.gamma(2.0, 4.0);
  CHECK(s / n == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("chi matches sqrt(2 Gamma(k/2)) moments") {
  Rng r(17);
  const int n = 200000;
  double k = 3.0;
  double s2 = 0;
  for (int i = 0; i < n; ++i) {
    double x = r.chi(k);
    s2 += x * x;
  }
  // E chi_k^2 = k
  CHECK(s2 / n == doctest::Approx(k).epsilon(0.03));
}

TEST_CASE("beta1 density a(1-u)^{a-1}") {
  Rng r(19);
  const int n = 200000;
  double a = 3.0;
  double s = 0;
  for (int i = 0; i < n; ++i) {
    double x = r.beta1(a);
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
    s += x;
  }
  // Beta(1, a) mean = 1/(1+a)
  CHECK(s / n == doctest::Approx(1.0 / (1.0 + a)).epsilon(0.03));
}

TEST_CASE("gamma rejects non-positive shape") {
  Rng r(1);
  CHECK_THROWS_AS(r.gamma(0.0), Error);
  CHECK_THROWS_AS(r.gamma(-1.0), Error);
}
