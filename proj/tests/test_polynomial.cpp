#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gge/polynomial.hpp"

using namespace gge;

TEST_CASE("parse basic real polynomials") {
  PolyZ p = parse_polynomial("x^4 + 0.5x^2");
  CHECK(p.degree() == 4);
  CHECK(p.coeff(4) == cplx(1.0, 0.0));
  CHECK(p.coeff(2) == cplx(0.5, 0.0));
  CHECK(p.coeff(3) == cplx(0.0, 0.0));
  CHECK(p.coeff(0) == cplx(0.0, 0.0));

  PolyZ q = parse_polynomial("-2x^3 + x - 1");
  CHECK(q.degree() == 3);
  CHECK(q.coeff(3) == cplx(-2.0, 0.0));
  CHECK(q.coeff(1) == cplx(1.0, 0.0));
  CHECK(q.coeff(0) == cplx(-1.0, 0.0));
}

TEST_CASE("parse division postfix and star products") {
  PolyZ p = parse_polynomial("x^2/2");
  CHECK(p.coeff(2) == cplx(0.5, 0.0));
  PolyZ q = parse_polynomial("x^3/3 - x/6");
  CHECK(q.coeff(3).real() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(q.coeff(1).real() == doctest::Approx(-1.0 / 6.0).epsilon(1e-15));
  PolyZ r = parse_polynomial("0.25*x^2 - x");
  CHECK(r.coeff(2) == cplx(0.25, 0.0));
  CHECK(r.coeff(1) == cplx(-1.0, 0.0));
}

TEST_CASE("parse complex coefficients") {
  PolyZ p = parse_polynomial("-2i z^3 + (0.5+1i)");
  CHECK(p.coeff(3) == cplx(0.0, -2.0));
  CHECK(p.coeff(0) == cplx(0.5, 1.0));
  PolyZ q = parse_polynomial("i x");
  CHECK(q.coeff(1) == cplx(0.0, 1.0));
  PolyZ r = parse_polynomial("(1-0.5i)x^2 + 3");
  CHECK(r.coeff(2) == cplx(1.0, -0.5));
  CHECK(r.coeff(0) == cplx(3.0, 0.0));
}

TEST_CASE("parse repeated terms accumulate") {
  PolyZ p = parse_polynomial("x^2 + x^2");
  CHECK(p.coeff(2) == cplx(2.0, 0.0));
}

TEST_CASE("parse rejects malformed input") {
  CHECK_THROWS_AS(parse_polynomial(""), Error);
  CHECK_THROWS_AS(parse_polynomial("x^2 +"), Error);
  CHECK_THROWS_AS(parse_polynomial("x/0"), Error);
}

TEST_CASE("evaluation is Horner-consistent") {
  PolyZ p = parse_polynomial("x^4 + 0.5x^2 - 2x + 7");
  double x = 1.7;
  double direct = x * x * x * x + 0.5 * x * x - 2 * x + 7;
  CHECK(p(cplx(x, 0.0)).real() == doctest::Approx(direct).epsilon(1e-15));
  CHECK(p(cplx(x, 0.0)).imag() == 0.0);
  cplx z(0.3, -1.2);
  cplx expect = ((z * z * cplx(1, 0) * z + cplx(0.5, 0)) * z - cplx(2, 0)) * z + cplx(7, 0);
  // expand: z^4 + 0.5 z^2 - 2z + 7
  expect = z * z * z * z + cplx(0.5, 0) * z * z - cplx(2, 0) * z + cplx(7, 0);
  CHECK(std::abs(p(z) - expect) < 1e-14);
}

TEST_CASE("derivative and trim") {
  PolyZ p = parse_polynomial("x^4 + 0.5x^2");
  PolyZ d = p.derivative();
  CHECK(d.degree() == 3);
  CHECK(d.coeff(3) == cplx(4.0, 0.0));
  CHECK(d.coeff(1) == cplx(1.0, 0.0));

  PolyZ t;
  t.c = {cplx(1, 0), cplx(0, 0), cplx(0, 0)};
  t.trim();
  CHECK(t.c.size() == 1);
  CHECK(t.degree() == 0);
  CHECK_FALSE(t.zero());
  PolyZ z;
  z.c = {cplx(0, 0)};
  CHECK(z.zero());
}

TEST_CASE("monomial and leading") {
  PolyZ m = PolyZ::monomial(5, cplx(-3.0, 0.0));
  CHECK(m.degree() == 5);
  CHECK(m.leading() == cplx(-3.0, 0.0));
  CHECK(m.coeff(0) == cplx(0.0, 0.0));
}

TEST_CASE("round trip through polynomial_to_string") {
  PolyZ p = parse_polynomial("x^4 + 0.5x^2 - 2x");
  PolyZ q = parse_polynomial(polynomial_to_string(p, 'x'));
  CHECK(p.degree() == q.degree());
  for (int k = 0; k <= p.degree(); ++k) CHECK(std::abs(p.coeff(k) - q.coeff(k)) < 1e-16);

  PolyZ c = parse_polynomial("(1+2i)x^3 - ix");
  PolyZ c2 = parse_polynomial(polynomial_to_string(c, 'x'));
  for (int k = 0; k <= c.degree(); ++k) CHECK(std::abs(c.coeff(k) - c2.coeff(k)) < 1e-16);
}

TEST_CASE("poly_is_real") {
  CHECK(poly_is_real(parse_polynomial("x^2/2")));
  CHECK_FALSE(poly_is_real(parse_polynomial("ix^2")));
}
