#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gge/symbolic.hpp"

using namespace gge;
using namespace gge::sym;

namespace {

// simple value table: var 0 -> base + site, var 1 -> 2 + site/10
struct Table {
  cplx operator()(int site, int var) const {
    if (var == 0) return cplx(1.5 + site, 0.0);
    return cplx(2.0 + 0.1 * site, 0.0);
  }
};

VarPow vp(int site, int var, int power) {
  return VarPow{static_cast<std::int32_t>(site), static_cast<std::uint8_t>(var),
                static_cast<std::uint16_t>(2 * power)};
}

}  // namespace

TEST_CASE("make_term and eval with integer powers") {
  // 3 * x_0^2 * y_1
  Poly p = make_term(cplx(3, 0), {vp(0, 0, 2), vp(1, 1, 1)});
  Table t;
  cplx v = eval(p, t);
  CHECK(v.real() == doctest::Approx(3.0 * 1.5 * 1.5 * 2.1).epsilon(1e-15));
  CHECK(v.imag() == 0.0);
}

TEST_CASE("half powers evaluate as square roots") {
  // sqrt(x_2): hp = 1
  Poly p = make_term(cplx(1, 0), {VarPow{2, 0, 1}});
  Table t;
  CHECK(eval(p, t).real() == doctest::Approx(std::sqrt(3.5)).epsilon(1e-15));
  // x_2^{3/2}: hp = 3
  Poly q = make_term(cplx(1, 0), {VarPow{2, 0, 3}});
  CHECK(eval(q, t).real() == doctest::Approx(std::pow(3.5, 1.5)).epsilon(1e-14));
}

TEST_CASE("add merges like monomials and drops zeros") {
  Poly a = make_term(cplx(2, 0), {vp(0, 0, 1)});
  Poly b = make_term(cplx(-2, 0), {vp(0, 0, 1)});
  Poly s = add(a, b);
  CHECK(s.empty());

  Poly c = add(a, make_term(cplx(1, 0), {vp(1, 0, 1)}));
  CHECK(c.t.size() == 2);
}

TEST_CASE("mul multiplies coefficients and adds exponents") {
  Poly a = make_term(cplx(2, 0), {vp(0, 0, 1)});
  Poly b = make_term(cplx(3, 0), {vp(0, 0, 2), vp(1, 1, 1)});
  Poly p = mul(a, b, 8, false);
  REQUIRE(p.t.size() == 1);
  CHECK(p.t[0].coeff == cplx(6, 0));
  REQUIRE(p.t[0].f.size() == 2);
  CHECK(p.t[0].f[0].site == 0);
  CHECK(p.t[0].f[0].hp == 6);  // x_0^3 in half-units
  CHECK(p.t[0].f[1].site == 1);

  // distributes over sums
  Poly s = add(a, b);
  Poly lhs = mul(s, s, 8, false);
  Poly rhs = add(add(mul(a, a, 8, false), scale(mul(a, b, 8, false), cplx(2, 0))),
                 mul(b, b, 8, false));
  Table t;
  CHECK(std::abs(eval(lhs, t) - eval(rhs, t)) < 1e-13);
}

TEST_CASE("shift_sites with and without wrap") {
  Poly a = make_term(cplx(1, 0), {vp(2, 0, 1)});
  Poly sh = shift_sites(a, 3, 4, true);  // site 2+3 mod 4 = 1
  REQUIRE(sh.t.size() == 1);
  CHECK(sh.t[0].f[0].site == 1);
  Poly sh2 = shift_sites(a, 3, 4, false);  // no wrap: site 5
  CHECK(sh2.t[0].f[0].site == 5);
}

TEST_CASE("conjugate swaps paired variables and conjugates coefficients") {
  // var map: 0 <-> 1 (like a and abar)
  std::vector<std::uint8_t> cmap = {1, 0};
  Poly p = make_term(cplx(0, 2), {vp(0, 0, 1)});
  Poly q = conjugate(p, cmap);
  REQUIRE(q.t.size() == 1);
  CHECK(q.t[0].coeff == cplx(0, -2));
  CHECK(q.t[0].f[0].var == 1);

  Poly rp = real_part(p, cmap);
  // real part of 2i a = i a - i abar
  REQUIRE(rp.t.size() == 2);
  Table t;  // both vars real here, so Re(2i a) = 0
  CHECK(std::abs(eval(rp, t)) < 1e-15);
}

TEST_CASE("normalize sorts factors and merges") {
  Poly p;
  p.t.push_back({cplx(1, 0), {vp(1, 0, 1), vp(0, 0, 1)}});  // unsorted factors
  p.t.push_back({cplx(2, 0), {vp(0, 0, 1), vp(1, 0, 1)}});
  normalize(p);
  REQUIRE(p.t.size() == 1);
  CHECK(p.t[0].coeff == cplx(3, 0));
  CHECK(p.t[0].f[0].site == 0);
  CHECK(p.t[0].f[1].site == 1);
}

TEST_CASE("band_mul against dense on a cyclic tridiagonal") {
  // A = lower shift with entries x_i, B = upper shift with entries y_i; the
  // product's diagonal must be x_i y_{i-1}-type terms traced cyclically.
  const int n = 5;
  BandPoly A;
  A.n = n;
  A.wrap = true;
  BandPoly B;
  B.n = n;
  B.wrap = true;
  for (int i = 0; i < n; ++i) {
    A.add_entry(i, (i + 1) % n, make_term(cplx(1, 0), {vp(i, 0, 1)}));
    B.add_entry((i + 1) % n, i, make_term(cplx(1, 0), {vp(i, 1, 1)}));
  }
  BandPoly C = band_mul(A, B);
  Poly tr = band_trace(C);
  Table t;
  // trace = sum_i x_i y_i evaluated at the table
  double expect = 0;
  for (int i = 0; i < n; ++i) expect += (1.5 + i) * (2.0 + 0.1 * i);
  CHECK(eval(tr, t).real() == doctest::Approx(expect).epsilon(1e-14));

  // band_entry and band_diag_entry agree
  for (int i = 0; i < n; ++i)
    CHECK(std::abs(eval(band_diag_entry(C, i), t) - eval(band_entry(C, i, i), t)) < 1e-15);
}

TEST_CASE("to_string names variables") {
  Poly p = make_term(cplx(2, 0), {vp(0, 0, 2), vp(1, 1, 1)});
  std::string s = to_string(p, {"a", "b"});
  CHECK(s.find("a") != std::string::npos);
  CHECK(s.find("b") != std::string::npos);
}
