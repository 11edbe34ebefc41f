#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gge/models.hpp"

using namespace gge;

namespace {

const char* kAllNames[] = {"toda",     "toda-ht",    "exp-toda", "laguerre-ht", "volterra",
                           "antisym-ht", "cmv",      "cmv-ht",   "inb-add",     "inb-mult"};

cplx dense_trace_power(const LaxMatrix& L, int m) {
  MatZ acc = L.M;
  for (int i = 1; i < m; ++i) acc = acc * L.M;
  return acc.trace();
}

}  // namespace

TEST_CASE("model name round trip") {
  for (const char* n : kAllNames) {
    ModelKind k = model_from_name(n, 2);
    CHECK(family_name(k.family) == n);
  }
  CHECK_THROWS_AS(model_from_name("nonsense"), Error);
}

TEST_CASE("matrix_dim and coordinate counts") {
  const int N = 12;
  for (const char* n : kAllNames) {
    ModelKind k = model_from_name(n, 2);
    int dim = matrix_dim(k, N);
    if (k.cmv())
      CHECK(dim == 2 * N);
    else
      CHECK(dim == N);
    Coordinates c = random_coordinates(k, N, 5);
    CHECK(c.a.size() == a_count(k, N));
    CHECK(c.b.size() == b_count(k, N));
    check_coordinates(k, c);  // must not throw
    LaxMatrix L = build_matrix(k, c);
    CHECK(L.dim == dim);
  }
}

TEST_CASE("random_coordinates is seed-deterministic") {
  ModelKind k = model_from_name("toda");
  Coordinates c1 = random_coordinates(k, 16, 99);
  Coordinates c2 = random_coordinates(k, 16, 99);
  Coordinates c3 = random_coordinates(k, 16, 100);
  CHECK((c1.a - c2.a).cwiseAbs().maxCoeff() == 0.0);
  CHECK((c1.b - c2.b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((c1.a - c3.a).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("banded trace powers match the dense matrix") {
  const int N = 10;
  for (const char* n : kAllNames) {
    ModelKind k = model_from_name(n, 2);
    for (std::uint64_t seed : {1ull, 2ull}) {
      Coordinates c = random_coordinates(k, N, seed);
      LaxMatrix L = build_matrix(k, c);
      for (int m = 1; m <= 6; ++m) {
        cplx band = trace_power(k, c, m);
        cplx dense = dense_trace_power(L, m);
        CHECK(std::abs(band - dense) <= 1e-10 * (1.0 + std::abs(dense)));
      }
    }
  }
}

TEST_CASE("trace_poly includes the constant term as dim * P0") {
  ModelKind k = model_from_name("cmv");
  Coordinates c = random_coordinates(k, 8, 3);
  PolyZ P = parse_polynomial("x^2 + 5");
  cplx got = trace_poly(k, c, P);
  cplx expect = trace_power(k, c, 2) + cplx(5.0, 0.0) * double(matrix_dim(k, 8));
  CHECK(std::abs(got - expect) < 1e-12 * (1.0 + std::abs(expect)));
}

TEST_CASE("CMV matrices are unitary with unimodular spectrum") {
  for (const char* n : {"cmv", "cmv-ht"}) {
    ModelKind k = model_from_name(n);
    Coordinates c = random_coordinates(k, 10, 17);
    LaxMatrix L = build_matrix(k, c);
    MatZ I = L.M * L.M.adjoint();
    CHECK((I - MatZ::Identity(L.dim, L.dim)).cwiseAbs().maxCoeff() < 1e-12);
    VecZ ev = eigenvalues(L);
    for (int i = 0; i < ev.size(); ++i) CHECK(std::abs(std::abs(ev[i]) - 1.0) < 1e-11);
  }
}

TEST_CASE("antisymmetric model has vanishing odd traces") {
  ModelKind k = model_from_name("antisym-ht");
  Coordinates c = random_coordinates(k, 12, 23);
  LaxMatrix L = build_matrix(k, c);
  CHECK((L.M + L.M.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  for (int m : {1, 3, 5, 7}) CHECK(std::abs(trace_power(k, c, m)) < 1e-10);
}

TEST_CASE("real families produce real traces") {
  for (const char* n : {"toda", "toda-ht", "exp-toda", "laguerre-ht", "volterra", "inb-add"}) {
    ModelKind k = model_from_name(n);
    CHECK(real_valued_traces(k));
    Coordinates c = random_coordinates(k, 9, 31);
    for (int m = 1; m <= 5; ++m) CHECK(std::abs(trace_power(k, c, m).imag()) < 1e-10);
  }
  CHECK_FALSE(real_valued_traces(model_from_name("cmv")));
}

TEST_CASE("check_coordinates rejects invalid states") {
  ModelKind toda = model_from_name("toda");
  Coordinates c = random_coordinates(toda, 8, 1);
  c.b[3] = -0.5;  // off-diagonal entries must stay positive
  CHECK_THROWS_AS(check_coordinates(toda, c), Error);

  ModelKind cmv = model_from_name("cmv");
  Coordinates d = random_coordinates(cmv, 8, 1);
  d.a[2] = cplx(1.5, 0.0);  // Verblunsky coefficients live in the open disk
  CHECK_THROWS_AS(check_coordinates(cmv, d), Error);

  Coordinates wrong = random_coordinates(toda, 8, 1);
  wrong.a.conservativeResize(5);
  CHECK_THROWS_AS(check_coordinates(toda, wrong), Error);
}

TEST_CASE("INB band structure respects the range parameter") {
  for (int r : {1, 2, 3}) {
    ModelKind k = model_from_name("inb-add", r);
    Coordinates c = random_coordinates(k, 12, 7);
    LaxMatrix L = build_matrix(k, c);
    // nonzero entries only on the +1 cyclic diagonal and the -r cyclic diagonal
    for (int i = 0; i < L.dim; ++i)
      for (int j = 0; j < L.dim; ++j) {
        int up = (j - i + L.dim) % L.dim;
        if (std::abs(L.M(i, j)) > 0.0) CHECK((up == 1 || up == L.dim - r));
      }
    for (int m = 1; m <= 6; ++m)
      if (m % (r + 1) != 0) CHECK(std::abs(trace_power(k, c, m)) < 1e-12);
  }
}

TEST_CASE("symbolic_lax evaluates to the numeric band matrix") {
  for (const char* n : kAllNames) {
    ModelKind k = model_from_name(n, 2);
    const int N = 8;
    Coordinates c = random_coordinates(k, N, 41);
    sym::BandPoly SL = symbolic_lax(k, matrix_dim(k, N));
    BandZ L = band_matrix(k, c);
    MatZ dense = band_dense(L);
    CoordValues vals{&k, &c};
    for (int i = 0; i < dense.rows(); ++i) {
      cplx diag = sym::eval(sym::band_diag_entry(SL, i), vals);
      CHECK(std::abs(diag - dense(i, i)) < 1e-12 * (1.0 + std::abs(dense(i, i))));
    }
  }
}

TEST_CASE("var_conj_map pairs CMV variables and fixes real ones") {
  ModelKind cmv = model_from_name("cmv");
  auto m = var_conj_map(cmv);
  auto names = var_names(cmv);
  REQUIRE(m.size() == names.size());
  bool has_swap = false;
  for (size_t v = 0; v < m.size(); ++v) {
    CHECK(m[m[v]] == v);  // involution
    has_swap |= (m[v] != v);
  }
  CHECK(has_swap);

  ModelKind toda = model_from_name("toda");
  for (auto v : var_conj_map(toda)) CHECK(v == var_conj_map(toda)[v]);
}

TEST_CASE("eigenvalues of a symmetric tridiagonal agree with the trace") {
  ModelKind k = model_from_name("toda");
  Coordinates c = random_coordinates(k, 16, 53);
  LaxMatrix L = build_matrix(k, c);
  VecZ ev = eigenvalues(L);
  cplx s2(0, 0);
  for (int i = 0; i < ev.size(); ++i) s2 += ev[i] * ev[i];
  CHECK(std::abs(s2 - trace_power(k, c, 2)) < 1e-9);
}
