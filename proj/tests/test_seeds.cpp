#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gge/seeds.hpp"

using namespace gge;

TEST_CASE("motzkin enumeration reproduces diagonal matrix powers") {
  ModelKind k = model_from_name("toda");
  const int N = 11;
  for (std::uint64_t seed : {3ull, 4ull}) {
    Coordinates c = random_coordinates(k, N, seed);
    BandZ L = band_matrix(k, c);
    for (int m = 1; m <= 8; ++m) {
      auto terms = motzkin_terms(m);
      BandZ Lm = L;
      for (int p = 1; p < m; ++p) Lm = band_mul(Lm, L);
      for (int j = 0; j < N; ++j) {
        double got = local_field(terms, j, c);
        cplx expect = band_entry(Lm, j, j);
        CHECK(std::abs(got - expect.real()) <= 1e-11 * (1.0 + std::abs(expect)));
      }
    }
  }
}

TEST_CASE("motzkin term count matches the trinomial recursion") {
  // number of closed 3-step (level/up/down) walk profiles of length m
  auto t1 = motzkin_terms(1);
  CHECK(t1.size() == 1);  // a_j
  auto t2 = motzkin_terms(2);
  CHECK(t2.size() == 3);  // a_j^2, b_j^2, b_{j-1}^2
  CHECK_THROWS_AS(motzkin_terms(13), Error);
  CHECK_THROWS_AS(motzkin_terms(0), Error);
}

TEST_CASE("seed decomposition matches the dense trace across families") {
  struct Case {
    const char* model;
    int r;
    const char* pot;
  };
  const Case cases[] = {
      {"toda", 1, "x^2/2"},    {"toda", 1, "x^4 + x^2/2"}, {"toda-ht", 1, "x^2/2"},
      {"exp-toda", 1, "x"},    {"laguerre-ht", 1, "x"},    {"volterra", 1, "-x^2"},
      {"antisym-ht", 1, "-x^2"}, {"cmv", 1, "x"},          {"cmv", 1, "(1+0.5i)x^2"},
      {"cmv-ht", 1, "x^3"},    {"inb-add", 2, "x^3/3"},    {"inb-mult", 2, "x^3"},
      {"inb-add", 1, "x^4"},
  };
  for (const auto& cs : cases) {
    CAPTURE(cs.model);
    CAPTURE(cs.pot);
    ModelKind kind = model_from_name(cs.model, cs.r);
    PolyZ P = parse_polynomial(cs.pot);
    const int N = 12;
    Seed s = extract_seed(kind, P, N);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Coordinates c = random_coordinates(kind, N, seed);
      CHECK(verify_decomposition(s, kind, P, c) < 1e-11);
    }
  }
}

TEST_CASE("seed plus weed equals the (real part of the) trace explicitly") {
  ModelKind kind = model_from_name("toda");
  PolyZ P = parse_polynomial("x^4 + x^2/2");
  const int N = 13;  // leftover sites: N = k*M + l with l > 0
  Seed s = extract_seed(kind, P, N);
  Coordinates c = random_coordinates(kind, N, 77);
  int M = seed_block_count(s, N);
  cplx acc(0, 0);
  for (int b = 0; b + 1 < M; ++b) acc += seed_value(s, c, b);
  acc += weed_value(s, c);
  cplx tr = trace_poly(kind, c, P);
  if (s.take_real) tr = cplx(tr.real(), 0.0);
  CHECK(std::abs(acc - tr) < 1e-11 * (1.0 + std::abs(tr)));
  CHECK(std::abs(observable_value(s, c) - tr) < 1e-11 * (1.0 + std::abs(tr)));
}

TEST_CASE("CMV seeds use stride 2 and unitary families take the real part") {
  ModelKind cmv = model_from_name("cmv");
  Seed s = extract_seed(cmv, parse_polynomial("x"), 12);
  CHECK(s.stride == 2);
  CHECK(s.k % 2 == 0);
  CHECK(s.take_real);

  ModelKind toda = model_from_name("toda");
  Seed st = extract_seed(toda, parse_polynomial("x^2/2"), 12);
  CHECK(st.stride == 1);
  CHECK_FALSE(st.take_real);
}

TEST_CASE("force_k widens the window but keeps the decomposition exact") {
  ModelKind kind = model_from_name("toda");
  PolyZ P = parse_polynomial("x^2/2");
  Seed s1 = extract_seed(kind, P, 12);
  Seed s3 = extract_seed(kind, P, 12, 3);
  CHECK(s1.k == 1);
  CHECK(s3.k == 3);
  Coordinates c = random_coordinates(kind, 12, 5);
  CHECK(verify_decomposition(s3, kind, P, c) < 1e-11);
  // force_k below the natural index is rejected
  ModelKind cmv = model_from_name("cmv");
  CHECK_THROWS_AS(extract_seed(cmv, parse_polynomial("x^2"), 16, 4 + 1), Error);  // not a stride multiple
}

TEST_CASE("extract_seed requires N >= 2k") {
  ModelKind kind = model_from_name("toda");
  PolyZ P = parse_polynomial("x^8");
  CHECK_THROWS_AS(extract_seed(kind, P, 4), Error);
}

TEST_CASE("check_potential admissibility rules") {
  auto ok = [](const char* model, const char* pot, int r = 1) {
    check_potential(model_from_name(model, r), parse_polynomial(pot));
  };
  // admissible
  CHECK_NOTHROW(ok("toda", "x^2/2"));
  CHECK_NOTHROW(ok("toda", "x^4 + x^2/2"));
  CHECK_NOTHROW(ok("exp-toda", "x"));
  CHECK_NOTHROW(ok("volterra", "-x^2"));
  CHECK_NOTHROW(ok("volterra", "x^4"));
  CHECK_NOTHROW(ok("antisym-ht", "-x^2"));
  CHECK_NOTHROW(ok("cmv", "(1+2i)x^3"));
  CHECK_NOTHROW(ok("inb-add", "x^3/3", 2));
  CHECK_NOTHROW(ok("inb-add", "x^2", 1));
  // rejected: wrong parity, orientation, or degree
  CHECK_THROWS_AS(ok("toda", "x^3"), Error);
  CHECK_THROWS_AS(ok("toda", "-x^2"), Error);
  CHECK_THROWS_AS(ok("volterra", "x^2"), Error);   // confining the wrong way
  CHECK_THROWS_AS(ok("volterra", "-x^4"), Error);
  CHECK_THROWS_AS(ok("exp-toda", "-x"), Error);
  CHECK_THROWS_AS(ok("cmv", "x^9"), Error);        // degree cap on the disk
  CHECK_THROWS_AS(ok("inb-add", "x^4", 2), Error); // degree not a multiple of r+1
  CHECK_THROWS_AS(ok("toda", "x^14"), Error);      // degree cap
}

TEST_CASE("quadratic Toda seed is certified nonnegative") {
  ModelKind kind = model_from_name("toda");
  Seed s = extract_seed(kind, parse_polynomial("x^2/2"), 12);
  CHECK_FALSE(s.lb_warning);
  CHECK(s.lower_bound >= -1e-12);
}

TEST_CASE("seed_block_count floors by the circular index") {
  ModelKind kind = model_from_name("toda");
  Seed s = extract_seed(kind, parse_polynomial("x^4"), 16, 2);
  CHECK(s.k == 2);
  CHECK(seed_block_count(s, 16) == 8);
  CHECK(seed_block_count(s, 17) == 8);  // leftover site goes to the weed
}

TEST_CASE("trace_bundle generates the trace by cyclic shifts") {
  ModelKind kind = model_from_name("toda");
  PolyZ P = parse_polynomial("x^4");
  int stride = 0;
  sym::Poly bundle = detail::trace_bundle(kind, P, false, &stride);
  CHECK(stride == 1);
  const int N = 9;
  Coordinates c = random_coordinates(kind, N, 13);
  CoordValues vals{&kind, &c};
  cplx acc(0, 0);
  for (int j = 0; j < N; ++j) acc += sym::eval(sym::shift_sites(bundle, j, N, true), vals);
  cplx tr = trace_poly(kind, c, P);
  CHECK(std::abs(acc - tr) < 1e-11 * (1.0 + std::abs(tr)));
}
