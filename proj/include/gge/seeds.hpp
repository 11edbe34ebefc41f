#pragma once

#include <map>
#include <vector>

#include "gge/models.hpp"
#include "gge/polynomial.hpp"
#include "gge/symbolic.hpp"

namespace gge {

// One super-Motzkin profile for the diagonal entry [L^m]_{jj} of a periodic
// tridiagonal Lax matrix: q[i] = exponent of a_{j+i}, n[i] = half-exponent of
// b_{j+i} (the factor is b_{j+i}^{2 n[i]}), rho = walk multiplicity.
struct MotzkinTerm {
  std::map<int, int> n;
  std::map<int, int> q;
  long long rho = 1;
};

// Complete enumeration for 1 <= m <= 12, deterministic (lexicographic) order.
std::vector<MotzkinTerm> motzkin_terms(int m);

// Evaluates [L^m]_{jj} from the enumeration, with cyclic index wrap.
double local_field(const std::vector<MotzkinTerm>& terms, int j, const Coordinates& c);

// Circular decomposition of a trace observable:
//   Y(x) = sum_{j=0}^{M-2} seed(X_j, X_{j+1}) + weed,   N = k*M + l,
// where X_j is the j-th block of k consecutive coordinate sites. seed_poly
// lives on relative sites 0..2k-1.
struct Seed {
  ModelKind kind;
  PolyZ P;                 // trace polynomial being decomposed
  bool take_real = false;  // decompose Tr Re P(L) instead of Tr P(L)
  int stride = 1;          // shift step of the trace classes (2 for CMV)
  int k = 1;               // circular index, multiple of stride
  sym::Poly bundle;        // per-shift generator: Y = sum_{j = 0 mod stride} shift_j(bundle)
  sym::Poly seed_poly;     // seed as monomials over sites 0..2k-1
  double lower_bound = 0.0;  // certified lower bound of Re seed (-inf if scan failed)
  bool lb_warning = false;   // true when lower_bound could not be certified
};

// Builds the seed of Tr P(L) (Tr Re P(L) for unitary families). N fixes the
// block layout; requires N >= 2k. force_k > 0 overrides the natural circular
// index (must be a multiple of the stride and >= the natural k).
Seed extract_seed(const ModelKind& kind, const PolyZ& P, int N, int force_k = 0);

// seed(X_b, X_{b+1}) evaluated at block b (0 <= b <= M-2).
cplx seed_value(const Seed& s, const Coordinates& c, int block);

// weed = Y - sum of seeds; depends only on blocks 0, M-1 and leftover sites.
cplx weed_value(const Seed& s, const Coordinates& c);

// Direct evaluation of the decomposed observable Y (band-arithmetic path).
cplx observable_value(const Seed& s, const Coordinates& c);

// |Tr P(L) - sum seeds - weed| / (1 + |Tr P(L)|) against a dense-matrix oracle.
double verify_decomposition(const Seed& s, const ModelKind& kind, const PolyZ& P,
                            const Coordinates& c);

// Number of seed blocks M for a lattice with N coordinate sites.
int seed_block_count(const Seed& s, int N);

// Admissibility of the potential for the family (growth/sign/degree rules).
void check_potential(const ModelKind& kind, const PolyZ& P);

namespace detail {
// Anchored per-shift generator of the periodic symbolic trace, plus stride.
// Exposed for tests.
sym::Poly trace_bundle(const ModelKind& kind, const PolyZ& P, bool take_real, int* stride_out);
}  // namespace detail

}  // namespace gge
