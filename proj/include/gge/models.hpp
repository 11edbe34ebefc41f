#pragma once

#include <map>
#include <string>
#include <vector>

#include "gge/common.hpp"
#include "gge/polynomial.hpp"
#include "gge/symbolic.hpp"

namespace gge {

enum class Family {
  TodaPeriodic,
  TodaNonPeriodic,
  ExpTodaPeriodic,
  LaguerreNonPeriodic,
  VolterraPeriodic,
  AntisymNonPeriodic,
  CMVPeriodic,
  CMVNonPeriodic,
  INBAdditive,
  INBMultiplicative,
};

struct ModelKind {
  Family family = Family::TodaPeriodic;
  int r = 1;  // INB range parameter

  bool periodic() const {
    switch (family) {
      case Family::TodaPeriodic:
      case Family::ExpTodaPeriodic:
      case Family::VolterraPeriodic:
      case Family::CMVPeriodic:
      case Family::INBAdditive:
      case Family::INBMultiplicative:
        return true;
      default:
        return false;
    }
  }
  // Finite-size beta-ensemble measure with site-dependent exponents.
  bool beta_ensemble() const { return !periodic(); }
  bool cmv() const { return family == Family::CMVPeriodic || family == Family::CMVNonPeriodic; }
  bool inb() const { return family == Family::INBAdditive || family == Family::INBMultiplicative; }
};

std::string family_name(Family f);
ModelKind model_from_name(const std::string& name, int r = 1);

// Lattice coordinates. `a` holds the first per-site variable (complex for
// CMV, real otherwise), `b` the second where the model has one.
struct Coordinates {
  VecZ a;
  VecD b;
  int N = 0;
};

struct LaxMatrix {
  ModelKind kind;
  int dim = 0;
  MatZ M;
  bool periodic = true;
};

// Numeric cyclic/plain band matrix (same offset conventions as sym::BandPoly).
struct BandZ {
  int n = 0;
  bool wrap = true;
  std::map<int, VecZ> diags;
};

BandZ band_mul(const BandZ& A, const BandZ& B);
cplx band_trace(const BandZ& A);
MatZ band_dense(const BandZ& A);
cplx band_entry(const BandZ& A, int i, int j);

// Model metadata
int matrix_dim(const ModelKind& kind, int N);
int coord_sites(const ModelKind& kind, int N);  // number of lattice sites carrying variables
int a_count(const ModelKind& kind, int N);
int b_count(const ModelKind& kind, int N);
std::vector<std::string> var_names(const ModelKind& kind);
// conjugation map over var ids (identity except CMV a<->abar)
std::vector<std::uint8_t> var_conj_map(const ModelKind& kind);
bool real_valued_traces(const ModelKind& kind);

// Validates ranges (positivity, |a|<1, boundary phase) and sizes.
void check_coordinates(const ModelKind& kind, const Coordinates& c);

Coordinates random_coordinates(const ModelKind& kind, int N, std::uint64_t seed);

BandZ band_matrix(const ModelKind& kind, const Coordinates& c);
LaxMatrix build_matrix(const ModelKind& kind, const Coordinates& c);

// Tr L^m, m in [1, 64], via banded repeated multiplication.
cplx trace_power(const ModelKind& kind, const Coordinates& c, int m);
cplx trace_power(const BandZ& L, int m);

// Tr P(L) (constant term contributes dim * P(0)).
cplx trace_poly(const ModelKind& kind, const Coordinates& c, const PolyZ& P);

// Eigenvalues with structure-aware solvers; dim <= 4096.
VecZ eigenvalues(const LaxMatrix& L);

// Symbolic Lax matrix over per-site variables (var ids per var_names()).
sym::BandPoly symbolic_lax(const ModelKind& kind, int n);

// Value accessor (site, var) -> cplx for a coordinate vector.
struct CoordValues {
  const ModelKind* kind;
  const Coordinates* c;
  cplx operator()(int site, int var) const;
};

}  // namespace gge
