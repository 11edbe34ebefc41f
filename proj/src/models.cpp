#include "gge/models.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "gge/rng.hpp"

namespace gge {

std::string family_name(Family f) {
  switch (f) {
    case Family::TodaPeriodic: return "toda";
    case Family::TodaNonPeriodic: return "toda-ht";
    case Family::ExpTodaPeriodic: return "exp-toda";
    case Family::LaguerreNonPeriodic: return "laguerre-ht";
    case Family::VolterraPeriodic: return "volterra";
    case Family::AntisymNonPeriodic: return "antisym-ht";
    case Family::CMVPeriodic: return "cmv";
    case Family::CMVNonPeriodic: return "cmv-ht";
    case Family::INBAdditive: return "inb-add";
    case Family::INBMultiplicative: return "inb-mult";
  }
  return "?";
}

ModelKind model_from_name(const std::string& name, int r) {
  static const std::vector<Family> all = {
      Family::TodaPeriodic,    Family::TodaNonPeriodic,  Family::ExpTodaPeriodic,
      Family::LaguerreNonPeriodic, Family::VolterraPeriodic, Family::AntisymNonPeriodic,
      Family::CMVPeriodic,     Family::CMVNonPeriodic,   Family::INBAdditive,
      Family::INBMultiplicative};
  for (Family f : all)
    if (family_name(f) == name) return ModelKind{f, r};
  fail(ErrorCode::DomainError, "unknown model '" + name + "'");
}

int matrix_dim(const ModelKind& kind, int N) {
  return kind.cmv() ? 2 * N : N;
}

int coord_sites(const ModelKind& kind, int N) { return matrix_dim(kind, N); }

int a_count(const ModelKind& kind, int N) {
  switch (kind.family) {
    case Family::AntisymNonPeriodic: return N - 1;
    case Family::CMVPeriodic:
    case Family::CMVNonPeriodic: return 2 * N;
    default: return N;
  }
}

int b_count(const ModelKind& kind, int N) {
  switch (kind.family) {
    case Family::TodaPeriodic:
    case Family::ExpTodaPeriodic: return N;
    case Family::TodaNonPeriodic:
    case Family::LaguerreNonPeriodic: return N - 1;
    default: return 0;
  }
}

std::vector<std::string> var_names(const ModelKind& kind) {
  switch (kind.family) {
    case Family::TodaPeriodic:
    case Family::TodaNonPeriodic: return {"a", "b"};
    case Family::ExpTodaPeriodic:
    case Family::LaguerreNonPeriodic: return {"x", "y"};
    case Family::VolterraPeriodic: return {"a"};
    case Family::AntisymNonPeriodic: return {"x"};
    case Family::CMVPeriodic:
    case Family::CMVNonPeriodic: return {"a", "abar", "rho"};
    case Family::INBAdditive:
    case Family::INBMultiplicative: return {"a"};
  }
  return {};
}

std::vector<std::uint8_t> var_conj_map(const ModelKind& kind) {
  if (kind.cmv()) return {1, 0, 2};
  int nv = static_cast<int>(var_names(kind).size());
  std::vector<std::uint8_t> id;
  for (int v = 0; v < nv; ++v) id.push_back(static_cast<std::uint8_t>(v));
  return id;
}

bool real_valued_traces(const ModelKind& kind) { return !kind.cmv(); }

void check_coordinates(const ModelKind& kind, const Coordinates& c) {
  const int N = c.N;
  require(N >= 2, ErrorCode::DomainError, "need N >= 2");
  require(c.a.size() == a_count(kind, N), ErrorCode::DomainError, "bad a-coordinate count");
  require(c.b.size() == b_count(kind, N), ErrorCode::DomainError, "bad b-coordinate count");
  if (kind.inb()) require(kind.r >= 1 && kind.r < N, ErrorCode::DomainError, "need 1 <= r < N");
  auto positive = [&](const auto& v, const char* what) {
    for (int i = 0; i < v.size(); ++i)
      require(std::real(v[i]) > 0.0, ErrorCode::DomainError, std::string(what) + " must be positive");
  };
  switch (kind.family) {
    case Family::TodaPeriodic:
    case Family::TodaNonPeriodic:
      positive(c.b, "b");
      break;
    case Family::ExpTodaPeriodic:
    case Family::LaguerreNonPeriodic:
      positive(c.a, "x");
      positive(c.b, "y");
      break;
    case Family::VolterraPeriodic:
    case Family::AntisymNonPeriodic:
    case Family::INBAdditive:
    case Family::INBMultiplicative:
      positive(c.a, "coordinate");
      break;
    case Family::CMVPeriodic:
      for (int i = 0; i < c.a.size(); ++i)
        require(std::abs(c.a[i]) < 1.0, ErrorCode::DomainError, "|a| must be < 1");
      break;
    case Family::CMVNonPeriodic:
      for (int i = 0; i + 1 < c.a.size(); ++i)
        require(std::abs(c.a[i]) < 1.0, ErrorCode::DomainError, "|a| must be < 1");
      require(std::abs(std::abs(c.a[c.a.size() - 1]) - 1.0) < 1e-9, ErrorCode::DomainError,
              "boundary coordinate must lie on the unit circle");
      break;
  }
}

Coordinates random_coordinates(const ModelKind& kind, int N, std::uint64_t seed) {
  Rng rng(seed);
  Coordinates c;
  c.N = N;
  int na = a_count(kind, N), nb = b_count(kind, N);
  c.a.resize(na);
  c.b.resize(nb);
  switch (kind.family) {
    case Family::TodaPeriodic:
    case Family::TodaNonPeriodic:
      for (int i = 0; i < na; ++i) c.a[i] = rng.normal();
      for (int i = 0; i < nb; ++i) c.b[i] = std::exp(0.4 * rng.normal());
      break;
    case Family::ExpTodaPeriodic:
    case Family::LaguerreNonPeriodic:
      for (int i = 0; i < na; ++i) c.a[i] = std::exp(0.4 * rng.normal());
      for (int i = 0; i < nb; ++i) c.b[i] = std::exp(0.4 * rng.normal());
      break;
    case Family::VolterraPeriodic:
    case Family::AntisymNonPeriodic:
    case Family::INBAdditive:
    case Family::INBMultiplicative:
      for (int i = 0; i < na; ++i) c.a[i] = std::exp(0.5 * rng.normal());
      break;
    case Family::CMVPeriodic:
    case Family::CMVNonPeriodic:
      for (int i = 0; i < na; ++i) {
        double u = 0.9 * rng.uniform();
        double th = rng.uniform(0.0, 2.0 * kPi);
        c.a[i] = std::sqrt(u) * cplx(std::cos(th), std::sin(th));
      }
      if (kind.family == Family::CMVNonPeriodic) {
        double th = rng.uniform(0.0, 2.0 * kPi);
        c.a[na - 1] = cplx(std::cos(th), std::sin(th));
      }
      break;
  }
  check_coordinates(kind, c);
  return c;
}

cplx CoordValues::operator()(int site, int var) const {
  switch (kind->family) {
    case Family::TodaPeriodic:
    case Family::TodaNonPeriodic:
    case Family::ExpTodaPeriodic:
    case Family::LaguerreNonPeriodic:
      if (var == 0) return site < c->a.size() ? c->a[site] : cplx(0);
      return site < c->b.size() ? cplx(c->b[site]) : cplx(0);
    case Family::VolterraPeriodic:
    case Family::AntisymNonPeriodic:
    case Family::INBAdditive:
    case Family::INBMultiplicative:
      return site < c->a.size() ? c->a[site] : cplx(0);
    case Family::CMVPeriodic:
    case Family::CMVNonPeriodic: {
      if (site >= c->a.size()) return cplx(0);
      cplx a = c->a[site];
      if (var == 0) return a;
      if (var == 1) return std::conj(a);
      return cplx(std::sqrt(std::max(0.0, 1.0 - std::norm(a))));
    }
  }
  return cplx(0);
}

// --------------------------------------------------------------- symbolic

namespace {

using sym::BandPoly;
using sym::Poly;
using sym::VarPow;

Poly var_term(int site, int var, cplx coeff = cplx(1.0), int hp = 2) {
  return sym::make_term(coeff, {VarPow{site, static_cast<std::uint8_t>(var),
                                       static_cast<std::uint16_t>(hp)}});
}

}  // namespace

sym::BandPoly symbolic_lax(const ModelKind& kind, int n) {
  BandPoly L;
  L.n = n;
  L.wrap = kind.periodic();
  switch (kind.family) {
    case Family::TodaPeriodic:
      for (int i = 0; i < n; ++i) {
        L.add_entry(i, i, var_term(i, 0));
        L.add_entry(i, (i + 1) % n, var_term(i, 1));
        L.add_entry((i + 1) % n, i, var_term(i, 1));
      }
      break;
    case Family::TodaNonPeriodic:
      for (int i = 0; i < n; ++i) L.add_entry(i, i, var_term(i, 0));
      for (int i = 0; i + 1 < n; ++i) {
        L.add_entry(i, i + 1, var_term(i, 1));
        L.add_entry(i + 1, i, var_term(i, 1));
      }
      break;
    case Family::ExpTodaPeriodic:
      for (int i = 0; i < n; ++i) {
        Poly d = var_term(i, 0, 1.0, 4);          // x_i^2
        d += var_term((i + n - 1) % n, 1, 1.0, 4);  // y_{i-1}^2
        L.add_entry(i, i, d);
        Poly od = sym::mul(var_term(i, 0), var_term(i, 1), n, true);  // x_i y_i
        L.add_entry(i, (i + 1) % n, od);
        L.add_entry((i + 1) % n, i, od);
      }
      break;
    case Family::LaguerreNonPeriodic:
      for (int i = 0; i < n; ++i) {
        Poly d = var_term(i, 0, 1.0, 4);
        if (i >= 1) d += var_term(i - 1, 1, 1.0, 4);
        L.add_entry(i, i, d);
        if (i + 1 < n) {
          Poly od = sym::mul(var_term(i, 0), var_term(i, 1), n, false);
          L.add_entry(i, i + 1, od);
          L.add_entry(i + 1, i, od);
        }
      }
      break;
    case Family::VolterraPeriodic:
      for (int i = 0; i < n; ++i) {
        L.add_entry(i, (i + 1) % n, var_term(i, 0, 1.0, 1));        // +sqrt(a_i)
        L.add_entry((i + 1) % n, i, var_term(i, 0, -1.0, 1));       // -sqrt(a_i)
      }
      break;
    case Family::AntisymNonPeriodic:
      for (int i = 0; i + 1 < n; ++i) {
        L.add_entry(i, i + 1, var_term(i, 0, 1.0));
        L.add_entry(i + 1, i, var_term(i, 0, -1.0));
      }
      break;
    case Family::CMVPeriodic: {
      require(n % 2 == 0, ErrorCode::DomainError, "CMV dimension must be even");
      BandPoly Lf, Mf;
      Lf.n = Mf.n = n;
      Lf.wrap = Mf.wrap = true;
      // Lf: Xi blocks on coordinates 0,2,...,n-2 occupying rows (c, c+1)
      for (int c = 0; c < n; c += 2) {
        Lf.add_entry(c, c, var_term(c, 1));
        Lf.add_entry(c, c + 1, var_term(c, 2));
        Lf.add_entry(c + 1, c, var_term(c, 2));
        Lf.add_entry(c + 1, c + 1, var_term(c, 0, -1.0));
      }
      // Mf: Xi blocks on coordinates 1,3,...,n-3 occupying rows (c, c+1);
      // last coordinate n-1 wraps rows (n-1, 0).
      for (int c = 1; c + 1 < n - 1; c += 2) {
        Mf.add_entry(c, c, var_term(c, 1));
        Mf.add_entry(c, c + 1, var_term(c, 2));
        Mf.add_entry(c + 1, c, var_term(c, 2));
        Mf.add_entry(c + 1, c + 1, var_term(c, 0, -1.0));
      }
      int c = n - 1;
      Mf.add_entry(c, c, var_term(c, 1));
      Mf.add_entry(c, 0, var_term(c, 2));
      Mf.add_entry(0, c, var_term(c, 2));
      Mf.add_entry(0, 0, var_term(c, 0, -1.0));
      L = band_mul(Lf, Mf);
      break;
    }
    case Family::CMVNonPeriodic: {
      require(n % 2 == 0, ErrorCode::DomainError, "CMV dimension must be even");
      BandPoly Lf, Mf;
      Lf.n = Mf.n = n;
      Lf.wrap = Mf.wrap = false;
      Lf.add_entry(0, 0, sym::make_const(1.0));  // Xi_0 = (1)
      for (int c = 1; c + 1 < n - 1; c += 2) {   // Xi blocks rows (c, c+1)
        Lf.add_entry(c, c, var_term(c, 1));
        Lf.add_entry(c, c + 1, var_term(c, 2));
        Lf.add_entry(c + 1, c, var_term(c, 2));
        Lf.add_entry(c + 1, c + 1, var_term(c, 0, -1.0));
      }
      Lf.add_entry(n - 1, n - 1, var_term(n - 1, 1));  // Xi_{2N} = (abar)
      for (int c = 0; c + 1 < n; c += 2) {
        Mf.add_entry(c, c, var_term(c, 1));
        Mf.add_entry(c, c + 1, var_term(c, 2));
        Mf.add_entry(c + 1, c, var_term(c, 2));
        Mf.add_entry(c + 1, c + 1, var_term(c, 0, -1.0));
      }
      L = band_mul(Lf, Mf);
      break;
    }
    case Family::INBAdditive:
      require(kind.r >= 1 && kind.r < n, ErrorCode::DomainError, "need 1 <= r < N");
      for (int i = 0; i < n; ++i) {
        L.add_entry(i, (i + 1) % n, sym::make_const(1.0));
        L.add_entry((i + kind.r) % n, i, var_term((i + kind.r) % n, 0));
      }
      break;
    case Family::INBMultiplicative:
      require(kind.r >= 1 && kind.r < n, ErrorCode::DomainError, "need 1 <= r < N");
      for (int i = 0; i < n; ++i) {
        L.add_entry(i, (i + 1) % n, var_term(i, 0));
        L.add_entry((i + kind.r) % n, i, sym::make_const(1.0));
      }
      break;
  }
  return L;
}

// --------------------------------------------------------------- numeric

BandZ band_matrix(const ModelKind& kind, const Coordinates& c) {
  sym::BandPoly S = symbolic_lax(kind, matrix_dim(kind, c.N));
  CoordValues vals{&kind, &c};
  BandZ B;
  B.n = S.n;
  B.wrap = S.wrap;
  for (const auto& [o, d] : S.diags) {
    VecZ v = VecZ::Zero(S.n);
    bool any = false;
    for (int i = 0; i < S.n; ++i)
      if (!d[i].empty()) {
        v[i] = sym::eval(d[i], vals);
        any = true;
      }
    if (any) B.diags[o] = std::move(v);
  }
  return B;
}

MatZ band_dense(const BandZ& A) {
  MatZ M = MatZ::Zero(A.n, A.n);
  for (const auto& [o, d] : A.diags)
    for (int i = 0; i < A.n; ++i) {
      int j = A.wrap ? (i + o) % A.n : i + o;
      if (j >= 0 && j < A.n) M(i, j) += d[i];
    }
  return M;
}

cplx band_entry(const BandZ& A, int i, int j) {
  int o = j - i;
  if (A.wrap) o = ((o % A.n) + A.n) % A.n;
  auto it = A.diags.find(o);
  return it == A.diags.end() ? cplx(0) : it->second[i];
}

BandZ band_mul(const BandZ& A, const BandZ& B) {
  require(A.n == B.n && A.wrap == B.wrap, ErrorCode::DomainError, "band shape mismatch");
  BandZ C;
  C.n = A.n;
  C.wrap = A.wrap;
  const int n = A.n;
  for (const auto& [oa, da] : A.diags)
    for (const auto& [ob, db] : B.diags) {
      if (A.wrap) {
        int oc = (oa + ob) % n;
        auto [it, fresh] = C.diags.try_emplace(oc, VecZ::Zero(n));
        VecZ& dc = it->second;
        for (int i = 0; i < n; ++i) dc[i] += da[i] * db[(i + oa) % n];
      } else {
        int oc = oa + ob;
        if (oc <= -n || oc >= n) continue;
        auto [it, fresh] = C.diags.try_emplace(oc, VecZ::Zero(n));
        VecZ& dc = it->second;
        int ilo = std::max({0, -oa, -oc});
        int ihi = std::min({n - 1, n - 1 - oa, n - 1 - oa - ob});
        for (int i = ilo; i <= ihi; ++i) dc[i] += da[i] * db[i + oa];
      }
    }
  return C;
}

cplx band_trace(const BandZ& A) {
  auto it = A.diags.find(0);
  if (it == A.diags.end()) return cplx(0);
  return it->second.sum();
}

LaxMatrix build_matrix(const ModelKind& kind, const Coordinates& c) {
  check_coordinates(kind, c);
  LaxMatrix L;
  L.kind = kind;
  L.dim = matrix_dim(kind, c.N);
  L.periodic = kind.periodic();
  L.M = band_dense(band_matrix(kind, c));
  return L;
}

cplx trace_power(const BandZ& L, int m) {
  require(m >= 1 && m <= 64, ErrorCode::DomainError, "trace power must be in [1, 64]");
  BandZ acc = L;
  for (int p = 1; p < m; ++p) acc = band_mul(acc, L);
  return band_trace(acc);
}

cplx trace_power(const ModelKind& kind, const Coordinates& c, int m) {
  return trace_power(band_matrix(kind, c), m);
}

cplx trace_poly(const ModelKind& kind, const Coordinates& c, const PolyZ& P) {
  BandZ L = band_matrix(kind, c);
  cplx tr = P.coeff(0) * double(L.n);
  if (P.degree() == 0) return tr;
  BandZ acc = L;
  for (int m = 1; m <= P.degree(); ++m) {
    if (m > 1) acc = band_mul(acc, L);
    cplx cm = P.coeff(m);
    if (cm != cplx(0)) tr += cm * band_trace(acc);
  }
  return tr;
}

VecZ eigenvalues(const LaxMatrix& L) {
  require(L.dim <= 4096, ErrorCode::DomainError, "eigenvalue solve capped at dim 4096");
  switch (L.kind.family) {
    case Family::TodaPeriodic:
    case Family::TodaNonPeriodic:
    case Family::ExpTodaPeriodic:
    case Family::LaguerreNonPeriodic: {
      Eigen::SelfAdjointEigenSolver<MatD> es(L.M.real());
      require(es.info() == Eigen::Success, ErrorCode::ConvergenceError, "eigensolve failed");
      return es.eigenvalues().cast<cplx>();
    }
    case Family::VolterraPeriodic:
    case Family::AntisymNonPeriodic: {
      // i*M is Hermitian for real antisymmetric M; map back by -i.
      MatZ H = cplx(0.0, 1.0) * L.M;
      Eigen::SelfAdjointEigenSolver<MatZ> es(H);
      require(es.info() == Eigen::Success, ErrorCode::ConvergenceError, "eigensolve failed");
      VecZ out(L.dim);
      for (int i = 0; i < L.dim; ++i) out[i] = cplx(0.0, -1.0) * es.eigenvalues()[i];
      return out;
    }
    default: {
      Eigen::ComplexEigenSolver<MatZ> es(L.M);
      require(es.info() == Eigen::Success, ErrorCode::ConvergenceError, "eigensolve failed");
      return es.eigenvalues();
    }
  }
}

}  // namespace gge
