#include "gge/seeds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "gge/rng.hpp"

namespace gge {

// ------------------------------------------------------------ super-Motzkin

namespace {

long long binom(long long a, long long b) {
  if (b == 0) return 1;  // includes the empty-slot convention C(-1,0)=1
  if (a < 0 || b < 0 || b > a) return 0;
  long long r = 1;
  for (long long i = 1; i <= b; ++i) r = r * (a - b + i) / i;
  return r;
}

// Walk multiplicity for a stay/crossing profile around the anchor site.
// q[s]: stays at relative site s; n[e]: crossings (each way) of the edge
// (e, e+1). Derivation: stays and departures interleave freely at the anchor;
// away from the anchor, outward excursions and stays distribute over the
// visits coming from the origin side (weak compositions).
long long motzkin_rho(const std::map<int, int>& n, const std::map<int, int>& q, int mt) {
  auto nv = [&](int e) {
    auto it = n.find(e);
    return it == n.end() ? 0LL : (long long)it->second;
  };
  auto qv = [&](int s) {
    auto it = q.find(s);
    return it == q.end() ? 0LL : (long long)it->second;
  };
  long long rho = binom(nv(-1) + nv(0) + qv(0), qv(0)) * binom(nv(-1) + nv(0), nv(0));
  for (int s = 1; s <= mt; ++s)
    rho *= binom(nv(s - 1) + nv(s) + qv(s) - 1, qv(s)) * binom(nv(s - 1) + nv(s) - 1, nv(s));
  for (int s = -1; s >= -mt; --s)
    rho *= binom(nv(s) + nv(s - 1) + qv(s) - 1, qv(s)) * binom(nv(s) + nv(s - 1) - 1, nv(s - 1));
  return rho;
}

}  // namespace

std::vector<MotzkinTerm> motzkin_terms(int m) {
  require(m >= 1 && m <= 12, ErrorCode::DomainError, "motzkin_terms needs 1 <= m <= 12");
  const int mt = m / 2;
  std::vector<MotzkinTerm> out;

  // right edges 0..r-1 and left edges -1..-l carry n >= 1; remaining length
  // goes into stays q over the visited sites -l..r.
  std::vector<int> nr, nl;
  std::map<int, int> q;

  std::function<void(int, int, int)> fill_q = [&](int site, int hi, int rem) {
    if (site == hi) {
      if (rem != 0) return;
      MotzkinTerm t;
      for (size_t e = 0; e < nr.size(); ++e) t.n[(int)e] = nr[e];
      for (size_t e = 0; e < nl.size(); ++e) t.n[-(int)e - 1] = nl[e];
      for (const auto& [s, v] : q)
        if (v > 0) t.q[s] = v;
      t.rho = motzkin_rho(t.n, t.q, mt);
      if (t.rho > 0) out.push_back(std::move(t));
      return;
    }
    for (int v = 0; v <= rem; ++v) {
      if (v > 0) q[site] = v;
      fill_q(site + 1, hi, rem - v);
      q.erase(site);
    }
  };

  // choose right extent r (edges 0..r-1) and left extent l (edges -1..-l),
  // assign each covered edge n >= 1 against the length budget, then stays.
  for (int r = 0; r <= mt; ++r)
    for (int l = 0; l <= mt; ++l) {
      nr.assign(r, 0);
      nl.assign(l, 0);
      std::function<void(int, int)> fill_left = [&](int idx, int used) {
        if (idx == l) {
          fill_q(-l, r + 1, m - 2 * used);
          return;
        }
        int need_after = l - idx - 1;
        for (int v = 1; 2 * (used + v + need_after) <= m; ++v) {
          nl[idx] = v;
          fill_left(idx + 1, used + v);
        }
      };
      std::function<void(int, int)> fill_right = [&](int idx, int used) {
        if (idx == r) {
          fill_left(0, used);
          return;
        }
        int need_after = r - idx - 1 + l;
        for (int v = 1; 2 * (used + v + need_after) <= m; ++v) {
          nr[idx] = v;
          fill_right(idx + 1, used + v);
        }
      };
      fill_right(0, 0);
    }

  // deterministic ordering: lexicographic on the flattened (n, q) profiles
  auto key = [mt](const MotzkinTerm& t) {
    std::vector<int> k;
    for (int e = -mt; e <= mt - 1; ++e) {
      auto it = t.n.find(e);
      k.push_back(it == t.n.end() ? 0 : it->second);
    }
    for (int s = -mt; s <= mt; ++s) {
      auto it = t.q.find(s);
      k.push_back(it == t.q.end() ? 0 : it->second);
    }
    return k;
  };
  std::sort(out.begin(), out.end(),
            [&](const MotzkinTerm& a, const MotzkinTerm& b) { return key(a) < key(b); });
  return out;
}

double local_field(const std::vector<MotzkinTerm>& terms, int j, const Coordinates& c) {
  const int N = c.N;
  require(j >= 0 && j < N, ErrorCode::IndexError, "site index out of range");
  auto wrap = [N](int i) { return ((i % N) + N) % N; };
  double total = 0.0;
  for (const auto& t : terms) {
    double v = (double)t.rho;
    for (const auto& [s, e] : t.q) v *= std::pow(c.a[wrap(j + s)].real(), e);
    for (const auto& [s, e] : t.n) v *= std::pow(c.b[wrap(j + s)], 2 * e);
    total += v;
  }
  return total;
}

// ------------------------------------------------------------ trace classes

namespace {

using sym::Monomial;
using sym::Poly;

// Periodic band structure whose interior matches the model; boundary effects
// of the non-periodic families land in the weed.
sym::BandPoly class_structure(const ModelKind& kind, int n) {
  switch (kind.family) {
    case Family::TodaNonPeriodic:
      return symbolic_lax(ModelKind{Family::TodaPeriodic, kind.r}, n);
    case Family::LaguerreNonPeriodic:
      return symbolic_lax(ModelKind{Family::ExpTodaPeriodic, kind.r}, n);
    case Family::CMVNonPeriodic:
      return symbolic_lax(ModelKind{Family::CMVPeriodic, kind.r}, n);
    case Family::AntisymNonPeriodic: {
      sym::BandPoly L;
      L.n = n;
      L.wrap = true;
      for (int i = 0; i < n; ++i) {
        L.add_entry(i, (i + 1) % n, sym::make_term(1.0, {{i, 0, 2}}));
        L.add_entry((i + 1) % n, i, sym::make_term(-1.0, {{i, 0, 2}}));
      }
      return L;
    }
    default:
      return symbolic_lax(kind, n);
  }
}

int mono_max_site(const Monomial& m) {
  int hi = 0;
  for (const auto& vp : m.f) hi = std::max(hi, vp.site);
  return hi;
}

bool poly_equal(const Poly& a, const Poly& b) {
  if (a.t.size() != b.t.size()) return false;
  for (size_t i = 0; i < a.t.size(); ++i) {
    if (!(a.t[i].f == b.t[i].f)) return false;
    if (std::abs(a.t[i].coeff - b.t[i].coeff) > 1e-9 * (1.0 + std::abs(a.t[i].coeff)))
      return false;
  }
  return true;
}

}  // namespace

namespace detail {

sym::Poly trace_bundle(const ModelKind& kind, const PolyZ& P, bool take_real, int* stride_out) {
  const int deg = P.degree();
  const int w = kind.cmv() ? 2 : (kind.inb() ? kind.r : 1);
  const int nsym = 2 * w * std::max(deg, 1) + 6;

  Poly tr;
  if (deg >= 1) {
    sym::BandPoly S = class_structure(kind, nsym);
    sym::BandPoly acc = S;
    for (int m = 1; m <= deg; ++m) {
      if (m > 1) acc = sym::band_mul(acc, S);
      cplx cm = P.coeff(m);
      if (cm != cplx(0)) tr += sym::scale(sym::band_trace(acc), cm);
    }
  }
  if (take_real) tr = sym::real_part(tr, var_conj_map(kind));

  // bucket monomials by circular anchor (site after the largest gap)
  std::vector<Poly> bucket(nsym);
  for (const auto& mono : tr.t) {
    require(!mono.f.empty(), ErrorCode::DomainError, "constant term in symbolic trace");
    std::vector<int> sites;
    for (const auto& vp : mono.f) sites.push_back(vp.site);
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    int anchor = sites[0];
    int best_gap = sites[0] + nsym - sites.back();
    for (size_t i = 0; i + 1 < sites.size(); ++i) {
      int g = sites[i + 1] - sites[i];
      if (g > best_gap) {
        best_gap = g;
        anchor = sites[i + 1];
      }
    }
    Monomial shifted = mono;
    for (auto& vp : shifted.f) vp.site = ((vp.site - anchor) % nsym + nsym) % nsym;
    bucket[anchor].t.push_back(std::move(shifted));
  }
  for (auto& b : bucket) sym::normalize(b);

  int stride = 0;
  bool s1 = true;
  for (int j = 1; j < nsym && s1; ++j) s1 = poly_equal(bucket[0], bucket[j]);
  if (s1 || deg == 0) {
    stride = 1;
  } else {
    bool s2 = true;
    for (int j = 2; j < nsym && s2; j += 2) s2 = poly_equal(bucket[0], bucket[j]);
    for (int j = 3; j < nsym && s2; j += 2) s2 = poly_equal(bucket[1], bucket[j]);
    require(s2, ErrorCode::DomainError, "trace classes are not shift-covariant");
    stride = 2;
  }
  *stride_out = stride;

  Poly bundle = bucket.empty() ? Poly{} : bucket[0];
  if (stride == 2) bundle += sym::shift_sites(bucket[1], 1, nsym, false);
  cplx c0 = P.coeff(0);
  if (take_real) c0 = cplx(c0.real(), 0.0);
  if (c0 != cplx(0)) bundle += sym::make_const(c0 * double(stride));
  return bundle;
}

}  // namespace detail

// ------------------------------------------------------------ admissibility

void check_potential(const ModelKind& kind, const PolyZ& P) {
  const int d = P.degree();
  if (d == 0 && P.coeff(0) == cplx(0)) return;  // zero potential always fine
  auto real_leading = [&]() {
    require(poly_is_real(P), ErrorCode::UnsupportedPotential,
            "potential must have real coefficients for this model");
    return P.coeff(d).real();
  };
  switch (kind.family) {
    case Family::TodaPeriodic:
    case Family::TodaNonPeriodic: {
      double lead = real_leading();
      require(d >= 2 && d % 2 == 0 && lead > 0.0, ErrorCode::UnsupportedPotential,
              "Toda potential must have even degree >= 2 and positive leading coefficient");
      require(d <= 12, ErrorCode::UnsupportedPotential, "potential degree capped at 12");
      break;
    }
    case Family::ExpTodaPeriodic:
    case Family::LaguerreNonPeriodic: {
      double lead = real_leading();
      require(d >= 1 && lead > 0.0, ErrorCode::UnsupportedPotential,
              "half-line potential needs positive leading coefficient");
      require(d <= 12, ErrorCode::UnsupportedPotential, "potential degree capped at 12");
      break;
    }
    case Family::VolterraPeriodic:
    case Family::AntisymNonPeriodic: {
      double lead = real_leading();
      require(d >= 2 && d % 2 == 0, ErrorCode::UnsupportedPotential,
              "antisymmetric-model potential must have even degree >= 2");
      double sign = (d / 2) % 2 == 0 ? 1.0 : -1.0;  // P(i nu) must grow like +nu^d
      require(lead * sign > 0.0, ErrorCode::UnsupportedPotential,
              "antisymmetric-model potential needs leading coefficient of sign (-1)^(d/2)");
      require(d <= 12, ErrorCode::UnsupportedPotential, "potential degree capped at 12");
      break;
    }
    case Family::CMVPeriodic:
    case Family::CMVNonPeriodic:
      require(d <= 8, ErrorCode::UnsupportedPotential,
              "unitary-model potential degree capped at 8");
      break;
    case Family::INBAdditive:
    case Family::INBMultiplicative: {
      double lead = real_leading();
      require(d >= 1 && d % (kind.r + 1) == 0, ErrorCode::UnsupportedPotential,
              "INB potential degree must be a positive multiple of r+1");
      require(lead > 0.0, ErrorCode::UnsupportedPotential,
              "INB potential needs positive leading coefficient");
      require(d <= 8, ErrorCode::UnsupportedPotential, "potential degree capped at 8");
      break;
    }
  }
}

// ------------------------------------------------------------ lower bound

namespace {

struct WindowVar {
  int site;
  std::uint8_t var;
};

// certified-ish lower bound of Re seed over the coordinate domain:
// scan the top-degree form on the domain sphere, then minimize the radial
// envelope c0 r^D - sum_j |c_j| r^{d_j} with a Lipschitz slack.
void certify_lower_bound(Seed& s) {
  const auto& poly = s.seed_poly;
  if (poly.t.empty()) {
    s.lower_bound = 0.0;
    return;
  }
  if (s.kind.cmv()) {  // all coordinates bounded by 1 in modulus
    double b = 0.0;
    for (const auto& m : poly.t) b -= std::abs(m.coeff);
    s.lower_bound = b;
    return;
  }

  std::vector<WindowVar> vars;
  auto var_index = [&](int site, std::uint8_t v) {
    for (size_t i = 0; i < vars.size(); ++i)
      if (vars[i].site == site && vars[i].var == v) return (int)i;
    vars.push_back({site, v});
    return (int)vars.size() - 1;
  };
  int D = 0;
  for (const auto& m : poly.t) {
    int deg = 0;
    for (const auto& vp : m.f) {
      var_index(vp.site, vp.var);
      deg += vp.hp;
    }
    D = std::max(D, deg / 2);
  }
  if (D == 0) {
    double c = 0.0;
    for (const auto& m : poly.t) c += m.coeff.real();
    s.lower_bound = c;
    return;
  }

  // Toda 'a' variables range over R, everything else over the half line.
  auto var_signed = [&](std::uint8_t v) {
    return (s.kind.family == Family::TodaPeriodic || s.kind.family == Family::TodaNonPeriodic) &&
           v == 0;
  };

  auto eval_top = [&](const std::vector<double>& x) {
    double acc = 0.0;
    for (const auto& m : poly.t) {
      int deg = 0;
      for (const auto& vp : m.f) deg += vp.hp;
      if (deg / 2 != D) continue;
      double p = m.coeff.real();
      for (const auto& vp : m.f) p *= std::pow(x[var_index(vp.site, vp.var)], vp.hp / 2);
      acc += p;
    }
    return acc;
  };

  Rng rng(0x5eedb0b5ULL ^ (std::uint64_t)poly.t.size());
  const int nv = (int)vars.size();
  std::vector<double> x(nv);
  double cmin = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 20000 + 2 * nv; ++it) {
    double norm = 0.0;
    if (it < 2 * nv) {  // axis directions first
      std::fill(x.begin(), x.end(), 0.0);
      x[it / 2] = (it % 2 == 0 || !var_signed(vars[it / 2].var)) ? 1.0 : -1.0;
      norm = 1.0;
    } else {
      for (int i = 0; i < nv; ++i) {
        x[i] = rng.normal();
        if (!var_signed(vars[i].var)) x[i] = std::abs(x[i]);
        norm += x[i] * x[i];
      }
      norm = std::sqrt(norm);
    }
    for (int i = 0; i < nv; ++i) x[i] /= norm;
    cmin = std::min(cmin, eval_top(x));
  }
  if (!(cmin > 1e-12)) {
    s.lower_bound = -std::numeric_limits<double>::infinity();
    s.lb_warning = true;
    return;
  }
  const double c0 = 0.5 * cmin;  // safety margin for the scanned minimum

  // radial envelope: lower-degree monomials bounded by |c| r^deg on the ball
  std::vector<std::pair<double, int>> rest;  // (|coeff|, degree)
  double cconst = 0.0;
  for (const auto& m : poly.t) {
    int deg = 0;
    for (const auto& vp : m.f) deg += vp.hp;
    deg /= 2;
    if (deg == D) continue;
    if (deg == 0)
      cconst += m.coeff.real();
    else
      rest.push_back({std::abs(m.coeff), deg});
  }
  double rstar = 1.0;
  for (const auto& [cj, dj] : rest) {
    double rj = std::pow(std::max(1.0, (double)rest.size() * dj * cj / (D * c0)),
                         1.0 / (D - dj));
    rstar = std::max(rstar, rj);
  }
  auto g = [&](double r) {
    double v = c0 * std::pow(r, D) + cconst;
    for (const auto& [cj, dj] : rest) v -= cj * std::pow(r, dj);
    return v;
  };
  const int ngrid = 4096;
  double gmin = std::min(g(0.0), g(rstar));
  for (int i = 1; i < ngrid; ++i) gmin = std::min(gmin, g(rstar * i / ngrid));
  double lip = D * c0 * std::pow(rstar, D - 1);
  for (const auto& [cj, dj] : rest) lip += dj * cj * std::pow(rstar, dj - 1);
  s.lower_bound = gmin - lip * rstar / ngrid;
}

}  // namespace

// ------------------------------------------------------------ extraction

Seed extract_seed(const ModelKind& kind, const PolyZ& P, int N, int force_k) {
  check_potential(kind, P);
  Seed s;
  s.kind = kind;
  s.P = P;
  s.take_real = !real_valued_traces(kind);

  int stride = 1;
  s.bundle = detail::trace_bundle(kind, P, s.take_real, &stride);
  s.stride = stride;

  int hi = 0;
  for (const auto& m : s.bundle.t) hi = std::max(hi, mono_max_site(m));
  int knat = std::max(stride, hi - stride + 1);
  if (knat % stride) knat += stride - knat % stride;

  s.k = knat;
  if (force_k > 0) {
    require(force_k >= knat && force_k % stride == 0, ErrorCode::IncompatibleSeeds,
            "forced circular index below the natural one or misaligned with the stride");
    s.k = force_k;
  }
  require(s.k <= 8, ErrorCode::IncompatibleSeeds, "circular index above supported maximum 8");
  int sites = coord_sites(kind, N);
  require(2 * s.k <= sites, ErrorCode::IncompatibleSeeds,
          "lattice too short for the circular index");

  for (const auto& m : s.bundle.t) {
    int mhi = mono_max_site(m);
    for (int o = 0; o + stride <= s.k; o += stride) {
      Poly inst;
      inst.t.push_back(m);
      if (o + mhi <= s.k - 1) {
        Poly half = sym::scale(inst, 0.5);
        s.seed_poly += sym::shift_sites(half, o, 0, false);
        s.seed_poly += sym::shift_sites(half, o + s.k, 0, false);
      } else {
        s.seed_poly += sym::shift_sites(inst, o, 0, false);
      }
    }
  }
  certify_lower_bound(s);
  return s;
}

int seed_block_count(const Seed& s, int N) { return coord_sites(s.kind, N) / s.k; }

cplx seed_value(const Seed& s, const Coordinates& c, int block) {
  int M = seed_block_count(s, c.N);
  require(block >= 0 && block <= M - 2, ErrorCode::IndexError, "seed block out of range");
  CoordValues cv{&s.kind, &c};
  int base = block * s.k;
  return sym::eval(s.seed_poly, [&](int site, int var) { return cv(base + site, var); });
}

cplx observable_value(const Seed& s, const Coordinates& c) {
  cplx tr = trace_poly(s.kind, c, s.P);
  return s.take_real ? cplx(tr.real(), 0.0) : tr;
}

cplx weed_value(const Seed& s, const Coordinates& c) {
  cplx total = observable_value(s, c);
  int M = seed_block_count(s, c.N);
  for (int b = 0; b + 1 < M; ++b) total -= seed_value(s, c, b);
  return total;
}

double verify_decomposition(const Seed& s, const ModelKind& kind, const PolyZ& P,
                            const Coordinates& c) {
  LaxMatrix L = build_matrix(kind, c);
  cplx tr = P.coeff(0) * double(L.dim);
  MatZ acc = MatZ::Identity(L.dim, L.dim);
  for (int m = 1; m <= P.degree(); ++m) {
    acc = acc * L.M;
    cplx cm = P.coeff(m);
    if (cm != cplx(0)) tr += cm * acc.trace();
  }
  if (s.take_real) tr = cplx(tr.real(), 0.0);

  cplx sum = weed_value(s, c);
  int M = seed_block_count(s, c.N);
  for (int b = 0; b + 1 < M; ++b) sum += seed_value(s, c, b);
  return std::abs(tr - sum) / (1.0 + std::abs(tr));
}

}  // namespace gge
