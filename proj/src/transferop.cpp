#include "gge/transferop.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "gge/quadrature.hpp"
#include "gge/rng.hpp"

namespace gge {

namespace {

using opdetail::Factor;
using opdetail::Term;
using opdetail::TermSplit;

// --------------------------------------------------- window seeds & terms

int mono_max_site(const sym::Monomial& m) {
  int hi = 0;
  for (const auto& vp : m.f) hi = std::max(hi, static_cast<int>(vp.site));
  return hi;
}

// Same 2k-site window construction as the sampler's seed extraction, minus the
// potential admissibility check so trace observables (odd powers etc.) pass.
Seed window_seed(const ModelKind& kind, const PolyZ& P, int force_k) {
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

  for (const auto& m : s.bundle.t) {
    int mhi = mono_max_site(m);
    for (int o = 0; o + stride <= s.k; o += stride) {
      sym::Poly inst;
      inst.t.push_back(m);
      if (o + mhi <= s.k - 1) {
        sym::Poly half = sym::scale(inst, 0.5);
        s.seed_poly += sym::shift_sites(half, o, 0, false);
        s.seed_poly += sym::shift_sites(half, o + s.k, 0, false);
      } else {
        s.seed_poly += sym::shift_sites(inst, o, 0, false);
      }
    }
  }
  s.lower_bound = 0.0;
  s.lb_warning = false;
  return s;
}

TermSplit compile_split(const sym::Poly& p, int k, int nv) {
  TermSplit out;
  for (const auto& m : p.t) {
    Term t;
    t.coeff = m.coeff;
    bool in_x = false, in_y = false;
    for (const auto& vp : m.f) {
      in_x |= vp.site < k;
      in_y |= vp.site >= k;
    }
    for (const auto& vp : m.f) {
      Factor f;
      int site = vp.site;
      if (in_y && !in_x) site -= k;  // pure y terms index the right block locally
      f.slot = static_cast<std::int16_t>(site * nv + vp.var);
      f.pow = static_cast<std::int16_t>(vp.hp);
      t.f.push_back(f);
    }
    if (in_x && in_y)
      out.xy.push_back(std::move(t));
    else if (in_y)
      out.y.push_back(std::move(t));
    else
      out.x.push_back(std::move(t));  // constants ride along in the x half
  }
  return out;
}

// exponents ride in half-units (pow = 2*power), matching the symbolic layer
cplx vpow(cplx v, int hp) {
  if (hp & 1) return std::pow(v, 0.5 * hp);
  cplx r(1.0, 0.0);
  for (int k = hp >> 1; k > 0; --k) r *= v;
  return r;
}

cplx eval_terms(const std::vector<Term>& ts, const cplx* vals) {
  cplx acc(0.0, 0.0);
  for (const auto& t : ts) {
    cplx prod = t.coeff;
    for (const auto& f : t.f) prod *= vpow(vals[f.slot], f.pow);
    acc += prod;
  }
  return acc;
}

// x-part at block xv, y-part at block yv, cross terms across both (the cross
// terms carry slots spanning the full 2k-site window).
cplx eval_window(const TermSplit& ts, const cplx* xv, const cplx* yv, int knv) {
  cplx acc = eval_terms(ts.x, xv) + eval_terms(ts.y, yv);
  for (const auto& t : ts.xy) {
    cplx prod = t.coeff;
    for (const auto& f : t.f) prod *= vpow(f.slot < knv ? xv[f.slot] : yv[f.slot - knv], f.pow);
    acc += prod;
  }
  return acc;
}

// --------------------------------------------------------- family geometry

enum class AxisType { FreeLine, PowerHalfLine, DiskRadial, DiskAngle };

struct AxisInfo {
  AxisType type;
  double kappa = 1.0;    // power-law weight v^{kappa-1} (half-line) or (1-u)^{kappa-1}
  double gauss_c = 0.0;  // smooth site factor exp(-gauss_c v^2)
  double cutoff = 1.0;
};

bool operator_family(const ModelKind& kind) {
  switch (kind.family) {
    case Family::TodaPeriodic:
    case Family::TodaNonPeriodic:
    case Family::VolterraPeriodic:
    case Family::AntisymNonPeriodic:
    case Family::CMVPeriodic:
    case Family::CMVNonPeriodic:
      return true;
    default:
      return false;
  }
}

bool toda_like(const ModelKind& kind) {
  return kind.family == Family::TodaPeriodic || kind.family == Family::TodaNonPeriodic;
}

bool half_line_1d(const ModelKind& kind) {
  return kind.family == Family::VolterraPeriodic || kind.family == Family::AntisymNonPeriodic;
}

// Homogeneous per-site weight exponent at ensemble parameter s.
double family_kappa(const ModelKind& kind, double s) {
  if (toda_like(kind)) return 2.0 * s;                            // b^{2s-1}
  if (kind.family == Family::VolterraPeriodic) return s;          // a^{s-1}
  if (kind.family == Family::AntisymNonPeriodic) return 2.0 * s;  // x^{2s-1}
  return s;                                                       // CMV (1-|a|^2)^{s-1}
}

std::vector<AxisInfo> site_axes(const ModelKind& kind, double alpha, double c) {
  std::vector<AxisInfo> ax;
  if (toda_like(kind)) {
    ax.push_back({AxisType::FreeLine, 1.0, 0.5 * c, 12.0});
    ax.push_back({AxisType::PowerHalfLine, family_kappa(kind, alpha), c, 12.0});
  } else if (half_line_1d(kind)) {
    ax.push_back({AxisType::PowerHalfLine, family_kappa(kind, alpha), 0.0, 12.0});
  } else {
    ax.push_back({AxisType::DiskRadial, family_kappa(kind, alpha), 0.0, 1.0});
    ax.push_back({AxisType::DiskAngle, 1.0, 0.0, 2.0 * kPi});
  }
  return ax;
}

// Map one site's axis values to its symbolic variable values.
void site_vars(const ModelKind& kind, const double* av, cplx* out) {
  if (toda_like(kind)) {
    out[0] = cplx(av[0], 0.0);
    out[1] = cplx(av[1], 0.0);
  } else if (half_line_1d(kind)) {
    out[0] = cplx(av[0], 0.0);
  } else {
    double u = std::min(av[0], 1.0), th = av[1];
    double r = std::sqrt(std::max(0.0, u));
    cplx a = std::polar(r, th);
    out[0] = a;
    out[1] = std::conj(a);
    out[2] = cplx(std::sqrt(std::max(0.0, 1.0 - u)), 0.0);
  }
}

// Power-law measure factor along one axis (the quadrature rule absorbs it
// exactly on the grid; the explicit form feeds the envelope probes).
double axis_measure(const AxisInfo& ax, double v) {
  switch (ax.type) {
    case AxisType::PowerHalfLine:
      return std::pow(std::max(v, 1e-300), ax.kappa - 1.0);
    case AxisType::DiskRadial:
      return std::pow(std::max(1.0 - v, 1e-300), ax.kappa - 1.0);
    default:
      return 1.0;
  }
}

double smooth_measure(const AxisInfo& ax, double v) {
  return ax.gauss_c != 0.0 ? std::exp(-ax.gauss_c * v * v) : 1.0;
}

// ----------------------------------------------------- reweighting constant

// Certified quadratic lower-bound coefficient: the largest c >= 0 with
// P(x) >= C + c x^2 for some finite C, read off as inf P(x)/x^2 over |x| >= 1.
double quad_reweight_c(const PolyZ& P) {
  if (P.degree() < 2) return 0.0;
  double inf = std::numeric_limits<double>::infinity();
  for (int sgn = -1; sgn <= 1; sgn += 2)
    for (int i = 0; i <= 400; ++i) {
      double x = sgn * std::exp(i * std::log(1e3) / 400.0);
      inf = std::min(inf, P(cplx(x, 0.0)).real() / (x * x));
    }
  return std::max(0.0, inf);
}

// --------------------------------------------------------------- envelopes

struct ProbeContext {
  const TransferKernel* ker;
  const std::vector<AxisInfo>* axes;
  std::vector<double> ref;  // one site's axis values at the profile peak
};

// One-site integrand profile: full measure factors times exp(-Re Wx) with the
// remaining window sites parked at the reference point.
double site_profile(const ProbeContext& pc, const std::vector<double>& av) {
  const auto& ker = *pc.ker;
  const auto& axes = *pc.axes;
  const int nv = ker.vars_per_site, na = static_cast<int>(axes.size());
  std::vector<cplx> vals(static_cast<size_t>(ker.k) * nv);
  std::vector<cplx> sv(nv);
  for (int s = 0; s < ker.k; ++s) {
    site_vars(ker.kind, s == 0 ? av.data() : pc.ref.data(), sv.data());
    for (int q = 0; q < nv; ++q) vals[static_cast<size_t>(s) * nv + q] = sv[q];
  }
  double m = 1.0;
  for (int a = 0; a < na; ++a) m *= axis_measure(axes[a], av[a]) * smooth_measure(axes[a], av[a]);
  return m * std::exp(-eval_terms(ker.W.x, vals.data()).real());
}

double axis_probe(const ProbeContext& pc, int axis, double v) {
  std::vector<double> av = pc.ref;
  av[axis] = v;
  double e = site_profile(pc, av);
  if ((*pc.axes)[axis].type == AxisType::FreeLine) {  // odd potentials: take both sides
    av[axis] = -v;
    e = std::max(e, site_profile(pc, av));
  }
  return e;
}

// March outward from the envelope peak until the profile drops below
// tail_mass of it; the search box grows if the tail has not resolved.
double axis_cutoff(const ProbeContext& pc, int axis, double tail_mass) {
  double box = 12.0;
  for (int attempt = 0; attempt < 5; ++attempt) {
    const int m = 480;
    double peak = 0.0;
    int ipeak = 0;
    std::vector<double> prof(m + 1);
    for (int i = 0; i <= m; ++i) {
      double v = box * i / m;
      if ((*pc.axes)[axis].type != AxisType::FreeLine && v <= 0.0) v = box * 0.25 / m;
      prof[i] = axis_probe(pc, axis, v);
      if (prof[i] > peak) peak = prof[i], ipeak = i;
    }
    double target = peak * tail_mass * 0.1;
    int hold = 0;
    for (int i = ipeak; i <= m; ++i) {
      hold = prof[i] <= target ? hold + 1 : 0;
      if (hold >= 4) return box * std::min(m, i + 8) / m;
    }
    box *= 2.0;
  }
  fail(ErrorCode::ConvergenceError, "could not certify a truncation cutoff for the kernel");
}

void compute_cutoffs(TransferKernel& ker, std::vector<AxisInfo>& axes, double tail_mass) {
  if (ker.kind.cmv()) {  // compact domain: cutoffs are the natural bounds
    ker.cutoffs = {1.0, 2.0 * kPi};
    return;
  }
  ProbeContext pc{&ker, &axes, std::vector<double>(axes.size(), 0.5)};
  // coarse joint scan for the reference (peak) point of the site profile
  double best = -1.0;
  std::vector<double> av(axes.size());
  if (axes.size() == 2) {
    for (int i = 0; i <= 48; ++i)
      for (int j = 1; j <= 48; ++j) {
        av[0] = -6.0 + 12.0 * i / 48.0;
        av[1] = 8.0 * j / 48.0;
        double e = site_profile(pc, av);
        if (e > best) best = e, pc.ref = av;
      }
  } else {
    for (int j = 1; j <= 240; ++j) {
      av[0] = 16.0 * j / 240.0;
      double e = site_profile(pc, av);
      if (e > best) best = e, pc.ref = av;
    }
  }
  ker.cutoffs.clear();
  for (size_t ax = 0; ax < axes.size(); ++ax) {
    double cut = axis_cutoff(pc, static_cast<int>(ax), tail_mass);
    axes[ax].cutoff = cut;
    ker.cutoffs.push_back(cut);
  }
}

// ------------------------------------------------------------ grid & nodes

QuadRule axis_rule(const AxisInfo& ax, int nodes) {
  QuadRule g;
  switch (ax.type) {
    case AxisType::FreeLine:
      g = map_to_interval(gauss_legendre(nodes), -ax.cutoff, ax.cutoff);
      break;
    case AxisType::PowerHalfLine:
      g = gauss_power_halfline(nodes, ax.kappa - 1.0, ax.cutoff);
      break;
    case AxisType::DiskRadial: {
      QuadRule gj = gauss_jacobi(nodes, ax.kappa - 1.0, 0.0);
      g.x.resize(nodes);
      g.w.resize(nodes);
      double scale = std::pow(0.5, ax.kappa) * 0.5;  // power-law map + disk Jacobian 1/2
      for (int i = 0; i < nodes; ++i) {
        g.x[i] = 0.5 * (1.0 + gj.x[i]);
        g.w[i] = scale * gj.w[i];
      }
      break;
    }
    case AxisType::DiskAngle:
      g = periodic_trapezoid(nodes);
      break;
  }
  if (ax.gauss_c != 0.0)
    for (int i = 0; i < g.size(); ++i) g.w[i] *= smooth_measure(ax, g.x[i]);
  return g;
}

// Flattened tensor grid over the k-site block with per-node variable values.
struct BlockGrid {
  int n = 0;
  std::vector<int> shape;
  MatZ vals;  // n x (k*nv)
  VecD w;
};

BlockGrid build_grid(const TransferKernel& ker, const std::vector<AxisInfo>& axes, int nodes,
                     int max_points) {
  const int k = ker.k, nv = ker.vars_per_site;
  const int na = static_cast<int>(axes.size());
  std::vector<QuadRule> rules(na);
  std::int64_t per_site = 1;
  for (int a = 0; a < na; ++a) {
    rules[a] = axis_rule(axes[a], nodes);
    per_site *= rules[a].size();
  }
  std::int64_t total = 1;
  for (int s = 0; s < k; ++s) total *= per_site;
  require(total <= max_points, ErrorCode::GridTooLarge,
          "kernel grid exceeds the configured point budget");

  BlockGrid g;
  g.n = static_cast<int>(total);
  for (int s = 0; s < k; ++s)
    for (int a = 0; a < na; ++a) g.shape.push_back(rules[a].size());
  g.vals.resize(g.n, k * nv);
  g.w.resize(g.n);
  std::vector<double> av(na);
  std::vector<cplx> sv(nv);
  for (int i = 0; i < g.n; ++i) {
    std::int64_t rem = i;
    double w = 1.0;
    for (int s = 0; s < k; ++s) {
      for (int a = 0; a < na; ++a) {
        int m = rules[a].size();
        int idx = static_cast<int>(rem % m);
        rem /= m;
        av[a] = rules[a].x[idx];
        w *= rules[a].w[idx];
      }
      site_vars(ker.kind, av.data(), sv.data());
      for (int q = 0; q < nv; ++q) g.vals(i, s * nv + q) = sv[q];
    }
    g.w[i] = w;
  }
  return g;
}

// splits an xy term's factors at the block boundary
void split_xy(const Term& t, int knv, Term& tx, Term& ty) {
  tx.coeff = cplx(1.0, 0.0);
  ty.coeff = t.coeff;
  tx.f.clear();
  ty.f.clear();
  for (const auto& f : t.f) {
    if (f.slot < knv)
      tx.f.push_back(f);
    else
      ty.f.push_back({static_cast<std::int16_t>(f.slot - knv), f.pow});
  }
}

struct Assembled {
  int n = 0;
  std::vector<int> shape;
  VecZ Lf, Rf;  // boundary node factors (include sqrt-weight)
  MatZ PX, PY;  // coupling exponent low-rank factors: E = PX * PY^T
  bool coupled = false;
};

Assembled assemble(const TransferKernel& ker, int nodes, const OperatorSettings& st) {
  std::vector<AxisInfo> axes = site_axes(ker.kind, ker.alpha, ker.reweight_c);
  for (size_t a = 0; a < axes.size() && a < ker.cutoffs.size(); ++a)
    axes[a].cutoff = ker.cutoffs[a];
  BlockGrid grid = build_grid(ker, axes, nodes, st.max_points);

  const int knv = ker.k * ker.vars_per_site;
  Assembled out;
  out.n = grid.n;
  out.shape = grid.shape;
  out.Lf.resize(grid.n);
  out.Rf.resize(grid.n);

  // gather coupling terms with stencil-scaled coefficients
  std::vector<Term> cx, cy;
  auto add_coupling = [&](const std::vector<Term>& ts, cplx scale) {
    for (const auto& t : ts) {
      Term tx, ty;
      split_xy(t, knv, tx, ty);
      ty.coeff *= scale;
      cx.push_back(std::move(tx));
      cy.push_back(std::move(ty));
    }
  };
  add_coupling(ker.W.xy, cplx(-1.0, 0.0));
  if (ker.s > 0) add_coupling(ker.h.xy, cplx(0.0, ker.t));
  if (ker.s2 > 0) add_coupling(ker.h2.xy, cplx(0.0, ker.t2));
  out.coupled = !cx.empty();
  const int M = static_cast<int>(cx.size());
  if (out.coupled) {
    out.PX.resize(grid.n, M);
    out.PY.resize(grid.n, M);
  }

  parallel_for(grid.n, [&](std::int64_t i) {
    std::vector<cplx> row(knv);
    for (int q = 0; q < knv; ++q) row[q] = grid.vals(i, q);
    cplx ex = -eval_terms(ker.W.x, row.data());
    cplx ey = -eval_terms(ker.W.y, row.data());
    if (ker.s > 0) {
      ex += cplx(0.0, ker.t) * eval_terms(ker.h.x, row.data());
      ey += cplx(0.0, ker.t) * eval_terms(ker.h.y, row.data());
    }
    if (ker.s2 > 0) {
      ex += cplx(0.0, ker.t2) * eval_terms(ker.h2.x, row.data());
      ey += cplx(0.0, ker.t2) * eval_terms(ker.h2.y, row.data());
    }
    double sq = std::sqrt(std::max(grid.w[i], 0.0));
    out.Lf[i] = sq * std::exp(ex);
    out.Rf[i] = sq * std::exp(ey);
    for (int m = 0; m < M; ++m) {
      cplx px = cx[m].coeff, py = cy[m].coeff;
      for (const auto& f : cx[m].f) px *= vpow(row[f.slot], f.pow);
      for (const auto& f : cy[m].f) py *= vpow(row[f.slot], f.pow);
      out.PX(i, m) = px;
      out.PY(i, m) = py;
    }
  });
  return out;
}

MatZ materialize(const Assembled& a) {
  require(a.n <= 12000, ErrorCode::GridTooLarge,
          "dense kernel at this grid exceeds the memory budget");
  MatZ D(a.n, a.n);
  if (!a.coupled) {
    D.noalias() = a.Lf * a.Rf.transpose();
    return D;
  }
  D.noalias() = a.PX * a.PY.transpose();
  parallel_for(a.n, [&](std::int64_t j) {
    for (int i = 0; i < a.n; ++i) D(i, j) = a.Lf[i] * a.Rf[j] * std::exp(D(i, j));
  });
  return D;
}

// ------------------------------------------------------------ eigensolvers

void phase_normalize(VecZ& v) {
  int imax = 0;
  double best = -1.0;
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > best) best = std::abs(v[i]), imax = i;
  if (best > 0.0) v /= v[imax] / std::abs(v[imax]);
  double nrm = v.norm();
  if (nrm > 0.0) v /= nrm;
}

void gap_guard(const SpectralResult& r) {
  require(r.gap >= 1e-8 * std::abs(r.lambda_dom), ErrorCode::GapCollapse,
          "spectral gap collapsed; truncation or grid is inadequate");
}

// For an entrywise-positive real matrix the dominant eigenvector is strictly
// positive, but dense solvers leave sign noise ~eps*||v|| in far-tail entries.
// One power step through the positive matrix restores exact positivity (sums
// of positive terms) without moving lambda.
void perron_refine(const MatZ& D, SpectralResult& r) {
  const double dmax = D.cwiseAbs().maxCoeff();
  if (dmax <= 0.0 || D.imag().cwiseAbs().maxCoeff() > 1e-14 * dmax) return;
  if (D.real().minCoeff() < 0.0) return;
  VecD v = D.real() * r.eigenfunction.real();
  if (v.minCoeff() <= 0.0) return;
  r.eigenfunction = (v / v.norm()).cast<cplx>();
}

SpectralResult rank1_result(const Assembled& a) {
  SpectralResult r;
  r.lambda_dom = a.Lf.cwiseProduct(a.Rf).sum();  // trace of the rank-1 kernel
  r.lambda_second = cplx(0.0, 0.0);
  r.eigenfunction = a.Lf;
  phase_normalize(r.eigenfunction);
  r.gap = std::abs(r.lambda_dom);
  r.grid_size = a.shape;
  r.iterations = 1;
  r.converged = true;
  return r;
}

SpectralResult subspace_solve(const MatZ& D, int block, const VecZ* warm, std::uint64_t tag) {
  const int n = static_cast<int>(D.rows());
  const int p = std::min(block, n);
  MatZ Z(n, p);
  Z.col(0) = (warm && warm->size() == n) ? *warm : VecZ::Ones(n).eval();
  if (p > 1) Z.col(1) = VecZ::Ones(n);
  Rng rng(derive_seed(0xE16E, tag ^ static_cast<std::uint64_t>(n)));
  for (int c = 2; c < p; ++c)
    for (int i = 0; i < n; ++i) Z(i, c) = cplx(rng.normal(), rng.normal());
  Eigen::HouseholderQR<MatZ> qr0(Z);
  Z = qr0.householderQ() * MatZ::Identity(n, p);

  auto top_two = [&](const MatZ& B, cplx& l1, cplx& l2, VecZ& v1) {
    Eigen::ComplexEigenSolver<MatZ> es(B);
    int i1 = 0, i2 = -1;
    for (int i = 1; i < p; ++i)
      if (std::abs(es.eigenvalues()[i]) > std::abs(es.eigenvalues()[i1])) i1 = i;
    for (int i = 0; i < p; ++i) {
      if (i == i1) continue;
      if (i2 < 0 || std::abs(es.eigenvalues()[i]) > std::abs(es.eigenvalues()[i2])) i2 = i;
    }
    l1 = es.eigenvalues()[i1];
    l2 = i2 >= 0 ? es.eigenvalues()[i2] : cplx(0.0, 0.0);
    v1 = es.eigenvectors().col(i1);
  };

  MatZ W(n, p);
  cplx lam_prev(0.0, 0.0), l1(0.0, 0.0), l2(0.0, 0.0);
  VecZ ritz;
  int stable = 0, it = 0;
  for (it = 1; it <= 800; ++it) {
    W.noalias() = D * Z;
    MatZ B = Z.adjoint() * W;
    top_two(B, l1, l2, ritz);
    if (std::abs(l1 - lam_prev) <= 1e-13 * std::max(1e-300, std::abs(l1)))
      ++stable;
    else
      stable = 0;
    lam_prev = l1;
    Eigen::HouseholderQR<MatZ> qr(W);
    Z = qr.householderQ() * MatZ::Identity(n, p);
    if (stable >= 3 && it >= 6) break;
  }
  require(stable >= 3, ErrorCode::ConvergenceError, "subspace iteration stalled");

  W.noalias() = D * Z;
  MatZ B = Z.adjoint() * W;
  top_two(B, l1, l2, ritz);
  SpectralResult r;
  r.lambda_dom = l1;
  r.lambda_second = l2;
  r.eigenfunction = Z * ritz;
  phase_normalize(r.eigenfunction);
  r.gap = std::abs(l1) - std::abs(l2);
  r.grid_size = {n};
  r.iterations = it;
  r.converged = true;
  return r;
}

SpectralResult solve_at(const TransferKernel& ker, int nodes, const OperatorSettings& st,
                        const VecZ* warm) {
  Assembled a = assemble(ker, nodes, st);
  SpectralResult r;
  if (!a.coupled) {
    r = rank1_result(a);
  } else {
    MatZ D = materialize(a);
    r = subspace_solve(D, st.subspace_block, warm, 0);
    perron_refine(D, r);
    r.grid_size = a.shape;
  }
  gap_guard(r);
  return r;
}

// ------------------------------------------------------- boundedness scan

// Samples |h|^3 sqrt(F(x)F(y)) e^{-Re W} at random points inside the truncated
// box and on a shell just outside it; growth across the boundary voids the
// compactness hypothesis the spectral method rests on.
void boundedness_scan(const TransferKernel& ker, const std::vector<AxisInfo>& axes,
                      const OperatorSettings& st) {
  if (ker.kind.cmv()) return;  // compact domain
  const int nv = ker.vars_per_site;
  const int knv = ker.k * nv;
  const int na = static_cast<int>(axes.size());
  Rng rng(derive_seed(st.scan_seed, 0xB0D5));
  std::vector<cplx> xv(knv), yv(knv);
  std::vector<double> xav(static_cast<size_t>(ker.k) * na), yav(xav.size());
  std::vector<double> av(na);
  std::vector<cplx> sv(nv);

  auto draw_block = [&](std::vector<cplx>& vals, std::vector<double>& avs, bool shell,
                        int shell_axis) {
    for (int s = 0; s < ker.k; ++s) {
      for (int a = 0; a < na; ++a) {
        double cut = axes[a].cutoff;
        double v = axes[a].type == AxisType::FreeLine ? rng.uniform(-cut, cut)
                                                      : rng.uniform(1e-3 * cut, cut);
        if (shell && a == shell_axis) {
          double m = rng.uniform(1.0, 1.25) * cut;
          v = axes[a].type == AxisType::FreeLine && rng.uniform() < 0.5 ? -m : m;
        }
        av[a] = v;
        avs[static_cast<size_t>(s) * na + a] = v;
      }
      site_vars(ker.kind, av.data(), sv.data());
      for (int q = 0; q < nv; ++q) vals[static_cast<size_t>(s) * nv + q] = sv[q];
    }
  };

  auto block_measure = [&](const std::vector<double>& avs) {
    double w = 1.0;
    for (int s = 0; s < ker.k; ++s)
      for (int a = 0; a < na; ++a) {
        double v = avs[static_cast<size_t>(s) * na + a];
        w *= axis_measure(axes[a], std::abs(v)) * smooth_measure(axes[a], v);
      }
    return w;
  };

  double inner_max = 1e-300, shell_max = 0.0;
  for (int trial = 0; trial < 4096; ++trial) {
    bool shell = trial >= 2048;
    int sa = shell ? trial % na : -1;
    draw_block(xv, xav, shell, sa);
    draw_block(yv, yav, shell, sa);
    double wre = eval_window(ker.W, xv.data(), yv.data(), knv).real();
    double habs = 0.0;
    if (ker.s > 0) habs = std::max(habs, std::abs(eval_window(ker.h, xv.data(), yv.data(), knv)));
    if (ker.s2 > 0)
      habs = std::max(habs, std::abs(eval_window(ker.h2, xv.data(), yv.data(), knv)));
    double r = std::pow(1.0 + habs, 3.0) * std::exp(-wre) *
               std::sqrt(block_measure(xav) * block_measure(yav));
    if (shell)
      shell_max = std::max(shell_max, r);
    else
      inner_max = std::max(inner_max, r);
  }
  require(shell_max <= 10.0 * inner_max, ErrorCode::UnboundedWeight,
          "|h|^3 e^{-W} grows past the truncation boundary");
}

// ------------------------------------------------------------- kernel build

TransferKernel build_impl(const ModelKind& kind, const PolyZ& P, int s, ObsPart part, int s2,
                          ObsPart part2, double alpha, double t, double t2,
                          const OperatorSettings& st) {
  require(operator_family(kind), ErrorCode::DomainError,
          "family outside the transfer-operator scope");
  require(alpha > 0.0, ErrorCode::DomainError, "alpha must be positive");
  if (part == ObsPart::Im || part2 == ObsPart::Im)
    require(kind.cmv(), ErrorCode::DomainError, "imaginary part of a real trace is zero");
  PolyZ Pt = P;
  Pt.trim();
  const bool has_potential = Pt.degree() >= 1;
  if (has_potential)
    check_potential(kind, Pt);
  else
    require(kind.cmv(), ErrorCode::NonNormalizable,
            "a confining potential is required on a non-compact domain");

  TransferKernel ker;
  ker.kind = kind;
  ker.P = Pt;
  ker.s = s;
  ker.s2 = s2;
  ker.part = part;
  ker.part2 = part2;
  ker.alpha = alpha;
  ker.t = t;
  ker.t2 = t2;
  ker.vars_per_site = static_cast<int>(var_names(kind).size());
  ker.reweight_c = toda_like(kind) && has_potential ? quad_reweight_c(Pt) : 0.0;

  auto obs_poly = [&](int power, ObsPart pp) {
    // Im T = Re(-i T), so the imaginary part rides on a rotated coefficient
    return pp == ObsPart::Im ? PolyZ::monomial(power, cplx(0.0, -1.0)) : PolyZ::monomial(power);
  };

  // effective potential after the value-neutral quadratic reweighting: the
  // site measure absorbs exp(-(c/2)(a^2+2b^2)), whose window seed equals the
  // seed of (c/2) x^2, so subtract exactly that from P
  PolyZ Peff = Pt;
  if (ker.reweight_c > 0.0) {
    if (Peff.c.size() < 3) Peff.c.resize(3, cplx(0.0, 0.0));
    Peff.c[2] -= cplx(0.5 * ker.reweight_c, 0.0);
  }

  // common circular index across every seed in play (lcm rule)
  int kc = 1;
  if (has_potential) kc = std::lcm(kc, window_seed(kind, Peff, 0).k);
  if (s > 0) kc = std::lcm(kc, window_seed(kind, obs_poly(s, part), 0).k);
  if (s2 > 0) kc = std::lcm(kc, window_seed(kind, obs_poly(s2, part2), 0).k);
  require(kc <= 8, ErrorCode::IncompatibleSeeds, "no common circular index <= 8");
  ker.k = kc;

  const int nv = ker.vars_per_site;
  if (has_potential) {
    ker.seed_W = window_seed(kind, Peff, kc);
    ker.W = compile_split(ker.seed_W.seed_poly, kc, nv);
    ker.has_W = true;
  }
  if (s > 0) ker.h = compile_split(window_seed(kind, obs_poly(s, part), kc).seed_poly, kc, nv);
  if (s2 > 0) ker.h2 = compile_split(window_seed(kind, obs_poly(s2, part2), kc).seed_poly, kc, nv);

  std::vector<AxisInfo> axes = site_axes(kind, alpha, ker.reweight_c);
  ker.axes_per_site = static_cast<int>(axes.size());
  compute_cutoffs(ker, axes, st.tail_mass);
  boundedness_scan(ker, axes, st);
  return ker;
}

// -------------------------------------------- finite-difference machinery

struct Stencil1 {
  // values of a complex function at {0, +-d/2, +-d}
  cplx f0, fp2, fm2, fp1, fm1;  // fp1 = f(+d), fp2 = f(+d/2)
  double d = 0.0;

  cplx d1(double width) const {
    if (width == d) return (fp1 - fm1) / (2.0 * d);
    return (fp2 - fm2) / d;
  }
  cplx d2(double width) const {
    if (width == d) return (fp1 - 2.0 * f0 + fm1) / (d * d);
    return (fp2 - 2.0 * f0 + fm2) / (0.25 * d * d);
  }
};

cplx richardson(cplx coarse, cplx fine) { return (4.0 * fine - coarse) / 3.0; }

void stability_check(cplx coarse, cplx fine, const char* what) {
  double rel = std::abs(coarse - fine) / std::max(1.0, std::abs(fine));
  require(rel <= 1e-3, ErrorCode::DerivativeUnstable,
          std::string(what) + ": stencil widths disagree beyond 1e-3 relative");
}

void imag_guard(cplx v, const char* what) {
  require(std::abs(v.imag()) < 1e-6, ErrorCode::DerivativeUnstable,
          std::string(what) + ": imaginary residual above 1e-6");
}

// ln(dominant eigenvalue) at given (alpha, t, t2); the warm eigenfunction is
// chained across calls sharing a grid size.
struct LambdaEval {
  ModelKind kind;
  PolyZ P;
  int s = 0, s2 = 0;
  ObsPart part = ObsPart::Re, part2 = ObsPart::Re;
  OperatorSettings st;
  VecZ warm;

  cplx log_lambda(double alpha, double t, double t2) {
    TransferKernel ker = build_impl(kind, P, s, part, s2, part2, alpha, t, t2, st);
    SpectralResult r = solve_at(ker, st.nodes_per_dim, st, warm.size() ? &warm : nullptr);
    warm = r.eigenfunction;
    return std::log(r.lambda_dom);
  }
};

Stencil1 t_stencil(LambdaEval& ev, double alpha, double d) {
  Stencil1 s;
  s.d = d;
  s.f0 = ev.log_lambda(alpha, 0.0, 0.0);
  s.fp2 = ev.log_lambda(alpha, 0.5 * d, 0.0);
  s.fm2 = ev.log_lambda(alpha, -0.5 * d, 0.0);
  s.fp1 = ev.log_lambda(alpha, d, 0.0);
  s.fm1 = ev.log_lambda(alpha, -d, 0.0);
  return s;
}

}  // namespace

// ------------------------------------------------------------- public API

TransferKernel build_kernel(const ModelKind& kind, const PolyZ& P, int s, ObsPart part,
                            double alpha, double t, const OperatorSettings& st) {
  require(s >= 0, ErrorCode::DomainError, "observable power must be nonnegative");
  return build_impl(kind, P, s, part, 0, ObsPart::Re, alpha, t, 0.0, st);
}

TransferKernel build_kernel2(const ModelKind& kind, const PolyZ& P, int m, int n, double alpha,
                             double t1, double t2, const OperatorSettings& st) {
  require(m >= 1 && n >= 1, ErrorCode::DomainError, "observable powers must be positive");
  return build_impl(kind, P, m, ObsPart::Re, n, ObsPart::Re, alpha, t1, t2, st);
}

TransferKernel build_kernel_site(const ModelKind& kind, const PolyZ& P, int s, ObsPart part,
                                 double alpha, int j, int M, double t,
                                 const OperatorSettings& st) {
  require(M >= 3 && j >= 1 && j < M, ErrorCode::DomainError, "site index out of range");
  TransferKernel ker = build_impl(kind, P, s, part, 0, ObsPart::Re, alpha * j / M, t, 0.0, st);
  ker.site_dependent = true;
  ker.site_j = j;
  ker.site_M = M;
  return ker;
}

MatZ discretize(const TransferKernel& kernel, int nodes_per_dim, const OperatorSettings& st) {
  require(nodes_per_dim >= 2, ErrorCode::DomainError, "need at least 2 nodes per axis");
  return materialize(assemble(kernel, nodes_per_dim, st));
}

SpectralResult dominant_spectrum(const MatZ& D) {
  const int n = static_cast<int>(D.rows());
  require(n >= 1 && D.cols() == n, ErrorCode::DomainError, "matrix must be square");
  SpectralResult r;
  if (n > 2000) {
    r = subspace_solve(D, 4, nullptr, 1);
    perron_refine(D, r);
    gap_guard(r);
    return r;
  }
  auto pick_top = [&](const VecZ& ev, int& i1, int& i2) {
    i1 = 0;
    i2 = -1;
    for (int i = 1; i < n; ++i)
      if (std::abs(ev[i]) > std::abs(ev[i1])) i1 = i;
    for (int i = 0; i < n; ++i) {
      if (i == i1) continue;
      if (i2 < 0 || std::abs(ev[i]) > std::abs(ev[i2])) i2 = i;
    }
  };
  double scale = 1.0 + D.norm();
  bool real_sym = (D - D.transpose()).norm() <= 1e-12 * scale && D.imag().norm() <= 1e-12 * scale;
  int i1 = 0, i2 = -1;
  if (real_sym) {
    Eigen::SelfAdjointEigenSolver<MatD> es(D.real());
    VecZ ev = es.eigenvalues().cast<cplx>();
    pick_top(ev, i1, i2);
    r.lambda_dom = ev[i1];
    r.lambda_second = i2 >= 0 ? ev[i2] : cplx(0.0, 0.0);
    r.eigenfunction = es.eigenvectors().col(i1).cast<cplx>();
  } else {
    Eigen::ComplexEigenSolver<MatZ> es(D);
    VecZ ev = es.eigenvalues();
    pick_top(ev, i1, i2);
    r.lambda_dom = ev[i1];
    r.lambda_second = i2 >= 0 ? ev[i2] : cplx(0.0, 0.0);
    r.eigenfunction = es.eigenvectors().col(i1);
  }
  phase_normalize(r.eigenfunction);
  perron_refine(D, r);
  r.gap = std::abs(r.lambda_dom) - std::abs(r.lambda_second);
  r.grid_size = {n};
  r.converged = true;
  r.iterations = 0;
  gap_guard(r);
  return r;
}

SpectralResult kernel_spectrum(const TransferKernel& kernel, const OperatorSettings& st,
                               const VecZ* warm) {
  SpectralResult full = solve_at(kernel, st.nodes_per_dim, st, warm);
  if (st.refine_check) {
    SpectralResult coarse = solve_at(kernel, std::max(8, st.nodes_per_dim / 2), st, nullptr);
    full.converged = std::abs(full.lambda_dom - coarse.lambda_dom) <=
                     st.eig_rel_tol * std::abs(full.lambda_dom);
  }
  return full;
}

double free_energy_type1(const ModelKind& kind, const PolyZ& P, double alpha,
                         const OperatorSettings& st) {
  TransferKernel ker = build_kernel(kind, P, 0, ObsPart::Re, alpha, 0.0, st);
  SpectralResult r = kernel_spectrum(ker, st);
  require(std::abs(r.lambda_dom.imag()) <= 1e-10 * std::abs(r.lambda_dom) &&
              r.lambda_dom.real() > 0.0,
          ErrorCode::ConvergenceError, "dominant eigenvalue not real positive at t=0");
  return -std::log(r.lambda_dom.real()) / ker.k;
}

double free_energy_type2(const ModelKind& kind, const PolyZ& P, double alpha, int M_quad,
                         const OperatorSettings& st) {
  int panels = M_quad > 0 ? M_quad : st.type2_panels;
  const int m = st.type2_panel_nodes;
  VecZ warm;
  int kshared = 1;

  for (int attempt = 0; attempt < 3; ++attempt) {
    double total = 0.0;
    QuadRule last;
    VecD last_g;
    // dyadic panels [2^{-p-1}, 2^{-p}] walked from x=1 toward 0 so the warm
    // eigenfunction tracks the slowly varying kernel
    for (int p = 0; p < panels; ++p) {
      double hi = std::pow(0.5, p);
      QuadRule q = map_to_interval(gauss_legendre(m), 0.5 * hi, hi);
      VecD g(m);
      for (int i = m - 1; i >= 0; --i) {  // descending x within the panel
        TransferKernel ker =
            build_impl(kind, P, 0, ObsPart::Re, 0, ObsPart::Re, alpha * q.x[i], 0.0, 0.0, st);
        kshared = ker.k;
        SpectralResult r = solve_at(ker, st.nodes_per_dim, st, warm.size() ? &warm : nullptr);
        warm = r.eigenfunction;
        require(r.lambda_dom.real() > 0.0, ErrorCode::ConvergenceError,
                "dominant eigenvalue not positive along the scaled-parameter path");
        g[i] = std::log(r.lambda_dom.real());
      }
      total += (q.w.array() * g.array()).sum();
      last = q;
      last_g = g;
    }
    // endpoint stub: fit g ~ c0 + c1 ln x on the deepest panel, integrate exactly
    double s_ll = 0.0, s_l = 0.0, s_g = 0.0, s_lg = 0.0;
    for (int i = 0; i < m; ++i) {
      double L = std::log(last.x[i]);
      s_ll += L * L;
      s_l += L;
      s_g += last_g[i];
      s_lg += L * last_g[i];
    }
    double det = m * s_ll - s_l * s_l;
    require(std::abs(det) > 1e-12, ErrorCode::QuadratureFailure, "degenerate endpoint fit");
    double c1 = (m * s_lg - s_l * s_g) / det;
    double c0 = (s_g - c1 * s_l) / m;
    double resid = 0.0;
    for (int i = 0; i < m; ++i) {
      double rr = last_g[i] - c0 - c1 * std::log(last.x[i]);
      resid += rr * rr;
    }
    resid = std::sqrt(resid / m);
    if (resid > 1e-2 * (1.0 + std::abs(c0))) {
      if (attempt == 2)
        fail(ErrorCode::QuadratureFailure,
             "endpoint grading failed to stabilize the scaled-parameter integral");
      panels += 4;  // grade deeper and retry
      warm.resize(0);
      continue;
    }
    double eps = std::pow(0.5, panels);
    total += c0 * eps + c1 * (eps * std::log(eps) - eps);
    return -total / kshared;
  }
  fail(ErrorCode::QuadratureFailure, "scaled-parameter integral did not converge");
}

double type2_alpha_derivative(const ModelKind& kind, const PolyZ& P, double alpha,
                              const OperatorSettings& st) {
  double h = st.alpha_rel_step * std::max(alpha, 0.25);
  double hi = (alpha + h) * free_energy_type2(kind, P, alpha + h, 0, st);
  double lo = (alpha - h) * free_energy_type2(kind, P, alpha - h, 0, st);
  return (hi - lo) / (2.0 * h);
}

CLTQuantities clt_mean_and_variance(const ModelKind& kind, const PolyZ& P, int s, ObsPart part,
                                    double alpha, const OperatorSettings& st) {
  require(s >= 1, ErrorCode::DomainError, "need an observable power s >= 1");
  CLTQuantities out;
  LambdaEval ev{kind, P, s, 0, part, ObsPart::Re, st, {}};
  const double d = st.delta_t;

  TransferKernel probe = build_impl(kind, P, s, part, 0, ObsPart::Re, alpha, 0.0, 0.0, st);
  const int kc = probe.k;

  Stencil1 lnst = t_stencil(ev, alpha, d);
  auto F = [&](cplx lnlam) { return -lnlam / double(kc); };
  Stencil1 fst{F(lnst.f0), F(lnst.fp2), F(lnst.fm2), F(lnst.fp1), F(lnst.fm1), d};

  cplx d1c = fst.d1(d), d1f = fst.d1(0.5 * d);
  stability_check(d1c, d1f, "first t-derivative");
  cplx A_c = cplx(0.0, 1.0) * richardson(d1c, d1f);
  imag_guard(A_c, "A");
  cplx d2c = fst.d2(d), d2f = fst.d2(0.5 * d);
  stability_check(d2c, d2f, "second t-derivative");
  cplx S_c = richardson(d2c, d2f);
  imag_guard(S_c, "sigma2");

  out.A = A_c.real();
  out.sigma2 = S_c.real();
  out.free_energy_1 = fst.f0.real();

  // grid-refinement flag from the t=0 kernel
  out.converged = kernel_spectrum(probe, st).converged;

  if (st.with_type2) {
    QuadRule q = map_to_interval(gauss_legendre(st.deriv_x_nodes), 0.0, 1.0);
    cplx I1c(0, 0), I1f(0, 0), I2c(0, 0), I2f(0, 0);
    LambdaEval ev2{kind, P, s, 0, part, ObsPart::Re, st, {}};
    for (int i = st.deriv_x_nodes - 1; i >= 0; --i) {  // descending x, warm chained
      Stencil1 sx = t_stencil(ev2, alpha * q.x[i], d);
      I1c += q.w[i] * sx.d1(d);
      I1f += q.w[i] * sx.d1(0.5 * d);
      I2c += q.w[i] * sx.d2(d);
      I2f += q.w[i] * sx.d2(0.5 * d);
    }
    // the t-derivatives commute with the scaled-parameter integral defining
    // the finite-size free energy; the -1/k prefactor carries through
    cplx D1c = -I1c / double(kc), D1f = -I1f / double(kc);
    cplx D2c = -I2c / double(kc), D2f = -I2f / double(kc);
    stability_check(D1c, D1f, "first t-derivative (finite-size)");
    cplx At = cplx(0.0, 1.0) * richardson(D1c, D1f);
    imag_guard(At, "A_tilde");
    stability_check(D2c, D2f, "second t-derivative (finite-size)");
    cplx St = richardson(D2c, D2f);
    imag_guard(St, "sigma2_tilde");
    out.A_tilde = At.real();
    out.sigma2_tilde = St.real();
    out.free_energy_2 = free_energy_type2(kind, P, alpha, 0, st);
  }
  return out;
}

double susceptibility(const ModelKind& kind, const PolyZ& P, int m, int n, double alpha,
                      const OperatorSettings& st) {
  require(m >= 1 && n >= 1, ErrorCode::DomainError, "observable powers must be positive");
  LambdaEval ev{kind, P, m, n, ObsPart::Re, ObsPart::Re, st, {}};
  const double d = st.delta_t;
  TransferKernel probe = build_impl(kind, P, m, ObsPart::Re, n, ObsPart::Re, alpha, 0, 0, st);
  const int kc = probe.k;

  ev.log_lambda(alpha, 0.0, 0.0);  // warm the eigenfunction from the centre
  auto F = [&](double t1, double t2) { return -ev.log_lambda(alpha, t1, t2) / double(kc); };
  auto mixed = [&](double w) {
    return (F(w, w) - F(w, -w) - F(-w, w) + F(-w, -w)) / (4.0 * w * w);
  };
  cplx mc = mixed(d), mf = mixed(0.5 * d);
  stability_check(mc, mf, "mixed t-derivative");
  cplx C = richardson(mc, mf);
  imag_guard(C, "susceptibility");
  return C.real();
}

CurrentMean toda_current_mean_detail(const PolyZ& P, int n, double alpha,
                                     const OperatorSettings& st) {
  require(n >= 1 && n <= 4, ErrorCode::DomainError, "current order n must be in [1, 4]");
  ModelKind kind{Family::TodaPeriodic, 1};
  CurrentMean out;

  // form 1: integral of the coupling susceptibility along the parameter path
  {
    QuadRule q = map_to_interval(gauss_legendre(st.current_s_nodes), 0.0, alpha);
    OperatorSettings inner = st;
    inner.refine_check = false;
    double acc = 0.0;
    for (int i = 0; i < st.current_s_nodes; ++i)
      acc += q.w[i] * susceptibility(kind, P, 1, n, q.x[i], inner);
    out.integral_form = acc;
  }

  // form 2: alpha times the mixed t-derivative of the finite-size free energy
  {
    const double d = st.delta_t;
    LambdaEval ev{kind, P, 1, n, ObsPart::Re, ObsPart::Re, st, {}};
    TransferKernel probe = build_impl(kind, P, 1, ObsPart::Re, n, ObsPart::Re, alpha, 0, 0, st);
    const int kc = probe.k;
    QuadRule q = map_to_interval(gauss_legendre(st.deriv_x_nodes), 0.0, 1.0);
    cplx Mc(0, 0), Mf(0, 0);
    for (int i = st.deriv_x_nodes - 1; i >= 0; --i) {
      double a = alpha * q.x[i];
      auto lam = [&](double t1, double t2) { return ev.log_lambda(a, t1, t2); };
      auto mixed = [&](double wd) {
        return (lam(wd, wd) - lam(wd, -wd) - lam(-wd, wd) + lam(-wd, -wd)) / (4.0 * wd * wd);
      };
      Mc += q.w[i] * mixed(d);
      Mf += q.w[i] * mixed(0.5 * d);
    }
    cplx Dc = -Mc / double(kc), Df = -Mf / double(kc);
    stability_check(Dc, Df, "mixed t-derivative (finite-size)");
    cplx M2 = richardson(Dc, Df);
    imag_guard(M2, "current mixed derivative");
    out.derivative_form = alpha * M2.real();
  }

  out.within_tol = std::abs(out.integral_form - out.derivative_form) <=
                   1e-3 * std::max(1.0, std::abs(out.integral_form));
  return out;
}

double toda_current_mean(const PolyZ& P, int n, double alpha, const OperatorSettings& st) {
  CurrentMean cm = toda_current_mean_detail(P, n, alpha, st);
  require(cm.within_tol, ErrorCode::DerivativeUnstable,
          "current-mean forms disagree beyond 1e-3");
  return cm.integral_form;
}

}  // namespace gge
