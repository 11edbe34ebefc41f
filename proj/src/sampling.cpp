#include "gge/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gge/rng.hpp"
#include "gge/stats.hpp"
#include "json.hpp"

namespace gge {

const char* measure_type_name(MeasureType t) {
  return t == MeasureType::Type1 ? "type1" : "type2";
}

MeasureType measure_type_from_name(const std::string& s) {
  if (s == "type1" || s == "Type1" || s == "1") return MeasureType::Type1;
  if (s == "type2" || s == "Type2" || s == "2") return MeasureType::Type2;
  fail(ErrorCode::DomainError, "unknown measure type: " + s);
}

// ---------------------------------------------------------------------------
// Coordinate weight laws
// ---------------------------------------------------------------------------

std::vector<std::vector<CoordWeight>> weight_table(const GGEConfig& cfg) {
  const ModelKind& kind = cfg.kind;
  const int N = cfg.N;
  require(N >= 2, ErrorCode::DomainError, "need at least 2 sites");
  require(cfg.alpha > 0.0, ErrorCode::DomainError, "alpha must be positive");
  if (cfg.type == MeasureType::Type1)
    require(kind.periodic(), ErrorCode::DomainError,
            "Type1 GGE requires a periodic model");
  else
    require(kind.beta_ensemble(), ErrorCode::DomainError,
            "Type2 measure requires a beta-ensemble (non-periodic) model");
  if (cfg.real_verblunsky)
    require(kind.cmv(), ErrorCode::DomainError,
            "real Verblunsky coordinates only apply to CMV kinds");
  if (cfg.jacobi)
    require(kind.family == Family::CMVNonPeriodic && cfg.real_verblunsky,
            ErrorCode::DomainError, "Jacobi weights require real CMV type-2 coordinates");

  const double al = cfg.alpha;
  const int na = a_count(kind, N), nb = b_count(kind, N);
  std::vector<std::vector<CoordWeight>> w;
  w.emplace_back(na);
  if (nb > 0) w.emplace_back(nb);

  auto positive = [](double kappa) {
    CoordWeight c;
    c.law = CoordLaw::Positive;
    c.kappa = kappa;
    return c;
  };

  switch (kind.family) {
    case Family::TodaPeriodic:
      for (int i = 0; i < nb; ++i) w[1][i] = positive(2.0 * al);
      break;
    case Family::TodaNonPeriodic:
      for (int i = 0; i < nb; ++i)
        w[1][i] = positive(2.0 * al * (1.0 - double(i + 1) / N));
      break;
    case Family::ExpTodaPeriodic:
      for (int i = 0; i < na; ++i) w[0][i] = positive(2.0 * al);
      for (int i = 0; i < nb; ++i) w[1][i] = positive(2.0 * al);
      break;
    case Family::LaguerreNonPeriodic:
      for (int i = 0; i < na; ++i) w[0][i] = positive(2.0 * al * (1.0 - double(i) / N));
      for (int i = 0; i < nb; ++i)
        w[1][i] = positive(2.0 * al * (1.0 - double(i + 1) / N));
      break;
    case Family::VolterraPeriodic:
    case Family::INBAdditive:
    case Family::INBMultiplicative:
      for (int i = 0; i < na; ++i) w[0][i] = positive(al);
      break;
    case Family::AntisymNonPeriodic:
      for (int i = 0; i < na; ++i)
        w[0][i] = positive(2.0 * al * (1.0 - double(i + 1) / N));
      break;
    case Family::CMVPeriodic:
      for (int i = 0; i < na; ++i) {
        w[0][i].law = cfg.real_verblunsky ? CoordLaw::Interval : CoordLaw::Disk;
        w[0][i].kappa = al;
      }
      break;
    case Family::CMVNonPeriodic: {
      const int n = na;  // 2N coordinates, last one unimodular
      for (int i = 0; i < n - 1; ++i) {
        CoordWeight& c = w[0][i];
        double frac = 1.0 - double(i + 1) / n;
        if (cfg.jacobi) {
          // (1-a^2)^{alpha(1-j/n)} (1-a)^{ta+1-alpha/n} (1+(-1)^j a)^{tb+1-alpha/n},
          // 1-based j = i+1; the odd-j factor folds into the (1-a) exponent.
          c.law = CoordLaw::Interval;
          c.kappa = 1.0 + al * frac;
          double ex = 1.0 - al / n;
          c.ta = cfg.jacobi_ta + ex;
          if ((i + 1) % 2 == 0)
            c.tb = cfg.jacobi_tb + ex;
          else
            c.ta += cfg.jacobi_tb + ex;
        } else {
          c.law = cfg.real_verblunsky ? CoordLaw::Interval : CoordLaw::Disk;
          c.kappa = al * frac;
        }
      }
      w[0][n - 1].law = CoordLaw::Circle;
      break;
    }
  }

  for (const auto& col : w)
    for (const auto& c : col)
      if (c.law != CoordLaw::Free && c.law != CoordLaw::Circle)
        require(c.kappa > 0.0, ErrorCode::NonNormalizable,
                "coordinate exponent must be positive");
  return w;
}

static double coord_log_weight(const CoordWeight& w, cplx value) {
  switch (w.law) {
    case CoordLaw::Free:
    case CoordLaw::Circle:
      return 0.0;
    case CoordLaw::Positive:
      return (w.kappa - 1.0) * std::log(value.real());
    case CoordLaw::Disk:
      return (w.kappa - 1.0) * std::log1p(-std::norm(value));
    case CoordLaw::Interval: {
      double a = value.real();
      return (w.kappa - 1.0) * std::log1p(-a * a) + w.ta * std::log1p(-a) +
             w.tb * std::log1p(a);
    }
  }
  return 0.0;
}

double log_density(const GGEConfig& cfg, const Coordinates& c) {
  auto w = weight_table(cfg);
  double lw = 0.0;
  for (int i = 0; i < (int)w[0].size(); ++i) lw += coord_log_weight(w[0][i], c.a[i]);
  if (w.size() > 1)
    for (int i = 0; i < (int)w[1].size(); ++i)
      lw += coord_log_weight(w[1][i], cplx(c.b[i], 0.0));
  if (cfg.potential.degree() >= 1 || cfg.potential.coeff(0) != cplx(0.0))
    lw -= trace_poly(cfg.kind, c, cfg.potential).real();
  return lw;
}

// ---------------------------------------------------------------------------
// Direct sampling (factorizable cases)
// ---------------------------------------------------------------------------

static double beta_general(Rng& rng, double p, double q) {
  double gp = rng.gamma(p), gq = rng.gamma(q);
  return gp / (gp + gq);
}

SampleBatch sample_direct(const GGEConfig& cfg, std::int64_t count, std::uint64_t seed) {
  auto weights = weight_table(cfg);
  require(count > 0, ErrorCode::DomainError, "sample count must be positive");
  const ModelKind& kind = cfg.kind;
  const PolyZ& P = cfg.potential;
  const bool toda =
      kind.family == Family::TodaPeriodic || kind.family == Family::TodaNonPeriodic;
  const bool cmv = kind.cmv();

  if (toda) {
    require(poly_is_real(P, 1e-14) && P.degree() == 2 && P.coeff(2).real() > 0.0,
            ErrorCode::NotFactorizable,
            "direct Toda sampling needs a real quadratic potential");
  } else if (cmv) {
    require(P.degree() == 0, ErrorCode::NotFactorizable,
            "direct CMV sampling needs a constant potential");
  } else {
    fail(ErrorCode::NotFactorizable,
         "no product-form sampler for " + family_name(kind.family));
  }

  const int na = a_count(kind, cfg.N), nb = b_count(kind, cfg.N);
  SampleBatch batch;
  batch.config = cfg;
  batch.draws.reserve(count);
  Rng rng(derive_seed(seed, 0));

  for (std::int64_t it = 0; it < count; ++it) {
    Coordinates c;
    c.N = cfg.N;
    c.a.resize(na);
    c.b.resize(nb);
    if (toda) {
      double p2 = P.coeff(2).real(), p1 = P.coeff(1).real();
      double mu = -p1 / (2.0 * p2), sd = 1.0 / std::sqrt(2.0 * p2);
      double bscale = 1.0 / (2.0 * std::sqrt(p2));
      for (int i = 0; i < na; ++i) c.a[i] = cplx(mu + sd * rng.normal(), 0.0);
      for (int i = 0; i < nb; ++i) c.b[i] = bscale * rng.chi(weights[1][i].kappa);
    } else {
      for (int i = 0; i < na; ++i) {
        const CoordWeight& w = weights[0][i];
        if (w.law == CoordLaw::Circle) {
          if (cfg.real_verblunsky)
            c.a[i] = cplx(rng.uniform() < 0.5 ? -1.0 : 1.0, 0.0);
          else {
            double th = rng.uniform(0.0, 2.0 * kPi);
            c.a[i] = cplx(std::cos(th), std::sin(th));
          }
        } else if (w.law == CoordLaw::Interval) {
          double u = beta_general(rng, 0.5, w.kappa);
          double r = std::sqrt(u);
          c.a[i] = cplx(rng.uniform() < 0.5 ? -r : r, 0.0);
        } else {
          double r = std::sqrt(rng.beta1(w.kappa));
          double th = rng.uniform(0.0, 2.0 * kPi);
          c.a[i] = cplx(r * std::cos(th), r * std::sin(th));
        }
      }
    }
    batch.draws.push_back(std::move(c));
  }

  batch.diag.acceptance_rate = 1.0;
  batch.diag.chain_length = count;
  batch.diag.thin = 1;
  batch.diag.tau_int = 1.0;
  batch.diag.ess = double(count);
  batch.diag.note = "direct product-form sampler";
  return batch;
}

// ---------------------------------------------------------------------------
// MCMC: compiled shift-local energy
// ---------------------------------------------------------------------------

namespace {

cplx powz(cplx v, int hp) {
  if (hp % 2 != 0) return std::pow(v, 0.5 * hp);
  int e = hp / 2;
  cplx acc(1.0, 0.0), base = v;
  while (e > 0) {
    if (e & 1) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}

struct CFactor {
  int off;
  int var;
  int hp;
};

struct CTerm {
  cplx coeff;
  std::vector<CFactor> f;
  std::vector<int> offs;  // distinct offsets used
};

// Per-shift energy representation of Tr Re P(L): the trace equals
// sum over shifts p (p = 0 mod stride) of the bundle translated by p,
// evaluated with cyclic indexing and zero extension of missing boundary
// coordinates. Verified against trace_poly at setup.
struct ShiftEnergy {
  ModelKind kind;
  int sites = 1;
  int stride = 1;
  std::vector<CTerm> terms;
  bool empty() const { return terms.empty(); }

  double term_value(const CTerm& t, int p, const Coordinates& c) const {
    CoordValues v{&kind, &c};
    cplx prod = t.coeff;
    for (const CFactor& f : t.f) {
      int site = p + f.off;
      site %= sites;
      if (site < 0) site += sites;
      prod *= powz(v(site, f.var), f.hp);
      if (prod == cplx(0.0)) return 0.0;
    }
    return prod.real();
  }

  double total(const Coordinates& c) const {
    double e = 0.0;
    for (int p = 0; p < sites; p += stride)
      for (const CTerm& t : terms) e += term_value(t, p, c);
    return e;
  }

  // Sum of all terms whose shifted support contains site j.
  double site_energy(int j, const Coordinates& c) const {
    double e = 0.0;
    for (const CTerm& t : terms)
      for (int off : t.offs) {
        int p = j - off;
        p %= sites;
        if (p < 0) p += sites;
        if (p % stride != 0) continue;
        e += term_value(t, p, c);
      }
    return e;
  }
};

ShiftEnergy compile_energy(const ModelKind& kind, const PolyZ& P, int N) {
  ShiftEnergy en;
  en.kind = kind;
  en.sites = coord_sites(kind, N);
  if (P.degree() < 1) {
    en.stride = 1;
    return en;
  }
  int stride = 1;
  sym::Poly bundle = detail::trace_bundle(kind, P, !real_valued_traces(kind), &stride);
  en.stride = stride;
  for (const auto& m : bundle.t) {
    if (m.f.empty()) continue;  // constants drop out of energy differences
    CTerm t;
    t.coeff = m.coeff;
    for (const auto& vp : m.f) {
      t.f.push_back({vp.site, vp.var, vp.hp});
      if (std::find(t.offs.begin(), t.offs.end(), vp.site) == t.offs.end())
        t.offs.push_back(vp.site);
    }
    en.terms.push_back(std::move(t));
  }
  return en;
}

// Local energy with two modes. Fast path: the trace is a sum of cyclic shifts
// of the bundle, so a site move touches O(span) shifted terms. Non-periodic
// CMV factorizations break that identity; there the seed/weed split is used
// instead: interior moves touch at most two seed blocks, moves in the weed's
// boundary window pay for a full trace evaluation.
struct EnergyEval {
  ModelKind kind;
  PolyZ P;
  ShiftEnergy shift;
  bool seed_mode = false;
  Seed seed;
  int M = 0, k = 1;

  bool empty() const { return !seed_mode && shift.empty(); }

  double site_energy(int j, const Coordinates& c) const {
    if (!seed_mode) return shift.site_energy(j, c);
    if (j < 2 * k || j >= (M - 2) * k) return trace_poly(kind, c, P).real();
    double e = 0.0;
    for (int b = std::max(0, j / k - 2); b <= std::min(M - 2, j / k); ++b)
      if (b * k <= j && j < (b + 2) * k) e += seed_value(seed, c, b).real();
    return e;
  }
};

}  // namespace

SampleBatch sample_mcmc(const GGEConfig& cfg, const SamplerSettings& st) {
  auto weights = weight_table(cfg);
  const ModelKind& kind = cfg.kind;
  const PolyZ& P = cfg.potential;
  const bool has_potential = P.degree() >= 1;
  const int sites_n = coord_sites(kind, cfg.N);
  EnergyEval energy;
  energy.kind = kind;
  energy.P = P;
  if (has_potential) {
    check_potential(kind, P);
    // A certified lower bound on the seed keeps exp(-Tr Re P) integrable
    // against the coordinate laws on unbounded domains.
    energy.seed = extract_seed(kind, P, cfg.N);
    if (energy.seed.lb_warning)
      fail(ErrorCode::NonNormalizable,
           "could not certify a lower bound for the potential energy");
    energy.k = energy.seed.k;
    energy.M = seed_block_count(energy.seed, cfg.N);
  }
  require(st.count > 0, ErrorCode::DomainError, "sample count must be positive");
  require(st.chains >= 1, ErrorCode::DomainError, "need at least one chain");

  energy.shift = compile_energy(kind, P, cfg.N);
  const int na = a_count(kind, cfg.N);

  // Setup self-check: local deltas must reproduce trace_poly differences.
  // If the cyclic-shift identity fails (non-periodic CMV), fall back to the
  // seed/weed split and re-verify.
  auto delta_check = [&](int j) {
    Rng chk(derive_seed(st.rng_seed, 0xC0FFEE + j));
    Coordinates c = random_coordinates(kind, cfg.N, chk.raw());
    double e0 = energy.site_energy(j, c);
    double t0 = trace_poly(kind, c, P).real();
    cplx old = c.a[j];
    if (weights[0][j].law == CoordLaw::Positive)
      c.a[j] = cplx(old.real() * 1.1 + 0.05, 0.0);
    else if (weights[0][j].law == CoordLaw::Free)
      c.a[j] = old + cplx(0.3, 0.0);
    else
      c.a[j] = old * 0.8;
    double d_local = energy.site_energy(j, c) - e0;
    double d_full = trace_poly(kind, c, P).real() - t0;
    return std::abs(d_local - d_full) <= 1e-8 * (1.0 + std::abs(d_full));
  };
  if (!energy.empty()) {
    bool ok = true;
    for (int j = 0; j < na && ok; j += std::max(1, na / 32)) ok = delta_check(j);
    if (!ok) {
      energy.seed_mode = true;
      for (int j = 0; j < na; j += std::max(1, na / 32))
        require(delta_check(j), ErrorCode::ConvergenceError,
                "local energy differences disagree with the full trace");
    }
  }
  std::string energy_note =
      energy.empty() ? "" : (energy.seed_mode ? "seed-split local energy" : "");

  std::int64_t per_chain = st.count / st.chains;
  std::int64_t burn = st.burn_in >= 0 ? st.burn_in : 2000;

  SampleBatch batch;
  batch.config = cfg;
  batch.draws.reserve(st.count);
  double acc_sum = 0.0;
  std::int64_t acc_n = 0;
  double tau_max = 0.0, ess_sum = 0.0;
  std::int64_t thin_used = 1;

  for (int chain = 0; chain < st.chains; ++chain) {
    std::int64_t want = per_chain + (chain == 0 ? st.count % st.chains : 0);
    if (want == 0) continue;
    Rng rng(derive_seed(st.rng_seed, 0x5A5A + chain));
    Coordinates cur = random_coordinates(kind, cfg.N, rng.raw());
    if (cfg.real_verblunsky) {
      for (int i = 0; i < na; ++i)
        cur.a[i] = cplx(std::clamp(cur.a[i].real(), -0.9, 0.9), 0.0);
      if (kind.family == Family::CMVNonPeriodic) cur.a[na - 1] = cplx(-1.0, 0.0);
    }

    // per-coordinate step sizes (log scale) with Robbins-Monro adaptation
    std::vector<std::vector<double>> lstep(weights.size());
    std::vector<std::vector<std::int64_t>> tick(weights.size());
    for (size_t v = 0; v < weights.size(); ++v) {
      lstep[v].assign(weights[v].size(), std::log(st.step_init));
      tick[v].assign(weights[v].size(), 0);
    }

    std::int64_t accepted = 0, proposed = 0;
    bool adapting = true;

    auto update_coord = [&](int v, int i) {
      const CoordWeight& w = weights[v][i];
      if (w.law == CoordLaw::Circle && cfg.real_verblunsky) return;  // frozen sign
      double step = std::exp(lstep[v][i]);
      bool acc = false;
      // a site index for the energy: var arrays are indexed by site directly
      int site = i;
      double e_old = energy.empty() ? 0.0 : energy.site_energy(site, cur);
      double lq = 0.0;  // log weight ratio (proposal-corrected)
      bool feasible = true;
      cplx olda;
      double oldb = 0.0;
      if (v == 0) {
        olda = cur.a[i];
        switch (w.law) {
          case CoordLaw::Free:
            cur.a[i] = olda + cplx(step * rng.normal(), 0.0);
            break;
          case CoordLaw::Positive: {
            double x = olda.real(), xn = x * std::exp(step * rng.normal());
            lq = w.kappa * (std::log(xn) - std::log(x));
            cur.a[i] = cplx(xn, 0.0);
            break;
          }
          case CoordLaw::Disk: {
            cplx prop = olda + step * cplx(rng.normal(), rng.normal());
            if (std::norm(prop) >= 1.0)
              feasible = false;
            else {
              lq = (w.kappa - 1.0) *
                   (std::log1p(-std::norm(prop)) - std::log1p(-std::norm(olda)));
              cur.a[i] = prop;
            }
            break;
          }
          case CoordLaw::Interval: {
            double x = olda.real(), xn = x + step * rng.normal();
            if (std::abs(xn) >= 1.0)
              feasible = false;
            else {
              lq = (w.kappa - 1.0) * (std::log1p(-xn * xn) - std::log1p(-x * x)) +
                   w.ta * (std::log1p(-xn) - std::log1p(-x)) +
                   w.tb * (std::log1p(xn) - std::log1p(x));
              cur.a[i] = cplx(xn, 0.0);
            }
            break;
          }
          case CoordLaw::Circle: {
            double th = step * rng.normal();
            cur.a[i] = olda * cplx(std::cos(th), std::sin(th));
            break;
          }
        }
      } else {
        oldb = cur.b[i];
        double xn = oldb * std::exp(step * rng.normal());
        lq = w.kappa * (std::log(xn) - std::log(oldb));
        cur.b[i] = xn;
      }

      if (feasible) {
        double d_e = energy.empty() ? 0.0 : energy.site_energy(site, cur) - e_old;
        double log_ratio = lq - d_e;
        if (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio)
          acc = true;
        else if (v == 0)
          cur.a[i] = olda;
        else
          cur.b[i] = oldb;
      }
      ++proposed;
      if (acc) ++accepted;
      if (adapting) {
        std::int64_t t = ++tick[v][i];
        double g = 1.0 / std::sqrt(1.0 + t / 10.0);
        lstep[v][i] += g * ((acc ? 1.0 : 0.0) - 0.44);
        lstep[v][i] = std::clamp(lstep[v][i], std::log(1e-4), std::log(50.0));
      }
    };

    auto sweep = [&] {
      for (size_t v = 0; v < weights.size(); ++v)
        for (size_t i = 0; i < weights[v].size(); ++i) update_coord(int(v), int(i));
    };

    for (std::int64_t s = 0; s < burn; ++s) sweep();
    adapting = false;
    accepted = proposed = 0;

    // short pilot fixes the thinning from the energy autocorrelation time
    std::int64_t thin = st.thin;
    if (thin < 0) {
      const std::int64_t pilot = 256;
      VecD epilot(pilot);
      for (std::int64_t s = 0; s < pilot; ++s) {
        sweep();
        epilot[s] = has_potential ? trace_poly(kind, cur, P).real()
                                  : trace_power(kind, cur, 2).real();
      }
      double tau = integrated_autocorr_time(epilot);
      thin = std::clamp<std::int64_t>(std::llround(tau), 1, 64);
    }
    thin_used = thin;

    VecD eseries(want);
    for (std::int64_t n = 0; n < want; ++n) {
      for (std::int64_t s = 0; s < thin; ++s) sweep();
      batch.draws.push_back(cur);
      eseries[n] = has_potential ? trace_poly(kind, cur, P).real()
                                 : trace_power(kind, cur, 2).real();
    }

    double acc_rate = proposed > 0 ? double(accepted) / double(proposed) : 1.0;
    acc_sum += acc_rate * double(proposed);
    acc_n += proposed;
    double tau_rec = integrated_autocorr_time(eseries);
    tau_max = std::max(tau_max, tau_rec * double(thin));
    ess_sum += double(want) / std::max(1.0, tau_rec);
  }

  batch.diag.acceptance_rate = acc_n > 0 ? acc_sum / double(acc_n) : 1.0;
  batch.diag.chain_length = std::int64_t(batch.draws.size());
  batch.diag.burn_in = burn;
  batch.diag.thin = thin_used;
  batch.diag.chains = st.chains;
  batch.diag.tau_int = tau_max;
  batch.diag.ess = ess_sum;
  batch.diag.note = energy_note;
  if (batch.diag.acceptance_rate < 0.1 || batch.diag.acceptance_rate > 0.7) {
    batch.diag.mixing_warning = true;
    batch.diag.note = "acceptance rate outside [0.1, 0.7]";
  }
  return batch;
}

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

std::string Observable::name() const {
  std::ostringstream os;
  switch (kind) {
    case TracePower:
    case ReTracePower:
      os << "re_tr_L^" << s;
      break;
    case ImTracePower:
      os << "im_tr_L^" << s;
      break;
    case LocalField:
      os << "h" << m << "_site" << j;
      break;
    case Current:
      os << "J" << n << "_site" << j;
      break;
  }
  return os.str();
}

VecD observable_series(const SampleBatch& batch, const Observable& obs) {
  const ModelKind& kind = batch.config.kind;
  const std::int64_t n = std::int64_t(batch.draws.size());
  VecD out(n);
  switch (obs.kind) {
    case Observable::TracePower:
    case Observable::ReTracePower: {
      require(obs.s >= 1 && obs.s <= 16, ErrorCode::DomainError, "trace power out of range");
      for (std::int64_t i = 0; i < n; ++i)
        out[i] = trace_power(kind, batch.draws[i], obs.s).real();
      break;
    }
    case Observable::ImTracePower: {
      require(kind.cmv(), ErrorCode::DomainError,
              "imaginary trace parts only arise for CMV kinds");
      for (std::int64_t i = 0; i < n; ++i)
        out[i] = trace_power(kind, batch.draws[i], obs.s).imag();
      break;
    }
    case Observable::LocalField: {
      require(kind.family == Family::TodaPeriodic ||
                  kind.family == Family::TodaNonPeriodic,
              ErrorCode::DomainError, "local fields are defined for Jacobi-type matrices");
      auto terms = motzkin_terms(obs.m);
      for (std::int64_t i = 0; i < n; ++i)
        out[i] = local_field(terms, obs.j, batch.draws[i]);
      break;
    }
    case Observable::Current: {
      require(obs.n >= 0 && obs.n <= 8, ErrorCode::DomainError, "current power out of range");
      const int dim = matrix_dim(kind, batch.config.N);
      require(obs.j >= 0 && obs.j < dim, ErrorCode::IndexError, "site out of range");
      for (std::int64_t i = 0; i < n; ++i) {
        BandZ L = band_matrix(kind, batch.draws[i]);
        if (obs.n == 0) {
          out[i] = band_entry(L, obs.j, obs.j).real();
          continue;
        }
        BandZ down;  // lower shift part; wrap bands store offsets mod n
        down.n = L.n;
        down.wrap = L.wrap;
        for (const auto& [off, diag] : L.diags) {
          int signed_off = (L.wrap && off > L.n / 2) ? off - L.n : off;
          if (signed_off < 0) down.diags[off] = diag;
        }
        BandZ acc = L;
        for (int p = 1; p < obs.n; ++p) acc = band_mul(acc, L);
        acc = band_mul(acc, down);
        out[i] = band_entry(acc, obs.j, obs.j).real();
      }
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

static nlohmann::json config_json(const GGEConfig& cfg) {
  nlohmann::json j;
  j["model"] = family_name(cfg.kind.family);
  if (cfg.kind.inb()) j["r"] = cfg.kind.r;
  j["measure"] = measure_type_name(cfg.type);
  j["alpha"] = cfg.alpha;
  j["N"] = cfg.N;
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& z : cfg.potential.c)
    coeffs.push_back({z.real(), z.imag()});
  j["potential"] = coeffs;
  if (cfg.real_verblunsky) j["real_verblunsky"] = true;
  if (cfg.jacobi) {
    j["jacobi"] = true;
    j["jacobi_ta"] = cfg.jacobi_ta;
    j["jacobi_tb"] = cfg.jacobi_tb;
  }
  return j;
}

void write_samples_binary(const std::string& path, const SampleBatch& batch,
                          const std::vector<std::pair<std::string, VecD>>& columns) {
  nlohmann::json hdr;
  hdr["format"] = "gge-samples";
  hdr["version"] = 1;
  hdr["encoding"] = "f64le";
  std::int64_t rows = columns.empty() ? 0 : std::int64_t(columns[0].second.size());
  for (const auto& [name, col] : columns)
    require(std::int64_t(col.size()) == rows, ErrorCode::DomainError,
            "ragged sample columns");
  hdr["rows"] = rows;
  auto names = nlohmann::json::array();
  for (const auto& [name, col] : columns) names.push_back(name);
  hdr["columns"] = names;
  hdr["config"] = config_json(batch.config);
  hdr["diagnostics"] = {{"acceptance_rate", batch.diag.acceptance_rate},
                        {"chain_length", batch.diag.chain_length},
                        {"burn_in", batch.diag.burn_in},
                        {"thin", batch.diag.thin},
                        {"chains", batch.diag.chains},
                        {"tau_int", batch.diag.tau_int},
                        {"ess", batch.diag.ess},
                        {"mixing_warning", batch.diag.mixing_warning}};
  std::string htext = hdr.dump();

  std::ofstream f(path, std::ios::binary);
  require(f.good(), ErrorCode::DomainError, "cannot open " + path);
  f.write("GGESAMP1", 8);
  std::uint64_t hl = htext.size();
  f.write(reinterpret_cast<const char*>(&hl), 8);
  f.write(htext.data(), std::streamsize(htext.size()));
  for (const auto& [name, col] : columns)
    f.write(reinterpret_cast<const char*>(col.data()),
            std::streamsize(sizeof(double) * col.size()));
  require(f.good(), ErrorCode::DomainError, "write failed for " + path);
}

SampleTable read_samples_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), ErrorCode::DomainError, "cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  require(f.good() && std::memcmp(magic, "GGESAMP1", 8) == 0, ErrorCode::DomainError,
          "not a gge sample file: " + path);
  std::uint64_t hl = 0;
  f.read(reinterpret_cast<char*>(&hl), 8);
  std::string htext(hl, '\0');
  f.read(htext.data(), std::streamsize(hl));
  auto hdr = nlohmann::json::parse(htext);
  SampleTable t;
  t.header_json = htext;
  std::int64_t rows = hdr["rows"].get<std::int64_t>();
  for (const auto& name : hdr["columns"]) {
    t.names.push_back(name.get<std::string>());
    VecD col(rows);
    f.read(reinterpret_cast<char*>(col.data()), std::streamsize(sizeof(double) * rows));
    t.columns.push_back(std::move(col));
  }
  require(f.good(), ErrorCode::DomainError, "truncated sample file: " + path);
  return t;
}

void write_samples_csv(const std::string& path,
                       const std::vector<std::pair<std::string, VecD>>& columns) {
  std::ofstream f(path);
  require(f.good(), ErrorCode::DomainError, "cannot open " + path);
  for (size_t c = 0; c < columns.size(); ++c)
    f << columns[c].first << (c + 1 < columns.size() ? ',' : '\n');
  std::int64_t rows = columns.empty() ? 0 : std::int64_t(columns[0].second.size());
  char buf[32];
  for (std::int64_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < columns.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", columns[c].second[r]);
      f << buf << (c + 1 < columns.size() ? ',' : '\n');
    }
}

}  // namespace gge
