#include "gge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gge/rng.hpp"

namespace gge {

double mean(const VecD& x) { return x.size() ? x.mean() : 0.0; }

double variance(const VecD& x) {
  const auto n = x.size();
  if (n < 2) return 0.0;
  double m = x.mean();
  return (x.array() - m).square().sum() / double(n - 1);
}

double integrated_autocorr_time(const VecD& x) {
  const auto n = x.size();
  if (n < 8) return 1.0;
  double m = x.mean();
  VecD d = x.array() - m;
  double g0 = d.squaredNorm() / double(n);
  if (g0 <= 0.0) return 1.0;
  auto gamma = [&](std::int64_t k) {
    double s = 0.0;
    for (std::int64_t i = 0; i + k < n; ++i) s += d[i] * d[i + k];
    return s / double(n);
  };
  // Geyer initial positive sequence on paired autocovariances.
  double tau = -1.0;
  std::int64_t kmax = std::min<std::int64_t>(n - 2, 4096);
  for (std::int64_t k = 0; k + 1 <= kmax; k += 2) {
    double pair = (gamma(k) + gamma(k + 1)) / g0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return std::max(tau, 0.1);
}

double effective_sample_size(const VecD& x) {
  return double(x.size()) / std::max(1.0, integrated_autocorr_time(x));
}

double batch_means_se(const VecD& x) {
  const auto n = x.size();
  if (n < 4) return 0.0;
  std::int64_t nb = std::max<std::int64_t>(2, std::int64_t(std::sqrt(double(n))));
  std::int64_t len = n / nb;
  VecD bm(nb);
  for (std::int64_t b = 0; b < nb; ++b)
    bm[b] = x.segment(b * len, len).mean();
  return std::sqrt(variance(bm) / double(nb));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, ErrorCode::DomainError, "quantile needs p in (0,1)");
  // Acklam's rational approximation, then one Halley step.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double q, x;
  if (p < plow) {
    q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1);
  } else if (p <= phigh) {
    q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1);
  }
  double e = normal_cdf(x) - p;
  double u = e * std::sqrt(2.0 * kPi) * std::exp(0.5 * x * x);
  x = x - u / (1 + 0.5 * x * u);
  return x;
}

double ks_distance_to_normal(VecD sample) {
  const auto n = sample.size();
  require(n > 0, ErrorCode::DomainError, "empty sample");
  std::sort(sample.data(), sample.data() + n);
  double d = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    double F = normal_cdf(sample[i]);
    d = std::max(d, std::max(F - double(i) / double(n), double(i + 1) / double(n) - F));
  }
  return d;
}

double ks_pvalue(double distance, std::int64_t n) {
  double rn = std::sqrt(double(n));
  double lam = (rn + 0.12 + 0.11 / rn) * distance;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
    p += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

double anderson_darling_to_normal(VecD sample) {
  const auto n = sample.size();
  require(n > 1, ErrorCode::DomainError, "need at least two points");
  std::sort(sample.data(), sample.data() + n);
  double s = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    double Fi = std::clamp(normal_cdf(sample[i]), 1e-300, 1.0 - 1e-16);
    double Fj = std::clamp(normal_cdf(sample[n - 1 - i]), 1e-300, 1.0 - 1e-16);
    s += double(2 * i + 1) * (std::log(Fi) + std::log1p(-Fj));
  }
  return -double(n) - s / double(n);
}

// ---------------------------------------------------------------------------

CLTReport clt_check(const SampleBatch& batch, const Observable& obs,
                    const CLTQuantities& predicted, double ks_threshold) {
  require(batch.diag.ess >= 500.0, ErrorCode::InsufficientESS,
          "need an effective sample size of at least 500");
  VecD series = observable_series(batch, obs);
  const std::int64_t n = series.size();
  const double Ns = double(matrix_dim(batch.config.kind, batch.config.N));

  CLTReport rep;
  rep.N = std::int64_t(Ns);
  rep.sample_count = n;
  rep.observable = obs.name();
  rep.predicted_A = predicted.A;
  rep.predicted_sigma2 = predicted.sigma2;
  rep.empirical_mean = mean(series) / Ns;
  rep.empirical_mean_se = std::max(batch_means_se(series) / Ns, 1e-300);

  // blocked variance estimate with jackknife SE
  std::int64_t nb = 50;
  std::int64_t len = std::max<std::int64_t>(1, n / nb);
  nb = n / len;
  double v_all = variance(series);
  VecD v_del(nb);
  for (std::int64_t b = 0; b < nb; ++b) {
    VecD rest(n - len);
    std::int64_t w = 0;
    for (std::int64_t i = 0; i < n; ++i)
      if (i / len != b || i >= nb * len) rest[w++] = series[i];
    rest.conservativeResize(w);
    v_del[b] = variance(rest);
  }
  double v_bar = v_del.mean();
  double jk = 0.0;
  for (std::int64_t b = 0; b < nb; ++b) jk += (v_del[b] - v_bar) * (v_del[b] - v_bar);
  rep.empirical_var = v_all / Ns;
  rep.empirical_var_se =
      std::max(std::sqrt(jk * double(nb - 1) / double(nb)) / Ns, 1e-300);

  require(predicted.sigma2 > 0.0, ErrorCode::ZeroVariance,
          "predicted variance must be positive");
  VecD z = (series.array() - Ns * predicted.A) / std::sqrt(Ns * predicted.sigma2);
  rep.ks_distance = ks_distance_to_normal(z);
  rep.ks_pvalue = ks_pvalue(rep.ks_distance, n);
  rep.ad_statistic = anderson_darling_to_normal(z);

  VecD zs = z;
  std::sort(zs.data(), zs.data() + n);
  const double qs[] = {0.01, 0.05, 0.25, 0.50, 0.75, 0.95, 0.99};
  rep.quantiles.resize(7);
  for (int i = 0; i < 7; ++i) {
    auto idx = std::clamp<std::int64_t>(std::int64_t(qs[i] * double(n)), 0, n - 1);
    rep.quantiles[i] = zs[idx];
  }
  rep.pass = rep.ks_distance < ks_threshold;
  return rep;
}

ValueWithSE susceptibility_empirical(const SampleBatch& batch, int m, int n) {
  require(batch.diag.ess >= 500.0, ErrorCode::InsufficientESS,
          "need an effective sample size of at least 500");
  Observable om, on;
  om.kind = on.kind = Observable::ReTracePower;
  om.s = m;
  on.s = n;
  VecD X = observable_series(batch, om);
  VecD Y = (m == n) ? X : observable_series(batch, on);
  const std::int64_t cnt = X.size();
  const double Ns = double(matrix_dim(batch.config.kind, batch.config.N));

  auto cov_of = [&](const VecD& x, const VecD& y) {
    double mx = x.mean(), my = y.mean();
    return ((x.array() - mx) * (y.array() - my)).sum() / double(x.size() - 1);
  };

  // blocked jackknife
  std::int64_t nb = 50;
  std::int64_t len = std::max<std::int64_t>(1, cnt / nb);
  nb = cnt / len;
  double full = cov_of(X, Y) / Ns;
  VecD del(nb);
  for (std::int64_t b = 0; b < nb; ++b) {
    VecD xr(cnt - len), yr(cnt - len);
    std::int64_t w = 0;
    for (std::int64_t i = 0; i < cnt; ++i)
      if (i / len != b || i >= nb * len) {
        xr[w] = X[i];
        yr[w] = Y[i];
        ++w;
      }
    xr.conservativeResize(w);
    yr.conservativeResize(w);
    del[b] = cov_of(xr, yr) / Ns;
  }
  double bar = del.mean(), jk = 0.0;
  for (std::int64_t b = 0; b < nb; ++b) jk += (del[b] - bar) * (del[b] - bar);
  return {full, std::sqrt(jk * double(nb - 1) / double(nb))};
}

DecayReport correlation_decay(const SampleBatch& batch, const Observable& I,
                              const Observable& J, int max_distance) {
  require(max_distance >= 1, ErrorCode::DomainError, "need max_distance >= 1");
  const int dim = matrix_dim(batch.config.kind, batch.config.N);
  require(2 * max_distance <= dim, ErrorCode::DomainError,
          "distances must stay below half the lattice size");
  VecD base = observable_series(batch, I);
  const std::int64_t n = base.size();
  double mb = base.mean();

  DecayReport rep;
  for (int d = 1; d <= max_distance; ++d) {
    Observable Jd = J;
    Jd.j = (I.j + d) % dim;
    VecD far = observable_series(batch, Jd);
    double mf = far.mean();
    VecD prod = (base.array() - mb) * (far.array() - mf);
    double cov = prod.mean();
    double se = batch_means_se(prod);
    rep.distances.push_back(d);
    rep.cov_estimates.conservativeResize(d);
    rep.cov_ses.conservativeResize(d);
    rep.cov_estimates[d - 1] = cov;
    rep.cov_ses[d - 1] = se;
  }

  // weighted log-linear fit over distances where the signal clears the noise
  std::vector<double> xs, ys, ws;
  for (size_t i = 0; i < rep.distances.size(); ++i) {
    double c = std::abs(rep.cov_estimates[i]), se = rep.cov_ses[i];
    if (se <= 0.0 || c <= 5.0 * se) continue;
    rep.fit_range.push_back(rep.distances[i]);
    xs.push_back(double(rep.distances[i]));
    ys.push_back(std::log(c));
    double sl = se / c;  // SE of log|cov|
    ws.push_back(1.0 / (sl * sl));
  }
  if (xs.size() < 2) {
    rep.decay_detected = false;
    rep.note = error_name(ErrorCode::NoDecayDetected);
    return rep;
  }
  double W = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    W += ws[i];
    Sx += ws[i] * xs[i];
    Sy += ws[i] * ys[i];
    Sxx += ws[i] * xs[i] * xs[i];
    Sxy += ws[i] * xs[i] * ys[i];
  }
  double det = W * Sxx - Sx * Sx;
  require(std::abs(det) > 0.0, ErrorCode::DomainError, "degenerate decay fit");
  double slope = (W * Sxy - Sx * Sy) / det;
  double icept = (Sxx * Sy - Sx * Sxy) / det;
  rep.fitted_log_slope = slope;
  rep.fitted_log_slope_se = std::sqrt(W / det);
  double ss_res = 0, ss_tot = 0, ybar = Sy / W;
  for (size_t i = 0; i < xs.size(); ++i) {
    double fit = icept + slope * xs[i];
    ss_res += ws[i] * (ys[i] - fit) * (ys[i] - fit);
    ss_tot += ws[i] * (ys[i] - ybar) * (ys[i] - ybar);
  }
  rep.fit_r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  rep.mu_hat = std::exp(slope);
  rep.decay_detected = true;
  return rep;
}

BerryEsseenReport berry_esseen_scan(
    const GGEConfig& base, const Observable& obs,
    const std::vector<std::int64_t>& Ns, std::int64_t samples_per_N,
    const std::function<CLTQuantities(std::int64_t)>& predicted,
    const SamplerSettings& st) {
  BerryEsseenReport rep;
  rep.Ns = Ns;
  rep.sup_distances.resize(std::int64_t(Ns.size()));
  rep.scaled.resize(std::int64_t(Ns.size()));
  for (size_t idx = 0; idx < Ns.size(); ++idx) {
    GGEConfig cfg = base;
    cfg.N = int(Ns[idx]);
    CLTQuantities pred = predicted(Ns[idx]);
    require(pred.sigma2 > 1e-12, ErrorCode::ZeroVariance,
            "observable has vanishing variance");
    SampleBatch batch;
    try {
      batch = sample_direct(cfg, samples_per_N, derive_seed(st.rng_seed, 977 + idx));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotFactorizable) throw;
      SamplerSettings s2 = st;
      s2.count = samples_per_N;
      s2.rng_seed = derive_seed(st.rng_seed, 977 + idx);
      batch = sample_mcmc(cfg, s2);
    }
    VecD series = observable_series(batch, obs);
    const double dimN = double(matrix_dim(cfg.kind, cfg.N));
    VecD z = (series.array() - dimN * pred.A) / std::sqrt(dimN * pred.sigma2);
    std::sort(z.data(), z.data() + z.size());
    double D = 0.0;
    const int grid = 512;
    for (int g = 1; g < grid; ++g) {
      double q = normal_quantile(double(g) / grid);
      auto lo = std::lower_bound(z.data(), z.data() + z.size(), q);
      double ecdf = double(lo - z.data()) / double(z.size());
      D = std::max(D, std::abs(ecdf - double(g) / grid));
    }
    rep.sup_distances[std::int64_t(idx)] = D;
    rep.scaled[std::int64_t(idx)] = D * std::sqrt(dimN);
  }
  return rep;
}

}  // namespace gge
