#pragma once
// Confronting Monte Carlo samples with transfer-operator predictions:
// KS normality checks, susceptibility estimation, spatial correlation decay,
// and Berry-Esseen sqrt(N) scaling scans.

#include <cstdint>
#include <string>
#include <vector>

#include "gge/common.hpp"
#include "gge/sampling.hpp"

namespace gge {

// --- series utilities -------------------------------------------------------

double mean(const VecD& x);
double variance(const VecD& x);  // unbiased

// Integrated autocorrelation time via Geyer's initial positive sequence.
double integrated_autocorr_time(const VecD& x);
double effective_sample_size(const VecD& x);

// Batch-means standard error of the mean (absorbs residual autocorrelation).
double batch_means_se(const VecD& x);

// Standard normal CDF and quantile.
double normal_cdf(double x);
double normal_quantile(double p);

// Two-sided Kolmogorov p-value: 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2) with the
// Stephens small-sample correction lambda = (sqrt(n)+0.12+0.11/sqrt(n)) D.
double ks_distance_to_normal(VecD sample);          // sorts a copy
double ks_pvalue(double distance, std::int64_t n);
double anderson_darling_to_normal(VecD sample);     // secondary statistic

// --- reports ----------------------------------------------------------------

struct CLTQuantities {
  double A = 0.0;             // per-site mean
  double sigma2 = 1.0;        // per-site variance
  double A_tilde = 0.0;       // finite-size (site-averaged) mean rate
  double sigma2_tilde = 0.0;  // finite-size variance rate
  double free_energy_1 = 0.0;
  double free_energy_2 = 0.0;
  bool converged = true;  // grid-refinement flag when operator-derived
};

struct CLTReport {
  std::int64_t N = 0;
  std::int64_t sample_count = 0;
  std::string observable;
  double empirical_mean = 0.0, empirical_mean_se = 0.0;  // per site
  double empirical_var = 0.0, empirical_var_se = 0.0;    // per site
  double predicted_A = 0.0, predicted_sigma2 = 0.0;
  double ks_distance = 0.0;
  double ks_pvalue = 0.0;
  double ad_statistic = 0.0;
  VecD quantiles;  // standardized sample at {1,5,25,50,75,95,99}%
  bool pass = false;
};

struct DecayReport {
  std::vector<int> distances;
  VecD cov_estimates;
  VecD cov_ses;
  std::vector<int> fit_range;   // distances used in the fit
  double fitted_log_slope = 0.0;
  double fitted_log_slope_se = 0.0;
  double fit_r2 = 0.0;
  double mu_hat = 0.0;          // exp(fitted_log_slope)
  bool decay_detected = false;
  std::string note;
};

struct BerryEsseenReport {
  std::vector<std::int64_t> Ns;
  VecD sup_distances;
  VecD scaled;  // sup_distance * sqrt(N)
};

// --- operations ---------------------------------------------------------------

// Standardizes series/N draws of an extensive observable by predicted (A, sigma2):
// z = (X - N A)/sqrt(N sigma2); KS distance and p-value against N(0,1).
// InsufficientESS if the batch ESS < 500. ks_threshold sets `pass`.
CLTReport clt_check(const SampleBatch& batch, const Observable& obs,
                    const CLTQuantities& predicted, double ks_threshold = 0.02);

// (1/N) Cov(Tr Re L^m, Tr Re L^n) with jackknife SE over ~50 blocks.
struct ValueWithSE {
  double value = 0.0;
  double se = 0.0;
};
ValueWithSE susceptibility_empirical(const SampleBatch& batch, int m, int n);

// Covariance of local observables I(site 0) vs J(site d) as a function of the
// distance d, with a weighted log-linear fit of |cov| over the distances where
// |cov| > 5 SE. NoDecayDetected is reported in-band (decay_detected = false).
DecayReport correlation_decay(const SampleBatch& batch, const Observable& I,
                              const Observable& J, int max_distance);

// For each N: draw samples, standardize by predicted(N), record the sup over a
// 512-interval grid of |empirical CDF - Phi|.
BerryEsseenReport berry_esseen_scan(
    const GGEConfig& base, const Observable& obs,
    const std::vector<std::int64_t>& Ns, std::int64_t samples_per_N,
    const std::function<CLTQuantities(std::int64_t)>& predicted,
    const SamplerSettings& st);

}  // namespace gge
