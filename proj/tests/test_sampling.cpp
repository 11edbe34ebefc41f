#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "gge/sampling.hpp"
#include "gge/stats.hpp"

using namespace gge;

namespace {

GGEConfig toda_quadratic(int N, double alpha = 1.0) {
  GGEConfig cfg;
  cfg.kind = model_from_name("toda");
  cfg.type = MeasureType::Type1;
  cfg.alpha = alpha;
  cfg.potential = parse_polynomial("x^2/2");
  cfg.N = N;
  return cfg;
}

}  // namespace

TEST_CASE("direct Toda sampler hits the chi/Gaussian moments") {
  GGEConfig cfg = toda_quadratic(32, 1.5);
  SampleBatch b = sample_direct(cfg, 4000, 3);
  CHECK(b.draws.size() == 4000);
  CHECK(b.diag.ess == doctest::Approx(4000));
  double ma = 0, ma2 = 0, mb2 = 0;
  std::int64_t na = 0, nb = 0;
  for (const auto& c : b.draws) {
    for (int i = 0; i < c.a.size(); ++i, ++na) {
      ma += c.a[i].real();
      ma2 += std::norm(c.a[i]);
    }
    for (int i = 0; i < c.b.size(); ++i, ++nb) mb2 += c.b[i] * c.b[i];
  }
  CHECK(std::abs(ma / na) < 0.01);
  CHECK(ma2 / na == doctest::Approx(1.0).epsilon(0.02));
  // b ~ chi_{2 alpha}/sqrt(2): E b^2 = alpha
  CHECK(mb2 / nb == doctest::Approx(1.5).epsilon(0.02));
}

TEST_CASE("type-2 direct sampler uses site-decaying exponents") {
  GGEConfig cfg = toda_quadratic(16, 2.0);
  cfg.kind = model_from_name("toda-ht");
  cfg.type = MeasureType::Type2;
  SampleBatch b = sample_direct(cfg, 8000, 5);
  // E b_i^2 = alpha (1 - (i+1)/N)
  for (int i : {0, 7, 14}) {
    double m = 0;
    for (const auto& c : b.draws) m += c.b[i] * c.b[i];
    m /= double(b.draws.size());
    double expect = 2.0 * (1.0 - (i + 1) / 16.0);
    CHECK(m == doctest::Approx(expect).epsilon(0.06));
  }
}

TEST_CASE("weight_table pins the exponent conventions") {
  // Laguerre x-chain: kappa_i = 2 alpha (1 - i/N); y-chain: 2 alpha (1-(i+1)/N)
  GGEConfig cfg;
  cfg.kind = model_from_name("laguerre-ht");
  cfg.type = MeasureType::Type2;
  cfg.alpha = 1.25;
  cfg.potential = parse_polynomial("x");
  cfg.N = 10;
  auto wt = weight_table(cfg);
  REQUIRE(wt.size() >= 2);
  CHECK(wt[0][0].law == CoordLaw::Positive);
  CHECK(wt[0][0].kappa == doctest::Approx(2.5 * (1.0 - 0.0 / 10.0)));
  CHECK(wt[0][3].kappa == doctest::Approx(2.5 * (1.0 - 3.0 / 10.0)));
  CHECK(wt[1][3].kappa == doctest::Approx(2.5 * (1.0 - 4.0 / 10.0)));

  // CMV high-temperature: kappa_i = alpha (1 - (i+1)/n) over n = 2N coords,
  // uniform phase on the last coordinate
  GGEConfig cmv;
  cmv.kind = model_from_name("cmv-ht");
  cmv.type = MeasureType::Type2;
  cmv.alpha = 3.0;
  cmv.N = 6;
  auto wc = weight_table(cmv);
  int n = 2 * cmv.N;
  CHECK(wc[0][0].law == CoordLaw::Disk);
  CHECK(wc[0][0].kappa == doctest::Approx(3.0 * (1.0 - 1.0 / n)));
  CHECK(wc[0][n - 2].kappa == doctest::Approx(3.0 * (1.0 / n)));
  CHECK(wc[0][n - 1].law == CoordLaw::Circle);

  // Volterra type 1: Gamma(alpha) stationary coordinates
  GGEConfig vol;
  vol.kind = model_from_name("volterra");
  vol.alpha = 0.75;
  vol.potential = parse_polynomial("-x^2");
  vol.N = 8;
  auto wv = weight_table(vol);
  for (int i = 0; i < 8; ++i) {
    CHECK(wv[0][i].law == CoordLaw::Positive);
    CHECK(wv[0][i].kappa == doctest::Approx(0.75));
  }
}

TEST_CASE("log_density is finite and monotone in the potential") {
  GGEConfig cfg = toda_quadratic(8);
  Coordinates c = random_coordinates(cfg.kind, 8, 2);
  double l1 = log_density(cfg, c);
  CHECK(std::isfinite(l1));
  GGEConfig steeper = cfg;
  steeper.potential = parse_polynomial("x^2");
  CHECK(log_density(steeper, c) < l1);
}

TEST_CASE("non-factorizable potentials fall back to MCMC") {
  GGEConfig cfg = toda_quadratic(16);
  cfg.potential = parse_polynomial("x^4 + x^2/2");
  CHECK_THROWS_AS(sample_direct(cfg, 100, 1), Error);
  try {
    sample_direct(cfg, 100, 1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotFactorizable);
  }
}

TEST_CASE("MCMC agrees with the direct sampler on quadratic Toda") {
  GGEConfig cfg = toda_quadratic(24);
  SamplerSettings st;
  st.count = 4000;
  st.rng_seed = 9;
  SampleBatch mc = sample_mcmc(cfg, st);
  CHECK(mc.diag.acceptance_rate > 0.2);
  CHECK(mc.diag.acceptance_rate < 0.8);
  CHECK(mc.diag.ess > 500);
  Observable obs;  // re_tr_L^2
  VecD direct_series = observable_series(sample_direct(cfg, 4000, 10), obs);
  VecD mcmc_series = observable_series(mc, obs);
  double se = std::sqrt(variance(direct_series) / effective_sample_size(direct_series)) +
              std::sqrt(variance(mcmc_series) / effective_sample_size(mcmc_series));
  CHECK(std::abs(mean(direct_series) - mean(mcmc_series)) < 4.0 * se);
}

TEST_CASE("MCMC is deterministic given the seed") {
  GGEConfig cfg = toda_quadratic(8);
  cfg.potential = parse_polynomial("x^4 + x^2/2");
  SamplerSettings st;
  st.count = 50;
  st.rng_seed = 21;
  SampleBatch b1 = sample_mcmc(cfg, st);
  SampleBatch b2 = sample_mcmc(cfg, st);
  REQUIRE(b1.draws.size() == b2.draws.size());
  for (size_t d = 0; d < b1.draws.size(); ++d) {
    CHECK((b1.draws[d].a - b2.draws[d].a).cwiseAbs().maxCoeff() == 0.0);
    CHECK((b1.draws[d].b - b2.draws[d].b).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("CMV direct sampler at constant potential") {
  GGEConfig cfg;
  cfg.kind = model_from_name("cmv");
  cfg.alpha = 2.0;
  cfg.N = 12;  // 24 disk coordinates
  SampleBatch b = sample_direct(cfg, 4000, 8);
  double m = 0;
  std::int64_t cnt = 0;
  for (const auto& c : b.draws)
    for (int i = 0; i < c.a.size(); ++i, ++cnt) {
      CHECK(std::abs(c.a[i]) < 1.0);
      m += std::norm(c.a[i]);
    }
  // |a|^2 ~ Beta(1, alpha): mean 1/(1+alpha)
  CHECK(m / cnt == doctest::Approx(1.0 / 3.0).epsilon(0.03));
}

TEST_CASE("observable kinds and names") {
  GGEConfig cfg = toda_quadratic(12);
  SampleBatch b = sample_direct(cfg, 50, 4);

  Observable tr2;
  tr2.kind = Observable::ReTracePower;
  tr2.s = 2;
  CHECK(tr2.name() == "re_tr_L^2");
  VecD series = observable_series(b, tr2);
  for (int d = 0; d < 5; ++d) {
    double expect = trace_power(cfg.kind, b.draws[d], 2).real();
    CHECK(series[d] == doctest::Approx(expect).epsilon(1e-13));
  }

  Observable h2;
  h2.kind = Observable::LocalField;
  h2.m = 2;
  h2.j = 3;
  CHECK(h2.name() == "h2_site3");
  VecD hs = observable_series(b, h2);
  auto terms = motzkin_terms(2);
  CHECK(hs[0] == doctest::Approx(local_field(terms, 3, b.draws[0])).epsilon(1e-13));

  Observable cur;
  cur.kind = Observable::Current;
  cur.n = 1;
  cur.j = 0;
  VecD cs = observable_series(b, cur);
  // [L L_down]_00 for Toda: b_0^2-type local product; check against the bands
  BandZ L = band_matrix(cfg.kind, b.draws[0]);
  BandZ Ldown;
  Ldown.n = L.n;
  Ldown.wrap = true;
  Ldown.diags[L.n - 1] = L.diags.at(L.n - 1);  // keep only the lower shift
  cplx expect = band_entry(band_mul(L, Ldown), 0, 0);
  CHECK(cs[0] == doctest::Approx(expect.real()).epsilon(1e-12));
}

TEST_CASE("binary sample files round-trip exactly") {
  GGEConfig cfg = toda_quadratic(8);
  SampleBatch b = sample_direct(cfg, 64, 12);
  Observable obs;
  std::vector<std::pair<std::string, VecD>> cols;
  cols.emplace_back(obs.name(), observable_series(b, obs));
  std::string path = "test_samples_roundtrip.bin";
  write_samples_binary(path, b, cols);
  SampleTable t = read_samples_binary(path);
  REQUIRE(t.names.size() == 1);
  CHECK(t.names[0] == "re_tr_L^2");
  REQUIRE(t.columns.size() == 1);
  REQUIRE(t.columns[0].size() == cols[0].second.size());
  for (int i = 0; i < t.columns[0].size(); ++i) CHECK(t.columns[0][i] == cols[0].second[i]);
  CHECK(t.header_json.find("toda") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("sampler rejects invalid configurations") {
  GGEConfig cfg = toda_quadratic(16);
  cfg.potential = parse_polynomial("x^3");  // odd Toda potential
  SamplerSettings st;
  st.count = 100;
  CHECK_THROWS_AS(sample_mcmc(cfg, st), Error);
}
