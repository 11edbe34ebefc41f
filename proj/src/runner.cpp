#include "gge/runner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gge/rng.hpp"
#include "gge/seeds.hpp"
#include "gge/stats.hpp"

namespace gge {

namespace {

struct Logger {
  std::ofstream file;
  bool echo = true;
  void line(const std::string& s) {
    if (file.is_open()) {
      file << s << '\n';
      file.flush();
    }
    if (echo) std::printf("%s\n", s.c_str());
  }
};

bool has_task(const ExperimentSpec& spec, TaskKind k) {
  for (const auto& t : spec.tasks)
    if (t.kind == k) return true;
  return false;
}

// Families whose kernels the operator layer discretizes; the real-coefficient
// and Jacobi-weighted CMV variants live on a different domain and are not.
bool operator_scope(const GGEConfig& cfg) {
  if (cfg.real_verblunsky || cfg.jacobi) return false;
  switch (cfg.kind.family) {
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

bool is_quadratic_toda(const GGEConfig& cfg) {
  if (cfg.kind.family != Family::TodaPeriodic && cfg.kind.family != Family::TodaNonPeriodic)
    return false;
  PolyZ P = cfg.potential;
  P.trim();
  if (P.degree() != 2 || P.coeff(2) != cplx(0.5, 0.0)) return false;
  return P.coeff(1) == cplx(0.0, 0.0);
}

bool is_free_cmv(const GGEConfig& cfg) {
  if (!cfg.kind.cmv() || cfg.real_verblunsky || cfg.jacobi) return false;
  PolyZ P = cfg.potential;
  P.trim();
  return P.degree() <= 0 && P.coeff(0) == cplx(0.0, 0.0);
}

// Exact (A, sigma2) pairs for the product-form reference cases. The type-2
// values carry their exact finite-size corrections (site-dependent chi
// exponents sum to alpha(N-1), not alpha N), so the centering is unbiased at
// any N; both converge to the asymptotic rates 1 + alpha, 2 + 2 alpha.
bool closed_form_predictions(const GGEConfig& cfg, const Observable& obs, CLTQuantities* out) {
  if (obs.kind == Observable::ImTracePower) return false;
  const double a = cfg.alpha;
  if (is_quadratic_toda(cfg)) {
    if (obs.s == 1) {
      *out = CLTQuantities{0.0, 1.0, 0.0, 1.0, 0.0, 0.0, true};
      return true;
    }
    if (obs.s == 2) {
      const double fs = a / static_cast<double>(cfg.N);
      *out = CLTQuantities{1.0 + 2.0 * a, 2.0 + 4.0 * a, 1.0 + a - fs,
                           2.0 + 2.0 * a - 2.0 * fs, 0.0, 0.0, true};
      return true;
    }
    return false;
  }
  if (is_free_cmv(cfg) && obs.s == 1) {
    // i.i.d. (resp. independent) rotation-invariant coefficients: Re Tr L has
    // mean 0, per-coordinate variance 1/(2(1+alpha)^2); the scaled-parameter
    // rate integrates to 1/(2(1+alpha)).
    *out = CLTQuantities{0.0, 0.5 / ((1.0 + a) * (1.0 + a)), 0.0, 0.5 / (1.0 + a),
                         0.0, 0.0, true};
    return true;
  }
  return false;
}

ObsPart obs_part(const Observable& obs) {
  return obs.kind == Observable::ImTracePower ? ObsPart::Im : ObsPart::Re;
}

ojson value_se_json(const ValueWithSE& v) {
  return ojson{{"value", v.value}, {"se", v.se}};
}

ojson vecd_json(const VecD& v) {
  ojson a = ojson::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

struct Ctx {
  const ExperimentSpec& spec;
  std::string dir;
  Logger log;
  std::vector<std::string> failed;

  SampleBatch batch;
  bool have_batch = false;

  CLTQuantities op_pred;
  bool have_op_pred = false;
  ojson op_json;
  bool have_op_json = false;
  ojson currents_json = ojson::array();

  explicit Ctx(const ExperimentSpec& s) : spec(s) {}

  void check(const std::string& name, bool ok, const std::string& detail = "") {
    log.line(std::string(ok ? "[ok]   " : "[FAIL] ") + name +
             (detail.empty() ? "" : " (" + detail + ")"));
    if (!ok) failed.push_back(name);
  }
};

// ------------------------------------------------------------ validation

void validate(const ExperimentSpec& spec) {
  require(!spec.tasks.empty(), ErrorCode::DomainError, "no tasks requested");
  const GGEConfig& cfg = spec.gge;
  PolyZ P = cfg.potential;
  P.trim();
  if (P.degree() >= 1) check_potential(cfg.kind, P);
  weight_table(cfg);  // validates model/measure/flag combinations
  require(spec.obs.s >= 1 && spec.obs.s <= 8, ErrorCode::DomainError,
          "observable power must be in [1, 8]");
  if (obs_part(spec.obs) == ObsPart::Im)
    require(!real_valued_traces(cfg.kind), ErrorCode::DomainError,
            "imaginary part of a real trace is identically zero");
  require(spec.sampler.count >= 100, ErrorCode::DomainError,
          "sampler.count must be at least 100");
  require(spec.ks_threshold > 0.0 && spec.ks_threshold < 1.0, ErrorCode::DomainError,
          "ks_threshold must lie in (0, 1)");

  const bool sample = has_task(spec, TaskKind::Sample);
  const bool transfer = has_task(spec, TaskKind::Transfer);
  const bool scope = operator_scope(cfg);
  CLTQuantities cf;
  const bool closed = closed_form_predictions(cfg, spec.obs, &cf);

  for (const auto& t : spec.tasks) {
    switch (t.kind) {
      case TaskKind::Transfer:
        require(scope, ErrorCode::DomainError,
                "transfer: model outside the transfer-operator scope");
        if (cfg.type == MeasureType::Type2)
          require(spec.op.with_type2, ErrorCode::DomainError,
                  "type-2 predictions need operator.with_type2 = true");
        break;
      case TaskKind::VerifyCLT:
        require(sample, ErrorCode::DomainError, "verify-clt requires the sample task");
        require((transfer && scope) || closed || spec.self_standardized,
                ErrorCode::DomainError,
                "verify-clt needs operator predictions (transfer task), a closed-form "
                "reference, or self_standardized = true");
        break;
      case TaskKind::Susceptibility:
        require(t.args[0] >= 1 && t.args[0] <= 8 && t.args[1] >= 1 && t.args[1] <= 8,
                ErrorCode::DomainError, "susceptibility powers must be in [1, 8]");
        require(sample || (scope && cfg.type == MeasureType::Type1),
                ErrorCode::DomainError,
                "susceptibility needs the sample task or an operator-scope type-1 model");
        break;
      case TaskKind::Decay:
        require(sample && cfg.kind.periodic() && cfg.type == MeasureType::Type1,
                ErrorCode::DomainError, "decay requires a periodic type-1 sample");
        require(spec.decay_max_distance >= 2, ErrorCode::DomainError,
                "decay_max_distance must be at least 2");
        break;
      case TaskKind::BerryEsseen:
        require((transfer && scope) || closed, ErrorCode::DomainError,
                "berry-esseen needs operator or closed-form predictions");
        require(!spec.Ns.empty(), ErrorCode::DomainError, "berry-esseen needs Ns");
        break;
      case TaskKind::Currents:
        require(t.args[0] >= 1 && t.args[0] <= 4, ErrorCode::DomainError,
                "current power must be in [1, 4]");
        require(cfg.kind.family == Family::TodaPeriodic, ErrorCode::DomainError,
                "currents are defined for the periodic Toda lattice");
        require(P.degree() >= 2, ErrorCode::DomainError,
                "currents need a confining potential");
        break;
      default:
        break;
    }
  }
}

// ------------------------------------------------------------ tasks

void do_seeds_check(Ctx& c) {
  const GGEConfig& cfg = c.spec.gge;
  std::vector<std::pair<std::string, PolyZ>> targets;
  PolyZ P = cfg.potential;
  P.trim();
  if (P.degree() >= 1) targets.emplace_back("potential", P);
  // the observable's trace, oriented so the family admits it as a seed target
  for (double sign : {1.0, -1.0}) {
    PolyZ Ps = PolyZ::monomial(c.spec.obs.s, cplx(sign, 0.0));
    try {
      check_potential(cfg.kind, Ps);
    } catch (const Error&) {
      continue;
    }
    targets.emplace_back("observable trace", Ps);
    break;
  }
  if (targets.empty()) {
    c.log.line("seeds-check: no decomposable targets for this configuration");
    return;
  }
  for (const auto& [label, target] : targets) {
    Seed s = extract_seed(cfg.kind, target, cfg.N);
    double worst = 0.0;
    const int draws = 100;
    for (int i = 0; i < draws; ++i) {
      Coordinates coords =
          random_coordinates(cfg.kind, cfg.N, derive_seed(c.spec.sampler.rng_seed, 7000 + i));
      worst = std::max(worst, verify_decomposition(s, cfg.kind, target, coords));
    }
    c.check("seeds-check " + label + " residual < 1e-10", worst < 1e-10,
            "k=" + std::to_string(s.k) + ", max residual " + fmt17(worst));
  }
}

void do_sample(Ctx& c) {
  const ExperimentSpec& spec = c.spec;
  try {
    c.batch = sample_direct(spec.gge, spec.sampler.count, spec.sampler.rng_seed);
    c.log.line("sampler: direct (factorized, i.i.d.)");
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotFactorizable) throw;
    c.log.line("sampler: metropolis-within-gibbs");
    c.batch = sample_mcmc(spec.gge, spec.sampler);
  }
  c.have_batch = true;
  const ChainDiagnostics& d = c.batch.diag;
  c.log.line("sampler: draws=" + std::to_string(d.chain_length) +
             " burn_in=" + std::to_string(d.burn_in) + " thin=" + std::to_string(d.thin) +
             " acceptance=" + fmt17(d.acceptance_rate) + " tau=" + fmt17(d.tau_int) +
             " ess=" + fmt17(d.ess));
  if (d.mixing_warning) c.log.line("sampler: mixing warning: " + d.note);
  c.check("sample effective size >= 500", d.ess >= 500.0, "ess " + fmt17(d.ess));

  std::vector<std::pair<std::string, VecD>> cols;
  auto add_col = [&](const Observable& o) {
    std::string nm = o.name();
    for (const auto& [n, v] : cols)
      if (n == nm) return;
    cols.emplace_back(nm, observable_series(c.batch, o));
  };
  add_col(spec.obs);
  for (const auto& t : spec.tasks) {
    if (t.kind == TaskKind::Susceptibility) {
      Observable om, on;
      om.kind = on.kind = Observable::ReTracePower;
      om.s = t.args[0];
      on.s = t.args[1];
      add_col(om);
      add_col(on);
    } else if (t.kind == TaskKind::Currents) {
      Observable oc;
      oc.kind = Observable::Current;
      oc.n = t.args[0];
      oc.j = 0;
      add_col(oc);
    }
  }
  write_samples_binary(c.dir + "/samples.bin", c.batch, cols);
  c.log.line("wrote samples.bin (" + std::to_string(cols.size()) + " columns x " +
             std::to_string(c.batch.draws.size()) + " draws)");
}

void do_transfer(Ctx& c) {
  const ExperimentSpec& spec = c.spec;
  const GGEConfig& cfg = spec.gge;
  ObsPart part = obs_part(spec.obs);

  TransferKernel ker = build_kernel(cfg.kind, cfg.potential, spec.obs.s, part, cfg.alpha,
                                    0.0, spec.op);
  SpectralResult r = kernel_spectrum(ker, spec.op);
  CLTQuantities q = clt_mean_and_variance(cfg.kind, cfg.potential, spec.obs.s, part,
                                          cfg.alpha, spec.op);

  ojson j;
  j["model"] = family_name(cfg.kind.family);
  j["potential"] = potential_to_json(cfg.potential);
  j["s"] = spec.obs.s;
  j["part"] = obs_part_name(part);
  j["alpha"] = cfg.alpha;
  j["lambda"] = ojson::array({r.lambda_dom.real(), r.lambda_dom.imag()});
  j["lambda_second"] = ojson::array({r.lambda_second.real(), r.lambda_second.imag()});
  j["gap"] = r.gap;
  ojson grid = ojson::array();
  for (int g : r.grid_size) grid.push_back(g);
  j["grid"] = grid;
  ojson cuts = ojson::array();
  for (double x : ker.cutoffs) cuts.push_back(x);
  j["cutoffs"] = cuts;
  j["reweight_c"] = ker.reweight_c;
  j["circular_index"] = ker.k;
  j["A"] = q.A;
  j["sigma2"] = q.sigma2;
  if (spec.op.with_type2) {
    j["A_tilde"] = q.A_tilde;
    j["sigma2_tilde"] = q.sigma2_tilde;
    j["F2"] = q.free_energy_2;
  } else {
    j["A_tilde"] = nullptr;
    j["sigma2_tilde"] = nullptr;
    j["F2"] = nullptr;
  }
  j["F1"] = q.free_energy_1;
  j["converged"] = r.converged && q.converged;
  j["iterations"] = r.iterations;
  c.op_json = j;
  c.have_op_json = true;

  c.log.line("operator: lambda=" + fmt17(r.lambda_dom.real()) + " gap=" + fmt17(r.gap) +
             " A=" + fmt17(q.A) + " sigma2=" + fmt17(q.sigma2) +
             " F1=" + fmt17(q.free_energy_1));
  c.check("operator lambda real positive at t=0",
          r.lambda_dom.real() > 0.0 &&
              std::abs(r.lambda_dom.imag()) <= 1e-10 * std::abs(r.lambda_dom));
  c.check("operator spectral gap positive", r.gap > 0.0, "gap " + fmt17(r.gap));
  c.check("operator grid converged", r.converged && q.converged);

  c.op_pred = q;
  c.have_op_pred = true;
}

void do_verify_clt(Ctx& c) {
  const ExperimentSpec& spec = c.spec;
  const bool type2 = spec.gge.type == MeasureType::Type2;

  CLTQuantities predicted;
  std::string source;
  if (c.have_op_pred) {
    predicted = c.op_pred;
    source = "transfer-operator";
  } else if (closed_form_predictions(spec.gge, spec.obs, &predicted)) {
    source = "closed-form";
  } else {
    // standardize by the sample itself: a pure shape (normality) check
    VecD series = observable_series(c.batch, spec.obs);
    double dim = matrix_dim(spec.gge.kind, spec.gge.N);
    predicted = CLTQuantities{};
    predicted.A = mean(series) / dim;
    predicted.sigma2 = variance(series) / dim;
    predicted.A_tilde = predicted.A;
    predicted.sigma2_tilde = predicted.sigma2;
    source = "self-standardized";
  }
  CLTQuantities used = predicted;
  if (type2) {
    used.A = predicted.A_tilde;
    used.sigma2 = predicted.sigma2_tilde;
  }

  CLTReport rep = clt_check(c.batch, spec.obs, used, spec.ks_threshold);
  ojson j;
  j["N"] = rep.N;
  j["sample_count"] = rep.sample_count;
  j["observable"] = rep.observable;
  j["measure"] = measure_type_name(spec.gge.type);
  j["prediction_source"] = source;
  j["predicted_A"] = rep.predicted_A;
  j["predicted_sigma2"] = rep.predicted_sigma2;
  j["empirical_mean"] = rep.empirical_mean;
  j["empirical_mean_se"] = rep.empirical_mean_se;
  j["empirical_var"] = rep.empirical_var;
  j["empirical_var_se"] = rep.empirical_var_se;
  j["ks_distance"] = rep.ks_distance;
  j["ks_pvalue"] = rep.ks_pvalue;
  j["ks_threshold"] = spec.ks_threshold;
  j["ad_statistic"] = rep.ad_statistic;
  j["quantiles"] = vecd_json(rep.quantiles);
  j["pass"] = rep.pass;
  write_text_file(c.dir + "/clt.json", dump_json17(j));

  c.log.line("clt: source=" + source + " ks=" + fmt17(rep.ks_distance) +
             " p=" + fmt17(rep.ks_pvalue) + " mean=" + fmt17(rep.empirical_mean) +
             " var=" + fmt17(rep.empirical_var));
  c.check("clt ks distance below threshold", rep.pass,
          fmt17(rep.ks_distance) + " vs " + fmt17(spec.ks_threshold));
  if (source != "self-standardized") {
    double dm = std::abs(rep.empirical_mean - rep.predicted_A);
    double dv = std::abs(rep.empirical_var - rep.predicted_sigma2);
    c.check("clt mean matches prediction (3 se)", dm <= 3.0 * rep.empirical_mean_se,
            "diff " + fmt17(dm) + ", se " + fmt17(rep.empirical_mean_se));
    double vtol = std::max(3.0 * rep.empirical_var_se, 0.05 * std::abs(rep.predicted_sigma2));
    c.check("clt variance matches prediction (3 se / 5%)", dv <= vtol,
            "diff " + fmt17(dv) + ", tol " + fmt17(vtol));
  }
}

void do_susceptibility(Ctx& c, const std::vector<Task>& tasks) {
  const ExperimentSpec& spec = c.spec;
  const bool op_side =
      operator_scope(spec.gge) && spec.gge.type == MeasureType::Type1;
  ojson pairs = ojson::array();
  for (const auto& t : tasks) {
    int m = t.args[0], n = t.args[1];
    ojson entry;
    entry["m"] = m;
    entry["n"] = n;
    double op_val = 0.0;
    bool have_op = false;
    if (op_side) {
      op_val = susceptibility(spec.gge.kind, spec.gge.potential, m, n, spec.gge.alpha,
                              spec.op);
      entry["operator"] = op_val;
      have_op = true;
    } else {
      entry["operator"] = nullptr;
    }
    if (c.have_batch) {
      ValueWithSE emp = susceptibility_empirical(c.batch, m, n);
      entry["empirical"] = value_se_json(emp);
      if (have_op) {
        bool ok = std::abs(op_val - emp.value) <= 3.0 * emp.se;
        entry["within_3se"] = ok;
        c.check("susceptibility C(" + std::to_string(m) + "," + std::to_string(n) +
                    ") operator vs empirical (3 se)",
                ok, "op " + fmt17(op_val) + ", emp " + fmt17(emp.value) + " +- " + fmt17(emp.se));
      } else {
        entry["within_3se"] = nullptr;
      }
      c.log.line("susceptibility C(" + std::to_string(m) + "," + std::to_string(n) +
                 "): empirical " + fmt17(emp.value) + " +- " + fmt17(emp.se) +
                 (have_op ? " operator " + fmt17(op_val) : ""));
    } else {
      entry["empirical"] = nullptr;
      entry["within_3se"] = nullptr;
      c.log.line("susceptibility C(" + std::to_string(m) + "," + std::to_string(n) +
                 "): operator " + fmt17(op_val));
    }
    pairs.push_back(entry);
  }
  ojson j;
  j["pairs"] = pairs;
  write_text_file(c.dir + "/susceptibility.json", dump_json17(j));
}

void do_decay(Ctx& c) {
  const ExperimentSpec& spec = c.spec;
  Observable I;
  I.kind = Observable::LocalField;
  I.m = spec.decay_field_power;
  I.j = 0;
  DecayReport rep = correlation_decay(c.batch, I, I, spec.decay_max_distance);

  ojson j;
  ojson dist = ojson::array();
  for (int d : rep.distances) dist.push_back(d);
  j["distances"] = dist;
  j["cov_estimates"] = vecd_json(rep.cov_estimates);
  j["cov_ses"] = vecd_json(rep.cov_ses);
  ojson fr = ojson::array();
  for (int d : rep.fit_range) fr.push_back(d);
  j["fit_range"] = fr;
  j["fitted_log_slope"] = rep.fitted_log_slope;
  j["fitted_log_slope_se"] = rep.fitted_log_slope_se;
  j["fit_r2"] = rep.fit_r2;
  j["mu_hat"] = rep.mu_hat;
  j["decay_detected"] = rep.decay_detected;
  j["note"] = rep.note;
  write_text_file(c.dir + "/decay.json", dump_json17(j));

  if (!rep.decay_detected) {
    c.log.line("decay: no decay detected (" + rep.note + ") -- informational");
    return;
  }
  c.log.line("decay: slope=" + fmt17(rep.fitted_log_slope) + " +- " +
             fmt17(rep.fitted_log_slope_se) + " r2=" + fmt17(rep.fit_r2) +
             " mu_hat=" + fmt17(rep.mu_hat));
  c.check("decay log-slope negative (2 se)",
          rep.fitted_log_slope + 2.0 * rep.fitted_log_slope_se < 0.0,
          "slope " + fmt17(rep.fitted_log_slope) + " +- " + fmt17(rep.fitted_log_slope_se));
}

void do_berry_esseen(Ctx& c) {
  const ExperimentSpec& spec = c.spec;
  const bool type2 = spec.gge.type == MeasureType::Type2;
  CLTQuantities predicted;
  bool closed = false;
  if (c.have_op_pred) {
    predicted = c.op_pred;
  } else {
    closed = closed_form_predictions(spec.gge, spec.obs, &predicted);
    require(closed, ErrorCode::DomainError, "berry-esseen predictions unavailable");
  }
  auto fn = [&](std::int64_t n) {
    CLTQuantities q = predicted;
    if (closed) {
      // closed-form values carry finite-size corrections: recompute per N
      GGEConfig cn = spec.gge;
      cn.N = static_cast<int>(n);
      closed_form_predictions(cn, spec.obs, &q);
    }
    if (type2) {
      q.A = q.A_tilde;
      q.sigma2 = q.sigma2_tilde;
    }
    return q;
  };
  BerryEsseenReport rep =
      berry_esseen_scan(spec.gge, spec.obs, spec.Ns, spec.sampler.count, fn, spec.sampler);

  ojson j;
  ojson ns = ojson::array();
  for (std::int64_t n : rep.Ns) ns.push_back(n);
  j["Ns"] = ns;
  j["sup_distances"] = vecd_json(rep.sup_distances);
  j["scaled"] = vecd_json(rep.scaled);
  double ratio = 0.0;
  if (rep.scaled.size() >= 2) {
    ratio = rep.scaled.maxCoeff() / rep.scaled.minCoeff();
    j["scaled_ratio"] = ratio;
  } else {
    j["scaled_ratio"] = nullptr;
  }
  write_text_file(c.dir + "/berry_esseen.json", dump_json17(j));

  std::string row = "berry-esseen:";
  for (int i = 0; i < rep.sup_distances.size(); ++i)
    row += " N=" + std::to_string(rep.Ns[i]) + " sup=" + fmt17(rep.sup_distances[i]) +
           " scaled=" + fmt17(rep.scaled[i]);
  c.log.line(row);
  if (rep.scaled.size() >= 2)
    c.check("berry-esseen sqrt(N)-scaled distance stable (ratio < 3)", ratio < 3.0,
            "ratio " + fmt17(ratio));
}

void do_currents(Ctx& c, const std::vector<Task>& tasks) {
  const ExperimentSpec& spec = c.spec;
  for (const auto& t : tasks) {
    int n = t.args[0];
    CurrentMean cm = toda_current_mean_detail(spec.gge.potential, n, spec.gge.alpha, spec.op);
    ojson entry;
    entry["n"] = n;
    entry["integral_form"] = cm.integral_form;
    entry["derivative_form"] = cm.derivative_form;
    entry["forms_agree"] = cm.within_tol;
    c.log.line("current n=" + std::to_string(n) + ": integral " + fmt17(cm.integral_form) +
               ", derivative " + fmt17(cm.derivative_form));
    c.check("current n=" + std::to_string(n) + " dual forms agree (1e-3)", cm.within_tol);
    if (c.have_batch) {
      Observable oc;
      oc.kind = Observable::Current;
      oc.n = n;
      oc.j = 0;
      VecD series = observable_series(c.batch, oc);
      double emp = mean(series);
      double se = batch_means_se(series);
      entry["empirical"] = ojson{{"value", emp}, {"se", se}};
      bool ok = std::abs(emp - cm.integral_form) <= 3.0 * se;
      entry["within_3se"] = ok;
      c.check("current n=" + std::to_string(n) + " operator vs empirical (3 se)", ok,
              "op " + fmt17(cm.integral_form) + ", emp " + fmt17(emp) + " +- " + fmt17(se));
    } else {
      entry["empirical"] = nullptr;
      entry["within_3se"] = nullptr;
    }
    c.currents_json.push_back(entry);
  }
}

}  // namespace

RunOutcome run_experiment(const ExperimentSpec& spec, const std::string& out_root, bool echo) {
  RunOutcome out;
  Ctx c(spec);
  c.log.echo = echo;

  // artifact directory + log first so configuration failures are recorded
  std::error_code fs_err;
  std::filesystem::create_directories(out_root, fs_err);
  c.dir = out_root + "/" + (spec.name.empty() ? "unnamed" : spec.name);
  std::filesystem::create_directories(c.dir, fs_err);
  if (fs_err) {
    if (echo) std::printf("cannot create '%s': %s\n", c.dir.c_str(), fs_err.message().c_str());
    out.exit_code = 2;
    return out;
  }
  out.dir = c.dir;
  c.log.file.open(c.dir + "/log.txt", std::ios::trunc);
  c.log.line("experiment: " + spec.name);

  try {
    validate(spec);
  } catch (const std::exception& e) {
    c.log.line(std::string("configuration error: ") + e.what());
    out.exit_code = 2;
    return out;
  }
  write_text_file(c.dir + "/spec.json", dump_json17(spec_to_json(spec)));

  // fixed execution order satisfying task prerequisites
  std::vector<Task> susc, curr;
  for (const auto& t : spec.tasks) {
    if (t.kind == TaskKind::Susceptibility) susc.push_back(t);
    if (t.kind == TaskKind::Currents) curr.push_back(t);
  }
  try {
    if (has_task(spec, TaskKind::SeedsCheck)) do_seeds_check(c);
    if (has_task(spec, TaskKind::Sample)) do_sample(c);
    if (has_task(spec, TaskKind::Transfer)) do_transfer(c);
    if (has_task(spec, TaskKind::VerifyCLT)) do_verify_clt(c);
    if (!susc.empty()) do_susceptibility(c, susc);
    if (has_task(spec, TaskKind::Decay)) do_decay(c);
    if (has_task(spec, TaskKind::BerryEsseen)) do_berry_esseen(c);
    if (!curr.empty()) do_currents(c, curr);
  } catch (const std::exception& e) {
    c.log.line(std::string("task failed: ") + e.what());
    c.failed.push_back(std::string("exception: ") + e.what());
  }
  if (c.have_op_json) {
    if (!c.currents_json.empty()) c.op_json["currents"] = c.currents_json;
    write_text_file(c.dir + "/operator.json", dump_json17(c.op_json));
  }

  out.failed_checks = c.failed;
  out.exit_code = c.failed.empty() ? 0 : 1;
  c.log.line(out.exit_code == 0 ? "result: all checks passed"
                                : "result: " + std::to_string(c.failed.size()) +
                                      " check(s) failed");
  return out;
}

int run_spec_file(const std::string& path, const std::string& out_root, bool echo) {
  ExperimentSpec spec;
  try {
    spec = load_spec_file(path);
  } catch (const std::exception& e) {
    if (echo) std::printf("configuration error: %s\n", e.what());
    return 2;
  }
  return run_experiment(spec, out_root, echo).exit_code;
}

}  // namespace gge
