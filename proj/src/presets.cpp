#include "gge/presets.hpp"

namespace gge {

namespace {

Task T(TaskKind k, std::vector<int> args = {}) {
  Task t;
  t.kind = k;
  t.args = std::move(args);
  return t;
}

ExperimentSpec base_spec(const std::string& name, const std::string& descr,
                         const std::string& model, MeasureType type, double alpha,
                         const std::string& potential, int s, int N) {
  ExperimentSpec sp;
  sp.name = name;
  sp.description = descr;
  sp.gge.kind = model_from_name(model);
  sp.gge.type = type;
  sp.gge.alpha = alpha;
  if (!potential.empty()) sp.gge.potential = parse_polynomial(potential);
  sp.gge.N = N;
  sp.obs.kind = Observable::ReTracePower;
  sp.obs.s = s;
  sp.sampler.count = 20000;
  sp.sampler.rng_seed = 1;
  sp.tasks = {T(TaskKind::SeedsCheck), T(TaskKind::Sample), T(TaskKind::VerifyCLT)};
  return sp;
}

std::vector<ExperimentSpec> build_all() {
  std::vector<ExperimentSpec> all;

  {
    auto sp = base_spec("toda-quadratic-clt", "CLT for the Toda lattice", "toda",
                        MeasureType::Type1, 1.0, "x^2/2", 2, 256);
    sp.tasks = {T(TaskKind::SeedsCheck),
                T(TaskKind::Sample),
                T(TaskKind::Transfer),
                T(TaskKind::VerifyCLT),
                T(TaskKind::Susceptibility, {1, 1}),
                T(TaskKind::Susceptibility, {1, 2}),
                T(TaskKind::Susceptibility, {2, 2})};
    all.push_back(sp);
  }
  {
    auto sp = base_spec("toda-quartic-clt",
                        "CLT for the Toda lattice with a quartic potential", "toda",
                        MeasureType::Type1, 1.0, "x^4 + x^2/2", 2, 256);
    sp.op.nodes_per_dim = 48;   // narrow quartic domain: 48 nodes already converged
    sp.op.with_type2 = false;   // type-1 measure: skip the scaled-parameter integrals
    sp.Ns = {64, 128, 256};
    sp.tasks = {T(TaskKind::SeedsCheck),
                T(TaskKind::Sample),
                T(TaskKind::Transfer),
                T(TaskKind::VerifyCLT),
                T(TaskKind::Susceptibility, {2, 2}),
                T(TaskKind::Decay),
                T(TaskKind::BerryEsseen),
                T(TaskKind::Currents, {1})};
    all.push_back(sp);
  }
  {
    auto sp = base_spec("real-beta-ht-clt", "CLT for real, high temperature β-ensemble",
                        "toda-ht", MeasureType::Type2, 1.0, "x^2/2", 2, 256);
    sp.tasks = {T(TaskKind::SeedsCheck), T(TaskKind::Sample), T(TaskKind::Transfer),
                T(TaskKind::VerifyCLT)};
    all.push_back(sp);
  }
  {
    auto sp = base_spec("exp-toda-clt", "CLT for the Exponential Toda lattice",
                        "exp-toda", MeasureType::Type1, 1.0, "x", 1, 256);
    sp.self_standardized = true;  // family outside the operator scope
    sp.ks_threshold = 0.03;
    all.push_back(sp);
  }
  {
    auto sp = base_spec("laguerre-ht-clt", "CLT for Laguerre β-ensemble", "laguerre-ht",
                        MeasureType::Type2, 1.0, "x", 1, 256);
    sp.self_standardized = true;
    sp.ks_threshold = 0.03;
    all.push_back(sp);
  }
  {
    auto sp = base_spec("volterra-clt", "CLT for Volterra lattice", "volterra",
                        MeasureType::Type1, 1.0, "-x^2", 2, 256);
    sp.tasks = {T(TaskKind::SeedsCheck), T(TaskKind::Sample), T(TaskKind::Transfer),
                T(TaskKind::VerifyCLT)};
    all.push_back(sp);
  }
  {
    auto sp = base_spec("antisymmetric-ht-clt", "CLT for Antisymmetric β-ensemble",
                        "antisym-ht", MeasureType::Type2, 1.0, "-x^2", 2, 128);
    sp.tasks = {T(TaskKind::SeedsCheck), T(TaskKind::Sample), T(TaskKind::Transfer),
                T(TaskKind::VerifyCLT)};
    all.push_back(sp);
  }
  {
    auto sp = base_spec("ablowitz-ladik-clt", "CLT for defocusing Ablowitz–Ladik lattice",
                        "cmv", MeasureType::Type1, 1.0, "x", 1, 128);
    sp.tasks = {T(TaskKind::SeedsCheck), T(TaskKind::Sample), T(TaskKind::Transfer),
                T(TaskKind::VerifyCLT)};
    all.push_back(sp);
  }
  {
    auto sp = base_spec("circular-beta-ht-clt", "CLT for Circular β-ensemble", "cmv-ht",
                        MeasureType::Type2, 2.0, "", 1, 256);
    sp.tasks = {T(TaskKind::SeedsCheck), T(TaskKind::Sample), T(TaskKind::Transfer),
                T(TaskKind::VerifyCLT)};
    all.push_back(sp);
  }
  {
    auto sp = base_spec("schur-flow-clt", "CLT for defocusing Schur flow", "cmv",
                        MeasureType::Type1, 1.5, "", 1, 256);
    sp.gge.real_verblunsky = true;  // interval (-1,1) coefficients, no disk operator
    sp.self_standardized = true;
    sp.ks_threshold = 0.03;
    all.push_back(sp);
  }
  {
    auto sp = base_spec("jacobi-ht-clt",
                        "CLT for Jacobi β-ensemble in the high-temperature regime",
                        "cmv-ht", MeasureType::Type2, 1.0, "", 1, 128);
    sp.gge.real_verblunsky = true;
    sp.gge.jacobi = true;
    // restricted parameter pair (sum = -1 + alpha/2N) where the periodic
    // correspondence with the Schur-flow measure holds
    sp.gge.jacobi_ta = sp.gge.jacobi_tb = 0.5 * (-1.0 + sp.gge.alpha / (2.0 * sp.gge.N));
    sp.self_standardized = true;
    sp.ks_threshold = 0.03;
    all.push_back(sp);
  }
  {
    auto sp = base_spec("inb-clt", "CLT for INB lattices", "inb-add",
                        MeasureType::Type1, 1.0, "x^3/3", 3, 128);
    sp.gge.kind.r = 2;
    sp.self_standardized = true;
    sp.ks_threshold = 0.03;
    all.push_back(sp);
  }
  return all;
}

const std::vector<ExperimentSpec>& all_presets() {
  static const std::vector<ExperimentSpec> all = build_all();
  return all;
}

}  // namespace

std::vector<PresetInfo> preset_list() {
  std::vector<PresetInfo> out;
  for (const auto& sp : all_presets()) out.push_back({sp.name, sp.description});
  return out;
}

ExperimentSpec preset_spec(const std::string& name) {
  for (const auto& sp : all_presets())
    if (sp.name == name) return sp;
  fail(ErrorCode::DomainError, "unknown preset '" + name + "'");
}

}  // namespace gge
