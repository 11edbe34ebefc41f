#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "gge/presets.hpp"
#include "gge/runner.hpp"
#include "gge/seeds.hpp"

namespace {

void apply_threads(int flag_value) {
  // env var wins over the flag; otherwise flag; otherwise hardware default
  if (const char* env = std::getenv("GGE_SPECTRA_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) {
      gge::thread_count() = n;
      return;
    }
  }
  gge::thread_count() = flag_value > 0 ? flag_value : gge::default_threads();
}

int cmd_run(const std::string& spec_arg, const std::string& out_root) {
  if (std::filesystem::exists(spec_arg))
    return gge::run_spec_file(spec_arg, out_root, true);
  // not a file: accept a preset name
  try {
    gge::ExperimentSpec spec = gge::preset_spec(spec_arg);
    return gge::run_experiment(spec, out_root, true).exit_code;
  } catch (const gge::Error&) {
    std::fprintf(stderr, "error: '%s' is neither a spec file nor a preset name\n",
                 spec_arg.c_str());
    return 2;
  }
}

int cmd_presets(bool as_json) {
  auto list = gge::preset_list();
  if (!as_json) {
    std::size_t width = 0;
    for (const auto& p : list) width = std::max(width, p.name.size());
    for (const auto& p : list)
      std::printf("%-*s  %s\n", static_cast<int>(width), p.name.c_str(),
                  p.description.c_str());
    return 0;
  }
  gge::ojson arr = gge::ojson::array();
  for (const auto& p : list) {
    gge::ojson e;
    e["name"] = p.name;
    e["description"] = p.description;
    e["spec"] = gge::spec_to_json(gge::preset_spec(p.name));
    arr.push_back(e);
  }
  std::printf("%s", gge::dump_json17(arr).c_str());
  return 0;
}

int cmd_seeds_print(const std::string& model_name, const std::string& potential_text,
                    int N, int force_k, int r) {
  gge::ModelKind kind = gge::model_from_name(model_name, r);
  gge::PolyZ P = gge::parse_polynomial(potential_text);
  gge::Seed seed = gge::extract_seed(kind, P, N, force_k);

  std::fprintf(stderr, "model=%s N=%d k=%d stride=%d take_real=%s blocks=%lld\n",
               model_name.c_str(), N, seed.k, seed.stride,
               seed.take_real ? "true" : "false",
               static_cast<long long>(gge::seed_block_count(seed, N)));
  if (seed.lb_warning)
    std::fprintf(stderr, "lower_bound: not certified\n");
  else
    std::fprintf(stderr, "lower_bound=%s\n", gge::fmt17(seed.lower_bound).c_str());

  auto names = gge::var_names(kind);
  gge::ojson arr = gge::ojson::array();
  for (const auto& mono : seed.seed_poly.t) {
    gge::ojson e;
    e["coeff"] = gge::ojson::array({mono.coeff.real(), mono.coeff.imag()});
    gge::ojson sites = gge::ojson::array();
    for (const auto& f : mono.f) {
      gge::ojson site;
      site["offset"] = f.site;
      site["var"] = names.at(f.var);
      site["power"] = f.hp / 2.0;
      sites.push_back(site);
    }
    e["sites"] = sites;
    arr.push_back(e);
  }
  std::printf("%s", gge::dump_json17(arr).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GGE sampling and transfer-operator spectra for integrable lattices"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads (GGE_SPECTRA_THREADS env overrides)");

  std::string spec_arg, out_root = "results";
  CLI::App* run = app.add_subcommand("run", "run an experiment spec file or preset");
  run->add_option("spec", spec_arg, "spec file (JSON or key = value) or preset name")
      ->required();
  run->add_option("--out", out_root, "output root directory");

  bool as_json = false;
  CLI::App* presets = app.add_subcommand("presets", "list built-in experiments");
  presets->add_flag("--json", as_json, "emit full preset specs as JSON");

  CLI::App* seeds = app.add_subcommand("seeds", "seed decomposition utilities");
  seeds->require_subcommand(1);
  std::string model_name, potential_text;
  int N = 16, force_k = 0, r = 1;
  CLI::App* sprint =
      seeds->add_subcommand("print", "print the seed monomials of a trace observable");
  sprint->add_option("--model", model_name, "model name (e.g. toda, volterra, cmv)")
      ->required();
  sprint->add_option("--potential", potential_text, "potential polynomial, e.g. \"x^4\"")
      ->required();
  sprint->add_option("--N", N, "lattice size fixing the block layout");
  sprint->add_option("--k", force_k, "force the circular index (0 = natural)");
  sprint->add_option("--r", r, "INB bandwidth");

  CLI11_PARSE(app, argc, argv);
  apply_threads(threads);

  try {
    if (run->parsed()) return cmd_run(spec_arg, out_root);
    if (presets->parsed()) return cmd_presets(as_json);
    if (sprint->parsed()) return cmd_seeds_print(model_name, potential_text, N, force_k, r);
  } catch (const gge::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
