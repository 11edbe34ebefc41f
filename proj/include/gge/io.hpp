#pragma once
// Experiment specs and artifact serialization: a key/value config format with
// nested tables (JSON accepted as an alternative), canonical JSON emission
// with 17-significant-digit doubles, and the spec <-> JSON round trip.

#include <string>
#include <vector>

#include <json.hpp>

#include "gge/common.hpp"
#include "gge/sampling.hpp"
#include "gge/transferop.hpp"

namespace gge {

using ojson = nlohmann::ordered_json;

// Canonical serializer: insertion-ordered keys, 2-space indent, doubles
// printed with %.17g. Identical values produce identical bytes, which is what
// the determinism contract of `run` is checked against.
std::string dump_json17(const ojson& v, int indent = 2);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// ------------------------------------------------------------------ tasks

enum class TaskKind {
  Sample,
  Transfer,
  VerifyCLT,
  Susceptibility,
  Decay,
  BerryEsseen,
  SeedsCheck,
  Currents,
};

struct Task {
  TaskKind kind = TaskKind::Sample;
  std::vector<int> args;  // susceptibility: (m, n); currents: (n)
};

// Canonical text form: "sample", "susceptibility(1,2)", "currents(1)", ...
std::string task_name(const Task& t);
Task parse_task(const std::string& text);

// ------------------------------------------------------------------ specs

struct ExperimentSpec {
  std::string name;
  GGEConfig gge;               // model, measure type, alpha, potential, N, flags
  Observable obs;              // headline observable (Tr Re|Im L^s)
  std::vector<std::int64_t> Ns = {64, 256, 1024};  // berry-esseen sizes
  SamplerSettings sampler;
  OperatorSettings op;
  std::vector<Task> tasks;
  double ks_threshold = 0.02;
  int decay_max_distance = 24;
  int decay_field_power = 2;   // local field [L^m]_jj used by the decay task
  // Standardize the CLT check by the sample's own moments instead of operator
  // or closed-form predictions (families outside the operator scope).
  bool self_standardized = false;
  std::string description;     // presets carry a one-line description
};

// Strict ingestion: unknown keys are configuration errors (DomainError).
ExperimentSpec spec_from_json(const ojson& j);
ojson spec_to_json(const ExperimentSpec& spec);

// Accepts JSON (first non-space byte '{') or the key = value format:
//   name = "toda-quadratic-clt"     # comment
//   alpha = 1.0
//   tasks = ["sample", "verify-clt"]
//   [sampler]
//   count = 20000
ExperimentSpec parse_spec_text(const std::string& text);
ExperimentSpec load_spec_file(const std::string& path);

// ------------------------------------------------------------------ helpers

// Potential round trip: canonical form is an array of [re, im] coefficient
// pairs, lowest degree first; plain numbers and "x^2/2"-style strings are
// accepted on input.
ojson potential_to_json(const PolyZ& P);
PolyZ potential_from_json(const ojson& j);

const char* obs_part_name(ObsPart p);
ObsPart obs_part_from_name(const std::string& s);

}  // namespace gge
