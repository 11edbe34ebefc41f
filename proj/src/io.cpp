#include "gge/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gge {

namespace {

void json_escape(std::string& out, const std::string& s) {
  out += '"';
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += '"';
}

void dump_rec(std::string& out, const ojson& v, int indent, int depth) {
  const std::string pad(static_cast<size_t>(indent) * depth, ' ');
  const std::string pad_in(static_cast<size_t>(indent) * (depth + 1), ' ');
  switch (v.type()) {
    case ojson::value_t::null: out += "null"; break;
    case ojson::value_t::boolean: out += v.get<bool>() ? "true" : "false"; break;
    case ojson::value_t::number_integer:
      out += std::to_string(v.get<std::int64_t>());
      break;
    case ojson::value_t::number_unsigned:
      out += std::to_string(v.get<std::uint64_t>());
      break;
    case ojson::value_t::number_float: {
      double d = v.get<double>();
      out += std::isfinite(d) ? fmt17(d) : "null";
      break;
    }
    case ojson::value_t::string: json_escape(out, v.get<std::string>()); break;
    case ojson::value_t::array: {
      if (v.empty()) {
        out += "[]";
        break;
      }
      // scalar-only arrays stay on one line
      bool flat = true;
      for (const auto& e : v)
        if (e.is_object() || e.is_array()) flat = false;
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += flat ? ", " : ",";
        if (!flat) out += "\n" + pad_in;
        first = false;
        dump_rec(out, e, indent, depth + 1);
      }
      if (!flat) out += "\n" + pad;
      out += ']';
      break;
    }
    case ojson::value_t::object: {
      if (v.empty()) {
        out += "{}";
        break;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        json_escape(out, it.key());
        out += ": ";
        dump_rec(out, it.value(), indent, depth + 1);
      }
      out += "\n" + pad + "}";
      break;
    }
    default: out += "null";
  }
}

}  // namespace

std::string dump_json17(const ojson& v, int indent) {
  std::string out;
  dump_rec(out, v, indent, 0);
  out += '\n';
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::DomainError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::DomainError, "cannot write '" + path + "'");
  out << text;
  require(out.good(), ErrorCode::DomainError, "short write to '" + path + "'");
}

// ------------------------------------------------------------------ tasks

std::string task_name(const Task& t) {
  switch (t.kind) {
    case TaskKind::Sample: return "sample";
    case TaskKind::Transfer: return "transfer";
    case TaskKind::VerifyCLT: return "verify-clt";
    case TaskKind::Susceptibility:
      return "susceptibility(" + std::to_string(t.args[0]) + "," +
             std::to_string(t.args[1]) + ")";
    case TaskKind::Decay: return "decay";
    case TaskKind::BerryEsseen: return "berry-esseen";
    case TaskKind::SeedsCheck: return "seeds-check";
    case TaskKind::Currents: return "currents(" + std::to_string(t.args[0]) + ")";
  }
  return "?";
}

Task parse_task(const std::string& text) {
  std::string head = text;
  std::vector<int> args;
  auto paren = text.find('(');
  if (paren != std::string::npos) {
    require(text.back() == ')', ErrorCode::DomainError,
            "malformed task '" + text + "'");
    head = text.substr(0, paren);
    std::string inner = text.substr(paren + 1, text.size() - paren - 2);
    std::istringstream ss(inner);
    std::string piece;
    while (std::getline(ss, piece, ',')) {
      size_t used = 0;
      int v = std::stoi(piece, &used);
      require(used > 0, ErrorCode::DomainError, "bad task argument in '" + text + "'");
      args.push_back(v);
    }
  }
  Task t;
  t.args = args;
  auto want = [&](TaskKind k, size_t nargs) {
    require(args.size() == nargs, ErrorCode::DomainError,
            "task '" + head + "' takes " + std::to_string(nargs) + " argument(s)");
    t.kind = k;
    return t;
  };
  if (head == "sample") return want(TaskKind::Sample, 0);
  if (head == "transfer") return want(TaskKind::Transfer, 0);
  if (head == "verify-clt") return want(TaskKind::VerifyCLT, 0);
  if (head == "susceptibility") return want(TaskKind::Susceptibility, 2);
  if (head == "decay") return want(TaskKind::Decay, 0);
  if (head == "berry-esseen") return want(TaskKind::BerryEsseen, 0);
  if (head == "seeds-check") return want(TaskKind::SeedsCheck, 0);
  if (head == "currents") return want(TaskKind::Currents, 1);
  fail(ErrorCode::DomainError, "unknown task '" + head + "'");
}

// ------------------------------------------------------------------ pieces

ojson potential_to_json(const PolyZ& P) {
  ojson arr = ojson::array();
  for (const cplx& c : P.c) arr.push_back(ojson::array({c.real(), c.imag()}));
  return arr;
}

PolyZ potential_from_json(const ojson& j) {
  PolyZ P;
  if (j.is_string()) return parse_polynomial(j.get<std::string>());
  require(j.is_array(), ErrorCode::DomainError,
          "potential must be a string or a coefficient array");
  for (const auto& e : j) {
    if (e.is_number()) {
      P.c.emplace_back(e.get<double>(), 0.0);
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      P.c.emplace_back(e[0].get<double>(), e[1].get<double>());
    } else {
      fail(ErrorCode::DomainError, "potential coefficients must be numbers or [re, im] pairs");
    }
  }
  P.trim();
  return P;
}

const char* obs_part_name(ObsPart p) { return p == ObsPart::Re ? "re" : "im"; }

ObsPart obs_part_from_name(const std::string& s) {
  if (s == "re" || s == "Re") return ObsPart::Re;
  if (s == "im" || s == "Im") return ObsPart::Im;
  fail(ErrorCode::DomainError, "observable part must be 're' or 'im'");
}

// ------------------------------------------------------------------ spec <-> json

namespace {

// pulls j[key] if present, enforcing that every key is eventually consumed
struct StrictObject {
  const ojson& j;
  std::vector<std::string> seen;
  explicit StrictObject(const ojson& jj) : j(jj) {
    require(j.is_object(), ErrorCode::DomainError, "expected a table/object");
  }
  const ojson* get(const std::string& key) {
    seen.push_back(key);
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
  }
  void finish(const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool ok = false;
      for (const auto& s : seen)
        if (s == it.key()) ok = true;
      require(ok, ErrorCode::DomainError,
              "unknown key '" + it.key() + "' in " + where);
    }
  }
};

double as_num(const ojson& v, const std::string& what) {
  require(v.is_number(), ErrorCode::DomainError, what + " must be a number");
  return v.get<double>();
}

std::int64_t as_int(const ojson& v, const std::string& what) {
  require(v.is_number_integer() || v.is_number_unsigned(), ErrorCode::DomainError,
          what + " must be an integer");
  return v.get<std::int64_t>();
}

std::string as_str(const ojson& v, const std::string& what) {
  require(v.is_string(), ErrorCode::DomainError, what + " must be a string");
  return v.get<std::string>();
}

bool as_bool(const ojson& v, const std::string& what) {
  require(v.is_boolean(), ErrorCode::DomainError, what + " must be true/false");
  return v.get<bool>();
}

}  // namespace

ExperimentSpec spec_from_json(const ojson& j) {
  StrictObject top(j);
  ExperimentSpec spec;

  const ojson* v = top.get("name");
  require(v != nullptr, ErrorCode::DomainError, "spec needs a 'name'");
  spec.name = as_str(*v, "name");
  require(!spec.name.empty() &&
              spec.name.find('/') == std::string::npos &&
              spec.name.find("..") == std::string::npos,
          ErrorCode::DomainError, "name must be a plain directory-safe token");

  if ((v = top.get("description"))) spec.description = as_str(*v, "description");

  int r = 1;
  if ((v = top.get("r"))) r = static_cast<int>(as_int(*v, "r"));
  v = top.get("model");
  require(v != nullptr, ErrorCode::DomainError, "spec needs a 'model'");
  spec.gge.kind = model_from_name(as_str(*v, "model"), r);

  if ((v = top.get("measure")))
    spec.gge.type = measure_type_from_name(as_str(*v, "measure"));
  else
    spec.gge.type = spec.gge.kind.periodic() ? MeasureType::Type1 : MeasureType::Type2;

  if ((v = top.get("alpha"))) spec.gge.alpha = as_num(*v, "alpha");
  require(spec.gge.alpha > 0.0, ErrorCode::DomainError, "alpha must be positive");

  if ((v = top.get("potential"))) spec.gge.potential = potential_from_json(*v);

  if ((v = top.get("N"))) spec.gge.N = static_cast<int>(as_int(*v, "N"));
  require(spec.gge.N >= 2, ErrorCode::DomainError, "N must be at least 2");

  if ((v = top.get("Ns"))) {
    require(v->is_array() && !v->empty(), ErrorCode::DomainError,
            "Ns must be a non-empty array of integers");
    spec.Ns.clear();
    for (const auto& e : *v) spec.Ns.push_back(as_int(e, "Ns entry"));
  }

  if ((v = top.get("real_verblunsky")))
    spec.gge.real_verblunsky = as_bool(*v, "real_verblunsky");
  if ((v = top.get("jacobi"))) spec.gge.jacobi = as_bool(*v, "jacobi");
  if ((v = top.get("jacobi_ta"))) spec.gge.jacobi_ta = as_num(*v, "jacobi_ta");
  if ((v = top.get("jacobi_tb"))) spec.gge.jacobi_tb = as_num(*v, "jacobi_tb");

  if ((v = top.get("observable"))) {
    StrictObject ob(*v);
    if (const ojson* s = ob.get("s")) spec.obs.s = static_cast<int>(as_int(*s, "observable.s"));
    if (const ojson* p = ob.get("part"))
      spec.obs.kind = obs_part_from_name(as_str(*p, "observable.part")) == ObsPart::Re
                          ? Observable::ReTracePower
                          : Observable::ImTracePower;
    ob.finish("observable");
  }

  if ((v = top.get("sampler"))) {
    StrictObject sm(*v);
    if (const ojson* e = sm.get("count")) spec.sampler.count = as_int(*e, "sampler.count");
    if (const ojson* e = sm.get("burn_in")) spec.sampler.burn_in = as_int(*e, "sampler.burn_in");
    if (const ojson* e = sm.get("thin")) spec.sampler.thin = as_int(*e, "sampler.thin");
    if (const ojson* e = sm.get("chains"))
      spec.sampler.chains = static_cast<int>(as_int(*e, "sampler.chains"));
    if (const ojson* e = sm.get("rng_seed"))
      spec.sampler.rng_seed = static_cast<std::uint64_t>(as_int(*e, "sampler.rng_seed"));
    if (const ojson* e = sm.get("step_init")) spec.sampler.step_init = as_num(*e, "sampler.step_init");
    sm.finish("sampler");
  }

  if ((v = top.get("operator"))) {
    StrictObject op(*v);
    if (const ojson* e = op.get("nodes_per_dim"))
      spec.op.nodes_per_dim = static_cast<int>(as_int(*e, "operator.nodes_per_dim"));
    if (const ojson* e = op.get("delta_t")) spec.op.delta_t = as_num(*e, "operator.delta_t");
    if (const ojson* e = op.get("tail_mass")) spec.op.tail_mass = as_num(*e, "operator.tail_mass");
    if (const ojson* e = op.get("max_points"))
      spec.op.max_points = static_cast<int>(as_int(*e, "operator.max_points"));
    if (const ojson* e = op.get("eig_rel_tol")) spec.op.eig_rel_tol = as_num(*e, "operator.eig_rel_tol");
    if (const ojson* e = op.get("type2_panels"))
      spec.op.type2_panels = static_cast<int>(as_int(*e, "operator.type2_panels"));
    if (const ojson* e = op.get("deriv_x_nodes"))
      spec.op.deriv_x_nodes = static_cast<int>(as_int(*e, "operator.deriv_x_nodes"));
    if (const ojson* e = op.get("current_s_nodes"))
      spec.op.current_s_nodes = static_cast<int>(as_int(*e, "operator.current_s_nodes"));
    if (const ojson* e = op.get("refine_check")) spec.op.refine_check = as_bool(*e, "operator.refine_check");
    if (const ojson* e = op.get("with_type2")) spec.op.with_type2 = as_bool(*e, "operator.with_type2");
    op.finish("operator");
  }

  if ((v = top.get("tasks"))) {
    require(v->is_array(), ErrorCode::DomainError, "tasks must be an array of strings");
    for (const auto& e : *v) spec.tasks.push_back(parse_task(as_str(e, "task")));
  }

  if ((v = top.get("ks_threshold"))) spec.ks_threshold = as_num(*v, "ks_threshold");
  if ((v = top.get("decay_max_distance")))
    spec.decay_max_distance = static_cast<int>(as_int(*v, "decay_max_distance"));
  if ((v = top.get("decay_field_power")))
    spec.decay_field_power = static_cast<int>(as_int(*v, "decay_field_power"));
  if ((v = top.get("self_standardized")))
    spec.self_standardized = as_bool(*v, "self_standardized");

  top.finish("spec");
  return spec;
}

ojson spec_to_json(const ExperimentSpec& spec) {
  ojson j;
  j["name"] = spec.name;
  if (!spec.description.empty()) j["description"] = spec.description;
  j["model"] = family_name(spec.gge.kind.family);
  if (spec.gge.kind.inb()) j["r"] = spec.gge.kind.r;
  j["measure"] = measure_type_name(spec.gge.type);
  j["alpha"] = spec.gge.alpha;
  j["potential"] = potential_to_json(spec.gge.potential);
  j["observable"] = ojson{
      {"s", spec.obs.s},
      {"part", spec.obs.kind == Observable::ImTracePower ? "im" : "re"}};
  j["N"] = spec.gge.N;
  bool has_be = false;
  for (const auto& t : spec.tasks)
    if (t.kind == TaskKind::BerryEsseen) has_be = true;
  if (has_be) {
    ojson ns = ojson::array();
    for (std::int64_t n : spec.Ns) ns.push_back(n);
    j["Ns"] = ns;
  }
  if (spec.gge.real_verblunsky) j["real_verblunsky"] = true;
  if (spec.gge.jacobi) {
    j["jacobi"] = true;
    j["jacobi_ta"] = spec.gge.jacobi_ta;
    j["jacobi_tb"] = spec.gge.jacobi_tb;
  }
  j["sampler"] = ojson{{"count", spec.sampler.count},
                       {"burn_in", spec.sampler.burn_in},
                       {"thin", spec.sampler.thin},
                       {"chains", spec.sampler.chains},
                       {"rng_seed", spec.sampler.rng_seed},
                       {"step_init", spec.sampler.step_init}};
  j["operator"] = ojson{{"nodes_per_dim", spec.op.nodes_per_dim},
                        {"delta_t", spec.op.delta_t},
                        {"tail_mass", spec.op.tail_mass},
                        {"max_points", spec.op.max_points},
                        {"eig_rel_tol", spec.op.eig_rel_tol},
                        {"type2_panels", spec.op.type2_panels},
                        {"deriv_x_nodes", spec.op.deriv_x_nodes},
                        {"current_s_nodes", spec.op.current_s_nodes},
                        {"refine_check", spec.op.refine_check},
                        {"with_type2", spec.op.with_type2}};
  ojson tasks = ojson::array();
  for (const auto& t : spec.tasks) tasks.push_back(task_name(t));
  j["tasks"] = tasks;
  j["ks_threshold"] = spec.ks_threshold;
  j["decay_max_distance"] = spec.decay_max_distance;
  j["decay_field_power"] = spec.decay_field_power;
  j["self_standardized"] = spec.self_standardized;
  return j;
}

// ------------------------------------------------------------------ text format

namespace {

struct TextParser {
  const std::string& text;
  size_t pos = 0;

  explicit TextParser(const std::string& t) : text(t) {}

  void skip_space_inline() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }
  bool at_end() const { return pos >= text.size(); }

  std::string line() {
    size_t start = pos;
    while (pos < text.size() && text[pos] != '\n') ++pos;
    std::string s = text.substr(start, pos - start);
    if (pos < text.size()) ++pos;
    return s;
  }
};

// strips a trailing comment that is not inside a quoted string
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

ojson parse_scalar(const std::string& tok) {
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"')
    return tok.substr(1, tok.size() - 2);
  if (tok == "true") return true;
  if (tok == "false") return false;
  // integer?
  {
    size_t used = 0;
    try {
      long long iv = std::stoll(tok, &used);
      if (used == tok.size()) return iv;
    } catch (...) {
    }
  }
  {
    size_t used = 0;
    try {
      double dv = std::stod(tok, &used);
      if (used == tok.size()) return dv;
    } catch (...) {
    }
  }
  // bare word: treated as a string (model names, task names)
  require(!tok.empty(), ErrorCode::DomainError, "empty value");
  return tok;
}

ojson parse_value(const std::string& raw) {
  std::string s = trim(raw);
  require(!s.empty(), ErrorCode::DomainError, "missing value");
  if (s.front() == '[') {
    require(s.back() == ']', ErrorCode::DomainError, "unterminated array");
    ojson arr = ojson::array();
    std::string inner = s.substr(1, s.size() - 2);
    // split on commas at depth 0 (arrays of arrays supported for potentials)
    int depth = 0;
    bool quoted = false;
    std::string cur;
    auto flush = [&]() {
      std::string t = trim(cur);
      if (!t.empty()) arr.push_back(parse_value(t));
      cur.clear();
    };
    for (char ch : inner) {
      if (ch == '"') quoted = !quoted;
      if (!quoted) {
        if (ch == '[' || ch == '(') ++depth;
        if (ch == ']' || ch == ')') --depth;
        if (ch == ',' && depth == 0) {
          flush();
          continue;
        }
      }
      cur += ch;
    }
    flush();
    return arr;
  }
  return parse_scalar(s);
}

}  // namespace

ExperimentSpec parse_spec_text(const std::string& text) {
  size_t first = text.find_first_not_of(" \t\r\n");
  require(first != std::string::npos, ErrorCode::DomainError, "empty spec file");
  if (text[first] == '{') {
    ojson j = ojson::parse(text, nullptr, false);
    require(!j.is_discarded(), ErrorCode::DomainError, "spec is not valid JSON");
    return spec_from_json(j);
  }
  ojson root = ojson::object();
  ojson* table = &root;
  TextParser tp(text);
  int lineno = 0;
  while (!tp.at_end()) {
    ++lineno;
    std::string raw = strip_comment(tp.line());
    std::string s = trim(raw);
    if (s.empty()) continue;
    std::string where = " (line " + std::to_string(lineno) + ")";
    if (s.front() == '[') {
      require(s.back() == ']', ErrorCode::DomainError, "malformed section header" + where);
      std::string sec = trim(s.substr(1, s.size() - 2));
      require(!sec.empty(), ErrorCode::DomainError, "empty section name" + where);
      root[sec] = ojson::object();
      table = &root[sec];
      continue;
    }
    auto eq = s.find('=');
    require(eq != std::string::npos, ErrorCode::DomainError,
            "expected key = value" + where);
    std::string key = trim(s.substr(0, eq));
    require(!key.empty(), ErrorCode::DomainError, "missing key" + where);
    (*table)[key] = parse_value(s.substr(eq + 1));
  }
  return spec_from_json(root);
}

ExperimentSpec load_spec_file(const std::string& path) {
  return parse_spec_text(read_text_file(path));
}

}  // namespace gge
