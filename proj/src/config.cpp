#include "neuroforge/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <vector>

namespace neuroforge {

namespace {

struct KeyEntry {
  const char* section;
  const char* key;
  enum Kind { Double, Int, U64, Bool, String } kind;
  void* ptr;
};

// Every configurable key, in canonical echo order.
std::vector<KeyEntry> key_table(RunConfig& c) {
  auto& m = c.macro;
  auto& q = c.cma;
  auto& t = c.td;
  auto& e = c.env;
  return {
      {"macro", "p", KeyEntry::Int, &m.p},
      {"macro", "delta_severity", KeyEntry::Double, &m.delta_severity},
      {"macro", "c_cold_gauss_severe", KeyEntry::Double, &m.c_cold_gauss_severe},
      {"macro", "c_cold_gauss", KeyEntry::Double, &m.c_cold_gauss},
      {"macro", "c_gauss_severe", KeyEntry::Double, &m.c_gauss_severe},
      {"macro", "c_gauss", KeyEntry::Double, &m.c_gauss},
      {"macro", "sigma_w", KeyEntry::Double, &m.sigma_w},
      {"macro", "pi_mutate_link", KeyEntry::Double, &m.pi_mutate_link},
      {"macro", "c_turn_on_off", KeyEntry::Double, &m.c_turn_on_off},
      {"macro", "pi_attempt_mutation", KeyEntry::Int, &m.pi_attempt_mutation},
      {"macro", "pi_add_node", KeyEntry::Double, &m.pi_add_node},
      {"macro", "pi_add_link", KeyEntry::Double, &m.pi_add_link},
      {"macro", "p_mutate_only", KeyEntry::Double, &m.p_mutate_only},
      {"macro", "p_mate_only", KeyEntry::Double, &m.p_mate_only},
      {"macro", "p_single_point", KeyEntry::Double, &m.p_single_point},
      {"macro", "p_multipoint", KeyEntry::Double, &m.p_multipoint},
      {"macro", "p_multipoint_average", KeyEntry::Double,
       &m.p_multipoint_average},
      {"macro", "c_inter_species", KeyEntry::Double, &m.c_inter_species},
      {"macro", "c_survival", KeyEntry::Double, &m.c_survival},
      {"macro", "c_best", KeyEntry::Double, &m.c_best},
      {"macro", "c1", KeyEntry::Double, &m.c1},
      {"macro", "c2", KeyEntry::Double, &m.c2},
      {"macro", "c3", KeyEntry::Double, &m.c3},
      {"macro", "delta_c", KeyEntry::Double, &m.delta_c},
      {"macro", "d_age_significance", KeyEntry::Double, &m.d_age_significance},
      {"macro", "d_drop_off_age", KeyEntry::Int, &m.d_drop_off_age},
      {"macro", "d_offspring_stolen", KeyEntry::Int, &m.d_offspring_stolen},
      {"macro", "c_annealing", KeyEntry::Int, &m.c_annealing},
      {"macro", "anneal_delta", KeyEntry::Double, &m.anneal_delta},
      {"macro", "k1", KeyEntry::Double, &m.k1},
      {"macro", "k2", KeyEntry::Double, &m.k2},
      {"macro", "psi1", KeyEntry::Double, &m.psi1},
      {"macro", "psi2", KeyEntry::Double, &m.psi2},
      {"macro", "psi3", KeyEntry::Double, &m.psi3},
      {"macro", "psi4", KeyEntry::Double, &m.psi4},
      {"macro", "psi5", KeyEntry::Double, &m.psi5},
      {"macro", "psi6", KeyEntry::Double, &m.psi6},

      {"cma", "rho", KeyEntry::Double, &q.rho},
      {"cma", "sigma_max", KeyEntry::Double, &q.sigma_max},
      {"cma", "sigma_default", KeyEntry::Double, &q.sigma_default},
      {"cma", "sigma_o_gain", KeyEntry::Double, &q.sigma_o_gain},

      {"td", "alpha", KeyEntry::Double, &t.alpha},
      {"td", "gamma", KeyEntry::Double, &t.gamma},
      {"td", "phi", KeyEntry::Double, &t.phi},
      {"td", "epsilon", KeyEntry::Double, &t.epsilon},
      {"td", "episodes_per_eval", KeyEntry::Int, &t.episodes_per_eval},
      {"td", "max_steps_per_episode", KeyEntry::Int, &t.max_steps_per_episode},
      {"td", "greedy_fitness", KeyEntry::Bool, &t.greedy_fitness},

      {"env", "name", KeyEntry::String, &e.name},
      {"env", "length", KeyEntry::Int, &e.length},
      {"env", "start", KeyEntry::Int, &e.start},
      {"env", "width", KeyEntry::Int, &e.width},
      {"env", "height", KeyEntry::Int, &e.height},
      {"env", "start_x", KeyEntry::Int, &e.start_x},
      {"env", "start_y", KeyEntry::Int, &e.start_y},
      {"env", "goal_x", KeyEntry::Int, &e.goal_x},
      {"env", "goal_y", KeyEntry::Int, &e.goal_y},

      {"run", "seed", KeyEntry::U64, &c.seed},
      {"run", "max_generations", KeyEntry::Int, &c.max_generations},
      {"run", "stagnation_window", KeyEntry::Int, &c.stagnation_window},
      {"run", "threads", KeyEntry::Int, &c.threads},
      {"run", "cma_trace", KeyEntry::Bool, &c.cma_trace},
  };
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Cuts a trailing comment; '#' inside a double-quoted value is literal.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

[[noreturn]] void parse_fail(const std::string& origin, int line,
                             const std::string& what) {
  throw ParseError(origin + ":" + std::to_string(line) + ": " + what);
}

void assign_value(const KeyEntry& entry, const std::string& raw,
                  const std::string& origin, int line) {
  const std::string name = std::string(entry.section) + "." + entry.key;
  const char* b = raw.data();
  const char* e = raw.data() + raw.size();
  switch (entry.kind) {
    case KeyEntry::Double: {
      double v;
      auto r = std::from_chars(b, e, v);
      if (r.ec != std::errc() || r.ptr != e)
        parse_fail(origin, line, "expected a number for " + name);
      *static_cast<double*>(entry.ptr) = v;
      return;
    }
    case KeyEntry::Int: {
      int v;
      auto r = std::from_chars(b, e, v);
      if (r.ec != std::errc() || r.ptr != e)
        parse_fail(origin, line, "expected an integer for " + name);
      *static_cast<int*>(entry.ptr) = v;
      return;
    }
    case KeyEntry::U64: {
      std::uint64_t v;
      auto r = std::from_chars(b, e, v);
      if (r.ec != std::errc() || r.ptr != e)
        parse_fail(origin, line, "expected an unsigned integer for " + name);
      *static_cast<std::uint64_t*>(entry.ptr) = v;
      return;
    }
    case KeyEntry::Bool: {
      if (raw == "true" || raw == "false") {
        *static_cast<bool*>(entry.ptr) = raw == "true";
        return;
      }
      parse_fail(origin, line, "expected true or false for " + name);
    }
    case KeyEntry::String: {
      std::string v = raw;
      if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
        v = v.substr(1, v.size() - 2);
      if (v.empty() || v.find_first_of(" \t\"") != std::string::npos)
        parse_fail(origin, line, "expected a word for " + name);
      *static_cast<std::string*>(entry.ptr) = v;
      return;
    }
  }
  parse_fail(origin, line, "unhandled value kind");  // unreachable
}

std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

void check(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

void check_unit(double v, const std::string& name) {
  check(v >= 0.0 && v <= 1.0, name + " must lie in [0,1]");
}

}  // namespace

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin) {
  RunConfig cfg;
  const std::vector<KeyEntry> table = key_table(cfg);

  static const char* kSections[] = {"macro", "cma", "td", "env", "run"};
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;

    if (body.front() == '[') {
      if (body.back() != ']')
        parse_fail(origin, lineno, "unterminated section header");
      const std::string name = trim(body.substr(1, body.size() - 2));
      bool known = false;
      for (const char* s : kSections) known = known || name == s;
      if (!known)
        throw UnknownKeyError(origin + ":" + std::to_string(lineno) +
                              ": unknown section [" + name + "]");
      section = name;
      continue;
    }

    const size_t eq = body.find('=');
    if (eq == std::string::npos)
      parse_fail(origin, lineno, "expected key = value");
    if (section.empty())
      parse_fail(origin, lineno, "key outside any [section]");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) parse_fail(origin, lineno, "empty key");
    if (value.empty()) parse_fail(origin, lineno, "empty value");

    const KeyEntry* found = nullptr;
    for (const KeyEntry& entry : table)
      if (section == entry.section && key == entry.key) {
        found = &entry;
        break;
      }
    if (!found)
      throw UnknownKeyError(origin + ":" + std::to_string(lineno) +
                            ": unknown key " + section + "." + key);
    assign_value(*found, value, origin, lineno);
  }

  validate_config(cfg);
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

void validate_config(const RunConfig& cfg) {
  const MacroConfig& m = cfg.macro;
  check(m.p >= 2, "macro.p must be >= 2");
  check_unit(m.delta_severity, "macro.delta_severity");
  check_unit(m.c_cold_gauss_severe, "macro.c_cold_gauss_severe");
  check_unit(m.c_cold_gauss, "macro.c_cold_gauss");
  check_unit(m.c_gauss_severe, "macro.c_gauss_severe");
  check_unit(m.c_gauss, "macro.c_gauss");
  check(m.sigma_w > 0.0, "macro.sigma_w must be positive");
  check_unit(m.pi_mutate_link, "macro.pi_mutate_link");
  check_unit(m.c_turn_on_off, "macro.c_turn_on_off");
  check(m.pi_attempt_mutation >= 1, "macro.pi_attempt_mutation must be >= 1");
  check_unit(m.pi_add_node, "macro.pi_add_node");
  check_unit(m.pi_add_link, "macro.pi_add_link");
  check_unit(m.p_mutate_only, "macro.p_mutate_only");
  check_unit(m.p_mate_only, "macro.p_mate_only");
  check(m.p_single_point >= 0 && m.p_multipoint >= 0 &&
            m.p_multipoint_average >= 0,
        "macro crossover method weights must be >= 0");
  check(m.p_single_point + m.p_multipoint + m.p_multipoint_average > 0,
        "macro crossover method weights must not all be zero");
  check_unit(m.c_inter_species, "macro.c_inter_species");
  check(m.c_survival > 0.0 && m.c_survival <= 1.0,
        "macro.c_survival must lie in (0,1]");
  check(m.c_best > 0.0, "macro.c_best must be positive");
  check(m.c1 >= 0 && m.c2 >= 0 && m.c3 >= 0,
        "macro compatibility coefficients must be >= 0");
  check(m.delta_c > 0.0, "macro.delta_c must be positive");
  check(m.d_age_significance >= 0.0,
        "macro.d_age_significance must be >= 0");
  check(m.d_drop_off_age >= 1, "macro.d_drop_off_age must be >= 1");
  check(m.d_offspring_stolen >= 0, "macro.d_offspring_stolen must be >= 0");
  check(m.c_annealing >= 1, "macro.c_annealing must be >= 1");
  check(m.anneal_delta >= 0.0, "macro.anneal_delta must be >= 0");
  check(m.k1 > 0.0 && m.k2 > 0.0, "macro.k1 and macro.k2 must be positive");
  check(m.psi1 <= m.psi2 && m.psi3 <= m.psi4 && m.psi5 <= m.psi6,
        "macro psi bounds must be ordered (low <= high)");
  for (double v : {m.psi1, m.psi2, m.psi3, m.psi4, m.psi5, m.psi6})
    check_unit(v, "macro psi bounds");

  check(cfg.cma.rho > 0.0, "cma.rho must be positive");
  check(cfg.cma.sigma_max > 0.0, "cma.sigma_max must be positive");
  check(cfg.cma.sigma_default > 0.0, "cma.sigma_default must be positive");
  check(cfg.cma.sigma_o_gain >= 0.0, "cma.sigma_o_gain must be >= 0");

  const TDConfig& t = cfg.td;
  check(t.alpha > 0.0, "td.alpha must be positive");
  check(t.gamma >= 0.0 && t.gamma < 1.0, "td.gamma must lie in [0,1)");
  check_unit(t.phi, "td.phi");
  check_unit(t.epsilon, "td.epsilon");
  check(t.episodes_per_eval >= 0, "td.episodes_per_eval must be >= 0");
  check(t.max_steps_per_episode >= 1,
        "td.max_steps_per_episode must be >= 1");

  const EnvConfig& e = cfg.env;
  check(e.name == "chain" || e.name == "xor" || e.name == "grid",
        "env.name must be chain, xor, or grid");
  if (e.name == "chain") {
    check(e.length >= 3, "env.length must be >= 3");
    check(e.start == -1 || (e.start >= 1 && e.start <= e.length - 2),
          "env.start must be -1 or an interior state");
  } else if (e.name == "grid") {
    check(e.width >= 2 && e.height >= 2,
          "env.width and env.height must be >= 2");
    check(e.start_x >= 0 && e.start_x < e.width &&
              e.start_y >= 0 && e.start_y < e.height,
          "env start cell must lie on the grid");
    check(e.goal_x == -1 || (e.goal_x >= 0 && e.goal_x < e.width),
          "env.goal_x must be -1 or on the grid");
    check(e.goal_y == -1 || (e.goal_y >= 0 && e.goal_y < e.height),
          "env.goal_y must be -1 or on the grid");
    const int gx = e.goal_x == -1 ? e.width - 1 : e.goal_x;
    const int gy = e.goal_y == -1 ? e.height - 1 : e.goal_y;
    check(gx != e.start_x || gy != e.start_y,
          "env goal cell must differ from the start cell");
  }

  check(cfg.max_generations >= 0, "run.max_generations must be >= 0");
  check(cfg.stagnation_window >= 1, "run.stagnation_window must be >= 1");
  check(cfg.threads >= 1, "run.threads must be >= 1");
}

std::string echo_config(const RunConfig& cfg) {
  RunConfig copy = cfg;
  const std::vector<KeyEntry> table = key_table(copy);
  std::ostringstream out;
  std::string section;
  for (const KeyEntry& entry : table) {
    if (section != entry.section) {
      if (!section.empty()) out << "\n";
      section = entry.section;
      out << "[" << section << "]\n";
    }
    out << entry.key << " = ";
    switch (entry.kind) {
      case KeyEntry::Double:
        out << format_double(*static_cast<double*>(entry.ptr));
        break;
      case KeyEntry::Int:
        out << *static_cast<int*>(entry.ptr);
        break;
      case KeyEntry::U64:
        out << *static_cast<std::uint64_t*>(entry.ptr);
        break;
      case KeyEntry::Bool:
        out << (*static_cast<bool*>(entry.ptr) ? "true" : "false");
        break;
      case KeyEntry::String:
        out << '"' << *static_cast<std::string*>(entry.ptr) << '"';
        break;
    }
    out << "\n";
  }
  return out.str();
}

std::unique_ptr<Environment> make_environment(const EnvConfig& cfg) {
  if (cfg.name == "chain")
    return std::make_unique<ChainMDP>(cfg.length, cfg.start);
  if (cfg.name == "xor") return std::make_unique<XorBandit>();
  if (cfg.name == "grid")
    return std::make_unique<GridWorld>(cfg.width, cfg.height, cfg.start_x,
                                       cfg.start_y, cfg.goal_x, cfg.goal_y);
  throw ValidationError("env.name must be chain, xor, or grid");
}

}  // namespace neuroforge
