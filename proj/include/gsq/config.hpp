#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gsq/errors.hpp"
#include "gsq/hash.hpp"
#include "gsq/linalg.hpp"

namespace gsq::harness {

/// Experiment configuration. Text form: sections of key = value lines,
/// whole-line comments start with '#' or ';'.
///
///   [experiment]
///   # spectrum | quantize | propagate | brownian-pi | smooth-pi | signature
///   name = brownian-pi
///   seed = 20240607
///   workers = 1
///   out = results
///   [group]
///   name = SU2
///   # Dynkin labels; several weights separated by '|'
///   lambda = 1
///   # Peter-Weyl cutoff 2J
///   cutoff = 4
///   [hamiltonian]
///   # orbit-function presets separated by '|'
///   h = random:2:7 | zero
///   # components re or re:im, normalized on use
///   u = 1, 0
///   v = 0.6, 0:0.8
///   [schedule]
///   t = 0.5
///   r = 1, 4, 16, 64
///   n = 16, 64, 256
///   paths = 100000
///   [estimator]
///   steps_per_unit = 256
///   steps = 0
///   control_variate = true
///   mc_normalization = false
///   [signature]
///   dim = 2
///   depth = 3
///   points = 8
///   level = 6
///   p = 2.5
///   [limits]
///   memory_mib = 512
///
/// The seed is mandatory. workers and out do not enter the config hash.
struct ExperimentConfig {
  std::string name;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int workers = 1;
  std::string out = "results";

  std::string group = "SU2";
  std::vector<std::vector<int>> lambda = {{1}};
  int cutoff = 4;

  std::vector<std::string> hamiltonians = {"zero"};
  std::vector<cplx> u = {1.0, 0.0};
  std::vector<cplx> v = {1.0, 0.0};

  double t = 0.5;
  std::vector<double> r = {1.0};
  std::vector<int> n = {16};
  std::uint64_t paths = 10000;

  double steps_per_unit = 256.0;
  int steps = 0;
  bool control_variate = true;
  bool mc_normalization = false;

  int sig_dim = 2, sig_depth = 3, sig_points = 8, sig_level = 6;
  double p = 2.5;

  double memory_mib = 512.0;

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

/// Shortest text that reads back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::string format_cplx(cplx z) {
  return z.imag() == 0.0 ? format_double(z.real()) : format_double(z.real()) + ":" + format_double(z.imag());
}

/// Line of `key` inside `[section]` in the source text, 0 when absent.
inline std::size_t locate(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream in(text);
  std::string cur;
  std::size_t line = 0;
  for (std::string l; std::getline(in, l);) {
    ++line;
    const std::string s = trim(l);
    if (s.size() > 1 && s.front() == '[' && s.back() == ']') {
      cur = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (cur == section && eq != std::string::npos && trim(s.substr(0, eq)) == key) return line;
  }
  return 0;
}

}  // namespace detail

inline std::string emit_config(const ExperimentConfig& c) {
  using detail::format_double;
  std::ostringstream os;
  auto join = [](const auto& xs, auto fmt, const char* sep) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? sep : "") + fmt(xs[i]);
    return s;
  };
  os << "[experiment]\nname = " << c.name << "\n";
  if (c.has_seed) os << "seed = " << c.seed << "\n";
  os << "workers = " << c.workers << "\nout = " << c.out << "\n\n";
  os << "[group]\nname = " << c.group << "\nlambda = "
     << join(c.lambda, [&](const std::vector<int>& w) { return join(w, [](int k) { return std::to_string(k); }, " "); },
             " | ")
     << "\ncutoff = " << c.cutoff << "\n\n";
  os << "[hamiltonian]\nh = " << join(c.hamiltonians, [](const std::string& h) { return h; }, " | ")
     << "\nu = " << join(c.u, detail::format_cplx, ", ") << "\nv = " << join(c.v, detail::format_cplx, ", ")
     << "\n\n";
  os << "[schedule]\nt = " << format_double(c.t) << "\nr = " << join(c.r, format_double, ", ")
     << "\nn = " << join(c.n, [](int k) { return std::to_string(k); }, ", ") << "\npaths = " << c.paths << "\n\n";
  os << "[estimator]\nsteps_per_unit = " << format_double(c.steps_per_unit) << "\nsteps = " << c.steps
     << "\ncontrol_variate = " << (c.control_variate ? "true" : "false")
     << "\nmc_normalization = " << (c.mc_normalization ? "true" : "false") << "\n\n";
  os << "[signature]\ndim = " << c.sig_dim << "\ndepth = " << c.sig_depth << "\npoints = " << c.sig_points
     << "\nlevel = " << c.sig_level << "\np = " << format_double(c.p) << "\n\n";
  os << "[limits]\nmemory_mib = " << format_double(c.memory_mib) << "\n";
  return os.str();
}

/// Hash of everything that determines the numbers (workers and output
/// directory excluded).
inline std::uint64_t config_hash(const ExperimentConfig& c) {
  ExperimentConfig k = c;
  k.workers = 1;
  k.out.clear();
  return fnv1a(emit_config(k));
}

inline const std::set<std::string>& experiment_names() {
  static const std::set<std::string> names = {"spectrum",  "quantize",  "propagate",
                                              "brownian-pi", "smooth-pi", "signature"};
  return names;
}

/// Structural checks shared by the parser and programmatic callers.
inline void validate(const ExperimentConfig& c, const std::string& text = "") {
  auto fail = [&](const std::string& section, const std::string& key, const std::string& msg) {
    throw ConfigParseError(section + "." + key + ": " + msg, detail::locate(text, section, key), section + "." + key);
  };
  if (!experiment_names().count(c.name)) fail("experiment", "name", "unknown experiment '" + c.name + "'");
  if (!c.has_seed) fail("experiment", "seed", "seed is mandatory");
  if (c.lambda.empty()) fail("group", "lambda", "empty weight list");
  for (const auto& w : c.lambda)
    if (w.empty()) fail("group", "lambda", "empty weight");
  if (c.cutoff < 0) fail("group", "cutoff", "cutoff must be >= 0");
  if (c.hamiltonians.empty()) fail("hamiltonian", "h", "empty Hamiltonian list");
  if (c.u.empty() || c.v.empty()) fail("hamiltonian", "u", "empty vector");
  if (!(c.t > 0.0)) fail("schedule", "t", "t must be positive");
  if (c.r.empty()) fail("schedule", "r", "empty r schedule");
  for (double r : c.r)
    if (!(r > 0.0)) fail("schedule", "r", "r must be positive");
  if (c.n.empty()) fail("schedule", "n", "empty n schedule");
  for (int n : c.n)
    if (n < 1) fail("schedule", "n", "mode counts must be >= 1");
  if (c.paths < 2) fail("schedule", "paths", "need at least two paths");
  if (!(c.steps_per_unit > 0.0)) fail("estimator", "steps_per_unit", "must be positive");
  if (c.sig_dim < 1 || c.sig_depth < 1 || c.sig_points < 2 || c.sig_level < 0)
    fail("signature", "dim", "dimension, depth, points and level out of range");
  if (!(c.p >= 1.0)) fail("signature", "p", "p must be >= 1");
  if (!(c.memory_mib > 0.0)) fail("limits", "memory_mib", "must be positive");
}

inline ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigParseError("config syntax: " + e.message(), e.line(), "");
  }
  static const std::map<std::string, std::set<std::string>> known = {
      {"experiment", {"name", "seed", "workers", "out"}},
      {"group", {"name", "lambda", "cutoff"}},
      {"hamiltonian", {"h", "u", "v"}},
      {"schedule", {"t", "r", "n", "paths"}},
      {"estimator", {"steps_per_unit", "steps", "control_variate", "mc_normalization"}},
      {"signature", {"dim", "depth", "points", "level", "p"}},
      {"limits", {"memory_mib"}}};
  for (const auto& [section, body] : tree) {
    const auto it = known.find(section);
    if (it == known.end() || body.empty())
      throw ConfigParseError("unknown section [" + section + "]", detail::locate(text, section, ""), section);
    for (const auto& [key, value] : body)
      if (!it->second.count(key))
        throw ConfigParseError("unknown key " + section + "." + key, detail::locate(text, section, key),
                               section + "." + key);
  }

  ExperimentConfig c;
  auto field = [&](const std::string& section, const std::string& key, auto&& apply) {
    const auto v = tree.get_optional<std::string>(section + "." + key);
    if (!v) return;
    try {
      apply(detail::trim(*v));
    } catch (const ConfigParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigParseError(section + "." + key + ": cannot read '" + *v + "' (" + e.what() + ")",
                             detail::locate(text, section, key), section + "." + key);
    }
  };
  auto to_int = [](const std::string& s) {
    std::size_t pos = 0;
    const int x = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return x;
  };
  auto to_u64 = [](const std::string& s) {
    std::size_t pos = 0;
    if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative value");
    const std::uint64_t x = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return x;
  };
  auto to_double = [](const std::string& s) {
    std::size_t pos = 0;
    const double x = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return x;
  };
  auto to_bool = [](const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw std::invalid_argument("expected true or false");
  };
  auto to_cplx = [&](const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) return cplx(to_double(s), 0.0);
    return cplx(to_double(detail::trim(s.substr(0, colon))), to_double(detail::trim(s.substr(colon + 1))));
  };

  field("experiment", "name", [&](const std::string& s) { c.name = s; });
  field("experiment", "seed", [&](const std::string& s) {
    c.seed = to_u64(s);
    c.has_seed = true;
  });
  field("experiment", "workers", [&](const std::string& s) { c.workers = to_int(s); });
  field("experiment", "out", [&](const std::string& s) { c.out = s; });
  field("group", "name", [&](const std::string& s) { c.group = s; });
  field("group", "lambda", [&](const std::string& s) {
    c.lambda.clear();
    for (const auto& w : detail::split(s, '|')) {
      std::vector<int> labels;
      std::string norm = w;
      std::replace(norm.begin(), norm.end(), ',', ' ');
      std::istringstream ls(norm);
      for (std::string tok; ls >> tok;) labels.push_back(to_int(tok));
      c.lambda.push_back(labels);
    }
  });
  field("group", "cutoff", [&](const std::string& s) { c.cutoff = to_int(s); });
  field("hamiltonian", "h", [&](const std::string& s) { c.hamiltonians = detail::split(s, '|'); });
  field("hamiltonian", "u", [&](const std::string& s) {
    c.u.clear();
    for (const auto& x : detail::split(s, ',')) c.u.push_back(to_cplx(x));
  });
  field("hamiltonian", "v", [&](const std::string& s) {
    c.v.clear();
    for (const auto& x : detail::split(s, ',')) c.v.push_back(to_cplx(x));
  });
  field("schedule", "t", [&](const std::string& s) { c.t = to_double(s); });
  field("schedule", "r", [&](const std::string& s) {
    c.r.clear();
    for (const auto& x : detail::split(s, ',')) c.r.push_back(to_double(x));
  });
  field("schedule", "n", [&](const std::string& s) {
    c.n.clear();
    for (const auto& x : detail::split(s, ',')) c.n.push_back(to_int(x));
  });
  field("schedule", "paths", [&](const std::string& s) { c.paths = to_u64(s); });
  field("estimator", "steps_per_unit", [&](const std::string& s) { c.steps_per_unit = to_double(s); });
  field("estimator", "steps", [&](const std::string& s) { c.steps = to_int(s); });
  field("estimator", "control_variate", [&](const std::string& s) { c.control_variate = to_bool(s); });
  field("estimator", "mc_normalization", [&](const std::string& s) { c.mc_normalization = to_bool(s); });
  field("signature", "dim", [&](const std::string& s) { c.sig_dim = to_int(s); });
  field("signature", "depth", [&](const std::string& s) { c.sig_depth = to_int(s); });
  field("signature", "points", [&](const std::string& s) { c.sig_points = to_int(s); });
  field("signature", "level", [&](const std::string& s) { c.sig_level = to_int(s); });
  field("signature", "p", [&](const std::string& s) { c.p = to_double(s); });
  field("limits", "memory_mib", [&](const std::string& s) { c.memory_mib = to_double(s); });
  validate(c, text);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Built-in configuration for an experiment name, used when no config file
/// is given. Each preset carries its own fixed seed.
inline ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  c.seed = 20240607;
  c.has_seed = true;
  if (name == "spectrum") {
    c.lambda = {{0}, {1}, {2}, {3}, {4}};
    c.cutoff = 8;
  } else if (name == "quantize") {
    c.lambda = {{1}, {2}, {3}};
    c.hamiltonians = {"const:1", "linear:2", "random:2:7", "random:3:11"};
  } else if (name == "propagate") {
    c.lambda = {{1}};
    c.cutoff = 6;
    c.hamiltonians = {"random:2:7"};
    c.r = {1, 2, 4, 8, 16, 32, 64, 128, 256};
  } else if (name == "brownian-pi") {
    c.hamiltonians = {"random:2:7", "zero"};
    c.v = {0.6, cplx(0.0, 0.8)};
    c.r = {1, 4, 16, 64};
    c.paths = 20000;
  } else if (name == "smooth-pi") {
    c.hamiltonians = {"random:2:7", "zero"};
    c.v = {0.6, cplx(0.0, 0.8)};
    c.r = {4, 16, 64};
    c.n = {64, 256, 1024};
    c.paths = 20000;
    c.mc_normalization = true;
  } else if (name != "signature") {
    throw ConfigParseError("experiment.name: unknown experiment '" + name + "'", 0, "experiment.name");
  }
  return c;
}

/// Dense N x N complex operators on the Peter-Weyl truncation at cutoff 2J
/// (N = sum (2j + 1)^2), checked against the memory bound.
inline void check_memory(const ExperimentConfig& c) {
  double n = 0.0;
  for (int tj = 0; tj <= c.cutoff; ++tj) n += (tj + 1.0) * (tj + 1.0);
  const double mib = n * n * sizeof(cplx) / (1024.0 * 1024.0);
  if (mib > c.memory_mib)
    throw ResourceLimitError("cutoff " + std::to_string(c.cutoff) + " needs " + detail::format_double(mib) +
                             " MiB per operator, above the " + detail::format_double(c.memory_mib) + " MiB bound");
}

}  // namespace gsq::harness
