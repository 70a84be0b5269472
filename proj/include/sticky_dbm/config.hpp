// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: a line-oriented format with bracketed section
// headers and `key = value` entries. `#` starts a comment. Every problem in a
// file is reported, each with a line number and an error code:
//
//   E_SYNTAX          malformed line (with column)
//   E_UNKNOWN_SECTION section name not recognised
//   E_UNKNOWN_KEY     key not valid in its section
//   E_DUP             key given twice in a section (both lines listed)
//   E_MISSING         required key absent
//   E_VALUE           value does not parse or is not an allowed choice
//   E_ALIGN           sticky coordinate not a multiple of h
//   E_CONFIG          value parses but violates a constraint
//   E_MISSING_TESTFN  fukushima statistic requested without test functions
#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sticky_dbm/chain.hpp"
#include "sticky_dbm/error.hpp"
#include "sticky_dbm/geometry.hpp"
#include "sticky_dbm/report.hpp"
#include "sticky_dbm/samplers.hpp"
#include "sticky_dbm/statistics.hpp"
#include "sticky_dbm/test_function.hpp"

namespace sticky_dbm {

struct ConfigDiagnostic {
  std::string code;
  int line = 0;    // 0 when not tied to a line
  int column = 0;  // 0 when not meaningful
  std::string message;
  std::vector<int> lines;  // every line involved (E_DUP)

  std::string to_string() const {
    std::ostringstream os;
    os << code;
    if (line > 0) os << " line " << line;
    if (column > 0) os << " col " << column;
    os << ": " << message;
    return os.str();
  }
};

enum class ExperimentKind { chain, timechange };

struct StatsConfig {
  std::vector<std::string> statistics;
  std::vector<std::string> observables;
  std::vector<Point> probes;
  double lag = 0.5;
  double moment_step = 0.01;
  std::uint64_t min_samples = kDefaultMinSamples;
  std::vector<std::string> test_functions;
  std::uint32_t blocks = 100;
  GeneratorSampling generator_sampling = GeneratorSampling::cell_average;
  double small_ball = 0.05;
  double bias_tol = 0.01;
  double tv_tol = 0.02;
  double drift_rel_tol = 0.10;
  double diffusion_rel_tol = 0.05;
  double ratio_tol = 0.10;
  std::uint64_t min_crossings = 10;

  bool wants(const std::string& s) const {
    return std::find(statistics.begin(), statistics.end(), s) != statistics.end();
  }
};

struct ExperimentConfig {
  std::string id;
  ExperimentKind kind = ExperimentKind::chain;
  std::string output_dir = "out";
  int dim = 1;
  std::string density_kind = "gaussian";
  double density_scale = 1.0;
  std::vector<StickyPoint> points;
  std::optional<StickyRectangle> rect;
  double w_surf = 1.0;
  double h = 0.1;
  double L = 5.0;
  SimConfig sim;
  Point start{0.0, 0.0};
  double burn_in = 0.0;
  TimeChangeParams timechange;
  StatsConfig stats;
  std::string source;
  std::map<std::string, std::map<std::string, std::string>> entries;

  Density density() const {
    if (density_kind == "constant") return Density::constant(dim);
    const double a = density_scale;
    const int d = dim;
    if (a == 1.0) return Density::gaussian(dim);
    return Density::custom(
        dim, "gaussian", [a, d](const Point& x) { return std::exp(-a * dot(x, x, d)); },
        [a, d](const Point& x) { return Point{-2.0 * a * x[0], d > 1 ? -2.0 * a * x[1] : 0.0}; }, true, true);
  }

  StickyStructure sticky() const {
    if (dim == 1) return StickyStructure::points(points);
    return StickyStructure::rectangle(*rect, w_surf);
  }

  GridSpec grid() const { return GridSpec{h, TruncationBox::cube(dim, L)}; }
};

/// Catalog of named observables for ergodic averages.
inline std::optional<ScalarField> observable(const std::string& name, const StickyStructure& sticky) {
  if (name == "one") return ScalarField([](const Point&) { return 1.0; });
  if (name == "x1") return ScalarField([](const Point& x) { return x[0]; });
  if (name == "x1_sq") return ScalarField([](const Point& x) { return x[0] * x[0]; });
  if (name == "abs_x1") return ScalarField([](const Point& x) { return std::abs(x[0]); });
  if (name == "x2") return ScalarField([](const Point& x) { return x[1]; });
  if (name == "r_sq") return ScalarField([](const Point& x) { return x[0] * x[0] + x[1] * x[1]; });
  if (name == "sticky") return ScalarField([sticky](const Point& x) { return sticky.contains(x) ? 1.0 : 0.0; });
  return std::nullopt;
}

inline const std::vector<std::string>& known_statistics() {
  static const std::vector<std::string> s{"sejour", "ergodic", "crossings", "occupancy", "moments", "fukushima",
                                          "small_ball"};
  return s;
}

struct ParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<ConfigDiagnostic> errors;
  bool ok() const { return config.has_value() && errors.empty(); }

  std::string message() const {
    std::string m;
    for (const auto& e : errors) m += e.to_string() + "\n";
    return m;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::optional<double> to_double(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> to_uint(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec == std::errc() && p == t.data() + t.size()) return v;
  // Accept integral floating forms such as 2e4.
  const auto d = to_double(t);
  if (d && *d >= 0.0 && *d == std::floor(*d) && *d < 1.8e19) return static_cast<std::uint64_t>(*d);
  return std::nullopt;
}

struct Entry {
  std::string value;
  int line = 0;
};

using Sections = std::map<std::string, std::map<std::string, Entry>>;

inline const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"experiment", {"id", "kind", "output", "statistics"}},
      {"density", {"kind", "dim", "scale"}},
      {"sticky", {"points", "weight", "rectangle", "w_surf"}},
      {"grid", {"h", "L"}},
      {"sim", {"seed", "T", "n_paths", "burn_in", "start", "recording", "snapshot_dt"}},
      {"timechange", {"w", "dt", "eps"}},
      {"stats",
       {"observables", "probes", "lag", "moment_step", "min_samples", "test_functions", "blocks",
        "generator_sampling", "small_ball", "bias_tol", "tv_tol", "drift_rel_tol", "diffusion_rel_tol", "ratio_tol",
        "min_crossings"}},
  };
  return s;
}

/// Line-level pass: structure, unknown names and duplicates.
inline Sections lex(const std::string& text, std::vector<ConfigDiagnostic>& errors) {
  Sections out;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  std::string section;
  bool section_valid = false;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const int indent = static_cast<int>(line.find_first_not_of(" \t")) + 1;
    if (t.front() == '[') {
      const auto close = t.find(']');
      if (close == std::string::npos) {
        errors.push_back({"E_SYNTAX", lineno, indent + static_cast<int>(t.size()), "missing ']' in section header", {lineno}});
        section_valid = false;
        continue;
      }
      if (close + 1 != t.size()) {
        errors.push_back({"E_SYNTAX", lineno, indent + static_cast<int>(close) + 1, "text after section header", {lineno}});
        section_valid = false;
        continue;
      }
      section = trim(t.substr(1, close - 1));
      section_valid = schema().count(section) > 0;
      if (!section_valid)
        errors.push_back({"E_UNKNOWN_SECTION", lineno, indent + 1, "unknown section '" + section + "'", {lineno}});
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      errors.push_back({"E_SYNTAX", lineno, indent, "expected 'key = value'", {lineno}});
      continue;
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      errors.push_back({"E_SYNTAX", lineno, indent, "empty key", {lineno}});
      continue;
    }
    const auto bad_char = std::find_if(key.begin(), key.end(), [](char ch) {
      return !(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_');
    });
    if (bad_char != key.end()) {
      errors.push_back(
          {"E_SYNTAX", lineno, indent + static_cast<int>(bad_char - key.begin()), "invalid character in key", {lineno}});
      continue;
    }
    if (section.empty()) {
      errors.push_back({"E_SYNTAX", lineno, indent, "entry before any section header", {lineno}});
      continue;
    }
    if (!section_valid) continue;
    if (!schema().at(section).count(key)) {
      errors.push_back(
          {"E_UNKNOWN_KEY", lineno, indent, "unknown key '" + key + "' in section [" + section + "]", {lineno}});
      continue;
    }
    if (const auto it = out[section].find(key); it != out[section].end()) {
      errors.push_back({"E_DUP",
                        lineno,
                        indent,
                        "duplicate key '" + section + "." + key + "' (lines " + std::to_string(it->second.line) +
                            " and " + std::to_string(lineno) + ")",
                        {it->second.line, lineno}});
      continue;
    }
    out[section][key] = {value, lineno};
  }
  return out;
}

/// Typed access that records E_VALUE / E_MISSING diagnostics.
class Reader {
 public:
  Reader(const Sections& s, std::vector<ConfigDiagnostic>& errors) : s_(s), errors_(errors) {}

  const Entry* find(const std::string& sec, const std::string& key) const {
    const auto a = s_.find(sec);
    if (a == s_.end()) return nullptr;
    const auto b = a->second.find(key);
    return b == a->second.end() ? nullptr : &b->second;
  }

  int line(const std::string& sec, const std::string& key) const {
    const Entry* e = find(sec, key);
    return e ? e->line : 0;
  }

  bool has(const std::string& sec, const std::string& key) const { return find(sec, key) != nullptr; }

  void missing(const std::string& sec, const std::string& key) {
    errors_.push_back({"E_MISSING", 0, 0, "missing required key '" + sec + "." + key + "'", {}});
  }

  void bad(const std::string& sec, const std::string& key, const std::string& why) {
    const Entry* e = find(sec, key);
    errors_.push_back({"E_VALUE", e ? e->line : 0, 0, sec + "." + key + ": " + why, {}});
  }

  std::optional<std::string> text(const std::string& sec, const std::string& key, bool required = false) {
    const Entry* e = find(sec, key);
    if (!e) {
      if (required) missing(sec, key);
      return std::nullopt;
    }
    if (e->value.empty()) {
      bad(sec, key, "empty value");
      return std::nullopt;
    }
    return e->value;
  }

  template <class T>
  void number(const std::string& sec, const std::string& key, T& out, bool required = false) {
    const auto t = text(sec, key, required);
    if (!t) return;
    if constexpr (std::is_floating_point_v<T>) {
      const auto v = to_double(*t);
      if (!v) return bad(sec, key, "'" + *t + "' is not a number");
      out = *v;
    } else {
      const auto v = to_uint(*t);
      if (!v) return bad(sec, key, "'" + *t + "' is not a nonnegative integer");
      out = static_cast<T>(*v);
    }
  }

  std::optional<std::vector<double>> numbers(const std::string& sec, const std::string& key) {
    const auto t = text(sec, key);
    if (!t) return std::nullopt;
    std::vector<double> out;
    for (const auto& item : split_list(*t)) {
      const auto v = to_double(item);
      if (!v) {
        bad(sec, key, "'" + item + "' is not a number");
        return std::nullopt;
      }
      out.push_back(*v);
    }
    return out;
  }

 private:
  const Sections& s_;
  std::vector<ConfigDiagnostic>& errors_;
};

}  // namespace detail

inline ParseResult parse_config(const std::string& text) {
  ParseResult result;
  auto& errors = result.errors;
  const detail::Sections sections = detail::lex(text, errors);
  detail::Reader rd(sections, errors);
  ExperimentConfig c;
  c.source = text;
  for (const auto& [sec, kv] : sections)
    for (const auto& [k, e] : kv) c.entries[sec][k] = e.value;

  auto constraint = [&](const std::string& sec, const std::string& key, const std::string& msg) {
    errors.push_back({"E_CONFIG", rd.line(sec, key), 0, msg, {}});
  };

  // [experiment]
  if (auto v = rd.text("experiment", "id", true)) c.id = *v;
  if (auto v = rd.text("experiment", "kind")) {
    if (*v == "chain")
      c.kind = ExperimentKind::chain;
    else if (*v == "timechange")
      c.kind = ExperimentKind::timechange;
    else
      rd.bad("experiment", "kind", "expected 'chain' or 'timechange'");
  }
  if (auto v = rd.text("experiment", "output")) c.output_dir = *v;
  if (auto v = rd.text("experiment", "statistics")) {
    for (const auto& s : detail::split_list(*v)) {
      if (std::find(known_statistics().begin(), known_statistics().end(), s) == known_statistics().end())
        rd.bad("experiment", "statistics", "unknown statistic '" + s + "'");
      else
        c.stats.statistics.push_back(s);
    }
  } else {
    c.stats.statistics = c.kind == ExperimentKind::chain ? std::vector<std::string>{"sejour", "crossings"}
                                                         : std::vector<std::string>{"small_ball", "crossings"};
  }

  // [density]
  if (auto v = rd.text("density", "kind", true)) {
    if (*v == "constant" || *v == "gaussian")
      c.density_kind = *v;
    else
      rd.bad("density", "kind", "expected 'constant' or 'gaussian'");
  }
  {
    std::uint64_t d = 1;
    rd.number("density", "dim", d);
    if (d == 1 || d == 2)
      c.dim = static_cast<int>(d);
    else
      constraint("density", "dim", "density.dim must be 1 or 2");
  }
  rd.number("density", "scale", c.density_scale);
  if (!(c.density_scale > 0.0)) constraint("density", "scale", "density.scale must be positive");

  // [sticky]
  bool sticky_ok = true;
  if (c.dim == 1) {
    if (rd.has("sticky", "rectangle")) constraint("sticky", "rectangle", "sticky.rectangle needs density.dim = 2");
    double default_w = 1.0;
    rd.number("sticky", "weight", default_w);
    if (auto v = rd.text("sticky", "points")) {
      for (const auto& item : detail::split_list(*v)) {
        const auto colon = item.find(':');
        const auto x = detail::to_double(item.substr(0, colon));
        const auto w = colon == std::string::npos ? std::optional<double>(default_w)
                                                  : detail::to_double(item.substr(colon + 1));
        if (!x || !w) {
          rd.bad("sticky", "points", "'" + item + "' is not 'x' or 'x:weight'");
          sticky_ok = false;
          continue;
        }
        c.points.push_back({*x, *w});
      }
    }
    for (std::size_t k = 0; k < c.points.size(); ++k) {
      if (c.points[k].weight < 0.0) {
        constraint("sticky", "points", "sticky weights must be nonnegative");
        sticky_ok = false;
      }
      if (k > 0 && !(c.points[k].x > c.points[k - 1].x)) {
        constraint("sticky", "points", "sticky points must be strictly increasing");
        sticky_ok = false;
      }
    }
  } else {
    if (rd.has("sticky", "points")) constraint("sticky", "points", "sticky.points needs density.dim = 1");
    if (auto v = rd.numbers("sticky", "rectangle")) {
      if (v->size() != 4) {
        rd.bad("sticky", "rectangle", "expected 'a1, b1, a2, b2'");
        sticky_ok = false;
      } else {
        c.rect = StickyRectangle{(*v)[0], (*v)[1], (*v)[2], (*v)[3]};
        if (!(c.rect->a1 < c.rect->b1 && c.rect->a2 < c.rect->b2)) {
          constraint("sticky", "rectangle", "rectangle needs a1 < b1 and a2 < b2");
          sticky_ok = false;
        }
      }
    } else {
      if (!rd.has("sticky", "rectangle")) rd.missing("sticky", "rectangle");
      sticky_ok = false;
    }
    rd.number("sticky", "w_surf", c.w_surf);
    if (c.w_surf < 0.0) {
      constraint("sticky", "w_surf", "sticky.w_surf must be nonnegative");
      sticky_ok = false;
    }
  }

  // [grid]
  const bool chain_kind = c.kind == ExperimentKind::chain;
  rd.number("grid", "h", c.h, chain_kind);
  rd.number("grid", "L", c.L, chain_kind);
  bool grid_ok = c.h > 0.0 && c.L > 0.0;
  if (!(c.h > 0.0)) constraint("grid", "h", "grid.h must be positive");
  if (!(c.L > 0.0)) constraint("grid", "L", "grid.L must be positive");

  // [sim]
  {
    std::uint64_t seed = 1, n = 1;
    rd.number("sim", "seed", seed);
    rd.number("sim", "T", c.sim.T, true);
    rd.number("sim", "n_paths", n);
    c.sim.seed = seed;
    c.sim.n_paths = n;
    if (n < 1) constraint("sim", "n_paths", "sim.n_paths must be at least 1");
    if (!(c.sim.T > 0.0)) constraint("sim", "T", "sim.T must be positive");
    c.burn_in = c.sim.T / 10.0;
    rd.number("sim", "burn_in", c.burn_in);
    if (c.burn_in < 0.0 || c.burn_in >= c.sim.T) constraint("sim", "burn_in", "sim.burn_in must lie in [0, T)");
    if (auto v = rd.numbers("sim", "start")) {
      if (static_cast<int>(v->size()) != c.dim)
        rd.bad("sim", "start", "expected " + std::to_string(c.dim) + " coordinate(s)");
      else
        for (int a = 0; a < c.dim; ++a) c.start[a] = (*v)[a];
    }
    c.sim.recording = c.dim == 1 ? Recording::events : Recording::snapshots;
    if (auto v = rd.text("sim", "recording")) {
      if (*v == "events")
        c.sim.recording = Recording::events;
      else if (*v == "snapshots")
        c.sim.recording = Recording::snapshots;
      else
        rd.bad("sim", "recording", "expected 'events' or 'snapshots'");
    }
    c.sim.snapshot_dt = c.sim.T / 1000.0;
    rd.number("sim", "snapshot_dt", c.sim.snapshot_dt);
    if (!(c.sim.snapshot_dt > 0.0)) constraint("sim", "snapshot_dt", "sim.snapshot_dt must be positive");
  }

  // [timechange]
  rd.number("timechange", "w", c.timechange.w);
  rd.number("timechange", "dt", c.timechange.dt);
  rd.number("timechange", "eps", c.timechange.eps);
  c.timechange.x0 = c.start[0];

  // [stats]
  {
    auto& s = c.stats;
    if (auto v = rd.text("stats", "observables")) s.observables = detail::split_list(*v);
    if (auto v = rd.text("stats", "probes")) {
      for (const auto& item : detail::split_list(*v)) {
        std::vector<double> xs;
        std::stringstream ss(item);
        bool ok = true;
        for (std::string part; std::getline(ss, part, ':');) {
          const auto d = detail::to_double(part);
          if (!d) ok = false;
          else xs.push_back(*d);
        }
        if (!ok || static_cast<int>(xs.size()) != c.dim) {
          rd.bad("stats", "probes", "'" + item + "' is not a point (use x or x:y)");
          continue;
        }
        s.probes.push_back({xs[0], c.dim > 1 ? xs[1] : 0.0});
      }
    }
    rd.number("stats", "lag", s.lag);
    rd.number("stats", "moment_step", s.moment_step);
    rd.number("stats", "min_samples", s.min_samples);
    if (auto v = rd.text("stats", "test_functions")) s.test_functions = detail::split_list(*v);
    rd.number("stats", "blocks", s.blocks);
    if (auto v = rd.text("stats", "generator_sampling")) {
      if (*v == "cell_average")
        s.generator_sampling = GeneratorSampling::cell_average;
      else if (*v == "pointwise")
        s.generator_sampling = GeneratorSampling::pointwise;
      else
        rd.bad("stats", "generator_sampling", "expected 'cell_average' or 'pointwise'");
    }
    rd.number("stats", "small_ball", s.small_ball);
    rd.number("stats", "bias_tol", s.bias_tol);
    rd.number("stats", "tv_tol", s.tv_tol);
    rd.number("stats", "drift_rel_tol", s.drift_rel_tol);
    rd.number("stats", "diffusion_rel_tol", s.diffusion_rel_tol);
    rd.number("stats", "ratio_tol", s.ratio_tol);
    rd.number("stats", "min_crossings", s.min_crossings);
    if (s.blocks < 1) constraint("stats", "blocks", "stats.blocks must be at least 1");
    if (!(s.small_ball > 0.0)) constraint("stats", "small_ball", "stats.small_ball must be positive");
  }

  // Cross-field constraints, only once the pieces themselves parsed.
  const bool pieces_ok = errors.empty();
  if (pieces_ok && sticky_ok) {
    const StickyStructure sticky = c.sticky();
    if (chain_kind && grid_ok) {
      const GridSpec g = c.grid();
      // Alignment first, so misplaced coordinates get their own code.
      bool aligned = true;
      auto check_align = [&](double x, const std::string& key) {
        if (std::abs(x - std::round(x / c.h) * c.h) > 1e-12) {
          errors.push_back({"E_ALIGN", rd.line("sticky", key), 0,
                            "sticky coordinate " + format_number(x) + " is not a multiple of h = " +
                                format_number(c.h),
                            {}});
          aligned = false;
        }
      };
      if (c.dim == 1)
        for (const auto& p : c.points) check_align(p.x, "points");
      else
        for (double x : {c.rect->a1, c.rect->b1, c.rect->a2, c.rect->b2}) check_align(x, "rectangle");
      if (aligned) {
        try {
          validate_grid(g, sticky);
        } catch (const Error& e) {
          errors.push_back({"E_CONFIG", rd.line("grid", "h"), 0, e.what(), {}});
        }
      }
      for (int a = 0; a < c.dim; ++a)
        if (std::abs(c.start[a]) > c.L) constraint("sim", "start", "sim.start lies outside the truncation box");
      if (c.stats.wants("moments")) {
        if (c.stats.probes.empty()) rd.missing("stats", "probes");
        std::vector<ProbeCell> cells;
        for (const auto& p : c.stats.probes) cells.push_back({p, c.h / 2});
        try {
          validate_probe_cells(cells, sticky, g.box, c.h);
        } catch (const Error& e) {
          constraint("stats", "probes", e.what());
        }
        const double m = c.stats.lag / c.stats.moment_step;
        if (!(c.stats.lag > 0.0 && c.stats.moment_step > 0.0) || std::abs(m - std::round(m)) > 1e-9 * std::max(1.0, m))
          constraint("stats", "lag", "stats.lag must be a positive multiple of stats.moment_step");
      }
    }
    if (!chain_kind) {
      if (c.dim != 1 || c.density_kind != "constant" || c.points.size() != 1 || c.points[0].x != 0.0)
        constraint("experiment", "kind", "the time-change sampler needs density = constant, dim = 1, sticky points = 0");
      try {
        c.timechange.validate();
      } catch (const Error& e) {
        constraint("timechange", "dt", e.what());
      }
      for (const auto& s : c.stats.statistics)
        if (s != "small_ball" && s != "crossings")
          constraint("experiment", "statistics", "statistic '" + s + "' needs a chain experiment");
    }
  }

  if (c.stats.wants("fukushima")) {
    if (c.stats.test_functions.empty()) {
      errors.push_back({"E_MISSING_TESTFN", rd.line("experiment", "statistics"), 0,
                        "fukushima statistic requested without stats.test_functions", {}});
    } else if (sticky_ok && pieces_ok) {
      const StickyStructure sticky = c.sticky();
      for (const auto& id : c.stats.test_functions)
        if (!catalog::find(id, sticky)) rd.bad("stats", "test_functions", "unknown catalog function '" + id + "'");
    }
  }
  if (c.stats.wants("ergodic")) {
    if (c.stats.observables.empty()) rd.missing("stats", "observables");
    if (sticky_ok && pieces_ok)
      for (const auto& o : c.stats.observables)
        if (!observable(o, c.sticky())) rd.bad("stats", "observables", "unknown observable '" + o + "'");
  }

  std::stable_sort(errors.begin(), errors.end(),
                   [](const ConfigDiagnostic& a, const ConfigDiagnostic& b) { return a.line < b.line; });
  if (errors.empty()) result.config = std::move(c);
  return result;
}

/// FNV-1a of the config text; ties report rows to the exact input.
inline std::uint64_t config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace sticky_dbm
