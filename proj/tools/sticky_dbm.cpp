// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end.
//
//   sticky_dbm chain-info      --config FILE [--out DIR]
//   sticky_dbm generator-check [--config FILE] [--out DIR]
//   sticky_dbm run             --config FILE [--out DIR]
//   sticky_dbm simulate        --config FILE [--out DIR]
//   sticky_dbm report          --config FILE [--paths FILE] [--out DIR]
//   sticky_dbm acceptance      [--full] [--criterion N]... [--out DIR]
//
// Common flags: --threads N (STICKY_DBM_THREADS as fallback), --seed S.
// Exit status: 0 all checks pass, 1 some check failed, 2 bad input,
// 3 runtime error.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "sticky_dbm/sticky_dbm.hpp"

namespace fs = std::filesystem;
using namespace sticky_dbm;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitInput = 2;
constexpr int kExitRuntime = 3;

struct Common {
  std::string config;
  std::string out;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
};

struct InputError {
  std::string message;
};

ExperimentConfig load_config(const Common& c) {
  if (c.config.empty()) throw InputError{"--config is required"};
  std::ifstream in(c.config);
  if (!in) throw InputError{"cannot read " + c.config};
  std::stringstream ss;
  ss << in.rdbuf();
  ParseResult r = parse_config(ss.str());
  if (!r.ok()) throw InputError{c.config + ":\n" + r.message()};
  ExperimentConfig cfg = std::move(*r.config);
  if (c.seed) cfg.sim.seed = *c.seed;
  return cfg;
}

fs::path out_dir(const Common& c, const ExperimentConfig* cfg) {
  if (!c.out.empty()) return c.out;
  if (cfg) return fs::path(cfg->output_dir) / cfg->id;
  return "out";
}

int chain_info(const Common& c) {
  const ExperimentConfig cfg = load_config(c);
  const JumpChain chain = build_chain(cfg.density(), cfg.sticky(), cfg.grid());
  const ChainSummary s = summarize(chain);
  std::ostringstream os;
  os << "key,value\n";
  auto kv = [&](const std::string& k, double v) { os << k << ',' << format_number(v) << '\n'; };
  kv("states", static_cast<double>(s.states));
  kv("interior_states", static_cast<double>(s.interior));
  kv("sticky_states", static_cast<double>(s.sticky));
  kv("reflecting_states", static_cast<double>(s.reflecting));
  kv("edges", static_cast<double>(s.edges));
  kv("pi_total", s.pi_total);
  kv("pi_sticky", s.pi_sticky);
  kv("pi_interior_min", s.pi_interior_min);
  kv("pi_interior_max", s.pi_interior_max);
  kv("rate_min", s.rate_min);
  kv("rate_max", s.rate_max);
  kv("exit_rate_max", s.exit_max);
  kv("sticky_ratio", s.sticky_ratio);
  kv("max_reversibility_error", s.diagnostics.max_reversibility_error);
  kv("max_row_sum", s.diagnostics.max_row_sum);
  if (cfg.dim == 1)
    for (std::size_t i = 0; i < chain.size(); ++i)
      if (chain.is_sticky(i)) kv("pi@" + format_number(chain.coordinate(i)[0]), chain.pi(i));
  kv("rho_mu_mass_box", rho_mu_mass(cfg.density(), cfg.sticky(), cfg.grid().box));
  std::cout << os.str();
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    std::ofstream(fs::path(c.out) / "chain_info.csv") << os.str();
  }
  return 0;
}

int generator_check(const Common& c) {
  struct Case {
    std::string tag;
    Density rho;
    StickyStructure sticky;
  };
  std::vector<Case> cases;
  if (!c.config.empty()) {
    const ExperimentConfig cfg = load_config(c);
    cases.push_back({std::to_string(cfg.dim) + "d:" + cfg.density_kind, cfg.density(), cfg.sticky()});
  } else {
    for (int d : {1, 2}) {
      const StickyStructure a =
          d == 1 ? StickyStructure::points({{0.0, 1.0}}) : StickyStructure::rectangle({-1.0, 1.0, -1.0, 1.0}, 1.0);
      cases.push_back({std::to_string(d) + "d:constant", Density::constant(d), a});
      cases.push_back({std::to_string(d) + "d:gaussian", Density::gaussian(d), a});
    }
  }
  std::ostringstream os;
  os << "pair_id,residual,tolerance,pass\n";
  bool ok = true;
  for (const auto& k : cases) {
    for (const auto& [fi, gi] : catalog::symmetry_pairs(k.sticky.dim())) {
      const TestFunction f = *catalog::find(fi, k.sticky), g = *catalog::find(gi, k.sticky);
      const double res = symmetry_residual(f, g, k.rho, k.sticky);
      const double tol =
          k.sticky.dim() == 1 ? 1e-8 * (1.0 + std::abs(energy_form(f, f, k.rho, k.sticky))) : 1e-6;
      const bool pass = res <= tol;
      ok = ok && pass;
      os << k.tag << ':' << fi << '/' << gi << ',' << format_number(res) << ',' << format_number(tol) << ','
         << (pass ? "pass" : "fail") << '\n';
    }
  }
  std::cout << os.str();
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    std::ofstream(fs::path(c.out) / "generator_check.csv") << os.str();
  }
  return ok ? 0 : kExitFail;
}

int run(const Common& c) {
  const ExperimentConfig cfg = load_config(c);
  const fs::path dir = out_dir(c, &cfg);
  const RunOutcome r = run_experiment(cfg, dir, resolve_threads(c.threads));
  write_report(std::cout, r.rows);
  std::cerr << "wrote " << r.report_path.string() << " and " << r.manifest_path.string() << '\n';
  return r.pass ? 0 : kExitFail;
}

int simulate(const Common& c) {
  const ExperimentConfig cfg = load_config(c);
  const fs::path dir = out_dir(c, &cfg);
  const fs::path p = simulate_to_files(cfg, dir, resolve_threads(c.threads));
  std::cerr << "wrote " << p.string() << '\n';
  return 0;
}

int report(const Common& c, const std::string& paths_file) {
  const ExperimentConfig cfg = load_config(c);
  const fs::path dir = out_dir(c, &cfg);
  const fs::path src = paths_file.empty() ? dir / "paths.csv" : fs::path(paths_file);
  std::ifstream in(src);
  if (!in) throw InputError{"cannot read " + src.string()};
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = evaluate_recorded(cfg, read_path_records(in));
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const RunOutcome r = write_rows(dir, cfg, rows, "report", wall);
  write_report(std::cout, r.rows);
  return r.pass ? 0 : kExitFail;
}

int acceptance_cmd(const Common& c, bool full, const std::vector<int>& only) {
  acceptance::Options opt;
  opt.threads = resolve_threads(c.threads);
  const std::vector<int> ids = only.empty() ? acceptance::default_ids(full) : only;
  std::vector<ReportRow> rows;
  const bool ok = acceptance::run_matrix(ids, opt, std::cout, &rows);
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    std::ofstream os(fs::path(c.out) / "acceptance.csv");
    write_report(os, rows);
  }
  return ok ? 0 : kExitFail;
}

void add_common(CLI::App* sub, Common& c, bool needs_config) {
  auto* cfg = sub->add_option("--config", c.config, "experiment config file");
  if (needs_config) cfg->required();
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--threads", c.threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "override sim.seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sticky diffusion toolkit: chain discretization, path simulation and statistics"};
  app.set_version_flag("--version", std::string(kLibraryVersion));
  app.require_subcommand(1);

  Common common;
  bool full = false;
  std::vector<int> only;
  std::string paths_file;

  auto* info = app.add_subcommand("chain-info", "print the jump chain summary as CSV");
  add_common(info, common, true);
  auto* gen = app.add_subcommand("generator-check", "symmetry residuals of the generator on the catalog");
  add_common(gen, common, false);
  auto* runc = app.add_subcommand("run", "simulate and write report.csv and manifest.json");
  add_common(runc, common, true);
  auto* sim = app.add_subcommand("simulate", "simulate and write paths.csv");
  add_common(sim, common, true);
  auto* rep = app.add_subcommand("report", "statistics from a stored paths.csv");
  add_common(rep, common, true);
  rep->add_option("--paths", paths_file, "paths file (default: <out>/paths.csv)");
  auto* acc = app.add_subcommand("acceptance", "run the acceptance matrix");
  add_common(acc, common, false);
  acc->add_flag("--full", full, "include slow criteria");
  acc->add_option("--criterion", only, "run only these criteria")->check(CLI::Range(1, 9));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*info) return chain_info(common);
    if (*gen) return generator_check(common);
    if (*runc) return run(common);
    if (*sim) return simulate(common);
    if (*rep) return report(common, paths_file);
    if (*acc) return acceptance_cmd(common, full, only);
  } catch (const InputError& e) {
    std::cerr << e.message << '\n';
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return e.code() == Errc::configuration ? kExitInput : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
