// SPDX-License-Identifier: Apache-2.0
//
// Acceptance runner: one PASS/FAIL line per criterion followed by its checks.
//
//   sticky_dbm_acceptance [--full] [--criterion N]... [--threads N] [--out DIR]
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "sticky_dbm/acceptance.hpp"
#include "sticky_dbm/parallel.hpp"
#include "sticky_dbm/report.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance matrix"};
  bool full = false;
  std::vector<int> only;
  unsigned threads = 0;
  std::string out;
  app.add_flag("--full", full, "include slow criteria");
  app.add_option("--criterion", only, "run only these criteria")->check(CLI::Range(1, 9));
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "directory for acceptance.csv");
  CLI11_PARSE(app, argc, argv);

  sticky_dbm::acceptance::Options opt;
  opt.threads = sticky_dbm::resolve_threads(threads);
  const auto ids = only.empty() ? sticky_dbm::acceptance::default_ids(full) : only;
  try {
    std::vector<sticky_dbm::ReportRow> rows;
    const bool ok = sticky_dbm::acceptance::run_matrix(ids, opt, std::cout, &rows);
    if (!out.empty()) {
      std::filesystem::create_directories(out);
      std::ofstream os(std::filesystem::path(out) / "acceptance.csv");
      sticky_dbm::write_report(os, rows);
    }
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 3;
  }
}
