// SPDX-License-Identifier: Apache-2.0
//
// CSV formats.
//
//   report.csv: experiment_id,statistic,value,ci_halfwidth,theoretical,pass,n_paths,T,h,seed
//   paths.csv:  path_id,t,x1[,x2],on_sticky
//
// Numbers are written with 17 significant digits so that reruns compare
// byte for byte. Missing values are empty fields.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sticky_dbm/chain.hpp"
#include "sticky_dbm/error.hpp"
#include "sticky_dbm/samplers.hpp"

namespace sticky_dbm {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

struct ReportRow {
  std::string experiment_id;
  std::string statistic;
  double value = 0.0;
  double ci_halfwidth = std::numeric_limits<double>::quiet_NaN();
  double theoretical = std::numeric_limits<double>::quiet_NaN();
  bool pass = true;
  std::uint64_t n_paths = 0;
  double T = std::numeric_limits<double>::quiet_NaN();
  double h = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
};

inline constexpr const char* kReportHeader = "experiment_id,statistic,value,ci_halfwidth,theoretical,pass,n_paths,T,h,seed";

inline void write_report(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << kReportHeader << '\n';
  for (const auto& r : rows)
    os << r.experiment_id << ',' << r.statistic << ',' << format_number(r.value) << ','
       << format_number(r.ci_halfwidth) << ',' << format_number(r.theoretical) << ',' << (r.pass ? "pass" : "fail")
       << ',' << r.n_paths << ',' << format_number(r.T) << ',' << format_number(r.h) << ',' << r.seed << '\n';
}

inline bool all_pass(const std::vector<ReportRow>& rows) {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

/// Writes recorded paths. Chain states are written as their coordinates.
inline void write_paths(std::ostream& os, const std::vector<PathSample>& paths, const JumpChain* chain, int dim,
                        const StickyStructure& sticky) {
  os << "path_id,t,x1" << (dim > 1 ? ",x2" : "") << ",on_sticky\n";
  for (const auto& p : paths) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      Point x{0.0, 0.0};
      bool on = false;
      if (p.sampler == SamplerId::chain) {
        require(chain != nullptr, Errc::contract_violation, "chain paths need the chain for coordinates");
        x = chain->coordinate(p.states[i]);
        on = chain->is_sticky(p.states[i]);
      } else {
        x = point1(p.positions[i]);
        on = sticky.contains(x);
      }
      os << p.index << ',' << format_number(p.times[i]) << ',' << format_number(x[0]);
      if (dim > 1) os << ',' << format_number(x[1]);
      os << ',' << (on ? 1 : 0) << '\n';
    }
  }
}

/// One parsed paths.csv record.
struct PathRecord {
  std::uint64_t path_id = 0;
  double t = 0.0;
  Point x{0.0, 0.0};
  bool on_sticky = false;
};

inline std::vector<PathRecord> read_path_records(std::istream& is) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), Errc::configuration, "paths file is empty");
  int dim = 0;
  if (line == "path_id,t,x1,on_sticky")
    dim = 1;
  else if (line == "path_id,t,x1,x2,on_sticky")
    dim = 2;
  else
    fail(Errc::configuration, "unexpected paths header: " + line);
  std::vector<PathRecord> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    require(cells.size() == static_cast<std::size_t>(dim + 3), Errc::configuration,
            "paths line " + std::to_string(lineno) + ": wrong field count");
    try {
      PathRecord r;
      r.path_id = std::stoull(cells[0]);
      r.t = std::stod(cells[1]);
      r.x[0] = std::stod(cells[2]);
      if (dim > 1) r.x[1] = std::stod(cells[3]);
      r.on_sticky = cells.back() == "1";
      out.push_back(r);
    } catch (const std::exception&) {
      fail(Errc::configuration, "paths line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return out;
}

/// Rebuilds chain paths from records by snapping coordinates to grid nodes.
inline std::vector<PathSample> chain_paths_from_records(const std::vector<PathRecord>& records, const JumpChain& chain,
                                                        double horizon, std::uint64_t seed) {
  require(chain.grid().has_value(), Errc::contract_violation, "snapping needs a grid chain");
  std::vector<PathSample> out;
  for (const auto& r : records) {
    if (out.empty() || out.back().index != r.path_id) {
      PathSample p;
      p.sampler = SamplerId::chain;
      p.index = r.path_id;
      p.horizon = horizon;
      p.seed = seed;
      out.push_back(std::move(p));
    }
    const auto s = chain.grid()->nearest(r.x);
    require(s.has_value(), Errc::configuration, "recorded point outside the truncation box");
    auto& p = out.back();
    require(p.times.empty() || r.t > p.times.back(), Errc::configuration, "path times must increase");
    p.times.push_back(r.t);
    p.states.push_back(*s);
  }
  return out;
}

inline std::vector<PathSample> position_paths_from_records(const std::vector<PathRecord>& records, double horizon,
                                                           std::uint64_t seed) {
  std::vector<PathSample> out;
  for (const auto& r : records) {
    if (out.empty() || out.back().index != r.path_id) {
      PathSample p;
      p.sampler = SamplerId::timechange;
      p.index = r.path_id;
      p.horizon = horizon;
      p.seed = seed;
      out.push_back(std::move(p));
    }
    auto& p = out.back();
    require(p.times.empty() || r.t > p.times.back(), Errc::configuration, "path times must increase");
    p.times.push_back(r.t);
    p.positions.push_back(r.x[0]);
  }
  return out;
}

}  // namespace sticky_dbm
