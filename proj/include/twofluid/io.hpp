#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "twofluid/driver.hpp"
#include "twofluid/errors.hpp"
#include "twofluid/solver.hpp"

namespace twofluid {

inline const char* kSnapshotHeader = "x,alpha_v,p,u_v,u_l,h_v,h_l";

/// One row of a snapshot file.
struct ProfileRow {
  double x = 0.0;
  Primitive w;
};

inline std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_snapshot(std::ostream& os, const Mesh1D& mesh, const Field& f) {
  os << kSnapshotHeader << '\n';
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Primitive& w = f[i].prim;
    os << format17(mesh.center(static_cast<int>(i))) << ',' << format17(w.alpha_v) << ',' << format17(w.p) << ','
       << format17(w.u_v) << ',' << format17(w.u_l) << ',' << format17(w.h_v) << ',' << format17(w.h_l) << '\n';
  }
}

inline void write_snapshot(const std::string& path, const Mesh1D& mesh, const Field& f) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  write_snapshot(os, mesh, f);
  if (!os) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

inline std::vector<ProfileRow> read_snapshot(std::istream& is, const std::string& source = "<input>") {
  std::string line;
  if (!std::getline(is, line) || line != kSnapshotHeader) {
    throw Error(ErrorKind::IoError, source + ": missing snapshot header");
  }
  std::vector<ProfileRow> rows;
  int no = 1;
  while (std::getline(is, line)) {
    ++no;
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      char* end = nullptr;
      const double d = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') {
        throw Error(ErrorKind::IoError, source + ":" + std::to_string(no) + ": bad number '" + tok + "'");
      }
      v.push_back(d);
    }
    if (v.size() != 7) throw Error(ErrorKind::IoError, source + ":" + std::to_string(no) + ": expected 7 columns");
    rows.push_back({v[0], Primitive{v[1], v[2], v[3], v[4], v[5], v[6]}});
  }
  return rows;
}

inline std::vector<ProfileRow> read_snapshot(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::IoError, "cannot read '" + path + "'");
  return read_snapshot(is, path);
}

/// Run statistics as indented `key: value` text.
inline void write_stats(std::ostream& os, const RunStats& s, const std::string& scheme = "") {
  os << "run_stats {\n";
  if (!scheme.empty()) os << "  scheme: " << scheme << '\n';
  os << "  steps: " << s.steps << '\n';
  os << "  problematic_steps: " << s.problematic_steps << '\n';
  os << "  problematic_percent: " << format17(100.0 * s.problematic_fraction()) << '\n';
  os << "  resolves: " << s.resolves << '\n';
  os << "  mean_iterations: " << format17(s.mean_iterations()) << '\n';
  os << "  dt_reductions: " << s.dt_reductions << '\n';
  os << "  newton_iterations: " << s.newton_iterations << '\n';
  os << "  t_final: " << format17(s.t_final) << '\n';
  os << "  dt_last: " << format17(s.dt_last) << '\n';
  os << "  wall_seconds: " << format17(s.wall_seconds) << '\n';
  os << "  histogram {";
  for (const auto& [k, v] : s.histogram) os << ' ' << k << ':' << v;
  os << " }\n}\n";
}

inline void write_stats(const std::string& path, const RunStats& s, const std::string& scheme = "") {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  write_stats(os, s, scheme);
  if (!os) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

}  // namespace twofluid
