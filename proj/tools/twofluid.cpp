// twofluid: run cases, print oracles, probe eigenvector collapse, dump approximants.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "twofluid/cases.hpp"
#include "twofluid/driver.hpp"
#include "twofluid/io.hpp"
#include "twofluid/matfun.hpp"
#include "twofluid/spectrum.hpp"

using namespace twofluid;

namespace {

struct RunArgs {
  std::string case_name = "ransom";
  std::string scheme;
  int p = 0;
  double diffusion = 0.0;
  double tau = -1.0;
  double alpha = -1.0;
  double cfl = 0.0;
  double t_end = -1.0;
  int snapshots = 1;
  std::string out;
  bool quiet = false;
};

std::string output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* d = std::getenv("TWOFLUID_OUTPUT_DIR")) return d;
  return "out";
}

int do_run(const RunArgs& a) {
  Config cfg = load_case_config(a.case_name);
  if (!a.scheme.empty()) {
    cfg.set("scheme", a.scheme);
    if (a.scheme != "phdd_pos") cfg.set("control.positivity", "false");
  }
  if (a.p > 0) cfg.set("scheme.p", std::to_string(a.p));
  if (a.diffusion > 0.0) cfg.set("scheme.diffusion", format17(a.diffusion));
  if (a.tau >= 0.0) cfg.set("scheme.tau", format17(a.tau));
  if (a.alpha >= 0.0) cfg.set("inlet.alpha_v", format17(a.alpha));
  if (a.cfl > 0.0) cfg.set("control.cfl", format17(a.cfl));
  if (a.t_end >= 0.0) cfg.set("t_end", format17(a.t_end));
  const CaseSpec c = case_from_config(cfg);
  const TwoFluidModel model = c.model();
  const FiniteVolumeSolver solver(model, c.mesh, c.bc, c.scheme);

  namespace fs = std::filesystem;
  const fs::path dir = output_dir(a.out);
  fs::create_directories(dir);

  RunOptions opt;
  opt.t_end = c.t_end;
  opt.ctl = c.ctl;
  opt.snapshot_interval = a.snapshots > 1 ? c.t_end / (a.snapshots - 1) : 0.0;
  int count = 0;
  opt.on_snapshot = [&](const Snapshot& s) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%04d.csv", c.name.c_str(), count++);
    write_snapshot((dir / name).string(), c.mesh, s.field);
    if (!a.quiet) std::fprintf(stderr, "t = %.6g s -> %s\n", s.t, name);
  };
  const RunResult r = run(solver, c.initial_field(model), opt);
  const std::string scheme = cfg.str("scheme", "phdd");
  write_stats((dir / (c.name + "_stats.txt")).string(), r.stats, scheme);
  write_stats(std::cout, r.stats, scheme);
  return 0;
}

int do_oracle(const std::string& case_name, double t, int points) {
  const Config cfg = load_case_config(case_name);
  const CaseSpec c = case_from_config(cfg);
  std::cout.precision(17);
  if (!c.src.heating) {
    RansomOracle o;
    o.g = std::abs(c.src.g);
    o.u0 = c.bc.inlet.u_l;
    o.alpha0 = c.bc.inlet.alpha_v;
    o.length = c.mesh.length;
    const double tt = t >= 0.0 ? t : c.t_end;
    std::cout << "x,alpha_v,u_l\n";
    for (int i = 0; i < points; ++i) {
      const double y = o.length * (i + 0.5) / points;
      std::cout << y << ',' << o.alpha_v(y, tt) << ',' << (y < o.front(tt) ? o.liquid_velocity(y) : o.u0) << '\n';
    }
    std::cerr << "front at t = " << tt << ": " << o.front(tt) << " m\n";
    return 0;
  }
  std::cout << "quantity,value\n";
  std::cout << "heat_rate," << channel_heating_rate(c) << '\n';
  try {
    std::cout << "y_boil," << boiling_onset_oracle(c) << '\n';
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SaturatedInlet) throw;
    std::cout << "y_boil,0\n";
  }
  return 0;
}

int do_probe(const std::string& case_name, double alpha0, double ur, int decades, int per_decade) {
  Config cfg = load_case_config(case_name);
  cfg.set("source.kappa", "0");
  const CaseSpec c = case_from_config(cfg);
  const TwoFluidModel m = c.model();
  Primitive base = c.bc.inlet;
  base.p = c.operating_p > 0.0 ? c.operating_p : c.bc.p_outlet;
  base.alpha_v = alpha0;
  base.u_v = base.u_l + ur;
  std::vector<double> al;
  for (int k = 0; k <= decades * per_decade; ++k) al.push_back(alpha0 * std::pow(10.0, -static_cast<double>(k) / per_decade));
  const CollapseReport rep = collapse_probe(m, base, al);
  std::cout << "alpha,cond_R,angle_rad\n";
  for (const auto& pt : rep.points) std::cout << format17(pt.alpha) << ',' << format17(pt.cond) << ',' << format17(pt.angle) << '\n';
  return 0;
}

int do_poly(const std::string& variant, int p, double D, double tau, double lmin, double lint, double lmax, int points) {
  const Variant v = variant_from_string(variant);
  EigenBounds b;
  b.lambda_min = lmin;
  b.lambda_max = lmax;
  b.lambda_int = lint;
  b.a_max = std::max(std::abs(lmin), std::abs(lmax));
  std::function<double(double)> f;
  PolynomialSpec P;
  switch (v) {
    case Variant::P0: P = build_low_order(LowOrder::P0, lmin, lmax); break;
    case Variant::P1: P = build_low_order(LowOrder::P1, lmin, lmax); break;
    case Variant::P2: P = build_low_order(LowOrder::P2, lmin, lmax); break;
    case Variant::P2p: P = build_P2p(p); break;
    case Variant::PHDF: P = build_PHDF(); break;
    case Variant::PHDD: P = build_PHDD(b, D); break;
    case Variant::Tanh: break;
    case Variant::Exact: break;
  }
  if (v == Variant::Tanh) {
    f = [tau](double x) { return phi_tanh(x, tau); };
  } else if (v == Variant::Exact) {
    f = [](double x) { return std::abs(x); };
  } else {
    f = [P](double x) { return P(x); };
  }
  std::cout << "x,P,abs_x\n";
  for (int i = 0; i < points; ++i) {
    const double x = -1.0 + 2.0 * i / (points - 1);
    std::cout << format17(x) << ',' << format17(f(x)) << ',' << format17(std::abs(x)) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-fluid finite-volume solver with matrix-function upwinding"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "simulate a case");
  run_cmd->add_option("--case", ra.case_name, "case name or .cfg path")->capture_default_str();
  run_cmd->add_option("--scheme", ra.scheme, "exact|p0|p1|p2|p2p|phdf|phdd|phdd_pos|tanh");
  run_cmd->add_option("--p", ra.p, "P2p order");
  run_cmd->add_option("--D", ra.diffusion, "PHDD diffusion");
  run_cmd->add_option("--tau", ra.tau, "tanh tau (0: automatic)");
  run_cmd->add_option("--alpha", ra.alpha, "inlet void fraction");
  run_cmd->add_option("--cfl", ra.cfl, "CFL number");
  run_cmd->add_option("--t-end", ra.t_end, "final time [s]");
  run_cmd->add_option("--snapshots", ra.snapshots, "number of equally spaced snapshots (1: final only)")->capture_default_str();
  run_cmd->add_option("--out", ra.out, "output directory (default $TWOFLUID_OUTPUT_DIR or ./out)");
  run_cmd->add_flag("--quiet", ra.quiet, "no progress lines");

  std::string oc = "ransom";
  double ot = -1.0;
  int opts = 100;
  auto* oracle_cmd = app.add_subcommand("oracle", "print the analytic oracle of a case");
  oracle_cmd->add_option("--case", oc)->capture_default_str();
  oracle_cmd->add_option("--t", ot, "time for the Ransom profile (default t_end)");
  oracle_cmd->add_option("--points", opts)->capture_default_str();

  std::string pcase = "channel_saturated";
  double palpha = 0.1, pur = 5.0;
  int pdec = 7, pper = 1;
  auto* probe_cmd = app.add_subcommand("probe", "eigenvector conditioning along a void-fraction sweep");
  probe_cmd->add_option("--case", pcase)->capture_default_str();
  probe_cmd->add_option("--alpha0", palpha)->capture_default_str();
  probe_cmd->add_option("--ur", pur, "relative velocity at alpha0")->capture_default_str();
  probe_cmd->add_option("--decades", pdec)->capture_default_str();
  probe_cmd->add_option("--per-decade", pper)->capture_default_str();

  std::string pv = "phdf";
  int pp = 4, ppoints = 1001;
  double pD = 1.0, ptau = 1e-3, plmin = -1.0, plint = 0.05, plmax = 1.0;
  auto* poly_cmd = app.add_subcommand("poly", "sample an approximant of |x| on [-1, 1]");
  poly_cmd->add_option("--variant", pv)->capture_default_str();
  poly_cmd->add_option("--p", pp)->capture_default_str();
  poly_cmd->add_option("--D", pD)->capture_default_str();
  poly_cmd->add_option("--tau", ptau)->capture_default_str();
  poly_cmd->add_option("--lambda-min", plmin)->capture_default_str();
  poly_cmd->add_option("--lambda-int", plint)->capture_default_str();
  poly_cmd->add_option("--lambda-max", plmax)->capture_default_str();
  poly_cmd->add_option("--points", ppoints)->check(CLI::Range(2, 10000000))->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return do_run(ra);
    if (*oracle_cmd) return do_oracle(oc, ot, opts);
    if (*probe_cmd) return do_probe(pcase, palpha, pur, pdec, pper);
    if (*poly_cmd) return do_poly(pv, pp, pD, ptau, plmin, plint, plmax, ppoints);
  } catch (const Error& e) {
    std::cerr << "error {\n  kind: " << to_string(e.kind()) << "\n  cell: " << e.cell() << "\n  message: " << e.what()
              << "\n}\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error {\n  kind: Internal\n  message: " << e.what() << "\n}\n";
    return 1;
  }
  return 1;
}
