#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "twofluid/config.hpp"
#include "twofluid/eos.hpp"
#include "twofluid/errors.hpp"
#include "twofluid/matfun.hpp"
#include "twofluid/model.hpp"
#include "twofluid/solver.hpp"

#ifndef TWOFLUID_DEFAULT_CASE_DIR
#define TWOFLUID_DEFAULT_CASE_DIR "cases"
#endif

namespace twofluid {

struct CaseSpec {
  std::string name;
  Mesh1D mesh;
  PhaseEos vapor;
  PhaseEos liquid;
  std::optional<SaturationTable> sat;
  SourceConfig src;
  BoundarySpec bc;
  double t_end = 0.0;
  double operating_p = 0.0;
  bool hydrostatic_init = false;
  TimeStepControl ctl;
  AbsApproximant scheme;

  TwoFluidModel model() const { return TwoFluidModel(vapor, liquid, src, sat, bc.inlet.h_v, bc.inlet.h_l); }

  /// Inlet primitives everywhere; pressure at the outlet value, optionally hydrostatic.
  Field initial_field(const TwoFluidModel& m) const {
    Field f(mesh.n);
    const Primitive in = bc.inlet;
    for (int i = 0; i < mesh.n; ++i) {
      Primitive w = in;
      w.p = bc.p_outlet;
      if (hydrostatic_init && src.gravity) {
        const double rho_m = in.alpha_v * vapor.density(bc.p_outlet, in.h_v) +
                             (1.0 - in.alpha_v) * liquid.density(bc.p_outlet, in.h_l);
        w.p = bc.p_outlet - rho_m * src.g * (mesh.length - mesh.center(i));
      }
      f[i] = m.from_primitive(w);
    }
    return f;
  }
};

inline PhaseEos eos_from_config(const Config& c, const std::string& prefix, Phase phase) {
  const std::string law = c.str(prefix + ".law");
  ValidityBox box;
  box.p_min = c.num(prefix + ".p_min", box.p_min);
  box.p_max = c.num(prefix + ".p_max", box.p_max);
  box.h_min = c.num(prefix + ".h_min", box.h_min);
  box.h_max = c.num(prefix + ".h_max", box.h_max);
  if (law == "ideal_gas") return PhaseEos(IdealGas{c.num(prefix + ".gamma")}, phase, box);
  if (law == "stiffened_gas") {
    return PhaseEos(StiffenedGas{c.num(prefix + ".gamma"), c.num(prefix + ".p_inf", 0.0), c.num(prefix + ".q", 0.0)},
                    phase, box);
  }
  if (law == "linearized") {
    LinearizedLiquid l;
    l.rho_ref = c.num(prefix + ".rho_ref");
    l.c_ref = c.num(prefix + ".c_ref");
    l.p_ref = c.num(prefix + ".p_ref");
    l.h_ref = c.num(prefix + ".h_ref", 0.0);
    l.c_p = c.num(prefix + ".c_p", 4180.0);
    return PhaseEos(l, phase, box);
  }
  throw Error(ErrorKind::ConfigError, c.source() + ": unknown EOS law '" + law + "' for " + prefix);
}

inline Variant variant_from_string(const std::string& s) {
  if (s == "exact" || s == "roe") return Variant::Exact;
  if (s == "p0") return Variant::P0;
  if (s == "p1") return Variant::P1;
  if (s == "p2") return Variant::P2;
  if (s == "p2p") return Variant::P2p;
  if (s == "phdf") return Variant::PHDF;
  if (s == "phdd" || s == "phdd_pos") return Variant::PHDD;
  if (s == "tanh") return Variant::Tanh;
  throw Error(ErrorKind::ConfigError, "unknown scheme '" + s + "'");
}

inline double channel_heating_rate(double n_pch, double u0, double l_h, const SaturationState& s) {
  return n_pch * u0 * s.latent_heat() / (l_h * s.v_lv());
}

inline double channel_heating_rate(const CaseSpec& c) {
  if (!c.sat) throw Error(ErrorKind::ConfigError, "case has no saturation table");
  return channel_heating_rate(c.src.n_pch, c.src.u0, c.src.l_h, c.sat->at(c.operating_p));
}

/// Steady liquid energy balance: the inlet liquid reaches saturation after (h_sat - h_in) rho_l u0 / q.
inline double boiling_onset(double h_sat, double h_in, double rho_l, double u0, double q) {
  if (!(h_in < h_sat)) throw Error(ErrorKind::SaturatedInlet, "inlet liquid is not subcooled");
  if (!(q > 0.0)) throw Error(ErrorKind::InvalidArgument, "heating rate must be positive");
  return (h_sat - h_in) * rho_l * u0 / q;
}

inline double boiling_onset_oracle(const CaseSpec& c) {
  if (!c.sat) throw Error(ErrorKind::ConfigError, "case has no saturation table");
  const SaturationState s = c.sat->at(c.operating_p);
  const double rho_l = c.liquid.density(c.operating_p, c.bc.inlet.h_l);
  return boiling_onset(s.h_l, c.bc.inlet.h_l, rho_l, c.bc.inlet.u_l, channel_heating_rate(c));
}

struct RansomOracle {
  double u0 = 10.0;
  double alpha0 = 0.2;
  double g = 9.81;
  double length = 12.0;

  double front(double t) const { return u0 * t + 0.5 * g * t * t; }
  double liquid_velocity(double y) const { return std::sqrt(u0 * u0 + 2.0 * g * y); }
  double alpha_v(double y, double t) const {
    if (y >= front(t)) return alpha0;
    return 1.0 - (1.0 - alpha0) * u0 / liquid_velocity(y);
  }
};

inline CaseSpec case_from_config(const Config& c) {
  CaseSpec k;
  k.name = c.str("name");
  k.mesh = Mesh1D(c.integer("mesh.cells"), c.num("mesh.length"));
  k.t_end = c.num("t_end");
  k.vapor = eos_from_config(c, "vapor", Phase::Vapor);
  k.liquid = eos_from_config(c, "liquid", Phase::Liquid);

  const auto knots = c.keys_with_prefix("saturation.knot.");
  if (!knots.empty()) {
    std::vector<SaturationTable::Knot> ks;
    for (const auto& key : knots) {
      const auto v = c.numbers(key);
      if (v.size() != 5) throw Error(ErrorKind::ConfigError, c.source() + ": " + key + " needs p h_v h_l rho_v rho_l");
      ks.push_back({v[0], {v[1], v[2], v[3], v[4]}});
    }
    k.sat = SaturationTable(std::move(ks));
  }

  SourceConfig& s = k.src;
  s.delta = c.num("source.delta", s.delta);
  s.kappa = c.num("source.kappa", s.kappa);
  s.drag = c.flag("source.drag", false);
  s.c_d = c.num("source.c_d", s.c_d);
  s.r_i = c.num("source.r_i", s.r_i);
  s.wall_friction = c.flag("source.wall_friction", false);
  s.friction = c.num("source.friction", s.friction);
  s.d_h = c.num("source.d_h", s.d_h);
  s.gravity = c.flag("source.gravity", false);
  s.g = c.num("source.g", 0.0);
  s.heating = c.flag("source.heating", false);
  s.n_pch = c.num("source.n_pch", s.n_pch);
  s.u0 = c.num("source.u0", s.u0);
  s.l_h = c.num("source.l_h", s.l_h);

  k.bc.inlet.alpha_v = c.num("inlet.alpha_v");
  k.bc.inlet.u_v = c.num("inlet.u_v");
  k.bc.inlet.u_l = c.num("inlet.u_l");
  k.bc.inlet.h_v = c.num("inlet.h_v");
  k.bc.inlet.h_l = c.num("inlet.h_l");
  k.bc.p_outlet = c.num("outlet.p");
  k.bc.inlet.p = k.bc.p_outlet;
  k.operating_p = c.num("operating_p", k.bc.p_outlet);
  k.hydrostatic_init = c.flag("initial.hydrostatic", false);
  if (s.heating) {
    if (!k.sat) throw Error(ErrorKind::ConfigError, c.source() + ": heating requires saturation knots");
    const std::string q = c.str("source.heat_rate", "auto");
    const std::string at = c.str("source.saturation", "local");
    if (at == "operating") {
      s.sat_pressure = k.operating_p;
    } else if (at != "local") {
      throw Error(ErrorKind::ConfigError, c.source() + ": source.saturation must be local or operating");
    }
    s.heat_rate = q == "auto" ? channel_heating_rate(s.n_pch, s.u0, s.l_h, k.sat->at(k.operating_p)) : c.num("source.heat_rate");
  }
  s.validate();

  TimeStepControl& t = k.ctl;
  t.cfl = c.num("control.cfl", t.cfl);
  t.implicit = c.flag("control.implicit", t.implicit);
  t.positivity = c.flag("control.positivity", t.positivity);
  t.dt_min = c.num("control.dt_min", t.dt_min);
  t.newton_max = c.integer("control.newton_max", t.newton_max);
  t.newton_tol = c.num("control.newton_tol", t.newton_tol);
  t.freeze_tol = c.num("control.freeze_tol", t.freeze_tol);
  t.freeze_after = c.integer("control.freeze_after", t.freeze_after);
  t.max_pos_iters = c.integer("control.max_pos_iters", t.max_pos_iters);
  t.max_slip = c.num("control.max_slip", t.max_slip);
  t.validate();

  const Variant v = variant_from_string(c.str("scheme", "phdd"));
  k.scheme = AbsApproximant::make(v, c.integer("scheme.p", 4), c.num("scheme.diffusion", 1.0), c.num("scheme.tau", 0.0));
  if (c.str("scheme", "") == "phdd_pos") k.ctl.positivity = true;

  k.vapor.check(k.bc.p_outlet, k.bc.inlet.h_v);
  k.liquid.check(k.bc.p_outlet, k.bc.inlet.h_l);
  return k;
}

inline std::string case_directory() {
  if (const char* d = std::getenv("TWOFLUID_CASE_DIR")) return d;
  return TWOFLUID_DEFAULT_CASE_DIR;
}

/// Loads a case config; `name` is either a shipped case name or a path to a .cfg file.
inline Config load_case_config(const std::string& name) {
  namespace fs = std::filesystem;
  if (name.find('/') != std::string::npos || (name.size() > 4 && name.substr(name.size() - 4) == ".cfg")) {
    return Config::load(name);
  }
  static const char* known[] = {"ransom", "channel_saturated", "channel_subcooled"};
  bool ok = false;
  for (const char* k : known) ok = ok || name == k;
  if (!ok) throw Error(ErrorKind::UnknownCase, "unknown case '" + name + "'");
  const fs::path p = fs::path(case_directory()) / (name + ".cfg");
  return Config::load(p.string());
}

inline CaseSpec load_case(const std::string& name) { return case_from_config(load_case_config(name)); }

}  // namespace twofluid
