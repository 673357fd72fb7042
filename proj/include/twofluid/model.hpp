#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>

#include "twofluid/eos.hpp"
#include "twofluid/errors.hpp"
#include "twofluid/types.hpp"

namespace twofluid {

struct SourceConfig {
  double delta = 1.1;
  double kappa = 1e-4;

  bool drag = false;
  double c_d = 0.44;
  double r_i = 5e-4;

  bool wall_friction = false;
  double friction = 0.017;
  double d_h = 0.628;

  bool gravity = false;
  double g = 0.0;

  bool heating = false;
  double n_pch = 10.0;
  double u0 = 0.7802;
  double l_h = 3.65;
  double heat_rate = 0.0;  // q [W/m^3]
  double sat_pressure = 0.0;  // > 0: saturation properties taken at this pressure instead of the local one

  void validate() const {
    if (!(delta >= 1.0)) throw Error(ErrorKind::ConfigError, "bestion delta must be >= 1");
    if (!(kappa >= 0.0 && kappa < 0.5)) throw Error(ErrorKind::ConfigError, "kappa must lie in [0, 0.5)");
    if (drag && !(c_d > 0.0 && r_i > 0.0)) throw Error(ErrorKind::ConfigError, "drag constants must be positive");
    if (wall_friction && !(friction > 0.0 && d_h > 0.0)) {
      throw Error(ErrorKind::ConfigError, "wall friction constants must be positive");
    }
    if (heating && !(n_pch > 0.0 && u0 > 0.0 && l_h > 0.0)) {
      throw Error(ErrorKind::ConfigError, "heating constants must be positive");
    }
  }
};

/// Which branch of the wall-heat / mass-transfer switch applies.
enum class HeatRegime { Auto, Subcooled, Boiling };

/// Quasi-linear form M dV/dt + B dV/dx = S and derived pieces at one state.
struct Linearization {
  Mat6 flux_jac;     // dF/dV
  Mat6 nc;           // non-conservative part
  Mat6 B;            // flux_jac + nc
  Mat6 time;         // M = I + p (e_EV - e_EL) grad(alpha_v)^T
  Mat6 A;            // M^{-1} B
  Vec6 grad_alpha;   // d alpha_v / dV
  Vec6 grad_p;       // d p / dV
  double bestion = 0.0;
};

class TwoFluidModel {
 public:
  TwoFluidModel() = default;
  TwoFluidModel(PhaseEos vapor, PhaseEos liquid, SourceConfig src = {},
                std::optional<SaturationTable> sat = std::nullopt, double h_vanished_v = 0.0,
                double h_vanished_l = 0.0)
      : vapor_(std::move(vapor)),
        liquid_(std::move(liquid)),
        src_(src),
        sat_(std::move(sat)),
        h_vanished_v_(h_vanished_v),
        h_vanished_l_(h_vanished_l) {
    src_.validate();
  }

  const PhaseEos& vapor() const { return vapor_; }
  const PhaseEos& liquid() const { return liquid_; }
  const SourceConfig& sources() const { return src_; }
  SourceConfig& sources() { return src_; }
  const std::optional<SaturationTable>& saturation() const { return sat_; }

  StateVector from_primitive(const Primitive& w) const {
    if (!(w.alpha_v >= 0.0 && w.alpha_v <= 1.0)) {
      throw Error(ErrorKind::OutOfValidityBox, "alpha_v outside [0,1]");
    }
    StateVector s;
    s.prim = w;
    s.rho_v = vapor_.density(w.p, w.h_v);
    s.rho_l = liquid_.density(w.p, w.h_l);
    s.c_v = vapor_.sound_speed(w.p, w.h_v);
    s.c_l = liquid_.sound_speed(w.p, w.h_l);
    const double al = 1.0 - w.alpha_v;
    const double mv = w.alpha_v * s.rho_v;
    const double ml = al * s.rho_l;
    s.cons[MV] = mv;
    s.cons[ML] = ml;
    s.cons[QV] = mv * w.u_v;
    s.cons[QL] = ml * w.u_l;
    s.cons[EV] = mv * (w.h_v + 0.5 * w.u_v * w.u_v) - w.alpha_v * w.p;
    s.cons[EL] = ml * (w.h_l + 0.5 * w.u_l * w.u_l) - al * w.p;
    return s;
  }

  /// Recovers primitives; the pressure solves m_v v_v(p, e_v) + m_l v_l(p, e_l) = 1.
  StateVector from_conserved(const Vec6& V) const {
    for (int k = 0; k < 6; ++k) {
      if (!std::isfinite(V[k])) throw Error(ErrorKind::PressureNewtonDiverged, "non-finite conserved state");
    }
    if (V[MV] < 0.0 || V[ML] < 0.0) throw Error(ErrorKind::NegativeMass, "negative phasic mass");
    if (!(V[MV] + V[ML] > 0.0)) throw Error(ErrorKind::NegativeMass, "no mass in cell");

    StateVector s;
    s.cons = V;
    const bool has_v = V[MV] > 0.0;
    const bool has_l = V[ML] > 0.0;

    double u_v = has_v ? V[QV] / V[MV] : 0.0;
    double u_l = has_l ? V[QL] / V[ML] : 0.0;
    if (!has_v) u_v = u_l;
    if (!has_l) u_l = u_v;
    const double e_v = has_v ? V[EV] / V[MV] - 0.5 * u_v * u_v : 0.0;
    const double e_l = has_l ? V[EL] / V[ML] - 0.5 * u_l * u_l : 0.0;

    struct Term {
      double m;
      VolumeForm f;
    };
    std::array<Term, 2> terms{};
    int n = 0;
    double p0 = -std::numeric_limits<double>::infinity();
    double pole = -std::numeric_limits<double>::infinity();
    double bmax = 0.0;
    auto add = [&](double m, const PhaseEos& eos, double e) {
      const VolumeForm f = eos.volume_form(e);
      if (!(f.a > 0.0)) {
        throw Error(ErrorKind::PressureNewtonDiverged, "inadmissible specific internal energy");
      }
      terms[n++] = {m, f};
      p0 = std::max(p0, m * f.a - f.b);
      pole = std::max(pole, -f.b);
      bmax = std::max(bmax, std::abs(f.b));
    };
    if (has_v) add(V[MV], vapor_, e_v);
    if (has_l) add(V[ML], liquid_, e_l);

    double p = p0;
    double lo = pole;
    double scale = bmax + std::abs(p0);
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      double f = -1.0;
      double fp = 0.0;
      for (int k = 0; k < n; ++k) {
        const double r = terms[k].m * terms[k].f.a / (p + terms[k].f.b);
        f += r;
        fp -= r / (p + terms[k].f.b);
      }
      if (std::abs(f) <= 4e-16) {
        converged = true;
        break;
      }
      if (f > 0.0) lo = std::max(lo, p);
      double pn = p - f / fp;
      if (!(pn > lo)) pn = 0.5 * (lo + p);
      if (!std::isfinite(pn)) break;
      const double dp = pn - p;
      p = pn;
      scale = bmax + std::abs(p);
      if (std::abs(dp) <= 1e-14 * scale) {
        converged = true;
        break;
      }
    }
    if (!converged) throw Error(ErrorKind::PressureNewtonDiverged, "pressure closure did not converge");

    Primitive& w = s.prim;
    w.p = p;
    w.u_v = u_v;
    w.u_l = u_l;
    if (has_v) {
      const double vv = vapor_.volume(p, e_v).v;
      s.rho_v = 1.0 / vv;
      w.alpha_v = V[MV] * vv;
      w.h_v = e_v + p * vv;
    } else {
      w.alpha_v = 0.0;
      w.h_v = h_vanished_v_;
      s.rho_v = vapor_.density(p, w.h_v);
    }
    if (has_l) {
      const double vl = liquid_.volume(p, e_l).v;
      s.rho_l = 1.0 / vl;
      w.h_l = e_l + p * vl;
      if (!has_v) w.alpha_v = 0.0;
    } else {
      w.alpha_v = 1.0;
      w.h_l = h_vanished_l_;
      s.rho_l = liquid_.density(p, w.h_l);
    }
    s.c_v = vapor_.sound_speed(p, w.h_v);
    s.c_l = liquid_.sound_speed(p, w.h_l);
    return s;
  }

  /// Bestion interfacial pressure default; alpha_v is clamped to [kappa, 1-kappa].
  double bestion_term(const StateVector& s, double kappa = 0.0) const {
    const double a = std::clamp(s.prim.alpha_v, kappa, 1.0 - kappa);
    const double al = 1.0 - a;
    const double denom = a * s.rho_l + al * s.rho_v;
    const double rho_t = s.rho_v * s.rho_l / denom;
    const double ur = s.prim.u_r();
    return src_.delta * a * al * rho_t * ur * ur;
  }

  Vec6 flux(const StateVector& s) const {
    const Primitive& w = s.prim;
    Vec6 F;
    F[MV] = s.cons[QV];
    F[ML] = s.cons[QL];
    F[QV] = s.cons[QV] * w.u_v;
    F[QL] = s.cons[QL] * w.u_l;
    F[EV] = w.u_v * (s.cons[EV] + w.alpha_v * w.p);
    F[EL] = w.u_l * (s.cons[EL] + (1.0 - w.alpha_v) * w.p);
    return F;
  }

  Linearization linearize(const StateVector& s) const {
    const Primitive& w = s.prim;
    const double p = w.p;
    const double mv = s.cons[MV];
    const double ml = s.cons[ML];
    const double ev = w.h_v - p / s.rho_v;
    const double el = w.h_l - p / s.rho_l;
    const VolumeDerivatives dv = vapor_.volume(p, ev);
    const VolumeDerivatives dl = liquid_.volume(p, el);

    Vec6 dphi_v = Vec6::Zero();
    dphi_v[MV] = dv.v + dv.v_e * (0.5 * w.u_v * w.u_v - ev);
    dphi_v[QV] = -dv.v_e * w.u_v;
    dphi_v[EV] = dv.v_e;
    Vec6 dphi_l = Vec6::Zero();
    dphi_l[ML] = dl.v + dl.v_e * (0.5 * w.u_l * w.u_l - el);
    dphi_l[QL] = -dl.v_e * w.u_l;
    dphi_l[EL] = dl.v_e;
    const double dG_dp = mv * dv.v_p + ml * dl.v_p;

    Linearization L;
    L.grad_p = -(dphi_v + dphi_l) / dG_dp;
    L.grad_alpha = dphi_v + mv * dv.v_p * L.grad_p;
    const Vec6& ga = L.grad_alpha;
    const Vec6& gp = L.grad_p;
    const double av = w.alpha_v;
    const double al = 1.0 - av;

    Mat6& J = L.flux_jac;
    J.setZero();
    J(MV, QV) = 1.0;
    J(ML, QL) = 1.0;
    J(QV, MV) = -w.u_v * w.u_v;
    J(QV, QV) = 2.0 * w.u_v;
    J(QL, ML) = -w.u_l * w.u_l;
    J(QL, QL) = 2.0 * w.u_l;
    const double Hv = w.h_v + 0.5 * w.u_v * w.u_v;
    const double Hl = w.h_l + 0.5 * w.u_l * w.u_l;
    J.row(EV) = w.u_v * (p * ga + av * gp).transpose();
    J(EV, MV) += -w.u_v * Hv;
    J(EV, QV) += Hv;
    J(EV, EV) += w.u_v;
    J.row(EL) = w.u_l * (-p * ga + al * gp).transpose();
    J(EL, ML) += -w.u_l * Hl;
    J(EL, QL) += Hl;
    J(EL, EL) += w.u_l;

    L.bestion = bestion_term(s, src_.kappa);
    L.nc.setZero();
    L.nc.row(QV) = (av * gp + L.bestion * ga).transpose();
    L.nc.row(QL) = (al * gp - L.bestion * ga).transpose();
    L.B = J + L.nc;

    Vec6 d = Vec6::Zero();
    d[EV] = 1.0;
    d[EL] = -1.0;
    L.time = Mat6::Identity() + p * d * ga.transpose();
    const double denom = 1.0 + p * (ga[EV] - ga[EL]);
    L.A = L.B - (p / denom) * d * (ga.transpose() * L.B);
    return L;
  }

  /// Applies M^{-1} to a vector using the rank-one structure of M.
  static Vec6 apply_time_inverse(const Linearization& L, double p, const Vec6& x) {
    const double denom = 1.0 + p * (L.grad_alpha[EV] - L.grad_alpha[EL]);
    const double c = p * L.grad_alpha.dot(x) / denom;
    Vec6 y = x;
    y[EV] -= c;
    y[EL] += c;
    return y;
  }

  /// d(conserved)/d(primitive) at a state.
  Mat6 dV_dW(const StateVector& s) const {
    const Primitive& w = s.prim;
    const auto dv = vapor_.derivatives(w.p, w.h_v);
    const auto dl = liquid_.derivatives(w.p, w.h_l);
    Mat6 M = Mat6::Zero();
    const double av = w.alpha_v;
    const double al = 1.0 - av;
    auto fill = [&](int im, int iq, int ie, int iu, int ih, double sign, double a, double u, double h,
                    const DensityDerivatives& d) {
      const double m = a * d.rho;
      const double H = h + 0.5 * u * u;
      M(im, 0) = sign * d.rho;
      M(im, 1) = a * d.rho_p;
      M(im, ih) = a * d.rho_h;
      M(iq, 0) = sign * d.rho * u;
      M(iq, 1) = a * d.rho_p * u;
      M(iq, ih) = a * d.rho_h * u;
      M(iq, iu) = m;
      M(ie, 0) = sign * (d.rho * H - w.p);
      M(ie, 1) = a * (d.rho_p * H - 1.0);
      M(ie, ih) = a * (d.rho_h * H + d.rho);
      M(ie, iu) = m * u;
    };
    fill(MV, QV, EV, 2, 4, 1.0, av, w.u_v, w.h_v, dv);
    fill(ML, QL, EL, 3, 5, -1.0, al, w.u_l, w.h_l, dl);
    return M;
  }

  /// d(primitive)/d(conserved) using the closure gradients; rows of a vanished phase are zero.
  Mat6 dW_dV(const StateVector& s, const Linearization& L) const {
    const Primitive& w = s.prim;
    Mat6 D = Mat6::Zero();
    D.row(0) = L.grad_alpha.transpose();
    D.row(1) = L.grad_p.transpose();
    auto phase = [&](int row_u, int row_h, int im, int iq, int ie, const PhaseEos& eos, double u, double h,
                     double rho) {
      const double m = s.cons[im];
      if (!(m > 0.0)) return;
      D(row_u, im) = -u / m;
      D(row_u, iq) = 1.0 / m;
      const double e = h - w.p / rho;
      Vec6 ge = Vec6::Zero();
      ge[im] = (0.5 * u * u - e) / m;
      ge[iq] = -u / m;
      ge[ie] = 1.0 / m;
      const auto vd = eos.volume(w.p, e);
      D.row(row_h) = ((1.0 + w.p * vd.v_e) * ge + (vd.v + w.p * vd.v_p) * L.grad_p).transpose();
    };
    phase(2, 4, MV, QV, EV, vapor_, w.u_v, w.h_v, s.rho_v);
    phase(3, 5, ML, QL, EL, liquid_, w.u_l, w.h_l, s.rho_l);
    return D;
  }

  HeatRegime regime(const Primitive& w) const {
    if (!src_.heating) return HeatRegime::Subcooled;
    const SaturationState sat = saturation_at(w.p);
    return w.h_l < sat.h_l ? HeatRegime::Subcooled : HeatRegime::Boiling;
  }

  Vec6 source_terms(const StateVector& s, HeatRegime reg = HeatRegime::Auto) const {
    return source_terms(s.prim, s.rho_v, s.rho_l, reg);
  }

  Vec6 source_terms(const Primitive& w, double rho_v, double rho_l, HeatRegime reg = HeatRegime::Auto) const {
    Vec6 S = Vec6::Zero();
    const double av = w.alpha_v;
    const double al = 1.0 - av;
    const double mv = av * rho_v;
    const double ml = al * rho_l;
    const double ui = w.u_l;

    if (src_.heating) {
      const SaturationState sat = saturation_at(w.p);
      if (reg == HeatRegime::Auto) reg = w.h_l < sat.h_l ? HeatRegime::Subcooled : HeatRegime::Boiling;
      if (reg == HeatRegime::Boiling) {
        const double gamma = src_.heat_rate / sat.latent_heat();
        S[MV] += gamma;
        S[ML] -= gamma;
        S[QV] += gamma * ui;
        S[QL] -= gamma * ui;
        S[EV] += gamma * (0.5 * w.u_v * w.u_v + sat.h_v);
        S[EL] -= gamma * (0.5 * w.u_l * w.u_l + sat.h_l);
      } else {
        S[EL] += src_.heat_rate;
      }
    }
    if (src_.drag) {
      const double ur = w.u_r();
      const double ai = 3.0 * av / src_.r_i;
      const double rho_m = mv + ml;
      const double fv = -0.125 * src_.c_d * ai * rho_m * std::abs(ur) * ur;
      S[QV] += fv;
      S[QL] -= fv;
      S[EV] += fv * ui;
      S[EL] -= fv * ui;
    }
    if (src_.wall_friction) {
      const double c = src_.friction / (2.0 * src_.d_h);
      S[QV] -= c * mv * std::abs(w.u_v) * w.u_v;
      S[QL] -= c * ml * std::abs(w.u_l) * w.u_l;
    }
    if (src_.gravity) {
      S[QV] += mv * src_.g;
      S[QL] += ml * src_.g;
      S[EV] += mv * src_.g * w.u_v;
      S[EL] += ml * src_.g * w.u_l;
    }
    return S;
  }

  bool has_sources() const { return src_.heating || src_.drag || src_.wall_friction || src_.gravity; }

  /// dS/dV by central differences in primitive space, chained through dW/dV; the heat regime is frozen.
  Mat6 source_jacobian(const StateVector& s, const Linearization& L, HeatRegime reg = HeatRegime::Auto) const {
    if (!has_sources()) return Mat6::Zero();
    if (reg == HeatRegime::Auto) reg = regime(s.prim);
    const Vec6 w0 = s.prim.as_vector();
    Mat6 dS_dW;
    for (int j = 0; j < 6; ++j) {
      double h;
      switch (j) {
        case 0: h = 1e-6 * std::max(std::min(w0[0], 1.0 - w0[0]), 1e-14); break;
        case 1: h = 1e-7 * std::abs(w0[1]) + 1e-3; break;
        case 2:
        case 3: h = 1e-7 * (std::abs(w0[j]) + 1.0); break;
        default: h = 1e-7 * (std::abs(w0[j]) + 1.0); break;
      }
      Vec6 wp = w0, wm = w0;
      wp[j] += h;
      wm[j] -= h;
      const Primitive pp = Primitive::from_vector(wp);
      const Primitive pm = Primitive::from_vector(wm);
      const Vec6 sp = source_terms(pp, vapor_.density(pp.p, pp.h_v), liquid_.density(pp.p, pp.h_l), reg);
      const Vec6 sm = source_terms(pm, vapor_.density(pm.p, pm.h_v), liquid_.density(pm.p, pm.h_l), reg);
      dS_dW.col(j) = (sp - sm) / (2.0 * h);
    }
    return dS_dW * dW_dV(s, L);
  }

  SaturationState saturation_at(double p) const {
    if (!sat_) throw Error(ErrorKind::ConfigError, "heating requires a saturation table");
    return sat_->at(src_.sat_pressure > 0.0 ? src_.sat_pressure : p);
  }

  /// Roe-type average: arithmetic in (alpha_v, p), sqrt(alpha_k rho_k) weights for phasic fields.
  StateVector roe_average(const StateVector& a, const StateVector& b) const {
    Primitive w;
    w.alpha_v = 0.5 * (a.prim.alpha_v + b.prim.alpha_v);
    w.p = 0.5 * (a.prim.p + b.prim.p);
    auto wavg = [](double ma, double mb, double xa, double xb) {
      const double sa = std::sqrt(std::max(ma, 0.0));
      const double sb = std::sqrt(std::max(mb, 0.0));
      if (sa + sb > 0.0) return (sa * xa + sb * xb) / (sa + sb);
      return 0.5 * (xa + xb);
    };
    w.u_v = wavg(a.cons[MV], b.cons[MV], a.prim.u_v, b.prim.u_v);
    w.h_v = wavg(a.cons[MV], b.cons[MV], a.prim.h_v, b.prim.h_v);
    w.u_l = wavg(a.cons[ML], b.cons[ML], a.prim.u_l, b.prim.u_l);
    w.h_l = wavg(a.cons[ML], b.cons[ML], a.prim.h_l, b.prim.h_l);
    return from_primitive(w);
  }

 private:
  PhaseEos vapor_;
  PhaseEos liquid_;
  SourceConfig src_;
  std::optional<SaturationTable> sat_;
  double h_vanished_v_ = 0.0;
  double h_vanished_l_ = 0.0;
};

}  // namespace twofluid
