#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "twofluid/errors.hpp"

namespace twofluid {

enum class Phase { Vapor, Liquid };

struct IdealGas {
  double gamma = 1.4;
};

struct StiffenedGas {
  double gamma = 1.4;
  double p_inf = 0.0;
  double q = 0.0;
};

/// Barotropic liquid, rho = rho_ref + (p - p_ref)/c_ref^2.
struct LinearizedLiquid {
  double rho_ref = 1000.0;
  double c_ref = 1500.0;
  double p_ref = 1e5;
  double h_ref = 0.0;
  double c_p = 4180.0;
};

struct ValidityBox {
  double p_min = -std::numeric_limits<double>::infinity();
  double p_max = std::numeric_limits<double>::infinity();
  double h_min = -std::numeric_limits<double>::infinity();
  double h_max = std::numeric_limits<double>::infinity();

  bool contains(double p, double h) const {
    return p >= p_min && p <= p_max && h >= h_min && h <= h_max;
  }
};

struct DensityDerivatives {
  double rho;
  double rho_p;  // at fixed h
  double rho_h;  // at fixed p
};

/// Specific volume in the form v(p, e) = a / (p + b) at fixed internal energy e.
struct VolumeForm {
  double a;
  double b;
  double da_de;
};

struct VolumeDerivatives {
  double v;
  double v_p;  // at fixed e
  double v_e;  // at fixed p
};

class PhaseEos {
 public:
  using Law = std::variant<IdealGas, StiffenedGas, LinearizedLiquid>;

  PhaseEos() = default;
  PhaseEos(Law law, Phase phase, ValidityBox box = {}) : law_(law), phase_(phase), box_(box) {}

  const Law& law() const { return law_; }
  Phase phase() const { return phase_; }
  const ValidityBox& box() const { return box_; }

  double density(double p, double h) const { return derivatives(p, h).rho; }

  double sound_speed(double p, double h) const {
    const auto d = derivatives(p, h);
    const double inv_c2 = d.rho_p + d.rho_h / d.rho;
    if (!(inv_c2 > 0.0)) throw Error(ErrorKind::OutOfValidityBox, "non-positive compressibility");
    return 1.0 / std::sqrt(inv_c2);
  }

  DensityDerivatives derivatives(double p, double h) const {
    check(p, h);
    DensityDerivatives d{};
    std::visit(
        [&](const auto& law) {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, IdealGas>) {
            d.rho = law.gamma * p / ((law.gamma - 1.0) * h);
            d.rho_p = d.rho / p;
            d.rho_h = -d.rho / h;
          } else if constexpr (std::is_same_v<T, StiffenedGas>) {
            const double hq = h - law.q;
            d.rho = law.gamma * (p + law.p_inf) / ((law.gamma - 1.0) * hq);
            d.rho_p = d.rho / (p + law.p_inf);
            d.rho_h = -d.rho / hq;
          } else {
            d.rho = law.rho_ref + (p - law.p_ref) / (law.c_ref * law.c_ref);
            d.rho_p = 1.0 / (law.c_ref * law.c_ref);
            d.rho_h = 0.0;
          }
        },
        law_);
    if (!(d.rho > 0.0) || !std::isfinite(d.rho)) {
      throw Error(ErrorKind::OutOfValidityBox, describe("non-positive density", p, h));
    }
    return d;
  }

  /// Volume form at fixed specific internal energy; a <= 0 means e is inadmissible.
  VolumeForm volume_form(double e) const {
    return std::visit(
        [&](const auto& law) -> VolumeForm {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, IdealGas>) {
            return {(law.gamma - 1.0) * e, 0.0, law.gamma - 1.0};
          } else if constexpr (std::is_same_v<T, StiffenedGas>) {
            return {(law.gamma - 1.0) * (e - law.q), law.gamma * law.p_inf, law.gamma - 1.0};
          } else {
            const double c2 = law.c_ref * law.c_ref;
            return {c2, law.rho_ref * c2 - law.p_ref, 0.0};
          }
        },
        law_);
  }

  VolumeDerivatives volume(double p, double e) const {
    const VolumeForm f = volume_form(e);
    const double s = p + f.b;
    const double v = f.a / s;
    return {v, -v / s, f.da_de / s};
  }

  /// Temperature rise above the reference state (linearized liquid only; zero otherwise).
  double temperature_rise(double h) const {
    if (const auto* l = std::get_if<LinearizedLiquid>(&law_)) return (h - l->h_ref) / l->c_p;
    return 0.0;
  }

  void check(double p, double h) const {
    if (!std::isfinite(p) || !std::isfinite(h) || !box_.contains(p, h)) {
      throw Error(ErrorKind::OutOfValidityBox, describe("state outside validity box", p, h));
    }
  }

 private:
  std::string describe(const char* msg, double p, double h) const {
    std::ostringstream os;
    os << msg << " (" << (phase_ == Phase::Vapor ? "vapor" : "liquid") << ", p=" << p << ", h=" << h
       << ")";
    return os.str();
  }

  Law law_ = IdealGas{};
  Phase phase_ = Phase::Vapor;
  ValidityBox box_;
};

struct SaturationState {
  double h_v;
  double h_l;
  double rho_v;
  double rho_l;

  double latent_heat() const { return h_v - h_l; }
  double v_lv() const { return 1.0 / rho_v - 1.0 / rho_l; }
};

/// Piecewise-linear saturation properties in pressure.
class SaturationTable {
 public:
  struct Knot {
    double p;
    SaturationState s;
  };

  SaturationTable() = default;

  explicit SaturationTable(std::vector<Knot> knots) : knots_(std::move(knots)) {
    if (knots_.empty()) throw Error(ErrorKind::ConfigError, "empty saturation table");
    std::sort(knots_.begin(), knots_.end(), [](const Knot& a, const Knot& b) { return a.p < b.p; });
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      const auto& s = knots_[i].s;
      if (!(s.h_v > s.h_l)) throw Error(ErrorKind::ConfigError, "saturation table: h_v^sat <= h_l^sat");
      if (!(s.rho_v > 0.0 && s.rho_l > s.rho_v)) {
        throw Error(ErrorKind::ConfigError, "saturation table: densities must satisfy 0 < rho_v < rho_l");
      }
      if (i > 0 && !(knots_[i].p > knots_[i - 1].p)) {
        throw Error(ErrorKind::ConfigError, "saturation table: duplicate pressure knot");
      }
    }
    auto monotone = [&](auto field) {
      int sign = 0;
      for (std::size_t i = 1; i < knots_.size(); ++i) {
        const double d = field(knots_[i].s) - field(knots_[i - 1].s);
        const int s = (d > 0.0) - (d < 0.0);
        if (s == 0) continue;
        if (sign != 0 && s != sign) return false;
        sign = s;
      }
      return true;
    };
    if (!monotone([](const SaturationState& s) { return s.h_v; }) ||
        !monotone([](const SaturationState& s) { return s.h_l; }) ||
        !monotone([](const SaturationState& s) { return s.rho_v; }) ||
        !monotone([](const SaturationState& s) { return s.rho_l; })) {
      throw Error(ErrorKind::ConfigError, "saturation table is not monotone in pressure");
    }
  }

  bool empty() const { return knots_.empty(); }
  const std::vector<Knot>& knots() const { return knots_; }

  SaturationState at(double p) const {
    if (knots_.empty()) throw Error(ErrorKind::OutOfValidityBox, "no saturation table");
    if (!(p >= knots_.front().p && p <= knots_.back().p)) {
      std::ostringstream os;
      os << "pressure " << p << " outside saturation table [" << knots_.front().p << ", "
         << knots_.back().p << "]";
      throw Error(ErrorKind::OutOfValidityBox, os.str());
    }
    if (knots_.size() == 1) return knots_.front().s;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), p,
                               [](double v, const Knot& k) { return v < k.p; });
    if (it == knots_.end()) return knots_.back().s;
    if (it == knots_.begin()) return knots_.front().s;
    const Knot& hi = *it;
    const Knot& lo = *(it - 1);
    const double t = (p - lo.p) / (hi.p - lo.p);
    auto mix = [t](double a, double b) { return a + t * (b - a); };
    return {mix(lo.s.h_v, hi.s.h_v), mix(lo.s.h_l, hi.s.h_l), mix(lo.s.rho_v, hi.s.rho_v),
            mix(lo.s.rho_l, hi.s.rho_l)};
  }

 private:
  std::vector<Knot> knots_;
};

}  // namespace twofluid
