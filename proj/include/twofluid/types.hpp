#pragma once

#include <Eigen/Dense>

namespace twofluid {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Conserved component indices.
enum Comp : int { MV = 0, ML = 1, QV = 2, QL = 3, EV = 4, EL = 5 };

/// Primitive view (alpha_v, p, u_v, u_l, h_v, h_l).
struct Primitive {
  double alpha_v = 0.0;
  double p = 0.0;
  double u_v = 0.0;
  double u_l = 0.0;
  double h_v = 0.0;
  double h_l = 0.0;

  Vec6 as_vector() const {
    Vec6 w;
    w << alpha_v, p, u_v, u_l, h_v, h_l;
    return w;
  }
  static Primitive from_vector(const Vec6& w) { return {w[0], w[1], w[2], w[3], w[4], w[5]}; }
  double u_r() const { return u_v - u_l; }
};

/// Conserved unknowns plus the primitive cache and phasic densities.
struct StateVector {
  Vec6 cons = Vec6::Zero();
  Primitive prim;
  double rho_v = 0.0;
  double rho_l = 0.0;
  double c_v = 0.0;
  double c_l = 0.0;
};

}  // namespace twofluid
