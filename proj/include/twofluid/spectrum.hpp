#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "twofluid/errors.hpp"
#include "twofluid/model.hpp"

namespace twofluid {

enum class BoundsSource { Approximate, Numeric };

struct EigenBounds {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double lambda_int = 0.0;  // largest magnitude among intermediate eigenvalues
  double a_max = 0.0;
  BoundsSource source = BoundsSource::Approximate;
  /// fast-, fast+, void-, void+, u_v, u_l (approximate source only)
  std::array<double, 6> values{};
  double a_m = 0.0;
  double xi = 0.0;

  /// Bounds widened by `frac` of their magnitude; a_max recomputed.
  EigenBounds inflated(double frac = 0.02) const {
    EigenBounds b = *this;
    b.lambda_min = lambda_min - frac * std::abs(lambda_min);
    b.lambda_max = lambda_max + frac * std::abs(lambda_max);
    b.a_max = std::max(std::abs(b.lambda_min), std::abs(b.lambda_max));
    return b;
  }
};

/// Closed-form first-order eigenvalues of the two-fluid system.
inline EigenBounds approx_eigenvalues(const TwoFluidModel& model, const StateVector& s) {
  const Primitive& w = s.prim;
  const double av = w.alpha_v;
  const double al = 1.0 - av;
  const double rv = s.rho_v;
  const double rl = s.rho_l;
  const double cv2 = s.c_v * s.c_v;
  const double cl2 = s.c_l * s.c_l;
  const double den = al * rv + av * rl;
  const double am2 = den * cv2 * cl2 / (av * rl * cl2 + al * rv * cv2);
  const double am = std::sqrt(am2);
  const double ur = w.u_r();

  const double fast_c = (av * rl * w.u_v + al * rv * w.u_l) / den;
  const double void_c = (al * rv * w.u_v + av * rl * w.u_l) / den;
  const double dp = model.bestion_term(s, model.sources().kappa);
  double rad = (dp - ur * ur * av * rv * al * rl / den) / den;
  const double rad_scale = (dp + ur * ur * av * rv * al * rl / den) / den;
  if (rad < 0.0) {
    if (rad < -1e-12 * rad_scale) throw Error(ErrorKind::NonHyperbolic, "complex void eigenvalues");
    rad = 0.0;
  }
  const double sq = std::sqrt(rad);

  EigenBounds b;
  b.source = BoundsSource::Approximate;
  b.values = {fast_c - am, fast_c + am, void_c - sq, void_c + sq, w.u_v, w.u_l};
  b.lambda_min = b.values[0];
  b.lambda_max = b.values[1];
  b.lambda_int = std::max({std::abs(b.values[2]), std::abs(b.values[3]), std::abs(w.u_v), std::abs(w.u_l)});
  b.a_max = std::max(std::abs(b.lambda_min), std::abs(b.lambda_max));
  b.a_m = am;
  b.xi = ur / am;
  return b;
}

struct NumericSpectrum {
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd R;         // eigenvectors in original coordinates, unit columns
  Eigen::MatrixXcd R_bal;     // eigenvectors in balanced coordinates, unit columns
  Eigen::VectorXd balance;    // A_bal = D^{-1} A D with D = diag(balance)
  double cond = 1.0;          // 2-norm condition number of R_bal
  bool has_complex = false;
  bool defective = false;
};

inline constexpr double kDefectiveThreshold = 1e12;

/// Diagonal similarity scaling (Parlett-Reinsch, radix 2) reducing row/column norm imbalance.
template <typename Derived>
Eigen::Matrix<double, Derived::RowsAtCompileTime, 1> balance_scaling(const Eigen::MatrixBase<Derived>& A) {
  using Vec = Eigen::Matrix<double, Derived::RowsAtCompileTime, 1>;
  const Eigen::Index n = A.rows();
  Vec d = Vec::Ones(n);
  typename Derived::PlainObject B = A;
  const double radix = 2.0;
  bool done = false;
  for (int sweep = 0; sweep < 100 && !done; ++sweep) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(B(j, i));
        r += std::abs(B(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        d[i] *= f;
        B.row(i) /= f;
        B.col(i) *= f;
      }
    }
  }
  return d;
}

inline double condition_number(const Eigen::MatrixXcd& R) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(R);
  const auto& sv = svd.singularValues();
  const double smin = sv[sv.size() - 1];
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return sv[0] / smin;
}

inline NumericSpectrum numeric_spectrum(const Eigen::MatrixXd& A) {
  if (!A.allFinite()) throw Error(ErrorKind::EigSolverFailure, "non-finite matrix");
  NumericSpectrum out;
  out.balance = balance_scaling(A);
  const Eigen::MatrixXd Ab = out.balance.asDiagonal().inverse() * A * out.balance.asDiagonal();
  Eigen::EigenSolver<Eigen::MatrixXd> es(Ab, true);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::EigSolverFailure, "eigen solver did not converge");
  out.eigenvalues = es.eigenvalues();
  out.R_bal = es.eigenvectors();
  for (Eigen::Index j = 0; j < out.R_bal.cols(); ++j) {
    const double nrm = out.R_bal.col(j).norm();
    if (nrm > 0.0) out.R_bal.col(j) /= nrm;
  }
  out.R = out.balance.cast<std::complex<double>>().asDiagonal() * out.R_bal;
  for (Eigen::Index j = 0; j < out.R.cols(); ++j) {
    const double nrm = out.R.col(j).norm();
    if (nrm > 0.0) out.R.col(j) /= nrm;
  }
  const double scale = std::max(1.0, out.eigenvalues.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < out.eigenvalues.size(); ++j) {
    if (std::abs(out.eigenvalues[j].imag()) > 1e-12 * scale) out.has_complex = true;
  }
  out.cond = condition_number(out.R_bal);
  out.defective = !(out.cond <= kDefectiveThreshold);
  return out;
}

/// Smallest angle in [0, pi/2] between two complex directions.
template <typename T>
T vector_angle(const Eigen::Matrix<std::complex<T>, Eigen::Dynamic, 1>& a,
               const Eigen::Matrix<std::complex<T>, Eigen::Dynamic, 1>& b) {
  const auto ua = (a / a.norm()).eval();
  const auto ub = (b / b.norm()).eval();
  const std::complex<T> d = ua.dot(ub);
  return std::atan2((ub - ua * d).norm(), std::abs(d));
}

inline double vector_angle(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) { return vector_angle<double>(a, b); }

struct CollapsePoint {
  double alpha = 0.0;
  double cond = 0.0;
  double angle = 0.0;
};

struct CollapseReport {
  std::vector<CollapsePoint> points;
};

/// Component-relative scaling: each conserved component measured in units of its own magnitude.
inline Vec6 probe_scales(const StateVector& s) {
  Vec6 d;
  for (int k = 0; k < 6; ++k) d[k] = std::max(std::abs(s.cons[k]), 1e-300);
  return d;
}

/// Eigenvector conditioning along a void-fraction sweep with u_r scaled as sqrt(alpha/alpha_0).
/// Angles are measured in component-relative variables between the two eigenvectors whose
/// eigenvalues are closest to the approximate void pair.
inline CollapseReport collapse_probe(const TwoFluidModel& model, const Primitive& base,
                                     const std::vector<double>& alphas) {
  if (alphas.empty()) throw Error(ErrorKind::InvalidArgument, "empty alpha list");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0 && alphas[i] < 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha outside (0,1)");
    if (i > 0 && !(alphas[i] < alphas[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "alpha list must be strictly descending");
    }
  }
  CollapseReport rep;
  const double ur0 = base.u_r();
  const double a0 = alphas.front();
  for (double a : alphas) {
    Primitive w = base;
    w.alpha_v = a;
    w.u_v = base.u_l + ur0 * std::sqrt(a / a0);
    const StateVector s = model.from_primitive(w);
    const Linearization L = model.linearize(s);
    const Vec6 d = probe_scales(s);
    const Mat6 An = d.asDiagonal().inverse() * L.A * d.asDiagonal();
    // the void pair and u_v form a tight cluster; double-precision QR loses it near alpha = 1e-8
    using Ld = Eigen::Matrix<long double, 6, 6>;
    using Cv = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, 1>;
    const Ld Al = An.cast<long double>();
    Eigen::EigenSolver<Ld> es(Al, true);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::EigSolverFailure, "eigen solver did not converge");
    const auto lam = es.eigenvalues();
    const auto vecs = es.eigenvectors();
    const EigenBounds eb = approx_eigenvalues(model, s);

    auto closest = [&](double target, int skip) {
      int best = -1;
      long double bd = std::numeric_limits<long double>::infinity();
      for (int k = 0; k < 6; ++k) {
        if (k == skip) continue;
        const long double dist = std::abs(lam[k] - std::complex<long double>(target, 0.0L));
        if (dist < bd) {
          bd = dist;
          best = k;
        }
      }
      return best;
    };
    const int i3 = closest(eb.values[2], -1);
    const int i4 = closest(eb.values[3], i3);
    CollapsePoint pt;
    pt.alpha = a;
    Eigen::MatrixXcd R(6, 6);
    for (int k = 0; k < 6; ++k) {
      const Cv v = vecs.col(k) / vecs.col(k).norm();
      R.col(k) = v.cast<std::complex<double>>();
    }
    pt.cond = condition_number(R);
    pt.angle = static_cast<double>(vector_angle<long double>(vecs.col(i3), vecs.col(i4)));
    rep.points.push_back(pt);
  }
  return rep;
}

}  // namespace twofluid
