#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "twofluid/errors.hpp"
#include "twofluid/spectrum.hpp"
#include "twofluid/types.hpp"

namespace twofluid {

/// One interpolation node: value and successive derivatives f, f', f'', ...
struct HermiteNode {
  double x;
  std::vector<double> derivs;
};

/// Polynomial over the normalized variable x = lambda / a_max, stored in Newton form
/// P(x) = c_0 + (x - z_0)(c_1 + (x - z_1)(c_2 + ...)). A monomial has all centers zero.
struct PolynomialSpec {
  std::vector<double> coeffs;
  std::vector<double> centers;
  bool even = false;
  std::vector<HermiteNode> record;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }

  double operator()(double x) const {
    const int n = degree();
    double acc = coeffs[n];
    for (int k = n - 1; k >= 0; --k) acc = coeffs[k] + (x - centers[k]) * acc;
    return acc;
  }

  static PolynomialSpec monomial(std::vector<double> a, bool even = false) {
    PolynomialSpec P;
    P.centers.assign(a.size() > 0 ? a.size() - 1 : 0, 0.0);
    P.coeffs = std::move(a);
    P.even = even;
    return P;
  }
};

/// Confluent divided differences; nodes with several derivatives are repeated consecutively.
inline PolynomialSpec hermite_newton(const std::vector<HermiteNode>& nodes) {
  std::vector<double> z;
  std::vector<int> owner;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].derivs.empty()) throw Error(ErrorKind::InvalidArgument, "hermite node without data");
    for (std::size_t k = 0; k < nodes[i].derivs.size(); ++k) {
      z.push_back(nodes[i].x);
      owner.push_back(static_cast<int>(i));
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (nodes[i].x == nodes[j].x) throw Error(ErrorKind::NodeCoalescence, "duplicate interpolation node");
    }
  }
  const std::size_t n = z.size();
  std::vector<double> col(n);
  for (std::size_t i = 0; i < n; ++i) col[i] = nodes[owner[i]].derivs[0];
  PolynomialSpec P;
  P.coeffs.resize(n);
  P.coeffs[0] = col[0];
  double fact = 1.0;
  for (std::size_t k = 1; k < n; ++k) {
    fact *= static_cast<double>(k);
    for (std::size_t i = 0; i + k < n; ++i) {
      if (owner[i] == owner[i + k]) {
        col[i] = nodes[owner[i]].derivs[k] / fact;
      } else {
        col[i] = (col[i + 1] - col[i]) / (z[i + k] - z[i]);
      }
    }
    P.coeffs[k] = col[0];
  }
  P.centers.assign(z.begin(), z.end() - 1);
  P.record = nodes;
  return P;
}

/// Newton-form Horner evaluation of P(A / a_max) * a_max; one matrix product per degree.
template <typename Derived>
typename Derived::PlainObject eval_matrix_polynomial(const PolynomialSpec& P, const Eigen::MatrixBase<Derived>& A,
                                                     double a_max) {
  using M = typename Derived::PlainObject;
  if (!(a_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "a_max must be positive");
  const M X = A / a_max;
  const int n = P.degree();
  M R = M::Identity(A.rows(), A.cols()) * P.coeffs[n];
  for (int k = n - 1; k >= 0; --k) {
    M T = X * R;
    T -= P.centers[k] * R;
    T.diagonal().array() += P.coeffs[k];
    R = T;
  }
  return R * a_max;
}

enum class LowOrder { P0, P1, P2 };

inline PolynomialSpec build_low_order(LowOrder kind, double lambda_min, double lambda_max) {
  const double a = std::max(std::abs(lambda_min), std::abs(lambda_max));
  if (!(a > 0.0) || !(lambda_max - lambda_min > 1e-14 * a)) {
    throw Error(ErrorKind::DegenerateSpectrum, "lambda_max - lambda_min too small");
  }
  const double x0 = lambda_min / a;
  const double x1 = lambda_max / a;
  switch (kind) {
    case LowOrder::P0: {
      PolynomialSpec P = PolynomialSpec::monomial({1.0}, true);
      return P;
    }
    case LowOrder::P1:
      return hermite_newton({{x0, {std::abs(x0)}}, {x1, {std::abs(x1)}}});
    case LowOrder::P2:
    default: {
      // slope matched at the node of largest magnitude
      if (std::abs(x1) >= std::abs(x0)) {
        return hermite_newton({{x1, {std::abs(x1), x1 >= 0.0 ? 1.0 : -1.0}}, {x0, {std::abs(x0)}}});
      }
      return hermite_newton({{x0, {std::abs(x0), x0 >= 0.0 ? 1.0 : -1.0}}, {x1, {std::abs(x1)}}});
    }
  }
}

/// Even polynomial of degree 2p with P(1)=1, P'(1)=1 and P^(j)(1)=0 for j=2..p.
inline PolynomialSpec build_P2p(int p) {
  if (p < 1 || p > 16) throw Error(ErrorKind::InvalidArgument, "P2p order must lie in 1..16");
  using LD = long double;
  const int n = p + 1;
  Eigen::Matrix<LD, Eigen::Dynamic, Eigen::Dynamic> M(n, n);
  Eigen::Matrix<LD, Eigen::Dynamic, 1> rhs = Eigen::Matrix<LD, Eigen::Dynamic, 1>::Zero(n);
  auto binom = [](int m, int j) -> LD {
    if (j < 0 || j > m) return 0.0L;
    LD r = 1.0L;
    for (int i = 1; i <= j; ++i) r = r * static_cast<LD>(m - j + i) / static_cast<LD>(i);
    return r;
  };
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) M(j, k) = binom(2 * k, j);
  }
  rhs[0] = 1.0L;
  rhs[1] = 1.0L;
  const Eigen::Matrix<LD, Eigen::Dynamic, 1> a = M.fullPivLu().solve(rhs);
  const LD res = (M * a - rhs).cwiseAbs().maxCoeff();
  LD scale = 0.0L;
  for (int j = 0; j < n; ++j) scale = std::max(scale, (M.row(j).cwiseAbs() * a.cwiseAbs()).value());
  if (!(res <= 1e-8L * std::max(scale, 1.0L))) {
    throw Error(ErrorKind::IllConditionedSystem, "P2p coefficient solve residual too large");
  }
  std::vector<double> c(2 * p + 1, 0.0);
  for (int k = 0; k < n; ++k) c[2 * k] = static_cast<double>(a[k]);
  PolynomialSpec P = PolynomialSpec::monomial(std::move(c), true);
  std::vector<double> d(n, 0.0);
  d[0] = 1.0;
  d[1] = 1.0;
  P.record = {{1.0, d}};
  return P;
}

inline constexpr double kPHDFShift = 1e-10;

/// Fixed even polynomial of degree 34, sum_{k=0}^{17} a_k x^{2k}, plus a constant shift.
inline PolynomialSpec build_PHDF() {
  static const double a[18] = {
      6.209633161688544e-02, 4.516480010541272e+00, -3.049057345414379e+01, 1.657256844603353e+02,
      -6.133533687894306e+02, 1.580698142537855e+03, -2.879210705862515e+03, 3.673105197391366e+03,
      -3.121407591514732e+03, 1.512887040780976e+03, -2.111058506112595e+02, 9.753698909265717e+01,
      -6.475861637079317e+02, 8.947647548149256e+02, -6.303841204016171e+02, 2.586951712420909e+02,
      -5.941358894806618e+01, 5.960406627331660e+00};
  std::vector<double> c(35, 0.0);
  for (int k = 0; k < 18; ++k) c[2 * k] = a[k];
  c[0] += kPHDFShift;
  return PolynomialSpec::monomial(std::move(c), true);
}

inline constexpr int kPHDDContact = 10;  // derivative orders 2..10 vanish at the extremal nodes

/// Dynamic Hermite polynomial on normalized bounds; intermediate nodes carry D * lambda_int.
inline PolynomialSpec build_PHDD(const EigenBounds& b, double D) {
  if (!(D >= 1.0)) throw Error(ErrorKind::InvalidArgument, "PHDD diffusion must be >= 1");
  const double a = b.a_max;
  if (!(a > 0.0)) throw Error(ErrorKind::DegenerateSpectrum, "a_max must be positive");
  const double xmin = b.lambda_min / a;
  const double xmax = b.lambda_max / a;
  const double xi = std::abs(b.lambda_int) / a;
  if (!(xi >= 1e-14)) throw Error(ErrorKind::NodeCoalescence, "intermediate node too close to zero");
  if (!(xmin < -xi && xi < xmax)) {
    throw Error(ErrorKind::NodeCoalescence, "intermediate eigenvalues not separated from the fast pair");
  }
  if (D * xi > 1.0 + 1e-12) throw Error(ErrorKind::InvalidArgument, "D * lambda_int exceeds a_max");
  std::vector<double> lo(kPHDDContact + 1, 0.0), hi(kPHDDContact + 1, 0.0);
  lo[0] = std::abs(xmin);
  lo[1] = -1.0;
  hi[0] = std::abs(xmax);
  hi[1] = 1.0;
  // extremal nodes first: far smaller Newton coefficients than the reverse order
  return hermite_newton({{xmin, lo}, {xmax, hi}, {-xi, {D * xi, -1.0}}, {xi, {D * xi, 1.0}}});
}

inline double phi_tanh(double x, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be positive");
  return tau + (1.0 - tau) * x * std::tanh(x / tau) / std::tanh(1.0 / tau);
}

enum class TanhLinearization { Commuting, Dense };

struct TanhOptions {
  int steps = 100;       // N1
  int newton_max = 40;   // N2
  double tol = 1e-12;
  int max_halvings = 40;  // step refinement when Newton fails
  TanhLinearization linearization = TanhLinearization::Commuting;
};

/// Phi(A / a_max) * a_max with tanh(A / (a_max tau)) integrated from dX/dz = B (I - X^2), X(0) = 0,
/// by implicit Euler; each step solves X + h B X^2 = X_k + h B with Newton. A step whose Newton
/// iteration fails is halved and retried; the step length then grows back to 1 / steps.
template <typename Derived>
typename Derived::PlainObject tanh_matrix(const Eigen::MatrixBase<Derived>& A, double a_max, double tau,
                                          const TanhOptions& opt = {}) {
  using M = typename Derived::PlainObject;
  if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorKind::InvalidArgument, "tau must lie in (0, 1]");
  if (!(a_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "a_max must be positive");
  const Eigen::Index n = A.rows();
  const M Xn = A / a_max;
  const M B = Xn / tau;
  const double b_norm = B.norm();
  const M I = M::Identity(n, n);

  // one implicit Euler step of length h from Xk; false if Newton does not converge
  auto step = [&](const M& Xk, double h, M& X) {
    const M hB = h * B;
    const M C = Xk + hB;
    const double hb_norm = h * b_norm;
    X = Xk;
    bool dense = opt.linearization == TanhLinearization::Dense;
    double f_prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it <= opt.newton_max; ++it) {
      const M X2 = X * X;
      const M F = X + hB * X2 - C;
      const double fn = F.norm();
      if (!std::isfinite(fn)) return false;
      // residual tolerance relative to the size of the terms being cancelled
      if (fn <= opt.tol * static_cast<double>(n) * (X.norm() + hb_norm * X2.norm() + C.norm() + 1.0)) return true;
      if (it == opt.newton_max) return false;
      // the commuting Jacobian only converges linearly once X and B stop commuting
      if (fn > 0.5 * f_prev) dense = true;
      f_prev = fn;
      if (!dense) {
        const M J = I + 2.0 * (hB * X);
        X -= J.partialPivLu().solve(F);
      } else {
        const Eigen::Index nn = n * n;
        Eigen::MatrixXd L = Eigen::MatrixXd::Identity(nn, nn);
        const Eigen::MatrixXd hBX = hB * X;
        const Eigen::MatrixXd hBd = hB;
        const Eigen::MatrixXd Xt = X.transpose();
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) L.block(i * n, j * n, n, n) += hBX;
            L.block(i * n, j * n, n, n) += Xt(i, j) * hBd;
          }
        }
        const Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(F.data(), nn);
        const Eigen::VectorXd e = L.partialPivLu().solve(f);
        X -= Eigen::Map<const M>(e.data(), n, n);
      }
    }
    return false;
  };

  const double h_nominal = 1.0 / opt.steps;
  const double h_min = h_nominal * std::ldexp(1.0, -opt.max_halvings);
  M X = M::Zero(n, n);
  M Xnext;
  double z = 0.0;
  double h = h_nominal;
  while (z < 1.0 - 1e-14) {
    const double hs = std::min(h, 1.0 - z);
    if (step(X, hs, Xnext)) {
      X = Xnext;
      z += hs;
      h = std::min(2.0 * h, h_nominal);
    } else {
      h = 0.5 * hs;
      if (h < h_min) throw Error(ErrorKind::NewtonStalled, "tanh implicit step did not converge");
    }
  }
  const double coth = 1.0 / std::tanh(1.0 / tau);
  M Phi = (1.0 - tau) * coth * (Xn * X);
  Phi.diagonal().array() += tau;
  return Phi * a_max;
}

/// |A| = R diag(|lambda|) R^{-1}, evaluated in balanced coordinates; complex pairs use lambda*sign(Re).
inline Eigen::MatrixXd abs_exact(const Eigen::MatrixXd& A, double cond_limit = kDefectiveThreshold) {
  const NumericSpectrum ns = numeric_spectrum(A);
  if (!(ns.cond <= cond_limit)) throw Error(ErrorKind::DefectiveMatrix, "eigenvector matrix ill-conditioned");
  const Eigen::Index n = A.rows();
  Eigen::VectorXcd mag(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto l = ns.eigenvalues[k];
    mag[k] = l.real() >= 0.0 ? l : -l;
  }
  const Eigen::MatrixXcd Rinv = ns.R_bal.partialPivLu().inverse();
  const Eigen::MatrixXcd Mb = ns.R_bal * mag.asDiagonal() * Rinv;
  const Eigen::MatrixXd Mr = Mb.real();
  return ns.balance.asDiagonal() * Mr * ns.balance.asDiagonal().inverse();
}

enum class Variant { Exact, P0, P1, P2, P2p, PHDF, PHDD, Tanh };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::Exact: return "exact";
    case Variant::P0: return "p0";
    case Variant::P1: return "p1";
    case Variant::P2: return "p2";
    case Variant::P2p: return "p2p";
    case Variant::PHDF: return "phdf";
    case Variant::PHDD: return "phdd";
    case Variant::Tanh: return "tanh";
  }
  return "?";
}

struct AbsApproximant {
  Variant variant = Variant::PHDD;
  int p = 4;             // P2p order
  double diffusion = 1.0;  // PHDD D
  double tau = 0.0;      // tanh; zero selects lambda_s / 10
  double inflation = 0.02;
  TanhOptions tanh;
  std::shared_ptr<const PolynomialSpec> fixed;  // cached P2p / PHDF

  static AbsApproximant make(Variant v, int p = 4, double D = 1.0, double tau = 0.0) {
    AbsApproximant a;
    a.variant = v;
    a.p = p;
    a.diffusion = D;
    a.tau = tau;
    a.validate();
    if (v == Variant::P2p) a.fixed = std::make_shared<const PolynomialSpec>(build_P2p(p));
    if (v == Variant::PHDF) a.fixed = std::make_shared<const PolynomialSpec>(build_PHDF());
    return a;
  }

  void validate() const {
    if (variant == Variant::P2p && (p < 1 || p > 16)) throw Error(ErrorKind::InvalidArgument, "p must lie in 1..16");
    if (!(diffusion >= 1.0)) throw Error(ErrorKind::InvalidArgument, "D must be >= 1");
    if (variant == Variant::Tanh && !(tau >= 0.0 && tau <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "tau must lie in (0, 1] or be 0 for automatic");
    }
  }
};

inline constexpr double kTauFloor = 1e-5;
inline constexpr double kTauRetryMax = 1e-3;

/// tau = lambda_s / 10 with lambda_s the smallest nonzero normalized eigenvalue estimate, floored.
inline double auto_tau(const EigenBounds& b) {
  double ls = 1.0;
  for (double v : b.values) {
    const double x = std::abs(v) / b.a_max;
    if (x > 0.0) ls = std::min(ls, x);
  }
  return std::max(ls / 10.0, kTauFloor);
}

struct AbsResult {
  Mat6 M;
  Mat6 A_plus;
  Mat6 A_minus;
  bool fallback = false;  // PHDD replaced by P2 on node coalescence; tanh retried with a larger tau
};

/// Evaluates the approximant on the balanced matrix S^{-1} A S and maps back.
inline AbsResult apply_abs(const AbsApproximant& ap, const Mat6& A_in, const EigenBounds& raw, double D = 0.0) {
  AbsResult r;
  const EigenBounds b = raw.inflated(ap.inflation);
  Vec6 S = Vec6::Ones();
  if (ap.variant != Variant::Exact) S = balance_scaling(A_in);
  const Mat6 A = S.asDiagonal().inverse() * A_in * S.asDiagonal();
  switch (ap.variant) {
    case Variant::Exact:
      r.M = abs_exact(A);
      break;
    case Variant::P0:
      r.M = eval_matrix_polynomial(build_low_order(LowOrder::P0, b.lambda_min, b.lambda_max), A, b.a_max);
      break;
    case Variant::P1:
      r.M = eval_matrix_polynomial(build_low_order(LowOrder::P1, b.lambda_min, b.lambda_max), A, b.a_max);
      break;
    case Variant::P2:
      r.M = eval_matrix_polynomial(build_low_order(LowOrder::P2, b.lambda_min, b.lambda_max), A, b.a_max);
      break;
    case Variant::P2p:
    case Variant::PHDF: {
      const PolynomialSpec P = ap.fixed ? *ap.fixed : (ap.variant == Variant::PHDF ? build_PHDF() : build_P2p(ap.p));
      r.M = eval_matrix_polynomial(P, A, b.a_max);
      break;
    }
    case Variant::PHDD: {
      const double d = D > 0.0 ? D : ap.diffusion;
      try {
        r.M = eval_matrix_polynomial(build_PHDD(b, d), A, b.a_max);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NodeCoalescence) throw;
        r.M = eval_matrix_polynomial(build_low_order(LowOrder::P2, b.lambda_min, b.lambda_max), A, b.a_max);
        r.fallback = true;
      }
      break;
    }
    case Variant::Tanh: {
      double tau = ap.tau > 0.0 ? ap.tau : auto_tau(b);
      for (;;) {
        try {
          r.M = tanh_matrix(A, b.a_max, tau, ap.tanh);
          break;
        } catch (const Error& e) {
          // stiff non-normal matrices: retry with a smoother approximation
          if (e.kind() != ErrorKind::NewtonStalled || tau * 10.0 > kTauRetryMax) throw;
          tau *= 10.0;
          r.fallback = true;
        }
      }
      break;
    }
  }
  if (ap.variant != Variant::Exact) r.M = S.asDiagonal() * r.M * S.asDiagonal().inverse();
  r.A_plus = 0.5 * (A_in + r.M);
  r.A_minus = 0.5 * (A_in - r.M);
  return r;
}

}  // namespace twofluid
