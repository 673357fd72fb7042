#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "twofluid/cases.hpp"
#include "twofluid/matfun.hpp"
#include "twofluid/spectrum.hpp"

using namespace twofluid;

namespace {

// monomial coefficients of the Lagrange interpolant of |x| at distinct nodes (Vandermonde solve)
PolynomialSpec interpolate_abs(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd V(n, n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) V(i, j) = std::pow(x[i], j);
    y[i] = std::abs(x[i]);
  }
  const Eigen::VectorXd c = V.fullPivLu().solve(y);
  return PolynomialSpec::monomial(std::vector<double>(c.data(), c.data() + n));
}

Eigen::MatrixXd random_well_conditioned(std::mt19937& rng, int n, Eigen::VectorXd& lambda) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd R(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R(i, j) = (i == j ? 3.0 : 0.0) + u(rng);
  lambda.resize(n);
  for (int i = 0; i < n; ++i) lambda[i] = (i - n / 2 + 0.5) * 0.3 + 0.05 * u(rng);
  return R;
}

double two_norm(const Eigen::MatrixXd& A) { return Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()[0]; }

}  // namespace

TEST(Hermite, RecoversCubicFromValueAndSlope) {
  auto f = [](double x) { return 1.0 - 2.0 * x + 0.5 * x * x + 3.0 * x * x * x; };
  auto df = [](double x) { return -2.0 + x + 9.0 * x * x; };
  const PolynomialSpec P = hermite_newton({{-0.5, {f(-0.5), df(-0.5)}}, {0.75, {f(0.75), df(0.75)}}});
  EXPECT_EQ(P.degree(), 3);
  for (double x : {-1.0, -0.2, 0.0, 0.3, 1.0}) EXPECT_NEAR(P(x), f(x), 1e-12);
}

TEST(LowOrder, P0IsOne) {
  const PolynomialSpec P = build_low_order(LowOrder::P0, -1.0, 1.0);
  for (double x : {-1.0, 0.0, 0.5}) EXPECT_EQ(P(x), 1.0);
}

TEST(LowOrder, P1Chord) {
  const PolynomialSpec P = build_low_order(LowOrder::P1, -1.0, 2.0);
  // normalized by a_max = 2: nodes -0.5 -> 0.5 and 1 -> 1
  EXPECT_NEAR(P(-0.5) * 2.0, 1.0, 1e-14);
  EXPECT_NEAR(P(1.0) * 2.0, 2.0, 1e-14);
  EXPECT_NEAR(P(0.25), (0.25 + 2.0) / 3.0, 1e-14);
}

TEST(LowOrder, P2SymmetricIsHalfOnePlusSquare) {
  const PolynomialSpec P = build_low_order(LowOrder::P2, -1.0, 1.0);
  for (double x : {-1.0, -0.3, 0.0, 0.6, 1.0}) EXPECT_NEAR(P(x), 0.5 * (1.0 + x * x), 1e-14);
}

TEST(LowOrder, DegenerateSpectrumRejected) {
  try {
    build_low_order(LowOrder::P1, 1.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateSpectrum);
  }
}

TEST(P2p, OrderOne) {
  const PolynomialSpec P = build_P2p(1);
  for (double x : {-1.0, -0.4, 0.0, 0.7}) EXPECT_NEAR(P(x), 0.5 * (1.0 + x * x), 1e-15);
}

TEST(P2p, EndpointsAndEnvelope) {
  for (int p = 1; p <= 12; ++p) {
    const PolynomialSpec P = build_P2p(p);
    EXPECT_TRUE(P.even);
    EXPECT_NEAR(P(1.0), 1.0, 1e-12) << p;
    EXPECT_NEAR(P(-1.0), 1.0, 1e-12) << p;
    for (int i = 0; i <= 1000; ++i) {
      const double x = -1.0 + 2.0 * i / 1000.0;
      ASSERT_GE(P(x) - std::abs(x), -1e-12) << p << " " << x;
    }
  }
  EXPECT_THROW(build_P2p(0), Error);
}

TEST(PHDF, ShiftedConstantAndEnvelope) {
  const PolynomialSpec P = build_PHDF();
  EXPECT_EQ(P.degree(), 34);
  EXPECT_NEAR(P.coeffs[0], 6.209633171688544e-02, 1e-17);
  EXPECT_GE(P(1.0), 1.0 - 1e-12);
  EXPECT_LE(P(1.0), 1.0 + 1e-6);
  for (int i = 0; i <= 10000; ++i) {
    const double x = i / 10000.0;
    ASSERT_GE(P(x) - x, 0.0) << x;
  }
}

TEST(PHDD, NodeValues) {
  EigenBounds b;
  b.lambda_min = -700.0;
  b.lambda_max = 702.0;
  b.lambda_int = 1.3;
  b.a_max = 702.0;
  for (double D : {1.0, 10.0}) {
    const PolynomialSpec P = build_PHDD(b, D);
    const double xi = 1.3 / 702.0;
    EXPECT_NEAR(P(xi) * 702.0, D * 1.3, 1e-10 * 702.0);
    EXPECT_NEAR(P(-xi) * 702.0, D * 1.3, 1e-10 * 702.0);
    EXPECT_NEAR(P(-700.0 / 702.0) * 702.0, 700.0, 1e-10 * 702.0);
    EXPECT_NEAR(P(1.0) * 702.0, 702.0, 1e-10 * 702.0);
  }
}

TEST(PHDD, StableAtChannelEigenvalues) {
  const CaseSpec c = load_case("channel_saturated");
  const TwoFluidModel m = c.model();
  const StateVector s = m.from_primitive({0.3, 68.73e5, 0.9, 0.78, 2.784e6, 1.262e6});
  const EigenBounds raw = approx_eigenvalues(m, s);
  const EigenBounds b = raw.inflated(0.02);
  const PolynomialSpec P = build_PHDD(b, 1.0);
  for (double v : raw.values) EXPECT_GE(P(v / b.a_max) * b.a_max, std::abs(v) - 1e-9 * b.a_max) << v;
}

TEST(PHDD, CoalescenceAndDiffusionGuards) {
  EigenBounds b;
  b.lambda_min = -1.0;
  b.lambda_max = 1.0;
  b.a_max = 1.0;
  b.lambda_int = 0.0;
  EXPECT_THROW(build_PHDD(b, 1.0), Error);
  b.lambda_int = 0.2;
  EXPECT_THROW(build_PHDD(b, 0.5), Error);
  EXPECT_THROW(build_PHDD(b, 6.0), Error);
  EXPECT_NO_THROW(build_PHDD(b, 5.0));
}

TEST(Tanh, ScalarIdentities) {
  for (double tau : {1e-1, 1e-3, 1e-5}) {
    EXPECT_NEAR(phi_tanh(0.0, tau), tau, 1e-18);
    EXPECT_NEAR(phi_tanh(1.0, tau), 1.0, 1e-15);
    EXPECT_NEAR(phi_tanh(-1.0, tau), 1.0, 1e-15);
  }
  EXPECT_THROW(phi_tanh(0.5, 0.0), Error);
}

TEST(Tanh, ScalarErrorTable) {
  // max of Phi - |x| on [1e-4, 1] sits at the left end
  const double expected[] = {9.998e-6, 9.998e-7, 9.999e-8};
  const double taus[] = {1e-5, 1e-6, 1e-7};
  for (int k = 0; k < 3; ++k) {
    double mx = -1.0;
    for (int i = 0; i <= 100000; ++i) {
      const double x = 1e-4 * std::pow(1e4, i / 100000.0);
      mx = std::max(mx, phi_tanh(x, taus[k]) - x);
    }
    EXPECT_NEAR(mx, expected[k], 0.05 * expected[k]) << taus[k];
  }
}

TEST(MatrixPoly, IdentityPolynomialReturnsMatrix) {
  Mat6 A = Mat6::Random();
  const PolynomialSpec P = PolynomialSpec::monomial({0.0, 1.0});
  EXPECT_LE((eval_matrix_polynomial(P, A, 1.0) - A).norm(), 1e-14 * A.norm());
}

TEST(MatrixPoly, NilpotentEven) {
  Eigen::Matrix2d J;
  J << 0.0, 1.0, 0.0, 0.0;
  const PolynomialSpec P = PolynomialSpec::monomial({0.3, 0.0, 2.0, 0.0, -1.0}, true);
  const Eigen::Matrix2d R = eval_matrix_polynomial(P, J, 1.0);
  EXPECT_LE((R - 0.3 * Eigen::Matrix2d::Identity()).norm(), 1e-15);
}

TEST(MatrixPoly, InterpolantEqualsExactAbs) {
  std::mt19937 rng(11);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd lam;
    const Eigen::MatrixXd R = random_well_conditioned(rng, 4, lam);
    const Eigen::MatrixXd A = R * lam.asDiagonal() * R.inverse();
    const double a = lam.cwiseAbs().maxCoeff();
    std::vector<double> nodes(lam.data(), lam.data() + 4);
    for (double& x : nodes) x /= a;
    const PolynomialSpec P = interpolate_abs(nodes);
    const Eigen::MatrixXd oracle = R * lam.cwiseAbs().asDiagonal() * R.inverse();
    EXPECT_LE((eval_matrix_polynomial(P, A, a) - oracle).cwiseAbs().maxCoeff(), 1e-8 * a);
  }
}

TEST(AbsExact, Diagonal) {
  Eigen::MatrixXd A = Eigen::Vector2d(-2.0, 3.0).asDiagonal();
  const Eigen::MatrixXd M = abs_exact(A);
  EXPECT_NEAR(M(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(M(1, 1), 3.0, 1e-14);
  EXPECT_NEAR(std::abs(M(0, 1)) + std::abs(M(1, 0)), 0.0, 1e-14);
}

TEST(AbsExact, SymmetricIsPositiveSemidefinite) {
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  Eigen::MatrixXd B(5, 5);
  for (int i = 0; i < 25; ++i) B.data()[i] = g(rng);
  const Eigen::MatrixXd A = B + B.transpose();
  const Eigen::MatrixXd M = abs_exact(A);
  EXPECT_LE((M - M.transpose()).norm(), 1e-10 * M.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * M.norm());
}

TEST(AbsExact, ConstructedSpectrum) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Matrix2d R;
  R << 2.0 + u(rng), u(rng), u(rng), 2.0 + u(rng);
  const Eigen::MatrixXd A = R * Eigen::Vector2d(-1.0, 0.5).asDiagonal() * R.inverse();
  const Eigen::MatrixXd ref = R * Eigen::Vector2d(1.0, 0.5).asDiagonal() * R.inverse();
  EXPECT_LE((abs_exact(A) - ref).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(AbsExact, DefectiveThrows) {
  Eigen::MatrixXd J(2, 2);
  J << 1.0, 1.0, 0.0, 1.0;
  try {
    abs_exact(J);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DefectiveMatrix);
  }
}

TEST(TanhMatrix, ZeroMatrix) {
  const Mat6 X = tanh_matrix(Mat6::Zero(), 2.0, 1e-2);
  EXPECT_LE((X - 1e-2 * 2.0 * Mat6::Identity()).norm(), 1e-14);
}

TEST(TanhMatrix, DiagonalMatchesScalar) {
  Eigen::VectorXd d(4);
  d << -3.0, -0.2, 0.5, 4.0;
  const Eigen::MatrixXd A = d.asDiagonal();
  const double tau = 1e-2;
  const Eigen::MatrixXd X = tanh_matrix(A, 4.0, tau);
  for (int i = 0; i < 4; ++i) {
    // scalar implicit Euler, x + h b x^2 = x_k + h b solved by the quadratic formula
    const double x0 = d[i] / 4.0;
    const double b = x0 / tau;
    const double h = 0.01;
    double x = 0.0;
    for (int k = 0; k < 100; ++k) {
      const double c = x + h * b;
      x = b == 0.0 ? c : 2.0 * c / (1.0 + std::sqrt(1.0 + 4.0 * h * b * c));
    }
    const double phi = tau + (1.0 - tau) * x0 * x / std::tanh(1.0 / tau);
    EXPECT_NEAR(X(i, i), phi * 4.0, 1e-10);
    EXPECT_NEAR(X(i, i), phi_tanh(x0, tau) * 4.0, 1e-4);
  }
}

TEST(TanhMatrix, SymmetricWithinScalarBound) {
  std::mt19937 rng(9);
  std::normal_distribution<double> g;
  Eigen::MatrixXd B(4, 4);
  for (int i = 0; i < 16; ++i) B.data()[i] = g(rng);
  const Eigen::MatrixXd A = B + B.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  const double a = es.eigenvalues().cwiseAbs().maxCoeff();
  const double tau = 1e-3;
  double err = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double x = es.eigenvalues()[i] / a;
    err = std::max(err, std::abs(phi_tanh(x, tau) - std::abs(x)) * a);
  }
  const Eigen::MatrixXd absA = es.eigenvectors() * es.eigenvalues().cwiseAbs().asDiagonal() * es.eigenvectors().transpose();
  EXPECT_LE(two_norm(tanh_matrix(A, a, tau) - absA), err + 1e-8);
}

TEST(TanhMatrix, ArgumentGuards) {
  EXPECT_THROW(tanh_matrix(Mat6::Identity(), 1.0, 0.0), Error);
  EXPECT_THROW(tanh_matrix(Mat6::Identity(), 0.0, 0.1), Error);
}

TEST(ApplyAbs, ExactSignSplit) {
  Mat6 A = Mat6::Zero();
  A.diagonal() << -1.0, 2.0, -3.0, 0.5, 4.0, -0.25;
  EigenBounds b;
  b.lambda_min = -3.0;
  b.lambda_max = 4.0;
  b.a_max = 4.0;
  const AbsResult r = apply_abs(AbsApproximant::make(Variant::Exact), A, b);
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(r.A_plus(i, i), std::max(A(i, i), 0.0), 1e-14);
    EXPECT_NEAR(r.A_minus(i, i), std::min(A(i, i), 0.0), 1e-14);
  }
}

TEST(ApplyAbs, SplitSumsToMatrixForEveryVariant) {
  const CaseSpec c = load_case("channel_saturated");
  const TwoFluidModel m = c.model();
  const StateVector s = m.from_primitive({0.3, 68.73e5, 0.9, 0.78, 2.784e6, 1.262e6});
  const Mat6 A = m.linearize(s).A;
  const EigenBounds b = approx_eigenvalues(m, s);
  for (Variant v : {Variant::Exact, Variant::P0, Variant::P1, Variant::P2, Variant::P2p, Variant::PHDF, Variant::PHDD,
                    Variant::Tanh}) {
    const AbsResult r = apply_abs(AbsApproximant::make(v), A, b);
    const Mat6 tol = 2.0 * std::numeric_limits<double>::epsilon() * (A.cwiseAbs() + r.M.cwiseAbs());
    EXPECT_TRUE(((r.A_plus + r.A_minus - A).cwiseAbs().array() <= tol.array()).all()) << to_string(v);
  }
}

TEST(ApplyAbs, PHDDActsOnEigenvectors) {
  const CaseSpec c = load_case("channel_saturated");
  const TwoFluidModel m = c.model();
  const StateVector s = m.from_primitive({0.3, 68.73e5, 0.9, 0.78, 2.784e6, 1.262e6});
  const Mat6 A = m.linearize(s).A;
  const EigenBounds b = approx_eigenvalues(m, s);
  const Mat6 Mp = apply_abs(AbsApproximant::make(Variant::PHDD), A, b).M;
  const EigenBounds bi = b.inflated(0.02);
  const PolynomialSpec P = build_PHDD(bi, 1.0);
  // balanced coordinates keep the eigenvectors' components comparable
  const Vec6 d = balance_scaling(A);
  const Mat6 Ab = d.asDiagonal().inverse() * A * d.asDiagonal();
  const Eigen::MatrixXcd Mb = (d.asDiagonal().inverse() * Mp * d.asDiagonal()).cast<std::complex<double>>();
  Eigen::EigenSolver<Mat6> es(Ab, true);
  for (int k = 0; k < 6; ++k) {
    const double lam = es.eigenvalues()[k].real();
    const Eigen::VectorXcd r = es.eigenvectors().col(k).normalized();
    const double mu = P(lam / bi.a_max) * bi.a_max;
    // degree-25 Horner on a non-normal X with |X| about 3 keeps roughly six digits
    EXPECT_LE((Mb * r - mu * r).norm(), 1e-5 * bi.a_max) << lam;
    if (std::abs(lam) > 0.5 * b.a_max) {
      EXPECT_NEAR(mu, std::abs(lam), 1e-6 * std::abs(lam)) << lam;
    } else {
      EXPECT_GT(mu, 0.0) << lam;
      EXPECT_LE(mu, 1.5 * bi.lambda_int) << lam;
    }
  }
}

TEST(ApplyAbs, InvalidApproximant) {
  EXPECT_THROW(AbsApproximant::make(Variant::P2p, 0), Error);
  EXPECT_THROW(AbsApproximant::make(Variant::PHDD, 4, 0.5), Error);
  EXPECT_THROW(AbsApproximant::make(Variant::Tanh, 4, 1.0, 2.0), Error);
}
