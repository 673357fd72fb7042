#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <optional>
#include <vector>

#include "twofluid/errors.hpp"
#include "twofluid/matfun.hpp"
#include "twofluid/model.hpp"
#include "twofluid/problems.hpp"
#include "twofluid/spectrum.hpp"

namespace twofluid {

using Field = std::vector<StateVector>;

struct Mesh1D {
  int n = 3;
  double length = 1.0;

  Mesh1D() = default;
  Mesh1D(int cells, double len) : n(cells), length(len) {
    if (n < 3) throw Error(ErrorKind::ConfigError, "mesh needs at least 3 cells");
    if (!(length > 0.0)) throw Error(ErrorKind::ConfigError, "mesh length must be positive");
  }
  double dx() const { return length / n; }
  double center(int i) const { return (i + 0.5) * dx(); }
};

/// Inlet fixes (alpha_v, u_v, u_l, h_v, h_l) and copies p inward; outlet fixes p and copies the rest.
struct BoundarySpec {
  Primitive inlet;
  double p_outlet = 1e5;
};

struct TimeStepControl {
  double cfl = 1.0;
  double dt_min = 1e-9;
  double dt_max = std::numeric_limits<double>::infinity();
  int newton_max = 20;
  double newton_tol = 1e-8;
  double freeze_tol = 1e-5;  // interface matrices are kept fixed once the residual is below this
  int freeze_after = 4;      // ... or after this many rebuilds
  double reduction = 10.0;
  double regrowth = 2.0;
  int max_pos_iters = 5;
  double max_slip = 0.0;  // |u_v - u_l| above this flags a cell under positivity control; 0 disables
  bool implicit = false;
  bool positivity = false;

  void validate() const {
    if (!(cfl > 0.0)) throw Error(ErrorKind::ConfigError, "cfl must be positive");
    if (!(dt_min > 0.0)) throw Error(ErrorKind::ConfigError, "dt_min must be positive");
    if (newton_max < 1) throw Error(ErrorKind::ConfigError, "newton_max must be >= 1");
    if (!(newton_tol > 0.0)) throw Error(ErrorKind::ConfigError, "newton_tol must be positive");
    if (!(reduction > 1.0)) throw Error(ErrorKind::ConfigError, "dt reduction factor must exceed 1");
    if (!(regrowth >= 1.0)) throw Error(ErrorKind::ConfigError, "dt regrowth factor must be >= 1");
    if (max_pos_iters < 1) throw Error(ErrorKind::ConfigError, "max_pos_iters must be >= 1");
    if (!(max_slip >= 0.0)) throw Error(ErrorKind::ConfigError, "max_slip must be non-negative");
  }
};

/// Upwinding data at one interface: fluctuations are G^{-/+} = (dF + N dV -/+ Q dV) / 2 with Q = M |A|.
struct InterfaceData {
  Mat6 A;
  Mat6 A_plus;
  Mat6 A_minus;
  Mat6 Q;
  Mat6 N;
  EigenBounds bounds;
  double a_max = 0.0;
  bool fallback = false;
};

struct NewtonStats {
  int iterations = 0;
  double residual = 0.0;
};

class FiniteVolumeSolver {
 public:
  FiniteVolumeSolver(const TwoFluidModel& model, Mesh1D mesh, BoundarySpec bc, AbsApproximant ap)
      : model_(&model), mesh_(mesh), bc_(bc), ap_(std::move(ap)) {
    ap_.validate();
  }

  const TwoFluidModel& model() const { return *model_; }
  const Mesh1D& mesh() const { return mesh_; }
  const BoundarySpec& boundary() const { return bc_; }
  const AbsApproximant& approximant() const { return ap_; }
  void set_approximant(AbsApproximant ap) {
    ap.validate();
    ap_ = std::move(ap);
  }

  Field initial_field(const Primitive& w) const { return Field(mesh_.n, model_->from_primitive(w)); }

  Primitive inlet_ghost(const StateVector& first) const {
    Primitive g = bc_.inlet;
    g.p = first.prim.p;
    return g;
  }
  Primitive outlet_ghost(const StateVector& last) const {
    Primitive g = last.prim;
    g.p = bc_.p_outlet;
    return g;
  }

  std::pair<StateVector, StateVector> ghosts(const Field& f) const {
    return {model_->from_primitive(inlet_ghost(f.front())), model_->from_primitive(outlet_ghost(f.back()))};
  }

  /// D is the PHDD diffusion for this interface (ignored by other variants).
  InterfaceData interface(const StateVector& l, const StateVector& r, double D = 1.0) const {
    const StateVector roe = model_->roe_average(l, r);
    const Linearization L = model_->linearize(roe);
    InterfaceData out;
    out.bounds = approx_eigenvalues(*model_, roe);
    double d = D;
    if (ap_.variant == Variant::PHDD) {
      const EigenBounds b = out.bounds.inflated(ap_.inflation);
      const double xi = std::abs(b.lambda_int) / b.a_max;
      if (xi > 0.0) d = std::min(d, 1.0 / xi);
      d = std::max(d, 1.0);
    }
    const AbsResult ar = apply_abs(ap_, L.A, out.bounds, d);
    out.A = L.A;
    out.A_plus = ar.A_plus;
    out.A_minus = ar.A_minus;
    out.Q = L.time * ar.M;
    out.N = L.nc;
    out.a_max = out.bounds.inflated(ap_.inflation).a_max;
    out.fallback = ar.fallback;
    return out;
  }

  double max_speed(const Field& f) const {
    const auto [gl, gr] = ghosts(f);
    double a = 0.0;
    for (int j = 0; j <= mesh_.n; ++j) {
      const StateVector& l = j == 0 ? gl : f[j - 1];
      const StateVector& r = j == mesh_.n ? gr : f[j];
      a = std::max(a, approx_eigenvalues(*model_, model_->roe_average(l, r)).a_max);
    }
    return a;
  }

  /// dt = CFL dx / max a_max.
  double compute_dt(const Field& f, double cfl) const {
    const double a = max_speed(f);
    if (!(a > 0.0)) throw Error(ErrorKind::DegenerateField, "global a_max is zero");
    return cfl * mesh_.dx() / a;
  }

  /// Forward Euler; throws StepFailure listing inadmissible cells.
  Field explicit_step(const Field& f, double dt, const std::vector<double>* D = nullptr) const {
    const int n = mesh_.n;
    const double r = dt / mesh_.dx();
    const auto [gl, gr] = ghosts(f);
    std::vector<Vec6> Gm(n + 1), Gp(n + 1);
    for (int j = 0; j <= n; ++j) {
      const StateVector& sl = j == 0 ? gl : f[j - 1];
      const StateVector& sr = j == n ? gr : f[j];
      const InterfaceData I = interface(sl, sr, D ? (*D)[j] : 1.0);
      const Vec6 dV = sr.cons - sl.cons;
      const Vec6 c = model_->flux(sr) - model_->flux(sl) + I.N * dV;
      const Vec6 u = I.Q * dV;
      Gm[j] = 0.5 * (c - u);
      Gp[j] = 0.5 * (c + u);
    }
    std::vector<Vec6> V(n);
    for (int i = 0; i < n; ++i) {
      const Linearization L = model_->linearize(f[i]);
      const Vec6 rhs = r * (Gm[i + 1] + Gp[i]) - dt * model_->source_terms(f[i]);
      V[i] = f[i].cons - TwoFluidModel::apply_time_inverse(L, f[i].prim.p, rhs);
    }
    return convert(V);
  }

  /// Backward Euler solved by Newton with frozen interface matrices and block-tridiagonal elimination.
  Field implicit_step(const Field& fn, double dt, const TimeStepControl& ctl, NewtonStats* stats = nullptr,
                      const std::vector<double>* D = nullptr) const {
    const int n = mesh_.n;
    const double r = dt / mesh_.dx();
    Vec6 scale_n = Vec6::Constant(1e-300);
    for (const auto& s : fn) scale_n = scale_n.cwiseMax(s.cons.cwiseAbs());
    std::vector<HeatRegime> reg(n);
    for (int i = 0; i < n; ++i) reg[i] = model_->regime(fn[i].prim);

    Field f = fn;
    Vec6 de = Vec6::Zero();
    de[EV] = 1.0;
    de[EL] = -1.0;
    std::vector<InterfaceData> I(n + 1);
    bool frozen = false;
    std::vector<Mat6> Lo(n), Di(n), Up(n);
    std::vector<Vec6> R(n);
    std::vector<Mat6> J(n);
    std::vector<Vec6> F(n);
    NewtonStats st;
    for (int it = 0;; ++it) {
      const auto [gl, gr] = ghosts(f);
      for (int j = 0; j <= n && !frozen; ++j) {
        const StateVector& sl = j == 0 ? gl : f[j - 1];
        const StateVector& sr = j == n ? gr : f[j];
        I[j] = interface(sl, sr, D ? (*D)[j] : 1.0);
      }
      const Vec6 Fgl = model_->flux(gl);
      const Vec6 Fgr = model_->flux(gr);
      std::vector<Linearization> Lc(n);
      for (int i = 0; i < n; ++i) {
        Lc[i] = model_->linearize(f[i]);
        F[i] = model_->flux(f[i]);
        J[i] = Lc[i].flux_jac;
      }
      auto flux_at = [&](int k) -> const Vec6& { return k < 0 ? Fgl : (k >= n ? Fgr : F[k]); };
      auto cons_at = [&](int k) -> const Vec6& { return k < 0 ? gl.cons : (k >= n ? gr.cons : f[k].cons); };

      Vec6 scale = scale_n;
      for (const auto& s : f) scale = scale.cwiseMax(s.cons.cwiseAbs());
      double res = 0.0;
      int worst = -1;
      for (int i = 0; i < n; ++i) {
        const Vec6 dVl = cons_at(i) - cons_at(i - 1);
        const Vec6 dVr = cons_at(i + 1) - cons_at(i);
        const Vec6 Gp = 0.5 * (F[i] - flux_at(i - 1) + I[i].N * dVl + I[i].Q * dVl);
        const Vec6 Gm = 0.5 * (flux_at(i + 1) - F[i] + I[i + 1].N * dVr - I[i + 1].Q * dVr);
        const double dalpha = f[i].prim.alpha_v - fn[i].prim.alpha_v;
        R[i] = (f[i].cons - fn[i].cons) + f[i].prim.p * dalpha * de + r * (Gm + Gp) -
               dt * model_->source_terms(f[i], reg[i]);
        const double ri = (R[i].cwiseAbs().array() / scale.array()).maxCoeff();
        if (ri > res) {
          res = ri;
          worst = i;
        }
      }
      st.residual = res;
      if (!std::isfinite(res)) throw Error(ErrorKind::NewtonDiverged, "non-finite implicit residual");
      if (res <= ctl.newton_tol) break;
      if (res <= ctl.freeze_tol || it + 1 >= ctl.freeze_after) frozen = true;
      if (it >= ctl.newton_max) {
        if (stats) *stats = st;
        throw Error(ErrorKind::NewtonDiverged, "implicit Newton did not converge", worst);
      }
      ++st.iterations;

      for (int i = 0; i < n; ++i) {
        const Linearization& L = Lc[i];
        const double dalpha = f[i].prim.alpha_v - fn[i].prim.alpha_v;
        Mat6 Dg = Mat6::Identity() + de * (f[i].prim.p * L.grad_alpha + dalpha * L.grad_p).transpose();
        Dg += 0.5 * r * (I[i].N + I[i].Q - I[i + 1].N + I[i + 1].Q);
        if (model_->has_sources()) Dg -= dt * model_->source_jacobian(f[i], L, reg[i]);
        Di[i] = Dg;
        Lo[i] = 0.5 * r * (-J[i > 0 ? i - 1 : 0] - I[i].N - I[i].Q);
        Up[i] = 0.5 * r * (J[i < n - 1 ? i + 1 : 0] + I[i + 1].N - I[i + 1].Q);
      }
      // ghost cells depend on the adjacent interior cell
      {
        Mat6 sel = Mat6::Zero();
        sel(1, 1) = 1.0;
        const Mat6 dgl = model_->dV_dW(gl) * sel * model_->dW_dV(f[0], Lc[0]);
        const Mat6 dG = 0.5 * r * (-model_->linearize(gl).flux_jac - I[0].N - I[0].Q);
        Di[0] += dG * dgl;
        Mat6 keep = Mat6::Identity();
        keep(1, 1) = 0.0;
        const Mat6 dgr = model_->dV_dW(gr) * keep * model_->dW_dV(f[n - 1], Lc[n - 1]);
        const Mat6 dGr = 0.5 * r * (model_->linearize(gr).flux_jac + I[n].N - I[n].Q);
        Di[n - 1] += dGr * dgr;
      }
      const std::vector<Vec6> dx = solve_block_tridiagonal(Lo, Di, Up, R);
      f = damped_update(f, dx);
    }
    if (stats) *stats = st;
    return f;
  }

  /// Newton update halved until every cell is admissible; the full-step failure is rethrown.
  Field damped_update(const Field& f, const std::vector<Vec6>& dx) const {
    const int n = static_cast<int>(f.size());
    std::vector<Vec6> V(n);
    double lambda = 1.0;
    std::optional<StepFailure> first;
    for (int k = 0; k <= kMaxDamping; ++k, lambda *= 0.5) {
      for (int i = 0; i < n; ++i) V[i] = f[i].cons - lambda * dx[i];
      try {
        return convert(V);
      } catch (const StepFailure& e) {
        if (!first) first = e;
      }
    }
    throw *first;
  }

  static constexpr int kMaxDamping = 6;

  /// Converts conserved vectors to states; throws StepFailure on any inadmissible cell.
  Field convert(const std::vector<Vec6>& V) const {
    Field out(V.size());
    std::vector<CellProblem> bad;
    for (std::size_t i = 0; i < V.size(); ++i) {
      ProblemKind why;
      if (!admissible(*model_, V[i], out[i], why)) bad.push_back({static_cast<int>(i), why});
    }
    if (!bad.empty()) throw StepFailure(std::move(bad));
    return out;
  }

  static std::vector<Vec6> solve_block_tridiagonal(const std::vector<Mat6>& L, std::vector<Mat6> D,
                                                   const std::vector<Mat6>& U, std::vector<Vec6> b) {
    const std::size_t n = D.size();
    std::vector<Eigen::PartialPivLU<Mat6>> lu(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) {
        const Mat6 W = lu[i - 1].solve(U[i - 1]);
        D[i] -= L[i] * W;
        b[i] -= L[i] * lu[i - 1].solve(b[i - 1]);
      }
      lu[i].compute(D[i]);
      if (!D[i].allFinite()) throw Error(ErrorKind::NewtonDiverged, "non-finite block in linear solve");
    }
    std::vector<Vec6> x(n);
    x[n - 1] = lu[n - 1].solve(b[n - 1]);
    for (std::size_t k = n - 1; k-- > 0;) x[k] = lu[k].solve(b[k] - U[k] * x[k + 1]);
    for (const auto& v : x) {
      if (!v.allFinite()) throw Error(ErrorKind::NewtonDiverged, "non-finite Newton update");
    }
    return x;
  }

 private:
  const TwoFluidModel* model_;
  Mesh1D mesh_;
  BoundarySpec bc_;
  AbsApproximant ap_;
};

}  // namespace twofluid
