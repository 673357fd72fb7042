#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "twofluid/errors.hpp"
#include "twofluid/problems.hpp"
#include "twofluid/solver.hpp"

namespace twofluid {

/// Counters and diffusion of the adaptive controller.
struct PositivityLedger {
  std::vector<int> c;      // per cell, reset on every accepted step
  std::vector<double> D;   // per interface
  int step_resolves = 0;
  int step_reductions = 0;

  long steps = 0;
  long problematic_steps = 0;
  long resolves = 0;
  long dt_reductions = 0;
  std::map<int, long> histogram;  // re-solves per problematic step

  void reset(int cells) {
    c.assign(cells, 0);
    D.assign(cells + 1, 1.0);
  }

  double problematic_fraction() const { return steps > 0 ? static_cast<double>(problematic_steps) / steps : 0.0; }
  double mean_iterations() const {
    return problematic_steps > 0 ? static_cast<double>(resolves) / problematic_steps : 0.0;
  }
};

/// D = 10 c^3.
inline double diffusion_for(int c) {
  if (c < 1) throw Error(ErrorKind::InvalidArgument, "diffusion counter must be >= 1");
  const double cc = static_cast<double>(c);
  return 10.0 * cc * cc * cc;
}

/// D = 10 c^3 capped so that D |lambda_int| <= a_max.
inline double diffusion_for(int c, double lambda_int, double a_max) {
  const double d = diffusion_for(c);
  const double li = std::abs(lambda_int);
  if (!(li > 0.0)) return d;
  return std::max(1.0, std::min(d, a_max / li));
}

/// Scans conserved vectors for positivity or EOS failures.
inline std::vector<CellProblem> detect_problems(const TwoFluidModel& model, const std::vector<Vec6>& V) {
  std::vector<CellProblem> out;
  for (std::size_t i = 0; i < V.size(); ++i) {
    StateVector s;
    ProblemKind why;
    if (!admissible(model, V[i], s, why)) out.push_back({static_cast<int>(i), why});
  }
  return out;
}

inline std::vector<CellProblem> detect_problems(const TwoFluidModel& model, const Field& f) {
  std::vector<Vec6> V(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) V[i] = f[i].cons;
  return detect_problems(model, V);
}

/// Cells whose relative velocity exceeds `max_slip`; a nearly vanished phase can keep positive mass
/// while its velocity runs away.
inline std::vector<CellProblem> detect_slip(const Field& f, double max_slip) {
  std::vector<CellProblem> out;
  if (!(max_slip > 0.0)) return out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(std::abs(f[i].prim.u_r()) <= max_slip)) out.push_back({static_cast<int>(i), ProblemKind::SlipRunaway});
  }
  return out;
}

/// Extra check applied to every trial result; the default accepts everything the solver accepted.
using Detector = std::function<std::vector<CellProblem>(const Field& trial, const PositivityLedger& ledger)>;

struct ControlledStep {
  Field field;
  double dt = 0.0;
  int newton_iterations = 0;
};

/// Trial solve, local diffusion increase on flagged cells, and dt division on exhaustion.
inline ControlledStep controlled_step(const FiniteVolumeSolver& solver, const Field& fn, double dt,
                                      const TimeStepControl& ctl, PositivityLedger& ledger,
                                      const Detector& detector = {}) {
  if (solver.approximant().variant != Variant::PHDD) {
    throw Error(ErrorKind::ConfigError, "positivity control requires the PHDD variant");
  }
  const int n = solver.mesh().n;
  ledger.step_resolves = 0;
  ledger.step_reductions = 0;

  // cap per interface from the start-of-step linearization
  std::vector<double> cap(n + 1, std::numeric_limits<double>::infinity());
  {
    const auto [gl, gr] = solver.ghosts(fn);
    for (int j = 0; j <= n; ++j) {
      const StateVector& l = j == 0 ? gl : fn[j - 1];
      const StateVector& r = j == n ? gr : fn[j];
      const EigenBounds b =
          approx_eigenvalues(solver.model(), solver.model().roe_average(l, r)).inflated(solver.approximant().inflation);
      if (std::abs(b.lambda_int) > 0.0) cap[j] = std::max(1.0, b.a_max / std::abs(b.lambda_int));
    }
  }

  double h = dt;
  int trials = 0;
  for (;;) {
    ledger.reset(n);
    for (int iter = 0; iter <= ctl.max_pos_iters; ++iter, ++trials) {
      std::vector<CellProblem> problems;
      ControlledStep out;
      bool diverged = false;
      try {
        NewtonStats st;
        out.field = ctl.implicit ? solver.implicit_step(fn, h, ctl, &st, &ledger.D)
                                 : solver.explicit_step(fn, h, &ledger.D);
        out.newton_iterations = st.iterations;
        problems = detect_slip(out.field, ctl.max_slip);
        if (detector) {
          auto extra = detector(out.field, ledger);
          problems.insert(problems.end(), extra.begin(), extra.end());
        }
      } catch (const StepFailure& e) {
        problems = e.problems();
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NewtonDiverged) throw;
        diverged = true;
      }
      if (diverged) {
        ++trials;
        break;
      }
      if (problems.empty()) {
        ++ledger.steps;
        if (trials > 0) {
          ++ledger.problematic_steps;
          ledger.resolves += trials;
          ++ledger.histogram[trials];
        }
        ledger.step_resolves = trials;
        out.dt = h;
        ledger.c.assign(n, 0);
        return out;
      }
      if (iter == ctl.max_pos_iters) {
        ++trials;
        break;
      }
      std::vector<char> seen(n, 0);
      for (const auto& p : problems) {
        if (p.cell >= 0 && p.cell < n && !seen[p.cell]) {
          seen[p.cell] = 1;
          ++ledger.c[p.cell];
        }
      }
      for (int j = 0; j <= n; ++j) {
        const int cl = j > 0 ? ledger.c[j - 1] : 0;
        const int cr = j < n ? ledger.c[j] : 0;
        const int cmax = std::max(cl, cr);
        if (cmax > 0) ledger.D[j] = std::max(ledger.D[j], std::min(diffusion_for(cmax), cap[j]));
      }
    }
    h /= ctl.reduction;
    ++ledger.dt_reductions;
    ++ledger.step_reductions;
    if (h < ctl.dt_min) throw Error(ErrorKind::Aborted, "dt_min reached without restoring positivity");
  }
}

}  // namespace twofluid
