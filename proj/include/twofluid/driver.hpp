#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "twofluid/errors.hpp"
#include "twofluid/positivity.hpp"
#include "twofluid/solver.hpp"

namespace twofluid {

struct Snapshot {
  double t = 0.0;
  Field field;
};

struct RunStats {
  long steps = 0;
  long problematic_steps = 0;
  long resolves = 0;
  long dt_reductions = 0;
  long newton_iterations = 0;
  double t_final = 0.0;
  double dt_last = 0.0;
  double wall_seconds = 0.0;
  std::map<int, long> histogram;

  double problematic_fraction() const { return steps > 0 ? static_cast<double>(problematic_steps) / steps : 0.0; }
  double mean_iterations() const {
    return problematic_steps > 0 ? static_cast<double>(resolves) / problematic_steps : 0.0;
  }
};

struct RunOptions {
  double t_end = 0.0;
  TimeStepControl ctl;
  double snapshot_interval = 0.0;  // 0: final state only
  long max_steps = std::numeric_limits<long>::max();
  double max_wall_seconds = std::numeric_limits<double>::infinity();  // stops early; t_final < t_end
  Detector detector;
  std::function<void(const Snapshot&)> on_snapshot;
};

struct RunResult {
  Field field;
  std::vector<Snapshot> snapshots;
  RunStats stats;
};

/// Advances `init` to t_end. Without positivity control a failed trial aborts the run;
/// Newton divergence always divides dt.
inline RunResult run(const FiniteVolumeSolver& solver, Field init, const RunOptions& opt) {
  opt.ctl.validate();
  if (!(opt.t_end >= 0.0)) throw Error(ErrorKind::ConfigError, "t_end must be non-negative");
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  res.field = std::move(init);
  PositivityLedger ledger;
  ledger.reset(solver.mesh().n);

  auto emit = [&](double t) {
    Snapshot s{t, res.field};
    if (opt.on_snapshot) opt.on_snapshot(s);
    res.snapshots.push_back(std::move(s));
  };

  double t = 0.0;
  double dt_cap = opt.ctl.dt_max;
  double next_snap = opt.snapshot_interval > 0.0 ? opt.snapshot_interval : std::numeric_limits<double>::infinity();
  if (opt.snapshot_interval > 0.0) emit(0.0);
  const double eps = 1e-12 * std::max(1.0, opt.t_end);

  while (t < opt.t_end - eps) {
    if (res.stats.steps >= opt.max_steps) break;
    if (std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() > opt.max_wall_seconds) break;
    double dt = std::min({solver.compute_dt(res.field, opt.ctl.cfl), dt_cap, opt.t_end - t});
    if (next_snap < opt.t_end) dt = std::min(dt, next_snap - t);
    Field next;
    double used = dt;
    bool reduced = false;
    if (opt.ctl.positivity) {
      const ControlledStep cs = controlled_step(solver, res.field, dt, opt.ctl, ledger, opt.detector);
      next = cs.field;
      used = cs.dt;
      res.stats.newton_iterations += cs.newton_iterations;
      reduced = ledger.step_reductions > 0;
    } else {
      double h = dt;
      for (;;) {
        try {
          if (opt.ctl.implicit) {
            NewtonStats st;
            next = solver.implicit_step(res.field, h, opt.ctl, &st);
            res.stats.newton_iterations += st.iterations;
          } else {
            next = solver.explicit_step(res.field, h);
          }
          if (opt.detector) {
            auto problems = opt.detector(next, ledger);
            if (!problems.empty()) throw StepFailure(std::move(problems));
          }
          break;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NewtonDiverged) throw;
          h /= opt.ctl.reduction;
          ++res.stats.dt_reductions;
          reduced = true;
          if (h < opt.ctl.dt_min) throw Error(ErrorKind::Aborted, "dt_min reached after Newton divergence");
        }
      }
      used = h;
    }
    res.field = std::move(next);
    t += used;
    ++res.stats.steps;
    res.stats.dt_last = used;
    if (reduced) {
      dt_cap = used;
    } else {
      dt_cap = std::min(dt_cap * opt.ctl.regrowth, opt.ctl.dt_max);
    }
    if (t >= next_snap - eps) {
      emit(t);
      next_snap += opt.snapshot_interval;
    }
  }
  if (opt.ctl.positivity) {
    res.stats.problematic_steps = ledger.problematic_steps;
    res.stats.resolves = ledger.resolves;
    res.stats.dt_reductions += ledger.dt_reductions;
    res.stats.histogram = ledger.histogram;
  }
  res.stats.t_final = t;
  if (res.snapshots.empty() || res.snapshots.back().t != t) emit(t);
  res.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace twofluid
