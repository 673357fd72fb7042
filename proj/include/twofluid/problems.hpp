#pragma once

#include <string>
#include <vector>

#include "twofluid/errors.hpp"
#include "twofluid/model.hpp"

namespace twofluid {

enum class ProblemKind { NegativeMass, NegativeEnergy, VoidFractionRange, EosConvergence, SlipRunaway };

inline const char* to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::NegativeMass: return "NegativeMass";
    case ProblemKind::NegativeEnergy: return "NegativeEnergy";
    case ProblemKind::VoidFractionRange: return "VoidFractionRange";
    case ProblemKind::EosConvergence: return "EosConvergence";
    case ProblemKind::SlipRunaway: return "SlipRunaway";
  }
  return "?";
}

struct CellProblem {
  int cell = -1;
  ProblemKind kind = ProblemKind::NegativeMass;
};

/// A trial step produced inadmissible cells.
class StepFailure : public Error {
 public:
  explicit StepFailure(std::vector<CellProblem> problems)
      : Error(ErrorKind::PositivityViolation, describe(problems), problems.empty() ? -1 : problems.front().cell),
        problems_(std::move(problems)) {}

  const std::vector<CellProblem>& problems() const noexcept { return problems_; }

 private:
  static std::string describe(const std::vector<CellProblem>& ps) {
    std::string s = std::to_string(ps.size()) + " cell(s):";
    for (std::size_t k = 0; k < ps.size() && k < 8; ++k) {
      s += " " + std::to_string(ps[k].cell) + "/" + to_string(ps[k].kind);
    }
    if (ps.size() > 8) s += " ...";
    return s;
  }
  std::vector<CellProblem> problems_;
};

/// Checks one conserved vector against the positivity set; fills `out` on success.
inline bool admissible(const TwoFluidModel& model, const Vec6& V, StateVector& out, ProblemKind& why) {
  if (V[MV] < 0.0 || V[ML] < 0.0) {
    why = ProblemKind::NegativeMass;
    return false;
  }
  if (V[EV] < 0.0 || V[EL] < 0.0) {
    why = ProblemKind::NegativeEnergy;
    return false;
  }
  try {
    out = model.from_conserved(V);
  } catch (const Error& e) {
    why = e.kind() == ErrorKind::NegativeMass ? ProblemKind::NegativeMass : ProblemKind::EosConvergence;
    return false;
  }
  if (!(out.prim.alpha_v >= 0.0 && out.prim.alpha_v <= 1.0)) {
    why = ProblemKind::VoidFractionRange;
    return false;
  }
  return true;
}

}  // namespace twofluid
