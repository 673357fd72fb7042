#pragma once

#include <stdexcept>
#include <string>

namespace twofluid {

enum class ErrorKind {
  OutOfValidityBox,
  PressureNewtonDiverged,
  NegativeMass,
  NonHyperbolic,
  EigSolverFailure,
  DefectiveMatrix,
  DegenerateSpectrum,
  IllConditionedSystem,
  NodeCoalescence,
  NewtonStalled,
  PositivityViolation,
  NewtonDiverged,
  DegenerateField,
  Aborted,
  UnknownCase,
  ConfigError,
  SaturatedInlet,
  IoError,
  InvalidArgument
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::OutOfValidityBox: return "OutOfValidityBox";
    case ErrorKind::PressureNewtonDiverged: return "PressureNewtonDiverged";
    case ErrorKind::NegativeMass: return "NegativeMass";
    case ErrorKind::NonHyperbolic: return "NonHyperbolic";
    case ErrorKind::EigSolverFailure: return "EigSolverFailure";
    case ErrorKind::DefectiveMatrix: return "DefectiveMatrix";
    case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorKind::IllConditionedSystem: return "IllConditionedSystem";
    case ErrorKind::NodeCoalescence: return "NodeCoalescence";
    case ErrorKind::NewtonStalled: return "NewtonStalled";
    case ErrorKind::PositivityViolation: return "PositivityViolation";
    case ErrorKind::NewtonDiverged: return "NewtonDiverged";
    case ErrorKind::DegenerateField: return "DegenerateField";
    case ErrorKind::Aborted: return "Aborted";
    case ErrorKind::UnknownCase: return "UnknownCase";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::SaturatedInlet: return "SaturatedInlet";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Error carrying a machine-readable kind and, when relevant, a cell index.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, int cell = -1)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), cell_(cell) {}

  ErrorKind kind() const noexcept { return kind_; }
  int cell() const noexcept { return cell_; }

 private:
  ErrorKind kind_;
  int cell_;
};

}  // namespace twofluid
