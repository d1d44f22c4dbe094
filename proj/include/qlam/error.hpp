#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qlam {

enum class Err {
  // syntax
  SyntaxError,
  DuplicateBitLabel,
  // typing
  UnboundVariable,
  VariableUsedTwice,
  VariableUnused,
  TypeMismatch,
  NonFunctionApplied,
  PairPatternOnNonTensor,
  UnknownGate,
  // registers and gates
  WireOutOfRange,
  DuplicateWire,
  ArityMismatch,
  SizeMismatch,
  MalformedAmplitude,
  NotNormalized,
  InconsistentBitWidth,
  NonUnitaryMatrix,
  BadDimension,
  NameClash,
  // machine
  OpenTerm,
  InputArityMismatch,
  StepBudgetExceeded,
  MachineDeadlock,
  // rewriting
  IllTypedRedex,
  StepLimitExceeded,
  NotGroundNormalForm,
  // mll oracle
  CorrespondenceViolation,
  // generator
  GenerationExhausted,
};

inline const char* err_name(Err e) {
  switch (e) {
    case Err::SyntaxError: return "SyntaxError";
    case Err::DuplicateBitLabel: return "DuplicateBitLabel";
    case Err::UnboundVariable: return "UnboundVariable";
    case Err::VariableUsedTwice: return "VariableUsedTwice";
    case Err::VariableUnused: return "VariableUnused";
    case Err::TypeMismatch: return "TypeMismatch";
    case Err::NonFunctionApplied: return "NonFunctionApplied";
    case Err::PairPatternOnNonTensor: return "PairPatternOnNonTensor";
    case Err::UnknownGate: return "UnknownGate";
    case Err::WireOutOfRange: return "WireOutOfRange";
    case Err::DuplicateWire: return "DuplicateWire";
    case Err::ArityMismatch: return "ArityMismatch";
    case Err::SizeMismatch: return "SizeMismatch";
    case Err::MalformedAmplitude: return "MalformedAmplitude";
    case Err::NotNormalized: return "NotNormalized";
    case Err::InconsistentBitWidth: return "InconsistentBitWidth";
    case Err::NonUnitaryMatrix: return "NonUnitaryMatrix";
    case Err::BadDimension: return "BadDimension";
    case Err::NameClash: return "NameClash";
    case Err::OpenTerm: return "OpenTerm";
    case Err::InputArityMismatch: return "InputArityMismatch";
    case Err::StepBudgetExceeded: return "StepBudgetExceeded";
    case Err::MachineDeadlock: return "MachineDeadlock";
    case Err::IllTypedRedex: return "IllTypedRedex";
    case Err::StepLimitExceeded: return "StepLimitExceeded";
    case Err::NotGroundNormalForm: return "NotGroundNormalForm";
    case Err::CorrespondenceViolation: return "CorrespondenceViolation";
    case Err::GenerationExhausted: return "GenerationExhausted";
  }
  return "UnknownError";
}

// Errors that indicate an internal invariant was broken rather than bad input.
inline bool is_internal(Err e) {
  return e == Err::StepBudgetExceeded || e == Err::MachineDeadlock ||
         e == Err::CorrespondenceViolation || e == Err::IllTypedRedex;
}

class QlamError : public std::runtime_error {
 public:
  static constexpr std::size_t no_position = static_cast<std::size_t>(-1);

  QlamError(Err code, std::string message, std::size_t position = no_position)
      : std::runtime_error(std::move(message)), code_(code), position_(position) {}

  Err code() const { return code_; }
  std::size_t position() const { return position_; }

 private:
  Err code_;
  std::size_t position_;
};

[[noreturn]] inline void fail(Err code, const std::string& message,
                              std::size_t position = QlamError::no_position) {
  throw QlamError(code, message, position);
}

}  // namespace qlam
