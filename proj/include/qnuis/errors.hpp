#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qnuis {

enum class ErrorCode {
  InvalidArgument,
  ShapeMismatch,
  NonHermitianInput,
  NotPsd,
  RankDeficientState,
  OutOfDomain,
  StepExitsDomain,
  UnknownModel,
  BadFixedParameter,
  SingularJacobian,
  SingularFisher,
  SingularNuisanceBlock,
  InvalidPovm,
  NonPositiveWeight,
  NonConvergent,
  NuisanceVarianceTooSmall,
  DeltaOutOfRange,
  NotBlockDiagonal,
  RequiresSingleInterest,
  SingularNuisanceScores,
  EmptyFeasibleSet,
  InvalidSpec,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonHermitianInput: return "NonHermitianInput";
    case ErrorCode::NotPsd: return "NotPsd";
    case ErrorCode::RankDeficientState: return "RankDeficientState";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::StepExitsDomain: return "StepExitsDomain";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::BadFixedParameter: return "BadFixedParameter";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::SingularFisher: return "SingularFisher";
    case ErrorCode::SingularNuisanceBlock: return "SingularNuisanceBlock";
    case ErrorCode::InvalidPovm: return "InvalidPovm";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::NuisanceVarianceTooSmall: return "NuisanceVarianceTooSmall";
    case ErrorCode::DeltaOutOfRange: return "DeltaOutOfRange";
    case ErrorCode::NotBlockDiagonal: return "NotBlockDiagonal";
    case ErrorCode::RequiresSingleInterest: return "RequiresSingleInterest";
    case ErrorCode::SingularNuisanceScores: return "SingularNuisanceScores";
    case ErrorCode::EmptyFeasibleSet: return "EmptyFeasibleSet";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qnuis
