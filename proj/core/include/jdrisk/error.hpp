#pragma once

#include <stdexcept>
#include <string>

namespace jdrisk {

enum class ErrorCode {
  SingularSigma,
  InvalidInput,
  UnsupportedSupport,
  OffGrid,
  MomentDiverges,
  DriftBelowRate,
  NoConvergence,
  AssumptionJViolated,
  ThetaHatNegative,
  KappaOutOfRange,
  ConditionViolated,
  EpsilonTooLarge,
  NegativeJumpsPresent,
  InvalidStrategy,
  EmptyFeasibleSet,
  OutOfRange,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace jdrisk
