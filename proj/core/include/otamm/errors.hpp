#pragma once

#include <stdexcept>
#include <string>

namespace otamm {

// Base of every error thrown by the library. `kind()` is a stable tag used by
// the CLI to map errors to exit codes and by tests to match error classes.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

#define OTAMM_ERROR(Name)                                                     \
  class Name : public Error {                                                 \
  public:                                                                     \
    explicit Name(const std::string& what) : Error(#Name, what) {}            \
  }

OTAMM_ERROR(InvalidParameter);
OTAMM_ERROR(CalibrationInfeasible);
OTAMM_ERROR(SingularAtFrequency);
OTAMM_ERROR(EigensolverFailure);
OTAMM_ERROR(NoCrossover);
OTAMM_ERROR(NoSolution);
OTAMM_ERROR(NoValidRange);
OTAMM_ERROR(ValidityViolated);
OTAMM_ERROR(IntegratorStall);
OTAMM_ERROR(InconsistentEntry);
OTAMM_ERROR(ParseError);

#undef OTAMM_ERROR

}  // namespace otamm
