#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rdpp {

enum class ErrorKind {
  NotPositiveDefinite,
  FamilyEvaluation,
  SiteNotInWindow,
  SiteInConfiguration,
  OverlappingSets,
  ScheduleNotNested,
  SpectrumAtOne,
  WindowTooLarge,
  InvalidWindow,
  InvalidArgument,
  ConfigParse,
  InvariantViolation,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit path) can name the failing check.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace rdpp
