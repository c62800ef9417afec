#include "rkhs_dpp/errors.hpp"

namespace rdpp {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::FamilyEvaluation: return "FamilyEvaluation";
    case ErrorKind::SiteNotInWindow: return "SiteNotInWindow";
    case ErrorKind::SiteInConfiguration: return "SiteInConfiguration";
    case ErrorKind::OverlappingSets: return "OverlappingSets";
    case ErrorKind::ScheduleNotNested: return "ScheduleNotNested";
    case ErrorKind::SpectrumAtOne: return "SpectrumAtOne";
    case ErrorKind::WindowTooLarge: return "WindowTooLarge";
    case ErrorKind::InvalidWindow: return "InvalidWindow";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigParse: return "ConfigParse";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace rdpp
