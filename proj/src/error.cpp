#include "uadrive/error.hpp"

namespace uadrive {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonClosedLoop: return "NonClosedLoop";
    case ErrorCode::DegenerateSegment: return "DegenerateSegment";
    case ErrorCode::SelfIntersectingBoundary: return "SelfIntersectingBoundary";
    case ErrorCode::OriginOutsideTrack: return "OriginOutsideTrack";
    case ErrorCode::ExpertCrashed: return "ExpertCrashed";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::DigestMismatch: return "DigestMismatch";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::MissingModel: return "MissingModel";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace uadrive
