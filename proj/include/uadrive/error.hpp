#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uadrive {

enum class ErrorCode {
  NonClosedLoop,
  DegenerateSegment,
  SelfIntersectingBoundary,
  OriginOutsideTrack,
  ExpertCrashed,
  EmptySplit,
  DigestMismatch,
  MalformedRow,
  DimensionMismatch,
  Diverged,
  MissingModel,
  ConfigInvalid,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. Callers that need to branch on the failure kind
/// inspect code(); everything else can treat it as a std::runtime_error.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace uadrive
