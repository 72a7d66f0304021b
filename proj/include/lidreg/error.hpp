#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lidreg {

enum class ErrorKind {
  DegenerateProjection,
  SingularCamera,
  NoGroundPoints,
  EmptyCloud,
  EmptySegment,
  AmbiguousLargest,
  TooFewMatches,
  TooFewCorrespondences,
  DegenerateConfiguration,
  NoVisiblePoints,
  NotNormalized,
  FrameMismatch,
  DegenerateEntropy,
  FrameTooSmall,
  EmptyPatchCloud,
  EmptySet,
  InvalidSpec,
  UnknownBuilding,
  InvalidConfig,
  IoError,
  NonConvergence,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a machine-readable failure class.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace lidreg
