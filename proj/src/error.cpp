#include <lidreg/error.hpp>

namespace lidreg {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateProjection: return "DegenerateProjection";
    case ErrorKind::SingularCamera: return "SingularCamera";
    case ErrorKind::NoGroundPoints: return "NoGroundPoints";
    case ErrorKind::EmptyCloud: return "EmptyCloud";
    case ErrorKind::EmptySegment: return "EmptySegment";
    case ErrorKind::AmbiguousLargest: return "AmbiguousLargest";
    case ErrorKind::TooFewMatches: return "TooFewMatches";
    case ErrorKind::TooFewCorrespondences: return "TooFewCorrespondences";
    case ErrorKind::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorKind::NoVisiblePoints: return "NoVisiblePoints";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::FrameMismatch: return "FrameMismatch";
    case ErrorKind::DegenerateEntropy: return "DegenerateEntropy";
    case ErrorKind::FrameTooSmall: return "FrameTooSmall";
    case ErrorKind::EmptyPatchCloud: return "EmptyPatchCloud";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::UnknownBuilding: return "UnknownBuilding";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::NonConvergence: return "NonConvergence";
  }
  return "Unknown";
}

}  // namespace lidreg
