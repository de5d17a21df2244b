#include "gboc/error.hpp"

namespace gboc {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonBinaryLabel: return "NonBinaryLabel";
    case ErrorCode::DegenerateSeries: return "DegenerateSeries";
    case ErrorCode::WindowTooLong: return "WindowTooLong";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::EmptyBall: return "EmptyBall";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::NoAnomalies: return "NoAnomalies";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::ModelMismatch: return "ModelMismatch";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace gboc
