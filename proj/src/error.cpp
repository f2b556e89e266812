#include "puppetai/error.hpp"

namespace puppetai {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::UnknownSection: return "UnknownSection";
    case Errc::UnknownPlane: return "UnknownPlane";
    case Errc::AngleOutOfRange: return "AngleOutOfRange";
    case Errc::InvalidSegment: return "InvalidSegment";
    case Errc::DuplicateSection: return "DuplicateSection";
    case Errc::DuplicatePlane: return "DuplicatePlane";
    case Errc::DuplicateOrientation: return "DuplicateOrientation";
    case Errc::BadPlaneCount: return "BadPlaneCount";
    case Errc::NonPositiveCableOffset: return "NonPositiveCableOffset";
    case Errc::OrientationOutOfRange: return "OrientationOutOfRange";
    case Errc::RangeExcludesZero: return "RangeExcludesZero";
    case Errc::RangeExceedsMaxBend: return "RangeExceedsMaxBend";
    case Errc::UnknownParent: return "UnknownParent";
    case Errc::MountCycle: return "MountCycle";
    case Errc::EmptyChain: return "EmptyChain";
    case Errc::UnmappedPlane: return "UnmappedPlane";
    case Errc::UnknownChannel: return "UnknownChannel";
    case Errc::DuplicateChannel: return "DuplicateChannel";
    case Errc::InvalidChannel: return "InvalidChannel";
    case Errc::BadSync: return "BadSync";
    case Errc::BadCrc: return "BadCrc";
    case Errc::ShortFrame: return "ShortFrame";
    case Errc::UnknownOpcode: return "UnknownOpcode";
    case Errc::PayloadMismatch: return "PayloadMismatch";
    case Errc::DuplicateName: return "DuplicateName";
    case Errc::AliasCollision: return "AliasCollision";
    case Errc::NonMonotoneKeyframes: return "NonMonotoneKeyframes";
    case Errc::KeyframeBeyondDuration: return "KeyframeBeyondDuration";
    case Errc::OpenLoop: return "OpenLoop";
    case Errc::ModelShapeMismatch: return "ModelShapeMismatch";
    case Errc::UnknownPlaneInKeyframe: return "UnknownPlaneInKeyframe";
    case Errc::UnknownGesture: return "UnknownGesture";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::UnbalancedBracket: return "UnbalancedBracket";
    case Errc::MissingNumber: return "MissingNumber";
    case Errc::BadNumber: return "BadNumber";
    case Errc::BadName: return "BadName";
    case Errc::TrailingGarbage: return "TrailingGarbage";
    case Errc::Timeout: return "Timeout";
    case Errc::AuthMissing: return "AuthMissing";
    case Errc::TransportError: return "TransportError";
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::SchemaError: return "SchemaError";
    case Errc::CrossRefError: return "CrossRefError";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string format_diagnostic(const Diagnostic& d) {
  std::string out{to_string(d.code)};
  if (!d.path.empty()) out += " at " + d.path;
  if (!d.message.empty()) out += ": " + d.message;
  return out;
}

Error::Error(Errc code, std::string message, std::optional<std::size_t> offset)
    : std::runtime_error(std::move(message)), code_(code), offset_(offset) {}

Error::Error(Errc code, std::string message, std::vector<Diagnostic> diagnostics)
    : std::runtime_error(std::move(message)), code_(code), diagnostics_(std::move(diagnostics)) {}

Error::Error(Errc code, std::string message, std::size_t offset, std::vector<Diagnostic> diagnostics)
    : std::runtime_error(std::move(message)), code_(code), offset_(offset), diagnostics_(std::move(diagnostics)) {}

}  // namespace puppetai
