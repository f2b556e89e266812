#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace puppetai {

// Machine-readable error codes shared by every module. The string form
// (to_string) is what the CLI and the console protocol print.
enum class Errc {
  // kinematics / model
  UnknownSection,
  UnknownPlane,
  AngleOutOfRange,
  InvalidSegment,
  DuplicateSection,
  DuplicatePlane,
  DuplicateOrientation,
  BadPlaneCount,
  NonPositiveCableOffset,
  OrientationOutOfRange,
  RangeExcludesZero,
  RangeExceedsMaxBend,
  UnknownParent,
  MountCycle,
  EmptyChain,
  // actuation
  UnmappedPlane,
  UnknownChannel,
  DuplicateChannel,
  InvalidChannel,
  BadSync,
  BadCrc,
  ShortFrame,
  UnknownOpcode,
  PayloadMismatch,
  // gestures
  DuplicateName,
  AliasCollision,
  NonMonotoneKeyframes,
  KeyframeBeyondDuration,
  OpenLoop,
  ModelShapeMismatch,
  UnknownPlaneInKeyframe,
  UnknownGesture,
  // sequence dsl
  EmptyInput,
  UnbalancedBracket,
  MissingNumber,
  BadNumber,
  BadName,
  TrailingGarbage,
  // perception
  Timeout,
  AuthMissing,
  TransportError,
  // config / io
  FileNotFound,
  SchemaError,
  CrossRefError,
  InvalidArgument,
};

std::string_view to_string(Errc code) noexcept;

/// One finding from a validator. `path` locates the offending item
/// (e.g. "left_arm/segments/0/planes/1" or a JSON pointer).
struct Diagnostic {
  Errc code;
  std::string path;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

std::string format_diagnostic(const Diagnostic& d);

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message, std::optional<std::size_t> offset = std::nullopt);
  Error(Errc code, std::string message, std::vector<Diagnostic> diagnostics);
  Error(Errc code, std::string message, std::size_t offset, std::vector<Diagnostic> diagnostics);

  Errc code() const noexcept { return code_; }
  std::string_view code_name() const noexcept { return to_string(code_); }
  // Byte offset for parse errors, item index for resolution errors.
  std::optional<std::size_t> offset() const noexcept { return offset_; }
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  Errc code_;
  std::optional<std::size_t> offset_;
  std::vector<Diagnostic> diagnostics_;
};

}  // namespace puppetai
