#pragma once

// Action-sequence text format:
//
//   seq    := ws item (ws item)* ws
//   item   := '[' ws name ws ']' '[' ws number ws ']'
//   name   := [A-Za-z][A-Za-z0-9_ ]*      (trimmed)
//   number := [0-9]+ ('.' [0-9]+)?        (seconds, non-negative)
//
// e.g. "[Waving][1][Joy][1]".

#include <string>
#include <string_view>
#include <vector>

#include "puppetai/gestures.hpp"

namespace puppetai {

struct SequenceItem {
  std::string gesture_name;
  double number_s = 0.0;

  bool operator==(const SequenceItem&) const = default;
};

struct ActionSequence {
  std::vector<SequenceItem> items;
  std::string source_text;

  // Source text is not part of a sequence's identity.
  bool operator==(const ActionSequence& other) const { return items == other.items; }
};

// Throws EmptyInput, UnbalancedBracket, MissingNumber, BadNumber, BadName or
// TrailingGarbage with the byte offset of the problem.
ActionSequence parse_sequence(std::string_view text);

// Canonical "[Name][n]..." with the shortest fixed-point number that parses
// back to the same value.
std::string format_sequence(const ActionSequence& seq);
std::string format_number(double value);
bool is_valid_gesture_name(std::string_view name) noexcept;

enum class ResolveMode { Strict, Repair };

struct ResolvedItem {
  std::string gesture;  // canonical name
  GestureKind kind = GestureKind::Discrete;
  double number_s = 0.0;
  std::size_t source_index = 0;

  bool operator==(const ResolvedItem&) const = default;
};

struct ResolvedSequence {
  std::vector<ResolvedItem> items;
  // Repair mode: one diagnostic per dropped item.
  std::vector<Diagnostic> dropped;

  ActionSequence canonical() const;
  bool empty() const noexcept { return items.empty(); }
};

// Strict mode throws UnknownGesture (offset = item index) listing every
// unknown name; repair mode drops them and reports each in `dropped`.
ResolvedSequence resolve_sequence(const ActionSequence& seq, const GestureLibrary& library,
                                  ResolveMode mode = ResolveMode::Strict);

enum class SchedulePhase { Play, Pause };

struct ScheduleEntry {
  std::string gesture;
  double start_s = 0.0;
  double end_s = 0.0;
  SchedulePhase phase = SchedulePhase::Play;
  std::size_t item_index = 0;

  double duration_s() const noexcept { return end_s - start_s; }
  bool operator==(const ScheduleEntry&) const = default;
};

// Discrete items play for the gesture's nominal duration and then pause for
// the item's number; continuous items loop for exactly the item's number.
// Zero-length entries are omitted.
std::vector<ScheduleEntry> build_schedule(const ResolvedSequence& resolved, const GestureLibrary& library);
double schedule_duration(const std::vector<ScheduleEntry>& timeline) noexcept;

}  // namespace puppetai
