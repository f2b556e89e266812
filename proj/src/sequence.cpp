#include "puppetai/sequence.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace puppetai {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
bool is_alpha(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_name_char(char c) { return is_alpha(c) || is_digit(c) || c == '_' || c == ' '; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ActionSequence run() {
    skip_ws();
    if (pos_ == text_.size()) throw Error(Errc::EmptyInput, "empty action sequence", pos_);
    ActionSequence seq;
    seq.source_text = std::string(text_);
    while (pos_ < text_.size()) {
      seq.items.push_back(item());
      skip_ws();
    }
    return seq;
  }

 private:
  [[noreturn]] void fail(Errc code, const std::string& what, std::size_t at) const {
    throw Error(code, what + " at offset " + std::to_string(at), at);
  }

  void skip_ws() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  // Contents of a bracket pair starting at pos_ (which holds '['). Leaves
  // pos_ after the closing ']'.
  std::string_view bracket(std::size_t& inner_start) {
    const std::size_t open = pos_++;
    inner_start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ']') {
      if (text_[pos_] == '[') fail(Errc::UnbalancedBracket, "'[' without matching ']'", open);
      ++pos_;
    }
    if (pos_ == text_.size()) fail(Errc::UnbalancedBracket, "'[' without matching ']'", open);
    const std::string_view inner = text_.substr(inner_start, pos_ - inner_start);
    ++pos_;
    return inner;
  }

  static std::pair<std::size_t, std::size_t> trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return {b, e};
  }

  SequenceItem item() {
    if (text_[pos_] != '[') fail(Errc::TrailingGarbage, "expected '['", pos_);
    std::size_t name_start = 0;
    const std::string_view raw_name = bracket(name_start);
    const auto [nb, ne] = trim(raw_name);
    if (nb == ne) fail(Errc::BadName, "empty gesture name", name_start + nb);
    if (!is_alpha(raw_name[nb])) fail(Errc::BadName, "gesture name must start with a letter", name_start + nb);
    for (std::size_t i = nb; i < ne; ++i)
      if (!is_name_char(raw_name[i])) fail(Errc::BadName, "invalid character in gesture name", name_start + i);

    if (pos_ == text_.size() || text_[pos_] != '[') fail(Errc::MissingNumber, "expected '[number]'", pos_);
    std::size_t num_start = 0;
    const std::string_view raw_num = bracket(num_start);
    const auto [b, e] = trim(raw_num);
    if (b == e) fail(Errc::MissingNumber, "empty number", num_start + b);
    const std::string_view num = raw_num.substr(b, e - b);
    const std::size_t num_at = num_start + b;

    std::size_t i = 0;
    while (i < num.size() && is_digit(num[i])) ++i;
    bool ok = i > 0;
    if (ok && i < num.size()) {
      ok = num[i] == '.' && i + 1 < num.size();
      for (std::size_t j = i + 1; ok && j < num.size(); ++j) ok = is_digit(num[j]);
    }
    if (!ok) fail(Errc::BadNumber, "expected a non-negative decimal", num_at);
    double value = 0.0;
    const auto res = std::from_chars(num.data(), num.data() + num.size(), value, std::chars_format::fixed);
    if (res.ec != std::errc{} || res.ptr != num.data() + num.size() || !std::isfinite(value))
      fail(Errc::BadNumber, "number out of range", num_at);

    return {std::string(raw_name.substr(nb, ne - nb)), value};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

ActionSequence parse_sequence(std::string_view text) { return Parser(text).run(); }

bool is_valid_gesture_name(std::string_view name) noexcept {
  if (name.empty() || !is_alpha(name.front()) || name.back() == ' ') return false;
  for (const char c : name)
    if (!is_name_char(c)) return false;
  return true;
}

std::string format_number(double value) {
  if (!std::isfinite(value) || value < 0.0) throw Error(Errc::BadNumber, "cannot format " + std::to_string(value));
  char buf[400];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
  if (res.ec != std::errc{}) throw Error(Errc::BadNumber, "cannot format number");
  return std::string(buf, res.ptr);
}

std::string format_sequence(const ActionSequence& seq) {
  std::string out;
  for (const auto& item : seq.items) {
    if (!is_valid_gesture_name(item.gesture_name))
      throw Error(Errc::BadName, "invalid gesture name '" + item.gesture_name + "'");
    out += "[" + item.gesture_name + "][" + format_number(item.number_s) + "]";
  }
  return out;
}

ActionSequence ResolvedSequence::canonical() const {
  ActionSequence seq;
  for (const auto& item : items) seq.items.push_back({item.gesture, item.number_s});
  seq.source_text = format_sequence(seq);
  return seq;
}

ResolvedSequence resolve_sequence(const ActionSequence& seq, const GestureLibrary& library, ResolveMode mode) {
  ResolvedSequence out;
  std::vector<Diagnostic> unknown;
  for (std::size_t i = 0; i < seq.items.size(); ++i) {
    const auto& item = seq.items[i];
    const GestureDef* def = library.resolve(item.gesture_name);
    if (def == nullptr) {
      unknown.push_back({Errc::UnknownGesture, "items/" + std::to_string(i), "unknown gesture '" + item.gesture_name + "'"});
      continue;
    }
    out.items.push_back({def->name, def->kind, item.number_s, i});
  }
  if (!unknown.empty() && mode == ResolveMode::Strict) {
    const std::size_t index = std::stoul(unknown.front().path.substr(6));
    std::string message = unknown.front().message + " (item " + std::to_string(index) + ")";
    throw Error(Errc::UnknownGesture, std::move(message), index, std::move(unknown));
  }
  out.dropped = std::move(unknown);
  return out;
}

std::vector<ScheduleEntry> build_schedule(const ResolvedSequence& resolved, const GestureLibrary& library) {
  std::vector<ScheduleEntry> timeline;
  double t = 0.0;
  auto push = [&](const std::string& gesture, double length, SchedulePhase phase, std::size_t index) {
    if (!(length > 0.0)) return;
    timeline.push_back({gesture, t, t + length, phase, index});
    t += length;
  };
  for (std::size_t i = 0; i < resolved.items.size(); ++i) {
    const auto& item = resolved.items[i];
    const GestureDef* def = library.resolve(item.gesture);
    if (def == nullptr) throw Error(Errc::UnknownGesture, "unknown gesture '" + item.gesture + "'", i);
    if (def->kind == GestureKind::Discrete) {
      push(def->name, def->nominal_duration_s, SchedulePhase::Play, i);
      push(def->name, item.number_s, SchedulePhase::Pause, i);
    } else {
      push(def->name, item.number_s, SchedulePhase::Play, i);
    }
  }
  return timeline;
}

double schedule_duration(const std::vector<ScheduleEntry>& timeline) noexcept {
  return timeline.empty() ? 0.0 : timeline.back().end_s;
}

}  // namespace puppetai
