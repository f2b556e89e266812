#include "puppetai/codec.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace puppetai::codec {

namespace {

void put_i32(std::vector<std::uint8_t>& out, std::int32_t value) {
  const auto u = static_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

std::int32_t get_i32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t u = 0;
  for (int i = 0; i < 4; ++i) u |= static_cast<std::uint32_t>(bytes[at + i]) << (8 * i);
  return static_cast<std::int32_t>(u);
}

bool payload_fits(Opcode opcode, const Payload& payload) {
  switch (opcode) {
    case Opcode::SetTarget: return std::holds_alternative<SetTargetPayload>(payload);
    case Opcode::Telemetry: return std::holds_alternative<TelemetryPayload>(payload);
    case Opcode::Query:
    case Opcode::Stop: return std::holds_alternative<std::monostate>(payload);
  }
  return false;
}

}  // namespace

std::uint8_t crc8(std::span<const std::uint8_t> bytes) noexcept {
  std::uint8_t crc = 0x00;
  for (const std::uint8_t b : bytes) {
    crc ^= b;
    for (int bit = 0; bit < 8; ++bit)
      crc = (crc & 0x80) ? static_cast<std::uint8_t>((crc << 1) ^ 0x07) : static_cast<std::uint8_t>(crc << 1);
  }
  return crc;
}

std::size_t frame_length(Opcode opcode) noexcept {
  switch (opcode) {
    case Opcode::SetTarget: return 9;
    case Opcode::Query:
    case Opcode::Stop: return 5;
    case Opcode::Telemetry: return 18;
  }
  return 0;
}

std::optional<Opcode> opcode_from_byte(std::uint8_t byte) noexcept {
  switch (byte) {
    case 0x01: return Opcode::SetTarget;
    case 0x02: return Opcode::Query;
    case 0x03: return Opcode::Stop;
    case 0x80: return Opcode::Telemetry;
    default: return std::nullopt;
  }
}

std::vector<std::uint8_t> encode_frame(const WireFrame& frame) {
  return encode_frame(frame.channel, frame.opcode, frame.payload);
}

std::vector<std::uint8_t> encode_frame(std::uint8_t channel, Opcode opcode, const Payload& payload) {
  if (!payload_fits(opcode, payload))
    throw Error(Errc::PayloadMismatch, "payload does not match opcode " + std::to_string(static_cast<int>(opcode)));
  std::vector<std::uint8_t> out{kSync0, kSync1, channel, static_cast<std::uint8_t>(opcode)};
  out.reserve(frame_length(opcode));
  if (const auto* set = std::get_if<SetTargetPayload>(&payload)) {
    put_i32(out, set->target_um);
  } else if (const auto* tel = std::get_if<TelemetryPayload>(&payload)) {
    put_i32(out, tel->position_um);
    put_i32(out, tel->velocity_um_s);
    put_i32(out, tel->torque_milli);
    out.push_back(tel->flags);
  }
  out.push_back(crc8(std::span(out).subspan(2)));
  return out;
}

WireFrame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 5) throw Error(Errc::ShortFrame, "frame shorter than 5 bytes");
  if (bytes[0] != kSync0 || bytes[1] != kSync1) throw Error(Errc::BadSync, "missing AA 55 sync", 0);
  const auto body = bytes.subspan(2, bytes.size() - 3);
  if (crc8(body) != bytes.back()) throw Error(Errc::BadCrc, "crc mismatch", bytes.size() - 1);
  const auto opcode = opcode_from_byte(bytes[3]);
  if (!opcode) throw Error(Errc::UnknownOpcode, "unknown opcode " + std::to_string(bytes[3]), 3);
  if (bytes.size() != frame_length(*opcode))
    throw Error(Errc::ShortFrame, "length " + std::to_string(bytes.size()) + " does not match opcode");

  WireFrame frame{bytes[2], *opcode, std::monostate{}};
  switch (*opcode) {
    case Opcode::SetTarget: frame.payload = SetTargetPayload{get_i32(bytes, 4)}; break;
    case Opcode::Telemetry:
      frame.payload = TelemetryPayload{get_i32(bytes, 4), get_i32(bytes, 8), get_i32(bytes, 12), bytes[16]};
      break;
    case Opcode::Query:
    case Opcode::Stop: break;
  }
  return frame;
}

std::int32_t mm_to_um(double mm) {
  const double um = std::round(mm * 1000.0);
  if (!(um >= std::numeric_limits<std::int32_t>::min() && um <= std::numeric_limits<std::int32_t>::max()))
    throw Error(Errc::PayloadMismatch, "displacement does not fit i32 micrometers");
  return static_cast<std::int32_t>(um);
}

double um_to_mm(std::int32_t um) noexcept { return um / 1000.0; }

void FrameReader::feed(std::span<const std::uint8_t> bytes) { buffer_.insert(buffer_.end(), bytes.begin(), bytes.end()); }

std::optional<WireFrame> FrameReader::next() {
  while (true) {
    std::size_t start = 0;
    while (start + 1 < buffer_.size() && !(buffer_[start] == kSync0 && buffer_[start + 1] == kSync1)) ++start;
    if (start > 0) buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(start));
    if (buffer_.size() < 4) return std::nullopt;

    const auto opcode = opcode_from_byte(buffer_[3]);
    if (!opcode) {
      ++rejected_;
      buffer_.erase(buffer_.begin());
      continue;
    }
    const std::size_t len = frame_length(*opcode);
    if (buffer_.size() < len) return std::nullopt;
    try {
      WireFrame frame = decode_frame(std::span(buffer_).first(len));
      buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(len));
      return frame;
    } catch (const Error&) {
      ++rejected_;
      buffer_.erase(buffer_.begin());
    }
  }
}

}  // namespace puppetai::codec
