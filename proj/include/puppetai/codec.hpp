#pragma once

// Host <-> motor base serial framing.
//
//   AA 55 | channel u8 | opcode u8 | payload | crc8
//
// CRC-8 uses polynomial 0x07, init 0x00, no reflection, no final xor, and
// covers channel..payload. Multi-byte payload fields are little-endian.
//
//   opcode           payload                                   frame length
//   01 SET_TARGET    i32 target micrometers                     9
//   02 QUERY         -                                          5
//   03 STOP          -                                          5
//   80 TELEMETRY     i32 position um, i32 velocity um/s,        18
//                    i32 torque milli-units, u8 flags (bit0 = faulted)

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "puppetai/error.hpp"

namespace puppetai::codec {

inline constexpr std::uint8_t kSync0 = 0xAA;
inline constexpr std::uint8_t kSync1 = 0x55;

enum class Opcode : std::uint8_t {
  SetTarget = 0x01,
  Query = 0x02,
  Stop = 0x03,
  Telemetry = 0x80,
};

struct SetTargetPayload {
  std::int32_t target_um = 0;
  bool operator==(const SetTargetPayload&) const = default;
};

struct TelemetryPayload {
  std::int32_t position_um = 0;
  std::int32_t velocity_um_s = 0;
  std::int32_t torque_milli = 0;
  std::uint8_t flags = 0;
  bool operator==(const TelemetryPayload&) const = default;
};

using Payload = std::variant<std::monostate, SetTargetPayload, TelemetryPayload>;

struct WireFrame {
  std::uint8_t channel = 0;
  Opcode opcode = Opcode::Query;
  Payload payload;

  bool operator==(const WireFrame&) const = default;
};

std::uint8_t crc8(std::span<const std::uint8_t> bytes) noexcept;

// Frame length in bytes for an opcode (sync and CRC included).
std::size_t frame_length(Opcode opcode) noexcept;
std::optional<Opcode> opcode_from_byte(std::uint8_t byte) noexcept;

// Throws PayloadMismatch when the payload does not fit the opcode.
std::vector<std::uint8_t> encode_frame(const WireFrame& frame);
std::vector<std::uint8_t> encode_frame(std::uint8_t channel, Opcode opcode, const Payload& payload);

// Throws ShortFrame, BadSync, BadCrc or UnknownOpcode. The CRC is checked
// before the opcode so any single-bit corruption past the sync bytes is
// reported as BadCrc.
WireFrame decode_frame(std::span<const std::uint8_t> bytes);

std::int32_t mm_to_um(double mm);
double um_to_mm(std::int32_t um) noexcept;

// Incremental decoder for a byte stream. Resynchronises on AA 55 and drops
// frames that fail to decode, counting them.
class FrameReader {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  std::optional<WireFrame> next();
  std::size_t rejected() const noexcept { return rejected_; }

 private:
  std::vector<std::uint8_t> buffer_;
  std::size_t rejected_ = 0;
};

}  // namespace puppetai::codec
