#pragma once

// Reference computations written independently of the library code paths.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

#include <Eigen/Dense>

namespace oracle {

inline double rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Position and heading after walking an arc of length L whose heading
// rotates uniformly by `bend_rad` about the in-plane normal, integrated in
// `steps` short chords (midpoint heading per chord).
struct ArcEnd {
  Eigen::Vector3d position;
  Eigen::Vector3d tangent;
};

inline ArcEnd integrate_arc(double length, double bend_rad, double direction_rad, int steps = 20000) {
  const Eigen::Vector3d dir(std::cos(direction_rad), std::sin(direction_rad), 0.0);
  const Eigen::Vector3d z(0.0, 0.0, 1.0);
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  const double ds = length / steps;
  for (int i = 0; i < steps; ++i) {
    const double a = bend_rad * (i + 0.5) / steps;
    p += ds * (std::sin(a) * dir + std::cos(a) * z);
  }
  return {p, std::sin(bend_rad) * dir + std::cos(bend_rad) * z};
}

// Cable length reeled in for a bend, summed unit by unit: each unit's wedge
// closes by theta_i and shortens the cable by r * theta_i.
inline double cable_by_units(double r, double total_deg, int units) {
  double sum = 0.0;
  for (int i = 0; i < units; ++i) sum += r * rad(total_deg / units);
  return sum;
}

// Table-driven CRC-8, polynomial x^8 + x^2 + x + 1, init 0, no reflection.
inline std::uint8_t crc8_table(std::span<const std::uint8_t> bytes) {
  static const auto table = [] {
    std::array<std::uint8_t, 256> t{};
    for (int i = 0; i < 256; ++i) {
      std::uint8_t c = static_cast<std::uint8_t>(i);
      for (int b = 0; b < 8; ++b) c = static_cast<std::uint8_t>((c & 0x80) ? (c << 1) ^ 0x07 : (c << 1));
      t[static_cast<std::size_t>(i)] = c;
    }
    return t;
  }();
  std::uint8_t crc = 0;
  for (std::uint8_t byte : bytes) crc = table[crc ^ byte];
  return crc;
}

// Smoothstep easing used between keyframes.
inline double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }

}  // namespace oracle
