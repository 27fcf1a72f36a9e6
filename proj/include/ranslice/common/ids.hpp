#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace ranslice {

using EnbId = std::uint64_t;
using CellId = std::uint16_t;
using Rnti = std::uint16_t;
using RsiId = std::uint32_t;

/// Simulation or wall-clock time in milliseconds.
using Millis = std::int64_t;

/// A cell is addressed by the eNB hosting it and its local cell identifier.
struct CellRef {
  EnbId enb_id = 0;
  CellId cell_id = 0;

  auto operator<=>(const CellRef&) const = default;
};

enum class NasIdKind : std::uint8_t { Imsi = 0, Tmsi = 1 };

/// NAS subscriber identity as extracted at the eNB. IMSIs carry up to 15
/// decimal digits, TMSIs are 32-bit.
struct NasId {
  NasIdKind kind = NasIdKind::Imsi;
  std::uint64_t value = 0;

  auto operator<=>(const NasId&) const = default;

  /// "imsi:214910000000001" or "tmsi:0x1a2b3c4d".
  std::string to_string() const;
  /// Inverse of to_string(); throws std::invalid_argument on bad input.
  static NasId parse(std::string_view text);
};

std::string to_hex(std::uint64_t value, int width = 0);

}  // namespace ranslice
