#pragma once

// Golden frames: each fixture pairs a Message with bytes laid out by hand,
// field by field, without going through the codec.

#include <cstdint>
#include <string>
#include <vector>

#include "ranslice/wire/message.hpp"

namespace ranslice::testing {

struct WireFixture {
  std::string name;
  wire::Message message;
  std::vector<std::uint8_t> bytes;
};

std::vector<WireFixture> wire_fixtures();

std::string to_hex_text(const std::vector<std::uint8_t>& bytes);
/// Parses hex, ignoring whitespace and '#' comments to end of line.
std::vector<std::uint8_t> from_hex_text(const std::string& text);

/// The slice provisioned in the three-UE reproduction scenario.
policy::RsiTemplate section_v_template();

}  // namespace ranslice::testing
