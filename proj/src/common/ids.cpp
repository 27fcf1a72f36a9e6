#include "ranslice/common/ids.hpp"

#include <charconv>
#include <stdexcept>

namespace ranslice {

std::string to_hex(std::uint64_t value, int width) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string digits;
  do {
    digits.insert(digits.begin(), kDigits[value & 0xF]);
    value >>= 4;
  } while (value != 0);
  while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
  return "0x" + digits;
}

std::string NasId::to_string() const {
  if (kind == NasIdKind::Imsi) return "imsi:" + std::to_string(value);
  return "tmsi:" + to_hex(value, 8);
}

NasId NasId::parse(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("NAS id needs a kind prefix: " + std::string(text));
  auto kind = text.substr(0, colon);
  auto digits = text.substr(colon + 1);
  NasId id;
  int base = 10;
  if (kind == "imsi") {
    id.kind = NasIdKind::Imsi;
    if (digits.empty() || digits.size() > 15) throw std::invalid_argument("IMSI must have 1..15 digits");
  } else if (kind == "tmsi") {
    id.kind = NasIdKind::Tmsi;
    if (digits.starts_with("0x")) digits.remove_prefix(2);
    base = 16;
  } else {
    throw std::invalid_argument("unknown NAS id kind: " + std::string(kind));
  }
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id.value, base);
  if (ec != std::errc{} || ptr != digits.data() + digits.size())
    throw std::invalid_argument("bad NAS id value: " + std::string(text));
  if (id.kind == NasIdKind::Tmsi && id.value > 0xFFFFFFFFULL) throw std::invalid_argument("TMSI exceeds 32 bits");
  return id;
}

}  // namespace ranslice
