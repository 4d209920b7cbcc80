#include "asmctl/wireproto/crc16.hpp"

#include <array>

namespace asmctl::wireproto {

namespace {

constexpr std::array<std::uint16_t, 256> make_table() {
  std::array<std::uint16_t, 256> table{};
  for (unsigned i = 0; i < 256; ++i) {
    std::uint16_t crc = static_cast<std::uint16_t>(i << 8);
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                           : static_cast<std::uint16_t>(crc << 1);
    }
    table[i] = crc;
  }
  return table;
}

constexpr auto kTable = make_table();

}  // namespace

std::uint16_t crc16_ccitt_false_update(std::uint16_t crc,
                                       std::span<const std::uint8_t> bytes) {
  for (std::uint8_t b : bytes) {
    crc = static_cast<std::uint16_t>((crc << 8) ^ kTable[((crc >> 8) ^ b) & 0xFF]);
  }
  return crc;
}

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes) {
  return crc16_ccitt_false_update(0xFFFF, bytes);
}

}  // namespace asmctl::wireproto
