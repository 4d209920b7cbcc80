#pragma once

#include <cstdint>
#include <span>

namespace asmctl::wireproto {

// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final xor.
// Table-driven; "123456789" -> 0x29B1.
std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes);

// Continues a running CRC over more bytes.
std::uint16_t crc16_ccitt_false_update(std::uint16_t crc,
                                       std::span<const std::uint8_t> bytes);

}  // namespace asmctl::wireproto
