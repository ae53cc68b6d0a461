#pragma once

#include <array>
#include <cstdint>
#include <cstddef>

#include "frag6/bytes.hpp"

namespace frag6::checksum {

class UnknownLabel : public Error {
 public:
  using Error::Error;
};

class NoSlotReserved : public Error {
 public:
  using Error::Error;
};

// Fill scheme for the per-fragment 4-byte payload patterns. Packets sent in
// multi-packet mode alternate between the two schemes.
enum class Parity { Odd, Even };

// The 40-byte prefix prepended to upper-layer data when checksumming
// (src, dst, 32-bit upper-layer length, 3 zero bytes, next-header).
struct PseudoHeader {
  std::array<std::uint8_t, 16> src{};
  std::array<std::uint8_t, 16> dst{};
  std::uint32_t upper_layer_length{0};
  std::uint8_t next_header{0};

  Bytes serialize() const;
};

// Ones'-complement accumulation of big-endian 16-bit words into a 32-bit
// accumulator. A trailing odd byte is padded with zero on the right.
std::uint32_t word_sum(std::uint32_t acc, std::span<const std::uint8_t> data);

// Folds the 32-bit accumulator down to 16 bits (end-around carry).
std::uint16_t fold(std::uint32_t acc);

// Folded ones'-complement sum of a byte string, not complemented.
std::uint16_t ones_sum(std::span<const std::uint8_t> data);

// RFC 1071 checksum over pseudo-header plus data, complemented. The caller
// zeroes the checksum field inside `data` before calling.
std::uint16_t internet_checksum(const PseudoHeader& pseudo,
                                std::span<const std::uint8_t> data);

// 4-byte pattern for a fragment label under the given fill scheme. Labels
// run 'A' through 'F'.
std::array<std::uint8_t, 4> pattern_bytes(char label, Parity parity);

// Repeats the 4-byte pattern to fill `units` 8-octet units (two pattern
// copies per unit).
Bytes pattern_fill(char label, Parity parity, std::size_t units);

// Deterministically permutes the payload's 16-bit groups; a trailing odd
// byte stays in place. The folded word sum, and therefore any checksum
// covering the payload, is unchanged. When the payload holds at least two
// distinct words the result differs from the input.
Bytes checksum_preserving_shuffle(const Bytes& payload, std::uint64_t seed);

// Computes the 16-bit word that, written at byte offset `slot` of `forged`,
// makes the forged payload's folded word sum equal the original's. `slot`
// must be 16-bit aligned and inside the payload; the slot's current content
// is ignored.
std::uint16_t checksum_compensate(const Bytes& original, const Bytes& forged,
                                  std::size_t slot);

}  // namespace frag6::checksum
