#include "frag6/checksum.hpp"

#include <algorithm>
#include <random>

namespace frag6::checksum {

Bytes PseudoHeader::serialize() const {
  Bytes out;
  out.reserve(40);
  append(out, src);
  append(out, dst);
  put_u32(out, upper_layer_length);
  out.push_back(0);
  out.push_back(0);
  out.push_back(0);
  out.push_back(next_header);
  return out;
}

std::uint32_t word_sum(std::uint32_t acc, std::span<const std::uint8_t> data) {
  std::size_t i = 0;
  for (; i + 1 < data.size(); i += 2)
    acc += static_cast<std::uint32_t>((data[i] << 8) | data[i + 1]);
  if (i < data.size()) acc += static_cast<std::uint32_t>(data[i] << 8);
  return acc;
}

std::uint16_t fold(std::uint32_t acc) {
  while (acc >> 16) acc = (acc & 0xffff) + (acc >> 16);
  return static_cast<std::uint16_t>(acc);
}

std::uint16_t ones_sum(std::span<const std::uint8_t> data) {
  return fold(word_sum(0, data));
}

std::uint16_t internet_checksum(const PseudoHeader& pseudo,
                                std::span<const std::uint8_t> data) {
  std::uint32_t acc = word_sum(0, pseudo.serialize());
  acc = word_sum(acc, data);
  return static_cast<std::uint16_t>(~fold(acc));
}

namespace {

// Pattern tables: four bytes per label. The odd scheme's 16-bit word sums
// collide in pairs, 0x4466 for A and F, 0x3377 for B and D, 0x5555 for C
// and E, so swapping fragments inside a pair leaves checksums intact.
constexpr std::array<std::array<std::uint8_t, 4>, 6> kOdd = {{
    {0x11, 0x22, 0x33, 0x44},  // A
    {0x11, 0x33, 0x22, 0x44},  // B
    {0x22, 0x11, 0x33, 0x44},  // C
    {0x22, 0x33, 0x11, 0x44},  // D
    {0x33, 0x11, 0x22, 0x44},  // E
    {0x33, 0x22, 0x11, 0x44},  // F
}};

constexpr std::array<std::array<std::uint8_t, 4>, 6> kEven = {{
    {0x44, 0x11, 0x33, 0x22},  // A
    {0x44, 0x33, 0x11, 0x22},  // B
    {0x44, 0x33, 0x22, 0x11},  // C
    {0x11, 0x22, 0x44, 0x33},  // D
    {0x11, 0x33, 0x44, 0x22},  // E
    {0x22, 0x11, 0x44, 0x33},  // F
}};

}  // namespace

std::array<std::uint8_t, 4> pattern_bytes(char label, Parity parity) {
  if (label < 'A' || label > 'F')
    throw UnknownLabel(std::string("pattern_bytes: no pattern for label '") +
                       label + "'");
  const auto& table = parity == Parity::Odd ? kOdd : kEven;
  return table[static_cast<std::size_t>(label - 'A')];
}

Bytes pattern_fill(char label, Parity parity, std::size_t units) {
  const auto pat = pattern_bytes(label, parity);
  Bytes out;
  out.reserve(units * 8);
  for (std::size_t u = 0; u < units * 2; ++u) append(out, pat);
  return out;
}

Bytes checksum_preserving_shuffle(const Bytes& payload, std::uint64_t seed) {
  const std::size_t words = payload.size() / 2;
  Bytes out = payload;
  if (words < 2) return out;

  std::vector<std::uint16_t> w(words);
  for (std::size_t i = 0; i < words; ++i) w[i] = read_u16(&payload[i * 2]);

  std::mt19937_64 rng(seed);
  for (std::size_t i = words - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> dist(0, i);
    std::swap(w[i], w[dist(rng)]);
  }

  // A permutation that lands on the identity tells an observer nothing was
  // forged; force one swap of differing words when possible.
  bool identity = true;
  for (std::size_t i = 0; i < words && identity; ++i)
    identity = w[i] == read_u16(&payload[i * 2]);
  if (identity) {
    for (std::size_t i = 1; i < words; ++i) {
      if (w[i] != w[0]) {
        std::swap(w[0], w[i]);
        break;
      }
    }
  }

  for (std::size_t i = 0; i < words; ++i) {
    out[i * 2] = static_cast<std::uint8_t>(w[i] >> 8);
    out[i * 2 + 1] = static_cast<std::uint8_t>(w[i] & 0xff);
  }
  return out;
}

std::uint16_t checksum_compensate(const Bytes& original, const Bytes& forged,
                                  std::size_t slot) {
  if (slot % 2 != 0 || slot + 1 >= forged.size())
    throw NoSlotReserved("checksum_compensate: slot not a 16-bit-aligned "
                         "position inside the forged payload");
  Bytes zeroed = forged;
  zeroed[slot] = 0;
  zeroed[slot + 1] = 0;

  const std::uint32_t want = ones_sum(original);
  const std::uint32_t have = ones_sum(zeroed);
  // Ones'-complement subtraction: want - have modulo 0xffff.
  std::uint32_t diff = want + 0xffffu - have;
  diff %= 0xffffu;
  return static_cast<std::uint16_t>(diff);
}

}  // namespace frag6::checksum
