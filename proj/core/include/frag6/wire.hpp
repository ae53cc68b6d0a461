#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frag6/bytes.hpp"
#include "frag6/checksum.hpp"

namespace frag6::wire {

class ChainBroken : public Error {
 public:
  using Error::Error;
};
class Oversize : public Error {
 public:
  using Error::Error;
};
class Truncated : public Error {
 public:
  using Error::Error;
};
class MalformedChain : public Error {
 public:
  using Error::Error;
};
class OffsetOverflow : public Error {
 public:
  using Error::Error;
};
class NonFinalUnaligned : public Error {
 public:
  using Error::Error;
};

inline constexpr std::uint8_t kProtoHopByHop = 0;
inline constexpr std::uint8_t kProtoUdp = 17;
inline constexpr std::uint8_t kProtoRouting = 43;
inline constexpr std::uint8_t kProtoFragment = 44;
inline constexpr std::uint8_t kProtoIcmpv6 = 58;
inline constexpr std::uint8_t kProtoNoNext = 59;
inline constexpr std::uint8_t kProtoDestOptions = 60;

inline constexpr std::uint8_t kIcmpv6EchoRequest = 128;
inline constexpr std::uint8_t kIcmpv6EchoReply = 129;
inline constexpr std::uint8_t kIcmpv6ParamProblem = 4;
inline constexpr std::uint8_t kParamProblemIncompleteChain = 3;

inline constexpr std::size_t kIpv6HeaderBytes = 40;
inline constexpr std::size_t kFragmentHeaderBytes = 8;
inline constexpr std::size_t kUnitBytes = 8;
// Echo, UDP and Parameter Problem all open with a fixed 8-byte header.
inline constexpr std::size_t kUpperHeaderBytes = 8;
inline constexpr std::uint16_t kMaxOffsetUnits = 0x1fff;

struct Ipv6Address {
  std::array<std::uint8_t, 16> bytes{};

  static Ipv6Address from_string(const std::string& text);
  std::string to_string() const;
  auto operator<=>(const Ipv6Address&) const = default;
};

struct Ipv6Header {
  std::uint8_t traffic_class{0};
  std::uint32_t flow_label{0};  // 20 bits
  std::uint16_t payload_length{0};
  std::uint8_t next_header{kProtoIcmpv6};
  std::uint8_t hop_limit{64};
  Ipv6Address src{};
  Ipv6Address dst{};

  auto operator<=>(const Ipv6Header&) const = default;
};

struct FragmentHeader {
  std::uint8_t next_header{kProtoIcmpv6};
  std::uint16_t offset_units{0};  // 13 bits, 8-octet units
  bool m_flag{false};
  std::uint32_t identification{0};

  // next_header | reserved | offset(13) res(2) M(1) | identification.
  Bytes serialize() const;
  static FragmentHeader parse(std::span<const std::uint8_t> data);
  auto operator<=>(const FragmentHeader&) const = default;
};

struct Icmpv6Echo {
  std::uint8_t msg_type{kIcmpv6EchoRequest};
  std::uint8_t code{0};
  std::uint16_t checksum{0};
  std::uint16_t identifier{0};
  std::uint16_t sequence{0};
  Bytes payload;

  Bytes serialize() const;
  static Icmpv6Echo parse(std::span<const std::uint8_t> data);
  auto operator<=>(const Icmpv6Echo&) const = default;
};

struct Icmpv6ParamProblem {
  std::uint8_t code{0};
  std::uint16_t checksum{0};
  std::uint32_t pointer{0};
  Bytes invoking_packet;

  Bytes serialize() const;
  static Icmpv6ParamProblem parse(std::span<const std::uint8_t> data);
  auto operator<=>(const Icmpv6ParamProblem&) const = default;
};

struct UdpDatagram {
  std::uint16_t src_port{0};
  std::uint16_t dst_port{0};
  std::uint16_t checksum{0};
  Bytes payload;

  Bytes serialize() const;  // length field derived from payload
  static UdpDatagram parse(std::span<const std::uint8_t> data);
  auto operator<=>(const UdpDatagram&) const = default;
};

// One extension header as laid out on the wire; raw[0] is its next-header
// byte and must point at the kind of the successor entry (or at the upper
// protocol for the last entry).
struct ExtHeader {
  std::uint8_t kind{0};
  Bytes raw;

  auto operator<=>(const ExtHeader&) const = default;
};

struct ExtHeaderChain {
  std::vector<ExtHeader> entries;
  std::uint8_t upper_protocol{kProtoIcmpv6};

  std::size_t wire_size() const;
  auto operator<=>(const ExtHeaderChain&) const = default;
};

// Chain builders that fill in the linkage bytes.
ExtHeader make_fragment_entry(const FragmentHeader& fh, std::uint8_t next);
ExtHeader make_destination_options_entry(std::uint8_t next);

struct Frame {
  Bytes bytes;

  auto operator<=>(const Frame&) const = default;
};

// Geometry of one fragment in 8-octet units. When `pattern` is set the
// fragment body is filled from that label's pattern; otherwise it is sliced
// out of the packet payload at [offset_units * 8, + length_units * 8).
struct FragmentSpec {
  char label{'?'};
  std::uint16_t offset_units{0};
  std::uint16_t length_units{0};
  bool m_flag{false};
  bool carries_upper_header{false};
  std::optional<char> pattern;

  auto operator<=>(const FragmentSpec&) const = default;
};

enum class UpperKind {
  EchoRequest,
  EchoReply,
  ParamProblem,
  Udp,
  FragmentData,  // fragment with nonzero offset; body is opaque
  None,          // chain ended in NoNext or ran out of bytes
  Other,
};

struct ParsedPacket {
  Ipv6Header header;
  ExtHeaderChain chain;
  std::optional<FragmentHeader> fragment;
  UpperKind upper_kind{UpperKind::None};
  std::uint8_t upper_protocol{kProtoNoNext};
  Bytes upper_raw;  // everything after the chain, unparsed
  std::optional<Icmpv6Echo> echo;
  std::optional<Icmpv6ParamProblem> param_problem;
  std::optional<UdpDatagram> udp;
};

// Serializes header + chain + upper-layer bytes into one frame. Validates
// chain linkage (ChainBroken) and the 65535-byte payload ceiling (Oversize).
// header.payload_length is recomputed, never trusted.
Frame serialize_packet(const Ipv6Header& header, const ExtHeaderChain& chain,
                       std::span<const std::uint8_t> payload);

// Splits a packet into fragment frames per the geometry. The chain rides in
// every fragment as the unfragmentable part; the fragment header's
// next-header byte records the upper protocol. Specs with
// carries_upper_header take the first 8 bytes of `payload` as the upper
// header and fill the rest from their pattern; pattern-less specs slice
// `payload` directly. Link-layer encapsulation is the runner's concern.
std::vector<Frame> fragment_packet(const Ipv6Header& header,
                                   const ExtHeaderChain& chain,
                                   std::span<const std::uint8_t> payload,
                                   const std::vector<FragmentSpec>& geometry,
                                   std::uint32_t identification,
                                   checksum::Parity parity = checksum::Parity::Odd);

// Parses one frame back into structure. Unknown extension headers are
// recorded by kind and skipped by their declared length. For fragments with
// nonzero offset the walk stops at the fragment header and the body is kept
// opaque. Byte-level identity holds: serialize_packet(parsed pieces)
// reproduces the input frame.
ParsedPacket parse_frame(const Frame& frame);

// Re-serializes a parse result; inverse of parse_frame.
Frame serialize_parsed(const ParsedPacket& packet);

checksum::PseudoHeader pseudo_for(const Ipv6Header& header,
                                  std::uint32_t upper_len,
                                  std::uint8_t upper_proto);

}  // namespace frag6::wire
