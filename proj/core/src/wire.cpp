#include "frag6/wire.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <cstring>

namespace frag6::wire {

namespace {

bool is_skippable_ext(std::uint8_t kind) {
  switch (kind) {
    case kProtoHopByHop:
    case kProtoRouting:
    case kProtoDestOptions:
    case 135:  // mobility
    case 139:  // HIP
    case 140:  // shim6
    case 253:
    case 254:
      return true;
    default:
      return false;
  }
}

}  // namespace

Ipv6Address Ipv6Address::from_string(const std::string& text) {
  Ipv6Address addr;
  if (inet_pton(AF_INET6, text.c_str(), addr.bytes.data()) != 1)
    throw Error("Ipv6Address: cannot parse '" + text + "'");
  return addr;
}

std::string Ipv6Address::to_string() const {
  char buf[INET6_ADDRSTRLEN] = {};
  if (!inet_ntop(AF_INET6, bytes.data(), buf, sizeof(buf)))
    throw Error("Ipv6Address: inet_ntop failed");
  return buf;
}

Bytes FragmentHeader::serialize() const {
  if (offset_units > kMaxOffsetUnits)
    throw OffsetOverflow("fragment offset exceeds 13 bits");
  Bytes out;
  out.reserve(kFragmentHeaderBytes);
  out.push_back(next_header);
  out.push_back(0);
  put_u16(out, static_cast<std::uint16_t>((offset_units << 3) | (m_flag ? 1 : 0)));
  put_u32(out, identification);
  return out;
}

FragmentHeader FragmentHeader::parse(std::span<const std::uint8_t> data) {
  if (data.size() < kFragmentHeaderBytes)
    throw Truncated("fragment header needs 8 bytes");
  FragmentHeader fh;
  fh.next_header = data[0];
  const std::uint16_t off_flags = read_u16(&data[2]);
  fh.offset_units = static_cast<std::uint16_t>(off_flags >> 3);
  fh.m_flag = (off_flags & 1) != 0;
  fh.identification = read_u32(&data[4]);
  return fh;
}

Bytes Icmpv6Echo::serialize() const {
  Bytes out;
  out.reserve(kUpperHeaderBytes + payload.size());
  out.push_back(msg_type);
  out.push_back(code);
  put_u16(out, checksum);
  put_u16(out, identifier);
  put_u16(out, sequence);
  append(out, payload);
  return out;
}

Icmpv6Echo Icmpv6Echo::parse(std::span<const std::uint8_t> data) {
  if (data.size() < kUpperHeaderBytes) throw Truncated("echo header needs 8 bytes");
  Icmpv6Echo e;
  e.msg_type = data[0];
  e.code = data[1];
  e.checksum = read_u16(&data[2]);
  e.identifier = read_u16(&data[4]);
  e.sequence = read_u16(&data[6]);
  e.payload.assign(data.begin() + kUpperHeaderBytes, data.end());
  return e;
}

Bytes Icmpv6ParamProblem::serialize() const {
  Bytes out;
  out.reserve(kUpperHeaderBytes + invoking_packet.size());
  out.push_back(kIcmpv6ParamProblem);
  out.push_back(code);
  put_u16(out, checksum);
  put_u32(out, pointer);
  append(out, invoking_packet);
  return out;
}

Icmpv6ParamProblem Icmpv6ParamProblem::parse(std::span<const std::uint8_t> data) {
  if (data.size() < kUpperHeaderBytes)
    throw Truncated("parameter problem header needs 8 bytes");
  Icmpv6ParamProblem p;
  p.code = data[1];
  p.checksum = read_u16(&data[2]);
  p.pointer = read_u32(&data[4]);
  p.invoking_packet.assign(data.begin() + kUpperHeaderBytes, data.end());
  return p;
}

Bytes UdpDatagram::serialize() const {
  const std::size_t total = kUpperHeaderBytes + payload.size();
  if (total > 0xffff) throw Oversize("UDP datagram exceeds 65535 bytes");
  Bytes out;
  out.reserve(total);
  put_u16(out, src_port);
  put_u16(out, dst_port);
  put_u16(out, static_cast<std::uint16_t>(total));
  put_u16(out, checksum);
  append(out, payload);
  return out;
}

UdpDatagram UdpDatagram::parse(std::span<const std::uint8_t> data) {
  if (data.size() < kUpperHeaderBytes) throw Truncated("UDP header needs 8 bytes");
  UdpDatagram u;
  u.src_port = read_u16(&data[0]);
  u.dst_port = read_u16(&data[2]);
  u.checksum = read_u16(&data[6]);
  u.payload.assign(data.begin() + kUpperHeaderBytes, data.end());
  return u;
}

std::size_t ExtHeaderChain::wire_size() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.raw.size();
  return n;
}

ExtHeader make_fragment_entry(const FragmentHeader& fh, std::uint8_t next) {
  FragmentHeader linked = fh;
  linked.next_header = next;
  return ExtHeader{kProtoFragment, linked.serialize()};
}

ExtHeader make_destination_options_entry(std::uint8_t next) {
  // Minimal 8-byte header: one PadN option covering the six option bytes.
  Bytes raw{next, 0, 1, 4, 0, 0, 0, 0};
  return ExtHeader{kProtoDestOptions, raw};
}

namespace {

void validate_chain(const Ipv6Header& header, const ExtHeaderChain& chain) {
  const std::uint8_t first =
      chain.entries.empty() ? chain.upper_protocol : chain.entries[0].kind;
  if (header.next_header != first)
    throw ChainBroken("IPv6 next-header does not point at the first chain entry");
  for (std::size_t i = 0; i < chain.entries.size(); ++i) {
    const auto& e = chain.entries[i];
    if (e.raw.empty()) throw MalformedChain("empty extension header");
    if (e.kind == kProtoFragment) {
      if (e.raw.size() != kFragmentHeaderBytes)
        throw MalformedChain("fragment header must be exactly 8 bytes");
    } else if (e.raw.size() % 8 != 0 || e.raw.size() < 8) {
      throw MalformedChain("extension header length not a multiple of 8");
    }
    const std::uint8_t expected =
        i + 1 < chain.entries.size() ? chain.entries[i + 1].kind
                                     : chain.upper_protocol;
    if (e.raw[0] != expected)
      throw ChainBroken("chain entry next-header does not point at successor");
  }
}

void serialize_ipv6_header(Bytes& out, const Ipv6Header& h, std::size_t payload_len) {
  if (payload_len > 0xffff) throw Oversize("payload length exceeds 65535");
  out.push_back(static_cast<std::uint8_t>(0x60 | (h.traffic_class >> 4)));
  out.push_back(static_cast<std::uint8_t>(((h.traffic_class & 0x0f) << 4) |
                                          ((h.flow_label >> 16) & 0x0f)));
  out.push_back(static_cast<std::uint8_t>((h.flow_label >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>(h.flow_label & 0xff));
  put_u16(out, static_cast<std::uint16_t>(payload_len));
  out.push_back(h.next_header);
  out.push_back(h.hop_limit);
  append(out, h.src.bytes);
  append(out, h.dst.bytes);
}

}  // namespace

Frame serialize_packet(const Ipv6Header& header, const ExtHeaderChain& chain,
                       std::span<const std::uint8_t> payload) {
  validate_chain(header, chain);
  const std::size_t payload_len = chain.wire_size() + payload.size();
  Frame frame;
  frame.bytes.reserve(kIpv6HeaderBytes + payload_len);
  serialize_ipv6_header(frame.bytes, header, payload_len);
  for (const auto& e : chain.entries) append(frame.bytes, e.raw);
  append(frame.bytes, payload);
  return frame;
}

std::vector<Frame> fragment_packet(const Ipv6Header& header,
                                   const ExtHeaderChain& chain,
                                   std::span<const std::uint8_t> payload,
                                   const std::vector<FragmentSpec>& geometry,
                                   std::uint32_t identification,
                                   checksum::Parity parity) {
  std::vector<Frame> frames;
  frames.reserve(geometry.size());

  // The chain rides unchanged in front of the fragment header; its last
  // entry is re-pointed at the fragment header.
  ExtHeaderChain per_fragment = chain;
  if (!per_fragment.entries.empty())
    per_fragment.entries.back().raw[0] = kProtoFragment;

  for (const auto& spec : geometry) {
    if (spec.offset_units > kMaxOffsetUnits)
      throw OffsetOverflow("fragment offset exceeds 13 bits");

    Bytes data;
    if (spec.pattern) {
      if (spec.carries_upper_header) {
        if (payload.size() < kUpperHeaderBytes)
          throw Truncated("payload too short for the upper-layer header");
        if (spec.length_units == 0)
          throw MalformedChain("header-carrying fragment needs at least one unit");
        append(data, payload.subspan(0, kUpperHeaderBytes));
        append(data, checksum::pattern_fill(*spec.pattern, parity,
                                            spec.length_units - 1));
      } else {
        data = checksum::pattern_fill(*spec.pattern, parity, spec.length_units);
      }
    } else {
      const std::size_t begin =
          static_cast<std::size_t>(spec.offset_units) * kUnitBytes;
      const std::size_t want =
          static_cast<std::size_t>(spec.length_units) * kUnitBytes;
      const std::size_t end = std::min(begin + want, payload.size());
      if (begin < end) data.assign(payload.begin() + begin, payload.begin() + end);
    }

    if (spec.m_flag && data.size() % kUnitBytes != 0)
      throw NonFinalUnaligned("non-final fragment body not a multiple of 8");

    FragmentHeader fh;
    fh.next_header = chain.upper_protocol;
    fh.offset_units = spec.offset_units;
    fh.m_flag = spec.m_flag;
    fh.identification = identification;

    ExtHeaderChain frag_chain = per_fragment;
    frag_chain.entries.push_back(ExtHeader{kProtoFragment, fh.serialize()});
    frag_chain.upper_protocol = chain.upper_protocol;

    Ipv6Header h = header;
    h.next_header = frag_chain.entries.front().kind;
    frames.push_back(serialize_packet(h, frag_chain, data));
  }
  return frames;
}

ParsedPacket parse_frame(const Frame& frame) {
  const Bytes& b = frame.bytes;
  if (b.size() < kIpv6HeaderBytes) throw Truncated("frame shorter than 40 bytes");
  if ((b[0] >> 4) != 6) throw MalformedChain("version nibble is not 6");

  ParsedPacket p;
  p.header.traffic_class =
      static_cast<std::uint8_t>(((b[0] & 0x0f) << 4) | (b[1] >> 4));
  p.header.flow_label = (static_cast<std::uint32_t>(b[1] & 0x0f) << 16) |
                        (static_cast<std::uint32_t>(b[2]) << 8) | b[3];
  p.header.payload_length = read_u16(&b[4]);
  p.header.next_header = b[6];
  p.header.hop_limit = b[7];
  std::memcpy(p.header.src.bytes.data(), &b[8], 16);
  std::memcpy(p.header.dst.bytes.data(), &b[24], 16);

  if (kIpv6HeaderBytes + p.header.payload_length != b.size())
    throw Truncated("payload length does not match frame size");

  std::size_t off = kIpv6HeaderBytes;
  std::uint8_t proto = p.header.next_header;
  bool opaque_body = false;

  while (true) {
    if (proto == kProtoFragment) {
      if (b.size() - off < kFragmentHeaderBytes)
        throw MalformedChain("fragment header runs past frame end");
      auto fh = FragmentHeader::parse(std::span(b).subspan(off, kFragmentHeaderBytes));
      p.chain.entries.push_back(
          ExtHeader{kProtoFragment, Bytes(b.begin() + off, b.begin() + off + 8)});
      p.fragment = fh;
      off += kFragmentHeaderBytes;
      proto = fh.next_header;
      if (fh.offset_units > 0) opaque_body = true;
      if (opaque_body) break;
      continue;
    }
    if (is_skippable_ext(proto)) {
      if (b.size() - off < 2) throw MalformedChain("extension header cut short");
      const std::size_t len = (static_cast<std::size_t>(b[off + 1]) + 1) * 8;
      if (b.size() - off < len)
        throw MalformedChain("extension header length runs past frame end");
      p.chain.entries.push_back(
          ExtHeader{proto, Bytes(b.begin() + off, b.begin() + off + len)});
      proto = b[off];
      off += len;
      continue;
    }
    break;
  }

  p.chain.upper_protocol = proto;
  p.upper_protocol = proto;
  p.upper_raw.assign(b.begin() + off, b.end());

  if (opaque_body) {
    p.upper_kind = UpperKind::FragmentData;
    return p;
  }

  switch (proto) {
    case kProtoIcmpv6: {
      if (p.upper_raw.size() < kUpperHeaderBytes) {
        p.upper_kind = UpperKind::None;
        break;
      }
      const std::uint8_t t = p.upper_raw[0];
      if (t == kIcmpv6EchoRequest || t == kIcmpv6EchoReply) {
        p.echo = Icmpv6Echo::parse(p.upper_raw);
        p.upper_kind = t == kIcmpv6EchoRequest ? UpperKind::EchoRequest
                                               : UpperKind::EchoReply;
      } else if (t == kIcmpv6ParamProblem) {
        p.param_problem = Icmpv6ParamProblem::parse(p.upper_raw);
        p.upper_kind = UpperKind::ParamProblem;
      } else {
        p.upper_kind = UpperKind::Other;
      }
      break;
    }
    case kProtoUdp:
      if (p.upper_raw.size() < kUpperHeaderBytes) {
        p.upper_kind = UpperKind::None;
        break;
      }
      p.udp = UdpDatagram::parse(p.upper_raw);
      p.upper_kind = UpperKind::Udp;
      break;
    case kProtoNoNext:
      p.upper_kind = UpperKind::None;
      break;
    default:
      p.upper_kind = p.upper_raw.empty() ? UpperKind::None : UpperKind::Other;
      break;
  }
  return p;
}

Frame serialize_parsed(const ParsedPacket& packet) {
  Ipv6Header h = packet.header;
  h.next_header = packet.chain.entries.empty() ? packet.chain.upper_protocol
                                               : packet.chain.entries[0].kind;
  return serialize_packet(h, packet.chain, packet.upper_raw);
}

checksum::PseudoHeader pseudo_for(const Ipv6Header& header,
                                  std::uint32_t upper_len,
                                  std::uint8_t upper_proto) {
  checksum::PseudoHeader ph;
  ph.src = header.src.bytes;
  ph.dst = header.dst.bytes;
  ph.upper_layer_length = upper_len;
  ph.next_header = upper_proto;
  return ph;
}

}  // namespace frag6::wire
