#include <cstdint>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "frag6/checksum.hpp"
#include "frag6/models.hpp"
#include "frag6/oracle.hpp"
#include "frag6/pcap.hpp"
#include "frag6/reassembly.hpp"
#include "frag6/runner.hpp"
#include "frag6/scenarios.hpp"
#include "frag6/wire.hpp"

using namespace frag6;
using runner::ObservedClass;

namespace {

wire::Ipv6Address addr(const char* s) { return wire::Ipv6Address::from_string(s); }

runner::RunnerConfig dry_config(reassembly::Policy policy,
                                bool emulate_chain_check = false) {
  runner::RunnerConfig cfg;
  cfg.dry_run = runner::DryRunConfig{policy, emulate_chain_check};
  cfg.inter_frame_delay_ms = 0;
  return cfg;
}

models::TestCase in_order_case(models::OverlapModel model) {
  models::TestCase c;
  c.case_id = "unit-in-order";
  c.kind = models::CaseKind::Model;
  c.model = std::move(model);
  c.arrival_order = {0, 1, 2, 3, 4, 5};
  c.mode = models::Mode::Single;
  c.repetitions = 1;
  c.identifications = {0xabcd0001u};
  return c;
}

// Scripted stand-in for the wire: sends are recorded, polls drain a
// preloaded inbox, and every call leaves a trace for ordering checks.
class FakeTransport final : public runner::Transport {
 public:
  void start_capture() override {
    events.push_back("capture");
    started_ = true;
  }
  bool capture_started() const override { return started_; }
  void send(const wire::Frame& frame) override {
    events.push_back("send");
    sent.push_back(frame);
  }
  std::optional<wire::Frame> poll(double) override {
    events.push_back("poll");
    if (inbox.empty()) return std::nullopt;
    auto f = inbox.front();
    inbox.pop_front();
    return f;
  }

  std::vector<std::string> events;
  std::vector<wire::Frame> sent;
  std::deque<wire::Frame> inbox;

 private:
  bool started_ = false;
};

wire::Frame icmp_frame(const wire::Ipv6Address& src, const wire::Ipv6Address& dst,
                       const wire::Icmpv6Echo& echo) {
  wire::Ipv6Header h;
  h.src = src;
  h.dst = dst;
  wire::ExtHeaderChain chain;
  chain.upper_protocol = wire::kProtoIcmpv6;
  wire::Icmpv6Echo e = echo;
  Bytes msg = e.serialize();
  e.checksum = checksum::internet_checksum(
      wire::pseudo_for(h, static_cast<std::uint32_t>(msg.size()),
                       wire::kProtoIcmpv6),
      msg);
  return {wire::serialize_packet(h, chain, e.serialize())};
}

wire::Frame param_problem_frame(const wire::Ipv6Address& src,
                                const wire::Ipv6Address& dst,
                                std::uint8_t code) {
  wire::Ipv6Header h;
  h.src = src;
  h.dst = dst;
  wire::ExtHeaderChain chain;
  chain.upper_protocol = wire::kProtoIcmpv6;
  wire::Icmpv6ParamProblem pp;
  pp.code = code;
  pp.pointer = 40;
  pp.invoking_packet = Bytes(4, 0xee);
  Bytes msg = pp.serialize();
  pp.checksum = checksum::internet_checksum(
      wire::pseudo_for(h, static_cast<std::uint32_t>(msg.size()),
                       wire::kProtoIcmpv6),
      msg);
  return {wire::serialize_packet(h, chain, pp.serialize())};
}

}  // namespace

TEST_CASE("observed class names round-trip") {
  CHECK(runner::observed_name(ObservedClass::Silence) == "silence");
  CHECK(runner::observed_name(ObservedClass::OtherIcmp) == "other-icmp");
  CHECK(runner::observed_name(ObservedClass::ParamProblem) == "param-problem");
  CHECK(runner::observed_name(ObservedClass::EchoReply) == "echo-reply");
  for (auto c : {ObservedClass::Silence, ObservedClass::OtherIcmp,
                 ObservedClass::ParamProblem, ObservedClass::EchoReply})
    CHECK(runner::observed_from_name(runner::observed_name(c)) == c);
  CHECK_THROWS_AS(runner::observed_from_name("loud"), Error);
}

TEST_CASE("single mode materializes one fragmented echo request") {
  const auto c = in_order_case(models::new_model());
  runner::RunnerConfig cfg;
  const auto frames = runner::materialize_case(c, cfg);
  REQUIRE(frames.size() == 6);

  const std::uint16_t expect_offset[] = {0, 4, 6, 3, 6, 9};
  const bool expect_m[] = {true, true, true, true, true, false};
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto p = wire::parse_frame(frames[i]);
    REQUIRE(p.fragment.has_value());
    CHECK(p.fragment->offset_units == expect_offset[i]);
    CHECK(p.fragment->m_flag == expect_m[i]);
    CHECK(p.fragment->identification == 0xabcd0001u);
    CHECK(p.header.src == addr("2001:db8::1"));
    CHECK(p.header.dst == addr("2001:db8::2"));
  }

  const auto first = wire::parse_frame(frames[0]);
  REQUIRE(first.upper_kind == wire::UpperKind::EchoRequest);
  REQUIRE(first.echo.has_value());
  CHECK(first.echo->identifier == runner::kEchoIdentifier);
  CHECK(first.echo->sequence == 0);

  // B carries no header: its body is pure odd-parity pattern fill.
  const auto second = wire::parse_frame(frames[1]);
  CHECK(second.upper_kind == wire::UpperKind::FragmentData);
  CHECK(second.upper_raw == checksum::pattern_fill('B', checksum::Parity::Odd, 2));
}

TEST_CASE("materialized echo survives reassembly with a valid checksum") {
  const auto c = in_order_case(models::new_model());
  runner::RunnerConfig cfg;
  const auto frames = runner::materialize_case(c, cfg);

  reassembly::FragmentBuffer buf(0xabcd0001u, reassembly::Policy::First);
  for (const auto& f : frames) {
    const auto p = wire::parse_frame(f);
    wire::FragmentSpec spec;
    spec.offset_units = p.fragment->offset_units;
    spec.length_units =
        static_cast<std::uint16_t>((p.upper_raw.size() + 7) / 8);
    spec.m_flag = p.fragment->m_flag;
    spec.carries_upper_header =
        p.fragment->offset_units == 0 && p.upper_raw.size() >= 8;
    buf.insert(spec, p.upper_raw);
  }
  const auto outcome = buf.reassemble();
  REQUIRE(std::holds_alternative<reassembly::Complete>(outcome));
  const auto& done = std::get<reassembly::Complete>(outcome);
  REQUIRE(done.payload.size() == 96);

  // Bytes past the echo header match the canonical odd-parity content.
  const auto canon =
      models::canonical_upper_payload(c.model, checksum::Parity::Odd);
  REQUIRE(canon.size() == 96);
  for (std::size_t i = 8; i < canon.size(); ++i)
    CHECK(done.payload[i] == canon[i]);

  wire::Ipv6Header h;
  h.src = addr("2001:db8::1");
  h.dst = addr("2001:db8::2");
  const auto pseudo = wire::pseudo_for(
      h, static_cast<std::uint32_t>(done.payload.size()), wire::kProtoIcmpv6);
  CHECK(checksum::internet_checksum(pseudo, done.payload) == 0);
}

TEST_CASE("repeat mode replays the identical frame sequence") {
  auto c = in_order_case(models::new_model());
  c.mode = models::Mode::RepeatSameId;
  c.repetitions = 5;
  runner::RunnerConfig cfg;
  const auto frames = runner::materialize_case(c, cfg);
  REQUIRE(frames.size() == 30);
  for (std::size_t i = 0; i < frames.size(); ++i)
    CHECK(frames[i].bytes == frames[i % 6].bytes);
}

TEST_CASE("multi-packet mode walks identifications and alternates parity") {
  auto c = in_order_case(models::new_model());
  c.mode = models::Mode::MultiPacketDistinctIds;
  c.repetitions = 5;
  c.identifications = {10, 20, 30, 40, 50};
  runner::RunnerConfig cfg;
  const auto frames = runner::materialize_case(c, cfg);
  REQUIRE(frames.size() == 30);

  for (int pk = 0; pk < 5; ++pk) {
    const std::size_t base = static_cast<std::size_t>(pk) * 6;
    for (std::size_t i = 0; i < 6; ++i) {
      const auto p = wire::parse_frame(frames[base + i]);
      CHECK(p.fragment->identification == c.identifications[pk]);
    }
    const auto first = wire::parse_frame(frames[base]);
    CHECK(first.echo->sequence == pk);

    const auto parity =
        pk % 2 == 0 ? checksum::Parity::Odd : checksum::Parity::Even;
    const auto d = wire::parse_frame(frames[base + 3]);
    CHECK(d.upper_raw == checksum::pattern_fill('D', parity, 4));
  }

  // Adjacent packets carry different pattern bytes, not copies.
  CHECK(frames[3].bytes != frames[9].bytes);

  SUBCASE("missing identifications fall back to a fixed base") {
    c.identifications.clear();
    const auto fallback = runner::materialize_case(c, cfg);
    for (int pk = 0; pk < 5; ++pk) {
      const auto p = wire::parse_frame(fallback[static_cast<std::size_t>(pk) * 6]);
      CHECK(p.fragment->identification == 0x1000u + static_cast<std::uint32_t>(pk));
    }
  }
}

TEST_CASE("chain probe cases delegate to the scenario builders") {
  runner::RunnerConfig cfg;
  scenarios::Rfc9099Params params;
  params.src = addr(cfg.source.c_str());
  params.dst = addr(cfg.target.c_str());
  params.identification = 0x31337001;
  params.echo_identifier = runner::kEchoIdentifier;

  models::TestCase c;
  c.case_id = "probe";
  c.kind = models::CaseKind::Rfc9099Exp1;
  c.identifications = {0x31337001};

  auto frames = runner::materialize_case(c, cfg);
  auto built = scenarios::rfc9099_experiment_one(params);
  REQUIRE(frames.size() == built.frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i)
    CHECK(frames[i].bytes == built.frames[i].bytes);

  c.kind = models::CaseKind::Rfc9099Exp2;
  frames = runner::materialize_case(c, cfg);
  built = scenarios::rfc9099_experiment_two(params);
  REQUIRE(frames.size() == built.frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i)
    CHECK(frames[i].bytes == built.frames[i].bytes);
}

TEST_CASE("classify_frame maps reply species and ignores strangers") {
  const auto target = addr("2001:db8::2");
  const auto self = addr("2001:db8::1");

  wire::Icmpv6Echo reply;
  reply.msg_type = wire::kIcmpv6EchoReply;
  reply.identifier = runner::kEchoIdentifier;
  reply.sequence = 7;

  SUBCASE("echo reply with our identifier") {
    const auto obs = runner::classify_frame(icmp_frame(target, self, reply), target);
    CHECK(obs.cls == ObservedClass::EchoReply);
    CHECK(obs.icmp_type == wire::kIcmpv6EchoReply);
    CHECK(obs.icmp_code == 0);
  }
  SUBCASE("echo reply with a foreign identifier is merely other traffic") {
    reply.identifier = 0x1111;
    const auto obs = runner::classify_frame(icmp_frame(target, self, reply), target);
    CHECK(obs.cls == ObservedClass::OtherIcmp);
    CHECK(obs.icmp_type == wire::kIcmpv6EchoReply);
  }
  SUBCASE("parameter problem surfaces its code") {
    const auto obs =
        runner::classify_frame(param_problem_frame(target, self, 3), target);
    CHECK(obs.cls == ObservedClass::ParamProblem);
    CHECK(obs.icmp_type == wire::kIcmpv6ParamProblem);
    CHECK(obs.icmp_code == 3);
  }
  SUBCASE("frames from other sources never count") {
    const auto stranger = addr("2001:db8::99");
    const auto obs =
        runner::classify_frame(icmp_frame(stranger, self, reply), target);
    CHECK(obs.cls == ObservedClass::Silence);
  }
  SUBCASE("unparseable frames are silence") {
    wire::Frame junk;
    junk.bytes = {0x01, 0x02, 0x03};
    CHECK(runner::classify_frame(junk, target).cls == ObservedClass::Silence);
  }
  SUBCASE("an echo request reflected back is other traffic") {
    reply.msg_type = wire::kIcmpv6EchoRequest;
    const auto obs = runner::classify_frame(icmp_frame(target, self, reply), target);
    CHECK(obs.cls == ObservedClass::OtherIcmp);
    CHECK(obs.icmp_type == wire::kIcmpv6EchoRequest);
  }
}

TEST_CASE("run_case_with captures before sending and drains the inbox") {
  const auto c = in_order_case(models::new_model());
  auto cfg = dry_config(reassembly::Policy::First);
  const auto target = addr(cfg.target.c_str());
  const auto self = addr(cfg.source.c_str());

  wire::Icmpv6Echo reply;
  reply.msg_type = wire::kIcmpv6EchoReply;
  reply.identifier = runner::kEchoIdentifier;

  FakeTransport fake;
  fake.inbox.push_back(param_problem_frame(target, self, 0));
  fake.inbox.push_back(icmp_frame(target, self, reply));

  const auto result = runner::run_case_with(fake, c, cfg);

  REQUIRE(fake.events.size() >= 8);
  CHECK(fake.events[0] == "capture");
  for (std::size_t i = 1; i <= 6; ++i) CHECK(fake.events[i] == "send");
  CHECK(fake.capture_started());

  const auto expect = runner::materialize_case(c, cfg);
  REQUIRE(fake.sent.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i)
    CHECK(fake.sent[i].bytes == expect[i].bytes);

  // The reply arrived after weaker evidence; the fold keeps the stronger.
  CHECK(result.observed.cls == ObservedClass::EchoReply);
  CHECK(fake.inbox.empty());

  CHECK(result.case_id == c.case_id);
  CHECK(result.kind == c.kind);
  CHECK(result.model == models::ModelKind::NewModel);
  CHECK(result.mode == models::Mode::Single);
  REQUIRE(result.oracle.size() == 8);
  CHECK(result.oracle.at(reassembly::Policy::FragFirstWins) ==
        "complete:AAABBCCCFFF");
  for (const auto& [policy, outcome] : reassembly::expected_outcomes(c))
    CHECK(result.oracle.at(policy) == reassembly::describe(outcome));
}

TEST_CASE("observation folding keeps the strongest evidence") {
  const auto c = in_order_case(models::new_model());
  auto cfg = dry_config(reassembly::Policy::First);
  const auto target = addr(cfg.target.c_str());
  const auto self = addr(cfg.source.c_str());

  wire::Icmpv6Echo foreign;
  foreign.msg_type = wire::kIcmpv6EchoReply;
  foreign.identifier = 0x2222;

  FakeTransport fake;
  fake.inbox.push_back(icmp_frame(target, self, foreign));
  fake.inbox.push_back(param_problem_frame(target, self, 3));

  const auto result = runner::run_case_with(fake, c, cfg);
  CHECK(result.observed.cls == ObservedClass::ParamProblem);
  CHECK(result.observed.icmp_code == 3);
}

TEST_CASE("live collection stops at the first echo reply") {
  const auto c = in_order_case(models::new_model());
  runner::RunnerConfig cfg;
  cfg.inter_frame_delay_ms = 0;
  cfg.reply_timeout_s = 5.0;
  const auto target = addr(cfg.target.c_str());
  const auto self = addr(cfg.source.c_str());

  wire::Icmpv6Echo reply;
  reply.msg_type = wire::kIcmpv6EchoReply;
  reply.identifier = runner::kEchoIdentifier;

  FakeTransport fake;
  fake.inbox.push_back(icmp_frame(target, self, reply));
  fake.inbox.push_back(param_problem_frame(target, self, 0));

  const auto result = runner::run_case_with(fake, c, cfg);
  CHECK(result.observed.cls == ObservedClass::EchoReply);
  CHECK(fake.inbox.size() == 1);

  SUBCASE("an empty capture is silence") {
    FakeTransport quiet;
    const auto r = runner::run_case_with(quiet, c, cfg);
    CHECK(r.observed.cls == ObservedClass::Silence);
  }
}

TEST_CASE("dry-run transport answers cases that reassemble complete") {
  const auto cfg_ffw = dry_config(reassembly::Policy::FragFirstWins);

  const auto fresh = runner::run_case(in_order_case(models::new_model()),
                                      cfg_ffw);
  CHECK(fresh.observed.cls == ObservedClass::EchoReply);

  const auto legacy = runner::run_case(
      in_order_case(models::shankar_paxson_model()), cfg_ffw);
  CHECK(legacy.observed.cls == ObservedClass::Silence);

  // Byte-based policies complete either model.
  const auto byte_based = runner::run_case(
      in_order_case(models::shankar_paxson_model()), dry_config(reassembly::Policy::Bsd));
  CHECK(byte_based.observed.cls == ObservedClass::EchoReply);
}

TEST_CASE("dry-run transport replies to plain echo requests at once") {
  auto transport = runner::make_dry_run_transport({reassembly::Policy::Bsd, false});
  transport->start_capture();

  wire::Icmpv6Echo ping;
  ping.msg_type = wire::kIcmpv6EchoRequest;
  ping.identifier = runner::kEchoIdentifier;
  ping.sequence = 3;
  ping.payload = Bytes(12, 0x5a);
  transport->send(icmp_frame(addr("2001:db8::1"), addr("2001:db8::2"), ping));

  auto f = transport->poll(0.0);
  REQUIRE(f.has_value());
  const auto obs = runner::classify_frame(*f, addr("2001:db8::2"));
  CHECK(obs.cls == ObservedClass::EchoReply);

  const auto p = wire::parse_frame(*f);
  CHECK(p.header.dst == addr("2001:db8::1"));
  CHECK(p.echo->sequence == 3);
  CHECK(p.echo->payload == ping.payload);
  CHECK(transport->poll(0.0) == std::nullopt);
}

TEST_CASE("dry-run chain emulation answers bare first fragments") {
  scenarios::Rfc9099Params params;
  params.src = addr("2001:db8::1");
  params.dst = addr("2001:db8::2");
  const auto built = scenarios::rfc9099_experiment_two(params);
  const auto& bare = built.frames[0];

  SUBCASE("with emulation on") {
    auto transport =
        runner::make_dry_run_transport({reassembly::Policy::Bsd, true});
    transport->start_capture();
    transport->send(bare);
    auto f = transport->poll(0.0);
    REQUIRE(f.has_value());
    const auto obs = runner::classify_frame(*f, params.dst);
    CHECK(obs.cls == ObservedClass::ParamProblem);
    CHECK(obs.icmp_code == 3);
    const auto p = wire::parse_frame(*f);
    CHECK(p.param_problem->pointer == 40);
    CHECK(p.param_problem->invoking_packet == bare.bytes);
  }
  SUBCASE("with emulation off the bare fragment is ignored") {
    auto transport =
        runner::make_dry_run_transport({reassembly::Policy::Bsd, false});
    transport->start_capture();
    transport->send(bare);
    CHECK(transport->poll(0.0) == std::nullopt);
  }
}

TEST_CASE("dry-run flows are judged once, after everything arrived") {
  wire::Ipv6Header h;
  h.src = addr("2001:db8::1");
  h.dst = addr("2001:db8::2");
  wire::ExtHeaderChain chain;
  chain.upper_protocol = wire::kProtoIcmpv6;

  wire::Icmpv6Echo echo;
  echo.identifier = runner::kEchoIdentifier;
  echo.payload = Bytes(16, 0x41);
  Bytes msg = echo.serialize();
  echo.checksum = checksum::internet_checksum(
      wire::pseudo_for(h, static_cast<std::uint32_t>(msg.size()),
                       wire::kProtoIcmpv6),
      msg);
  msg = echo.serialize();

  const wire::FragmentSpec head{'A', 0, 1, true, true, std::nullopt};
  const wire::FragmentSpec tail{'B', 1, 2, false, false, std::nullopt};
  const wire::FragmentSpec cover{'C', 0, 2, true, true, std::nullopt};
  const std::uint32_t id = 0x0ddba11;

  SUBCASE("a complete pair answers") {
    auto transport = runner::make_dry_run_transport(
        {reassembly::Policy::FragLastWins, false});
    transport->start_capture();
    for (const auto& f : wire::fragment_packet(h, chain, msg, {head, tail}, id,
                                               checksum::Parity::Odd))
      transport->send(f);
    auto f = transport->poll(0.0);
    REQUIRE(f.has_value());
    CHECK(runner::classify_frame(*f, h.dst).cls == ObservedClass::EchoReply);
  }

  SUBCASE("a later eviction of the final fragment silences the flow") {
    auto transport = runner::make_dry_run_transport(
        {reassembly::Policy::FragLastWins, false});
    transport->start_capture();
    for (const auto& f : wire::fragment_packet(h, chain, msg, {head, tail}, id,
                                               checksum::Parity::Odd))
      transport->send(f);
    // Transiently complete; the covering M=1 fragment evicts both pieces.
    for (const auto& f : wire::fragment_packet(h, chain, msg, {cover}, id,
                                               checksum::Parity::Odd))
      transport->send(f);
    CHECK(transport->poll(0.0) == std::nullopt);
  }
}

TEST_CASE("dry-run target skips upper-layer checksum verification") {
  wire::Ipv6Header h;
  h.src = addr("2001:db8::1");
  h.dst = addr("2001:db8::2");
  wire::ExtHeaderChain chain;
  chain.upper_protocol = wire::kProtoIcmpv6;

  wire::Icmpv6Echo echo;
  echo.identifier = runner::kEchoIdentifier;
  echo.checksum = 0xdead;  // wrong on purpose
  echo.payload = Bytes(8, 0x42);
  const Bytes msg = echo.serialize();

  auto transport = runner::make_dry_run_transport({reassembly::Policy::First, false});
  transport->start_capture();
  for (const auto& f : wire::fragment_packet(
           h, chain, msg,
           {{'A', 0, 1, true, true, std::nullopt}, {'B', 1, 1, false, false, std::nullopt}},
           0x7777, checksum::Parity::Odd))
    transport->send(f);

  auto f = transport->poll(0.0);
  REQUIRE(f.has_value());
  CHECK(runner::classify_frame(*f, h.dst).cls == ObservedClass::EchoReply);
}

TEST_CASE("recording transport stamps synthetic timestamps") {
  FakeTransport inner;
  wire::Icmpv6Echo reply;
  reply.msg_type = wire::kIcmpv6EchoReply;
  reply.identifier = runner::kEchoIdentifier;
  const auto reply_frame =
      icmp_frame(addr("2001:db8::2"), addr("2001:db8::1"), reply);
  inner.inbox.push_back(reply_frame);

  std::vector<pcap::Record> records;
  runner::RecordingTransport rt(inner, records, 10);

  rt.start_capture();
  CHECK(rt.capture_started());
  CHECK(inner.capture_started());

  wire::Frame a{Bytes(40, 0x01)};
  wire::Frame b{Bytes(48, 0x02)};
  rt.send(a);
  rt.send(b);
  auto f = rt.poll(0.0);
  REQUIRE(f.has_value());
  CHECK(f->bytes == reply_frame.bytes);
  CHECK(rt.poll(0.0) == std::nullopt);

  REQUIRE(records.size() == 3);
  CHECK(records[0].timestamp_us == 0);
  CHECK(records[0].frame.bytes == a.bytes);
  CHECK(records[1].timestamp_us == 10);
  CHECK(records[1].frame.bytes == b.bytes);
  CHECK(records[2].timestamp_us == 20);
  CHECK(records[2].frame.bytes == reply_frame.bytes);
}

TEST_CASE("pcap writer emits classic little-endian captures") {
  std::vector<pcap::Record> records;
  records.push_back({1500000, wire::Frame{Bytes{0xaa, 0xbb, 0xcc}}});
  records.push_back({2000001, wire::Frame{Bytes{0x11}}});

  std::ostringstream out;
  pcap::write_capture(out, records);
  const std::string bytes = out.str();
  REQUIRE(bytes.size() == 24 + (16 + 3) + (16 + 1));

  const auto u8 = [&](std::size_t i) {
    return static_cast<std::uint8_t>(bytes[i]);
  };
  const auto u32 = [&](std::size_t i) {
    return static_cast<std::uint32_t>(u8(i)) |
           static_cast<std::uint32_t>(u8(i + 1)) << 8 |
           static_cast<std::uint32_t>(u8(i + 2)) << 16 |
           static_cast<std::uint32_t>(u8(i + 3)) << 24;
  };

  CHECK(u32(0) == pcap::kMagic);
  CHECK(u8(0) == 0xd4);
  CHECK(u8(3) == 0xa1);
  CHECK(u8(4) == 2);   // major
  CHECK(u8(6) == 4);   // minor
  CHECK(u32(16) == pcap::kSnaplen);
  CHECK(u32(20) == pcap::kLinktypeRaw);

  CHECK(u32(24) == 1);        // seconds
  CHECK(u32(28) == 500000);   // microseconds
  CHECK(u32(32) == 3);        // caplen
  CHECK(u32(36) == 3);        // origlen
  CHECK(u8(40) == 0xaa);
  CHECK(u8(42) == 0xcc);

  CHECK(u32(43) == 2);
  CHECK(u32(47) == 1);
  CHECK(u32(51) == 1);
  CHECK(u8(59) == 0x11);
}

TEST_CASE("run_campaign records every frame into the capture file") {
  const std::string path = "runner_campaign_test.pcap";
  std::remove(path.c_str());

  auto cfg = dry_config(reassembly::Policy::FragFirstWins);
  cfg.pcap_path = path;

  std::vector<models::TestCase> cases;
  cases.push_back(in_order_case(models::new_model()));

  std::ostringstream progress;
  const auto results = runner::run_campaign(cases, cfg, &progress);
  REQUIRE(results.size() == 1);
  CHECK(results[0].observed.cls == ObservedClass::EchoReply);

  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  REQUIRE(raw.size() > 24);

  const auto u32 = [&](std::size_t i) {
    return static_cast<std::uint32_t>(static_cast<std::uint8_t>(raw[i])) |
           static_cast<std::uint32_t>(static_cast<std::uint8_t>(raw[i + 1])) << 8 |
           static_cast<std::uint32_t>(static_cast<std::uint8_t>(raw[i + 2])) << 16 |
           static_cast<std::uint32_t>(static_cast<std::uint8_t>(raw[i + 3])) << 24;
  };
  CHECK(u32(0) == pcap::kMagic);
  CHECK(u32(20) == pcap::kLinktypeRaw);

  // Six probe fragments out, one echo reply back.
  std::size_t offset = 24;
  std::size_t count = 0;
  std::uint64_t last_ts = 0;
  while (offset + 16 <= raw.size()) {
    const std::uint64_t ts =
        static_cast<std::uint64_t>(u32(offset)) * 1000000 + u32(offset + 4);
    CHECK(ts >= last_ts);
    last_ts = ts;
    const auto caplen = u32(offset + 8);
    CHECK(u32(offset + 12) == caplen);
    offset += 16 + caplen;
    ++count;
  }
  CHECK(offset == raw.size());
  CHECK(count == 7);

  const auto sent = runner::materialize_case(cases[0], cfg);
  const auto first_len = u32(32);
  CHECK(first_len == sent[0].bytes.size());
  CHECK(std::equal(sent[0].bytes.begin(), sent[0].bytes.end(),
                   raw.begin() + 40,
                   [](std::uint8_t x, char y) {
                     return x == static_cast<std::uint8_t>(y);
                   }));

  std::remove(path.c_str());
}
