#include "frag6/runner.hpp"

#include <cerrno>
#include <chrono>
#include <cstring>
#include <deque>
#include <fstream>
#include <thread>

#include <net/if.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include "frag6/checksum.hpp"
#include "frag6/oracle.hpp"
#include "frag6/scenarios.hpp"

#ifndef IPV6_HDRINCL
#define IPV6_HDRINCL 36
#endif

namespace frag6::runner {

std::string_view observed_name(ObservedClass c) {
  switch (c) {
    case ObservedClass::Silence: return "silence";
    case ObservedClass::OtherIcmp: return "other-icmp";
    case ObservedClass::ParamProblem: return "param-problem";
    case ObservedClass::EchoReply: return "echo-reply";
  }
  return "?";
}

ObservedClass observed_from_name(std::string_view name) {
  for (ObservedClass c : {ObservedClass::Silence, ObservedClass::OtherIcmp,
                          ObservedClass::ParamProblem, ObservedClass::EchoReply})
    if (observed_name(c) == name) return c;
  throw Error("unknown observed class: " + std::string(name));
}

namespace {

wire::Frame bare_icmpv6_frame(const wire::Ipv6Address& src,
                              const wire::Ipv6Address& dst, const Bytes& msg) {
  wire::Ipv6Header h;
  h.src = src;
  h.dst = dst;
  h.next_header = wire::kProtoIcmpv6;
  wire::ExtHeaderChain chain;
  chain.upper_protocol = wire::kProtoIcmpv6;
  return wire::serialize_packet(h, chain, msg);
}

class DryRunTransport final : public Transport {
 public:
  explicit DryRunTransport(const DryRunConfig& config) : cfg_(config) {}

  void start_capture() override { capture_ = true; }
  bool capture_started() const override { return capture_; }

  void send(const wire::Frame& frame) override {
    wire::ParsedPacket p;
    try {
      p = wire::parse_frame(frame);
    } catch (const Error&) {
      return;  // a real stack ignores garbage too
    }
    if (!p.fragment) {
      if (p.upper_kind == wire::UpperKind::EchoRequest && p.echo)
        reply_echo(p.header.src, p.header.dst, p.upper_raw);
      return;
    }
    const auto& fh = *p.fragment;
    if (cfg_.emulate_chain_check && fh.offset_units == 0 &&
        p.upper_raw.size() < wire::kUpperHeaderBytes)
      reply_param_problem(frame, p.header);

    const std::string key = p.header.src.to_string() + "|" +
                            p.header.dst.to_string() + "|" +
                            std::to_string(fh.identification);
    auto it = flows_.find(key);
    if (it == flows_.end())
      it = flows_
               .emplace(key,
                        Flow{reassembly::FragmentBuffer(fh.identification,
                                                        cfg_.policy),
                             p.header.src, p.header.dst})
               .first;
    Flow& flow = it->second;
    if (fh.offset_units == 0 && !flow.has_upper_proto) {
      flow.upper_proto = fh.next_header;
      flow.has_upper_proto = true;
    }
    wire::FragmentSpec spec;
    spec.label = '?';
    spec.offset_units = fh.offset_units;
    spec.length_units =
        static_cast<std::uint16_t>((p.upper_raw.size() + wire::kUnitBytes - 1) /
                                   wire::kUnitBytes);
    spec.m_flag = fh.m_flag;
    spec.carries_upper_header = fh.offset_units == 0 &&
                                p.upper_raw.size() >= wire::kUpperHeaderBytes;
    flow.buffer.insert(spec, p.upper_raw);
  }

  // Flows are judged here, once, after the caller has sent everything it
  // intends to send under an identification; the runner's send-all-then-poll
  // order guarantees that.
  std::optional<wire::Frame> poll(double) override {
    for (auto& [key, flow] : flows_) {
      if (flow.resolved) continue;
      flow.resolved = true;
      const auto outcome = flow.buffer.reassemble();
      const auto* done = std::get_if<reassembly::Complete>(&outcome);
      if (!done) continue;
      if (flow.upper_proto == wire::kProtoIcmpv6 &&
          done->payload.size() >= wire::kUpperHeaderBytes &&
          done->payload[0] == wire::kIcmpv6EchoRequest)
        reply_echo(flow.src, flow.dst, done->payload);
    }
    if (inbox_.empty()) return std::nullopt;
    wire::Frame f = std::move(inbox_.front());
    inbox_.pop_front();
    return f;
  }

 private:
  struct Flow {
    reassembly::FragmentBuffer buffer;
    wire::Ipv6Address src;
    wire::Ipv6Address dst;
    std::uint8_t upper_proto{wire::kProtoNoNext};
    bool has_upper_proto{false};
    bool resolved{false};
  };

  void reply_echo(const wire::Ipv6Address& req_src,
                  const wire::Ipv6Address& req_dst, const Bytes& msg) {
    auto echo = wire::Icmpv6Echo::parse(msg);
    echo.msg_type = wire::kIcmpv6EchoReply;
    echo.checksum = 0;
    wire::Ipv6Header h;
    h.src = req_dst;
    h.dst = req_src;
    const Bytes raw = echo.serialize();
    echo.checksum = checksum::internet_checksum(
        wire::pseudo_for(h, static_cast<std::uint32_t>(raw.size()),
                         wire::kProtoIcmpv6),
        raw);
    inbox_.push_back(bare_icmpv6_frame(req_dst, req_src, echo.serialize()));
  }

  void reply_param_problem(const wire::Frame& invoking,
                           const wire::Ipv6Header& req) {
    wire::Icmpv6ParamProblem pp;
    pp.code = wire::kParamProblemIncompleteChain;
    pp.pointer = wire::kIpv6HeaderBytes;  // the fragment header's first byte
    pp.invoking_packet = invoking.bytes;
    if (pp.invoking_packet.size() > 1232) pp.invoking_packet.resize(1232);
    wire::Ipv6Header h;
    h.src = req.dst;
    h.dst = req.src;
    const Bytes raw = pp.serialize();
    pp.checksum = checksum::internet_checksum(
        wire::pseudo_for(h, static_cast<std::uint32_t>(raw.size()),
                         wire::kProtoIcmpv6),
        raw);
    inbox_.push_back(bare_icmpv6_frame(req.dst, req.src, pp.serialize()));
  }

  DryRunConfig cfg_;
  bool capture_{false};
  std::map<std::string, Flow> flows_;
  std::deque<wire::Frame> inbox_;
};

class LiveTransport final : public Transport {
 public:
  explicit LiveTransport(const RunnerConfig& config)
      : source_(wire::Ipv6Address::from_string(config.source)),
        target_(wire::Ipv6Address::from_string(config.target)) {
    if (!config.iface.empty()) {
      scope_ = if_nametoindex(config.iface.c_str());
      if (scope_ == 0)
        throw SendFailure("unknown interface: " + config.iface);
    }
  }

  ~LiveTransport() override {
    if (send_fd_ >= 0) ::close(send_fd_);
    if (recv_fd_ >= 0) ::close(recv_fd_);
  }

  void start_capture() override {
    recv_fd_ = ::socket(AF_INET6, SOCK_RAW, IPPROTO_ICMPV6);
    if (recv_fd_ < 0) fail<CaptureFailure>("icmpv6 capture socket");
  }

  bool capture_started() const override { return recv_fd_ >= 0; }

  void send(const wire::Frame& frame) override {
    if (send_fd_ < 0) {
      send_fd_ = ::socket(AF_INET6, SOCK_RAW, IPPROTO_RAW);
      if (send_fd_ < 0) fail<SendFailure>("raw send socket");
      const int on = 1;
      if (::setsockopt(send_fd_, IPPROTO_IPV6, IPV6_HDRINCL, &on, sizeof on) < 0)
        fail<SendFailure>("IPV6_HDRINCL");
    }
    sockaddr_in6 dst{};
    dst.sin6_family = AF_INET6;
    std::memcpy(&dst.sin6_addr, target_.bytes.data(), target_.bytes.size());
    dst.sin6_scope_id = scope_;
    const auto n = ::sendto(send_fd_, frame.bytes.data(), frame.bytes.size(), 0,
                            reinterpret_cast<const sockaddr*>(&dst), sizeof dst);
    if (n < 0 || static_cast<std::size_t>(n) != frame.bytes.size())
      fail<SendFailure>("sendto");
  }

  std::optional<wire::Frame> poll(double timeout_s) override {
    if (recv_fd_ < 0) throw CaptureFailure("poll before start_capture");
    pollfd pfd{recv_fd_, POLLIN, 0};
    const int ms = timeout_s <= 0
                       ? 0
                       : static_cast<int>(std::min(timeout_s * 1000.0, 3.6e6));
    const int rc = ::poll(&pfd, 1, ms);
    if (rc < 0) fail<CaptureFailure>("poll");
    if (rc == 0) return std::nullopt;
    std::uint8_t buf[65536];
    sockaddr_in6 from{};
    socklen_t from_len = sizeof from;
    const auto n = ::recvfrom(recv_fd_, buf, sizeof buf, 0,
                              reinterpret_cast<sockaddr*>(&from), &from_len);
    if (n < 0) fail<CaptureFailure>("recvfrom");
    // Raw ICMPv6 sockets deliver the message without its IPv6 header; wrap
    // it back into a frame so classification sees one uniform shape.
    wire::Ipv6Address src;
    std::memcpy(src.bytes.data(), &from.sin6_addr, src.bytes.size());
    return bare_icmpv6_frame(src, source_,
                             Bytes(buf, buf + static_cast<std::size_t>(n)));
  }

 private:
  template <class E>
  [[noreturn]] static void fail(const std::string& what) {
    const int err = errno;
    const std::string text = what + ": " + std::strerror(err);
    if (err == EPERM || err == EACCES) throw PrivilegeRequired(text);
    throw E(text);
  }

  wire::Ipv6Address source_;
  wire::Ipv6Address target_;
  std::uint32_t scope_{0};
  int send_fd_{-1};
  int recv_fd_{-1};
};

void fold(Observed& best, const Observed& next) {
  if (static_cast<int>(next.cls) > static_cast<int>(best.cls)) best = next;
}

}  // namespace

std::unique_ptr<Transport> make_dry_run_transport(const DryRunConfig& config) {
  return std::make_unique<DryRunTransport>(config);
}

std::unique_ptr<Transport> make_live_transport(const RunnerConfig& config) {
  return std::make_unique<LiveTransport>(config);
}

RecordingTransport::RecordingTransport(Transport& inner,
                                       std::vector<pcap::Record>& records,
                                       std::uint64_t step_us)
    : inner_(inner), records_(records), step_us_(step_us) {}

void RecordingTransport::start_capture() { inner_.start_capture(); }

bool RecordingTransport::capture_started() const {
  return inner_.capture_started();
}

void RecordingTransport::send(const wire::Frame& frame) {
  records_.push_back({now_us_, frame});
  now_us_ += step_us_;
  inner_.send(frame);
}

std::optional<wire::Frame> RecordingTransport::poll(double timeout_s) {
  auto f = inner_.poll(timeout_s);
  if (f) {
    records_.push_back({now_us_, *f});
    now_us_ += 1;
  }
  return f;
}

std::vector<wire::Frame> materialize_case(const models::TestCase& c,
                                          const RunnerConfig& config) {
  const auto src = wire::Ipv6Address::from_string(config.source);
  const auto dst = wire::Ipv6Address::from_string(config.target);

  if (c.kind != models::CaseKind::Model) {
    scenarios::Rfc9099Params params;
    params.src = src;
    params.dst = dst;
    if (!c.identifications.empty()) params.identification = c.identifications[0];
    params.echo_identifier = kEchoIdentifier;
    const auto built = c.kind == models::CaseKind::Rfc9099Exp1
                           ? scenarios::rfc9099_experiment_one(params)
                           : scenarios::rfc9099_experiment_two(params);
    return built.frames;
  }

  const int packets =
      c.mode == models::Mode::MultiPacketDistinctIds ? c.repetitions : 1;
  const int replays = c.mode == models::Mode::RepeatSameId ? c.repetitions : 1;

  std::vector<wire::FragmentSpec> order;
  order.reserve(c.arrival_order.size());
  for (std::size_t i : c.arrival_order) order.push_back(c.model.specs.at(i));

  std::vector<wire::Frame> sequence;
  for (int pk = 0; pk < packets; ++pk) {
    const auto parity =
        pk % 2 == 0 ? checksum::Parity::Odd : checksum::Parity::Even;
    const std::uint32_t id =
        pk < static_cast<int>(c.identifications.size())
            ? c.identifications[pk]
            : 0x1000u + static_cast<std::uint32_t>(pk);

    const Bytes content = models::canonical_upper_payload(c.model, parity);
    wire::Icmpv6Echo echo;
    echo.identifier = kEchoIdentifier;
    echo.sequence = static_cast<std::uint16_t>(pk);
    echo.payload.assign(content.begin() + wire::kUpperHeaderBytes,
                        content.end());
    wire::Ipv6Header h;
    h.src = src;
    h.dst = dst;
    Bytes msg = echo.serialize();
    echo.checksum = checksum::internet_checksum(
        wire::pseudo_for(h, static_cast<std::uint32_t>(msg.size()),
                         wire::kProtoIcmpv6),
        msg);
    msg = echo.serialize();

    wire::ExtHeaderChain chain;
    chain.upper_protocol = wire::kProtoIcmpv6;
    const auto frames = wire::fragment_packet(h, chain, msg, order, id, parity);
    sequence.insert(sequence.end(), frames.begin(), frames.end());
  }

  std::vector<wire::Frame> out;
  out.reserve(sequence.size() * static_cast<std::size_t>(replays));
  for (int r = 0; r < replays; ++r)
    out.insert(out.end(), sequence.begin(), sequence.end());
  return out;
}

Observed classify_frame(const wire::Frame& frame,
                        const wire::Ipv6Address& target) {
  Observed obs;
  wire::ParsedPacket p;
  try {
    p = wire::parse_frame(frame);
  } catch (const Error&) {
    return obs;
  }
  if (p.header.src != target) return obs;
  if (p.upper_kind == wire::UpperKind::EchoReply && p.echo &&
      p.echo->identifier == kEchoIdentifier) {
    obs.cls = ObservedClass::EchoReply;
    obs.icmp_type = p.echo->msg_type;
    obs.icmp_code = p.echo->code;
  } else if (p.upper_kind == wire::UpperKind::ParamProblem && p.param_problem) {
    obs.cls = ObservedClass::ParamProblem;
    obs.icmp_type = wire::kIcmpv6ParamProblem;
    obs.icmp_code = p.param_problem->code;
  } else if (p.upper_protocol == wire::kProtoIcmpv6 && !p.upper_raw.empty()) {
    obs.cls = ObservedClass::OtherIcmp;
    obs.icmp_type = p.upper_raw[0];
    if (p.upper_raw.size() > 1) obs.icmp_code = p.upper_raw[1];
  }
  return obs;
}

TestResult run_case_with(Transport& transport, const models::TestCase& c,
                         const RunnerConfig& config) {
  if (!transport.capture_started()) transport.start_capture();

  const bool dry = config.dry_run.has_value();
  for (const auto& frame : materialize_case(c, config)) {
    transport.send(frame);
    if (!dry && config.inter_frame_delay_ms > 0)
      std::this_thread::sleep_for(
          std::chrono::milliseconds(config.inter_frame_delay_ms));
  }

  const auto target = wire::Ipv6Address::from_string(config.target);
  Observed best;
  if (dry) {
    while (auto f = transport.poll(0.0)) fold(best, classify_frame(*f, target));
  } else {
    const auto start = std::chrono::steady_clock::now();
    for (;;) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count();
      const double left = config.reply_timeout_s - elapsed;
      if (left <= 0) break;
      auto f = transport.poll(left);
      if (!f) break;
      fold(best, classify_frame(*f, target));
      if (best.cls == ObservedClass::EchoReply) break;
    }
  }

  TestResult result;
  result.case_id = c.case_id;
  result.kind = c.kind;
  result.model = c.model.name;
  result.mode = c.mode;
  result.observed = best;
  for (const auto& [policy, outcome] : reassembly::expected_outcomes(c))
    result.oracle.emplace(policy, reassembly::describe(outcome));
  return result;
}

TestResult run_case(const models::TestCase& c, const RunnerConfig& config) {
  const auto transport = config.dry_run ? make_dry_run_transport(*config.dry_run)
                                        : make_live_transport(config);
  return run_case_with(*transport, c, config);
}

std::vector<TestResult> run_campaign(const std::vector<models::TestCase>& cases,
                                     const RunnerConfig& config,
                                     std::ostream* progress) {
  const auto base = config.dry_run ? make_dry_run_transport(*config.dry_run)
                                   : make_live_transport(config);
  std::vector<pcap::Record> records;
  std::optional<RecordingTransport> recorder;
  Transport* transport = base.get();
  if (!config.pcap_path.empty()) {
    recorder.emplace(*base,
                     records,
                     static_cast<std::uint64_t>(config.inter_frame_delay_ms) *
                         1000);
    transport = &*recorder;
  }

  std::vector<TestResult> results;
  results.reserve(cases.size());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    results.push_back(run_case_with(*transport, cases[i], config));
    if (progress && ((i + 1) % 200 == 0 || i + 1 == cases.size()))
      *progress << (i + 1) << "/" << cases.size() << " cases\n";
  }

  if (!config.pcap_path.empty()) {
    std::ofstream out(config.pcap_path, std::ios::binary);
    if (!out)
      throw CaptureFailure("cannot open pcap path: " + config.pcap_path);
    pcap::write_capture(out, records);
  }
  return results;
}

}  // namespace frag6::runner
