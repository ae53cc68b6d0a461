#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "frag6/models.hpp"
#include "frag6/pcap.hpp"
#include "frag6/reassembly.hpp"
#include "frag6/wire.hpp"

namespace frag6::runner {

class SendFailure : public Error {
 public:
  using Error::Error;
};

class CaptureFailure : public Error {
 public:
  using Error::Error;
};

class PrivilegeRequired : public Error {
 public:
  using Error::Error;
};

// Echo identifier stamped into every campaign probe; replies are matched
// against it so unrelated traffic never counts as a response.
inline constexpr std::uint16_t kEchoIdentifier = 0x6f01;

enum class ObservedClass { Silence, OtherIcmp, ParamProblem, EchoReply };

std::string_view observed_name(ObservedClass c);
ObservedClass observed_from_name(std::string_view name);

struct Observed {
  ObservedClass cls{ObservedClass::Silence};
  std::optional<std::uint8_t> icmp_type;
  std::optional<std::uint8_t> icmp_code;

  bool operator==(const Observed&) const = default;
};

struct TestResult {
  std::string case_id;
  models::CaseKind kind{models::CaseKind::Model};
  models::ModelKind model{models::ModelKind::NewModel};
  models::Mode mode{models::Mode::Single};
  Observed observed;
  std::map<reassembly::Policy, std::string> oracle;  // policy -> describe()

  bool operator==(const TestResult&) const = default;
};

// The dry-run target is the reassembly simulator itself: it answers echo
// requests whose fragments reassemble to Complete under `policy`, and it
// deliberately skips upper-layer checksum verification so the observed
// reply bit equals the oracle's outcome class exactly. With
// emulate_chain_check set it additionally answers offset-0 fragments that
// lack their upper-layer header with parameter problem code 3.
struct DryRunConfig {
  reassembly::Policy policy{reassembly::Policy::Bsd};
  bool emulate_chain_check{false};
};

struct RunnerConfig {
  std::optional<DryRunConfig> dry_run;
  std::string target{"2001:db8::2"};
  std::string source{"2001:db8::1"};
  std::string iface;  // scope for link-local targets; empty for global
  int inter_frame_delay_ms{10};
  double reply_timeout_s{35.0};  // just past the 30 s reassembly timeout
  std::uint64_t seed{1};
  std::string pcap_path;  // empty: keep no capture file
};

// Frame I/O boundary; swapped out in tests and for dry runs. Every
// implementation must deliver frames sent after start_capture to poll.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void start_capture() = 0;
  virtual bool capture_started() const = 0;
  virtual void send(const wire::Frame& frame) = 0;
  // Next captured frame, or nullopt once `timeout_s` elapses. Dry-run
  // implementations never block.
  virtual std::optional<wire::Frame> poll(double timeout_s) = 0;
};

std::unique_ptr<Transport> make_dry_run_transport(const DryRunConfig& config);
// Raw sockets: needs CAP_NET_RAW, throws PrivilegeRequired without it.
std::unique_ptr<Transport> make_live_transport(const RunnerConfig& config);

// Records every frame passing through `inner` with synthetic timestamps
// advancing by the configured inter-frame delay.
class RecordingTransport final : public Transport {
 public:
  RecordingTransport(Transport& inner, std::vector<pcap::Record>& records,
                     std::uint64_t step_us);

  void start_capture() override;
  bool capture_started() const override;
  void send(const wire::Frame& frame) override;
  std::optional<wire::Frame> poll(double timeout_s) override;

 private:
  Transport& inner_;
  std::vector<pcap::Record>& records_;
  std::uint64_t step_us_;
  std::uint64_t now_us_{0};
};

// Frames for one campaign case in send order. Permutation cases become one
// echo request fragmented per the case's arrival order; repeat mode replays
// the identical sequence, multi-packet mode emits one packet per
// identification with pattern parity alternating odd, even, odd, ...
// The two chain probes delegate to the scenario builders.
std::vector<wire::Frame> materialize_case(const models::TestCase& c,
                                          const RunnerConfig& config);

Observed classify_frame(const wire::Frame& frame, const wire::Ipv6Address& target);

// Capture first, then send, then collect until an echo reply or the
// deadline. The per-policy oracle expectations ride along in the result.
TestResult run_case_with(Transport& transport, const models::TestCase& c,
                         const RunnerConfig& config);
TestResult run_case(const models::TestCase& c, const RunnerConfig& config);

std::vector<TestResult> run_campaign(const std::vector<models::TestCase>& cases,
                                     const RunnerConfig& config,
                                     std::ostream* progress = nullptr);

}  // namespace frag6::runner
