#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "frag6/checksum.hpp"
#include "frag6/reassembly.hpp"
#include "frag6/wire.hpp"

namespace frag6::scenarios {

class GeometryMismatch : public Error {
 public:
  using Error::Error;
};

// Probe targets default to the documentation prefix so golden frames are
// reproducible; the runner rewrites addresses for live sends.
struct Rfc9099Params {
  wire::Ipv6Address src = wire::Ipv6Address::from_string("2001:db8::1");
  wire::Ipv6Address dst = wire::Ipv6Address::from_string("2001:db8::2");
  std::uint32_t identification{0x90990001};
  std::uint16_t echo_identifier{0x6f01};
  std::uint16_t echo_sequence{1};
};

struct Rfc9099Case {
  std::string name;
  std::vector<wire::Frame> frames;
  std::vector<wire::FragmentSpec> geometry;  // reassembly view, 8-octet units
  std::uint32_t expected_extent_units{0};
};

// Echo request in three fragments where the last one smuggles a
// destination-options header inside its body and announces it via the
// fragment header's next-header byte. A stack that honours headers beyond
// the first fragment replies; silence is the compliant answer.
Rfc9099Case rfc9099_experiment_one(const Rfc9099Params& params = {});

// A zero-length first fragment whose next-header byte promises an upper
// header that is not there, followed by a well-formed echo request in two
// fragments under the same identification. Compliant stacks drop the bare
// fragment (optionally answering with parameter problem code 3) and must
// not let it satisfy reassembly.
Rfc9099Case rfc9099_experiment_two(const Rfc9099Params& params = {});

struct ChainAudit {
  bool ordered{true};            // recommended header order never reversed
  bool repetition_ok{true};      // each kind once, destination options twice
  bool complete_in_first{true};  // offset-0 fragment carries the upper header
  std::vector<std::string> findings;

  bool clean() const { return ordered && repetition_ok && complete_in_first; }
};

ChainAudit audit_header_chain(const wire::ParsedPacket& packet);
bool header_chain_complete(const wire::ParsedPacket& packet);

// True when some non-first fragment announces an extension header as its
// payload, i.e. the header chain continues outside the first fragment.
bool extension_headers_spread(const std::vector<wire::Frame>& frames);

// Spoofed overlap poking a third party's reassembly: one fragment claiming
// `span` (8-octet units) of the flow identified by (victim_src, target_dst,
// identification), filled with 'X' and M set so the buffer stays open.
wire::Frame dos_overlap_fragment(std::uint32_t identification,
                                 const wire::Ipv6Address& victim_src,
                                 const wire::Ipv6Address& target_dst,
                                 reassembly::UnitRange span);

enum class ForgeStrategy { Shuffle, DeltaCompensation };

struct ForgeOptions {
  std::uint64_t seed{1};
  Bytes replacement;      // DeltaCompensation: same-size substitute body
  std::size_t slot{0};    // even byte index sacrificed to compensation
};

struct ForgedFragment {
  wire::Frame frame;
  Bytes original_body;
  Bytes forged_body;
};

// Rewrites a non-first fragment's body without disturbing the upper-layer
// checksum: Shuffle permutes the body's 16-bit words, DeltaCompensation
// installs `replacement` and burns one word at `slot` to absorb the sum
// difference. The input must be a fragment with nonzero offset.
ForgedFragment forge_modification_fragment(const wire::Frame& original,
                                           ForgeStrategy strategy,
                                           const ForgeOptions& options = {});

// Where the spoofed fragment goes relative to the genuine one it displaces.
enum class Injection { Before, After };

struct SyslogSplit {
  std::string priority{"<43> "};     // facility 5, severity 3, with separator
  std::size_t first_text_bytes{51};  // keeps fragment 1 at eight whole units
  std::size_t second_text_bytes{56};
  std::uint16_t src_port{514};
  std::uint16_t dst_port{514};
  std::uint32_t identification{0x51510001};
};

// The authentication record whose source address the forgery rewrites.
std::string sample_log_message();

// One syslog datagram over UDP in three fragments; the second fragment
// holds exactly the client address and port portion of the message.
std::vector<wire::Frame> syslog_frames(const wire::Ipv6Address& src,
                                       const wire::Ipv6Address& dst,
                                       const SyslogSplit& split = {});

// The same flow with a forged copy of the second fragment injected before
// or after the genuine one. First-wins targets log the forged text while
// the UDP checksum still verifies.
std::vector<wire::Frame> syslog_attack_frames(const wire::Ipv6Address& src,
                                              const wire::Ipv6Address& dst,
                                              ForgeStrategy strategy,
                                              const ForgeOptions& options = {},
                                              Injection injection = Injection::Before,
                                              const SyslogSplit& split = {});

}  // namespace frag6::scenarios
