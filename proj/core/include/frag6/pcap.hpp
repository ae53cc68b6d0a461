#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "frag6/wire.hpp"

namespace frag6::pcap {

// Classic pcap, linktype LINKTYPE_RAW (101): records start directly at the
// IPv6 header, no link-layer framing.
inline constexpr std::uint32_t kMagic = 0xa1b2c3d4;
inline constexpr std::uint32_t kLinktypeRaw = 101;
inline constexpr std::uint32_t kSnaplen = 65535;

struct Record {
  std::uint64_t timestamp_us{0};
  wire::Frame frame;
};

void write_header(std::ostream& out);
void write_record(std::ostream& out, const Record& record);
void write_capture(std::ostream& out, const std::vector<Record>& records);

}  // namespace frag6::pcap
