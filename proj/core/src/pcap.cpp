#include "frag6/pcap.hpp"

#include <ostream>

#include "frag6/bytes.hpp"

namespace frag6::pcap {

namespace {

void put_u32le(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void put_u16le(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void write_bytes(std::ostream& out, const Bytes& b) {
  out.write(reinterpret_cast<const char*>(b.data()),
            static_cast<std::streamsize>(b.size()));
}

}  // namespace

void write_header(std::ostream& out) {
  Bytes b;
  put_u32le(b, kMagic);
  put_u16le(b, 2);  // version 2.4
  put_u16le(b, 4);
  put_u32le(b, 0);  // thiszone
  put_u32le(b, 0);  // sigfigs
  put_u32le(b, kSnaplen);
  put_u32le(b, kLinktypeRaw);
  write_bytes(out, b);
}

void write_record(std::ostream& out, const Record& record) {
  Bytes b;
  put_u32le(b, static_cast<std::uint32_t>(record.timestamp_us / 1000000));
  put_u32le(b, static_cast<std::uint32_t>(record.timestamp_us % 1000000));
  const auto len = static_cast<std::uint32_t>(record.frame.bytes.size());
  put_u32le(b, len);
  put_u32le(b, len);
  append(b, record.frame.bytes);
  write_bytes(out, b);
}

void write_capture(std::ostream& out, const std::vector<Record>& records) {
  write_header(out);
  for (const auto& r : records) write_record(out, r);
}

}  // namespace frag6::pcap
