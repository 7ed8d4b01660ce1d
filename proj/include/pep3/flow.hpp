#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "pep3/bytes.hpp"
#include "pep3/elgamal.hpp"
#include "pep3/lizard.hpp"

namespace pep3 {

// A 5-tuple flow with counters. Addr is the address representation:
// plaintext (Address128), encrypted pseudonym (Cyphertext) or stored
// pseudonym point (GroupElement).
template <typename Addr>
struct FlowRecord {
  std::int64_t ts_start = 0;  // unix microseconds
  std::int64_t ts_end = 0;
  Addr src{};
  Addr dst{};
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t proto = 0;
  std::uint64_t packets = 0;
  std::uint64_t bytes = 0;

  template <typename Other, typename F>
  FlowRecord<Other> map(F&& f) const {
    return {ts_start, ts_end, f(src), f(dst), src_port, dst_port, proto, packets, bytes};
  }
};

using PlainFlow = FlowRecord<Address128>;
using EncryptedFlow = FlowRecord<Cyphertext>;
using StoredFlow = FlowRecord<GroupElement>;

inline constexpr std::string_view kFlowCsvHeader = "ts_start,ts_end,src_ip,dst_ip,src_port,dst_port,proto,packets,bytes";

// Throws ParseError naming the line on bad input or ts_start > ts_end.
std::vector<PlainFlow> read_flows_csv(std::istream& in);
void write_flows_csv(std::ostream& out, const std::vector<PlainFlow>& flows);

// Encrypted form on the wire: fixed fields then the two 96-byte cyphertexts.
void write_encrypted_flow(ByteWriter& w, const EncryptedFlow& f);
EncryptedFlow read_encrypted_flow(ByteReader& r);

// Storage row: 101 bytes, all integers big-endian, pseudonyms as 32-byte encodings.
inline constexpr std::size_t kStoredRowBytes = 101;
std::array<std::uint8_t, kStoredRowBytes> encode_stored_flow(const StoredFlow& f);
StoredFlow decode_stored_flow(std::span<const std::uint8_t, kStoredRowBytes> row);  // throws Malformed

// Synthetic flows over a pool of `unique_addresses` addresses (IPv4 and IPv6).
std::vector<PlainFlow> synthetic_flows(std::size_t count, std::size_t unique_addresses, RandomSource& rng);

}  // namespace pep3
