#include "pep3/flow.hpp"

#include <charconv>
#include <sstream>

#include "pep3/proofs.hpp"
#include "pep3/random.hpp"

namespace pep3 {
namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_int(std::string_view s, std::size_t line, const char* field) {
  T v{};
  s = trim(s);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": bad " + field);
  return v;
}

}  // namespace

std::vector<PlainFlow> read_flows_csv(std::istream& in) {
  std::vector<PlainFlow> out;
  std::string line;
  std::size_t n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++n;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!header) {
      if (t != kFlowCsvHeader) throw Error(ErrorCode::ParseError, "line " + std::to_string(n) + ": expected header");
      header = true;
      continue;
    }
    const auto cols = split_csv(t);
    if (cols.size() != 9) throw Error(ErrorCode::ParseError, "line " + std::to_string(n) + ": expected 9 fields");
    PlainFlow f;
    f.ts_start = parse_int<std::int64_t>(cols[0], n, "ts_start");
    f.ts_end = parse_int<std::int64_t>(cols[1], n, "ts_end");
    try {
      f.src = ip_to_address128(trim(cols[2]));
      f.dst = ip_to_address128(trim(cols[3]));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(n) + ": " + e.what());
    }
    f.src_port = parse_int<std::uint16_t>(cols[4], n, "src_port");
    f.dst_port = parse_int<std::uint16_t>(cols[5], n, "dst_port");
    f.proto = parse_int<std::uint8_t>(cols[6], n, "proto");
    f.packets = parse_int<std::uint64_t>(cols[7], n, "packets");
    f.bytes = parse_int<std::uint64_t>(cols[8], n, "bytes");
    if (f.ts_start > f.ts_end) throw Error(ErrorCode::ParseError, "line " + std::to_string(n) + ": ts_start > ts_end");
    out.push_back(f);
  }
  if (!header) throw Error(ErrorCode::ParseError, "missing header");
  return out;
}

void write_flows_csv(std::ostream& out, const std::vector<PlainFlow>& flows) {
  out << kFlowCsvHeader << '\n';
  for (const auto& f : flows)
    out << f.ts_start << ',' << f.ts_end << ',' << address128_to_ip(f.src) << ',' << address128_to_ip(f.dst) << ','
        << f.src_port << ',' << f.dst_port << ',' << unsigned{f.proto} << ',' << f.packets << ',' << f.bytes << '\n';
}

void write_encrypted_flow(ByteWriter& w, const EncryptedFlow& f) {
  w.u64(static_cast<std::uint64_t>(f.ts_start)).u64(static_cast<std::uint64_t>(f.ts_end));
  w.u16(f.src_port).u16(f.dst_port).u8(f.proto).u64(f.packets).u64(f.bytes);
  write_cyphertext(w, f.src);
  write_cyphertext(w, f.dst);
}

EncryptedFlow read_encrypted_flow(ByteReader& r) {
  EncryptedFlow f;
  f.ts_start = static_cast<std::int64_t>(r.u64());
  f.ts_end = static_cast<std::int64_t>(r.u64());
  f.src_port = r.u16();
  f.dst_port = r.u16();
  f.proto = r.u8();
  f.packets = r.u64();
  f.bytes = r.u64();
  f.src = read_cyphertext(r);
  f.dst = read_cyphertext(r);
  if (f.ts_start > f.ts_end) throw Error(ErrorCode::Malformed, "ts_start > ts_end");
  return f;
}

std::array<std::uint8_t, kStoredRowBytes> encode_stored_flow(const StoredFlow& f) {
  ByteWriter w;
  w.u64(static_cast<std::uint64_t>(f.ts_start)).u64(static_cast<std::uint64_t>(f.ts_end));
  w.raw(f.src.encode()).raw(f.dst.encode());
  w.u16(f.src_port).u16(f.dst_port).u8(f.proto).u64(f.packets).u64(f.bytes);
  std::array<std::uint8_t, kStoredRowBytes> out{};
  std::memcpy(out.data(), w.bytes().data(), kStoredRowBytes);
  return out;
}

StoredFlow decode_stored_flow(std::span<const std::uint8_t, kStoredRowBytes> row) {
  ByteReader r(row);
  StoredFlow f;
  f.ts_start = static_cast<std::int64_t>(r.u64());
  f.ts_end = static_cast<std::int64_t>(r.u64());
  f.src = read_element(r);
  f.dst = read_element(r);
  f.src_port = r.u16();
  f.dst_port = r.u16();
  f.proto = r.u8();
  f.packets = r.u64();
  f.bytes = r.u64();
  return f;
}

std::vector<PlainFlow> synthetic_flows(std::size_t count, std::size_t unique_addresses, RandomSource& rng) {
  if (unique_addresses == 0) throw Error(ErrorCode::InvalidArgument, "need at least one address");
  std::vector<Address128> pool;
  pool.reserve(unique_addresses);
  for (std::size_t i = 0; i < unique_addresses; ++i) {
    Address128 a{};
    if (i % 4 == 3) {
      rng.fill(a);
      a[0] = 0x20;
      a[1] = 0x01;
    } else {
      a[10] = a[11] = 0xff;
      a[12] = 10;
      a[13] = static_cast<std::uint8_t>(i >> 16);
      a[14] = static_cast<std::uint8_t>(i >> 8);
      a[15] = static_cast<std::uint8_t>(i);
    }
    pool.push_back(a);
  }
  const std::uint16_t common_ports[] = {53, 80, 123, 443, 22, 25};
  std::vector<PlainFlow> out;
  out.reserve(count);
  std::int64_t ts = 1700000000LL * 1000000;
  for (std::size_t i = 0; i < count; ++i) {
    PlainFlow f;
    ts += static_cast<std::int64_t>(rng.next_u64() % 2000);
    f.ts_start = ts;
    f.ts_end = ts + static_cast<std::int64_t>(rng.next_u64() % 5000000);
    f.src = pool[i < pool.size() ? i : rng.next_u64() % pool.size()];
    f.dst = pool[rng.next_u64() % pool.size()];
    f.src_port = static_cast<std::uint16_t>(1024 + rng.next_u64() % 60000);
    f.dst_port = common_ports[rng.next_u64() % 6];
    f.proto = (rng.next_u64() % 5 == 0) ? 17 : 6;
    f.packets = 1 + rng.next_u64() % 1000;
    f.bytes = f.packets * (40 + rng.next_u64() % 1460);
    out.push_back(f);
  }
  return out;
}

}  // namespace pep3
