#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pep3/error.hpp"

namespace pep3 {

using Bytes = std::vector<std::uint8_t>;

std::string bytes_to_hex(std::span<const std::uint8_t> in);
std::optional<Bytes> hex_to_bytes(std::string_view hex);

template <std::size_t N>
std::optional<std::array<std::uint8_t, N>> hex_to_array(std::string_view hex) {
  auto v = hex_to_bytes(hex);
  if (!v || v->size() != N) return std::nullopt;
  std::array<std::uint8_t, N> out{};
  std::memcpy(out.data(), v->data(), N);
  return out;
}

inline std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// Big-endian integer and length-prefixed field writer.
class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(Bytes&& initial) : buf_(std::move(initial)) {}

  ByteWriter& u8(std::uint8_t v) {
    buf_.push_back(v);
    return *this;
  }
  ByteWriter& u16(std::uint16_t v) { return be(v, 2); }
  ByteWriter& u32(std::uint32_t v) { return be(v, 4); }
  ByteWriter& u64(std::uint64_t v) { return be(v, 8); }
  ByteWriter& raw(std::span<const std::uint8_t> b) {
    buf_.insert(buf_.end(), b.begin(), b.end());
    return *this;
  }
  // u16 length then bytes.
  ByteWriter& str(std::string_view s) {
    if (s.size() > 0xffff) throw Error(ErrorCode::InvalidArgument, "string field too long");
    u16(static_cast<std::uint16_t>(s.size()));
    return raw(as_bytes(s));
  }
  // u32 length then bytes.
  ByteWriter& blob(std::span<const std::uint8_t> b) {
    u32(static_cast<std::uint32_t>(b.size()));
    return raw(b);
  }

  const Bytes& bytes() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  ByteWriter& be(std::uint64_t v, int n) {
    for (int i = n - 1; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    return *this;
  }
  Bytes buf_;
};

// Reader over a borrowed buffer. Every short read throws Error(Malformed).
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(be(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(be(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(be(4)); }
  std::uint64_t u64() { return be(8); }

  std::span<const std::uint8_t> raw(std::size_t n) {
    need(n);
    auto out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  template <std::size_t N>
  std::array<std::uint8_t, N> fixed() {
    std::array<std::uint8_t, N> out{};
    auto s = raw(N);
    std::memcpy(out.data(), s.data(), N);
    return out;
  }
  std::string str() {
    const auto n = u16();
    auto s = raw(n);
    return std::string(s.begin(), s.end());
  }
  Bytes blob() {
    const auto n = u32();
    auto s = raw(n);
    return Bytes(s.begin(), s.end());
  }

  std::size_t remaining() const { return in_.size() - pos_; }
  bool done() const { return pos_ == in_.size(); }
  void expect_done() const {
    if (!done()) throw Error(ErrorCode::Malformed, "trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw Error(ErrorCode::Malformed, "truncated input");
  }
  std::uint64_t be(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 8) | in_[pos_ + i];
    pos_ += n;
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace pep3
