#include "pep3/lizard.hpp"

#include <arpa/inet.h>
#include <sodium.h>

#include <cstring>

#include "pep3/error.hpp"

namespace pep3 {
namespace {

// Little-endian field encoding of sum b_i 2^i: bit i of the 256-bit string.
std::array<std::uint8_t, 32> bits_to_field_bytes(const std::bitset<253>& bits) {
  std::array<std::uint8_t, 32> out{};
  for (int i = 0; i < 253; ++i) {
    if (bits[i]) {
      const int pos = i + 1;
      out[pos >> 3] |= static_cast<std::uint8_t>(1u << (pos & 7));
    }
  }
  return out;
}

std::optional<std::bitset<253>> field_bytes_to_bits(const std::array<std::uint8_t, 32>& in) {
  // Must be even and below 2^254.
  if ((in[0] & 1) || (in[31] & 0xc0)) return std::nullopt;
  std::bitset<253> bits;
  for (int i = 0; i < 253; ++i) {
    const int pos = i + 1;
    bits[i] = (in[pos >> 3] >> (pos & 7)) & 1;
  }
  return bits;
}

std::array<std::uint8_t, 32> sha256(const Address128& w) {
  std::array<std::uint8_t, 32> h{};
  crypto_hash_sha256(h.data(), w.data(), w.size());
  return h;
}

Address128 leading_address(const std::bitset<253>& bits) {
  Address128 w{};
  for (int i = 0; i < 128; ++i) {
    if (bits[i]) w[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
  }
  return w;
}

}  // namespace

GroupElement ell2_prime(const std::bitset<253>& bits) {
  return ell2(FieldElement::from_bytes(bits_to_field_bytes(bits)));
}

std::vector<std::bitset<253>> ell2_prime_inverse(const GroupElement& a) {
  std::vector<std::bitset<253>> out;
  for (const auto& t : ell2_candidates(a, true)) {
    // Of t and -t exactly one is even, as p is odd.
    const FieldElement even = t.is_negative() ? -t : t;
    if (auto bits = field_bytes_to_bits(even.to_bytes())) out.push_back(*bits);
  }
  return out;
}

std::bitset<253> lizard_bits(const Address128& w) {
  std::bitset<253> bits;
  for (int i = 0; i < 128; ++i) bits[i] = (w[i >> 3] >> (i & 7)) & 1;
  const auto h = sha256(w);
  for (int i = 0; i < 125; ++i) bits[128 + i] = (h[i >> 3] >> (i & 7)) & 1;
  return bits;
}

GroupElement lizard_encode(const Address128& w) { return ell2_prime(lizard_bits(w)); }

std::optional<Address128> lizard_decode(const GroupElement& a) {
  // Candidates come straight from the algebraic inversion; the 125-bit hash
  // check rejects anything spurious before the forward map confirms a match.
  std::optional<Address128> found;
  for (const auto& t : ell2_candidates(a, false)) {
    const FieldElement even = t.is_negative() ? -t : t;
    const auto bits = field_bytes_to_bits(even.to_bytes());
    if (!bits) continue;
    const Address128 w = leading_address(*bits);
    if (lizard_bits(w) != *bits) continue;
    if (!(ell2_prime(*bits) == a)) continue;
    if (found && *found != w) throw Error(ErrorCode::AmbiguousDecode, "two addresses share an image");
    found = w;
  }
  return found;
}

Address128 ip_to_address128(std::string_view text) {
  const std::string s(text);
  Address128 out{};
  in_addr v4{};
  if (inet_pton(AF_INET, s.c_str(), &v4) == 1) {
    out[10] = 0xff;
    out[11] = 0xff;
    std::memcpy(out.data() + 12, &v4, 4);
    return out;
  }
  in6_addr v6{};
  if (inet_pton(AF_INET6, s.c_str(), &v6) == 1) {
    std::memcpy(out.data(), &v6, 16);
    return out;
  }
  throw Error(ErrorCode::ParseError, "not an IP address: " + s);
}

std::string address128_to_ip(const Address128& a) {
  static constexpr std::uint8_t kMapped[12] = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0xff, 0xff};
  char buf[INET6_ADDRSTRLEN] = {};
  if (std::memcmp(a.data(), kMapped, 12) == 0) {
    inet_ntop(AF_INET, a.data() + 12, buf, sizeof buf);
  } else {
    inet_ntop(AF_INET6, a.data(), buf, sizeof buf);
  }
  return buf;
}

}  // namespace pep3
