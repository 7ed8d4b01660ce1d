#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pep3/group.hpp"

namespace pep3 {

// 16 raw bytes; an IPv6 address or an IPv4 address in ::ffff:a.b.c.d form.
using Address128 = std::array<std::uint8_t, 16>;

// bits[0] is b1. Computes ell2 of the integer sum b_i 2^i, i = 1..253.
GroupElement ell2_prime(const std::bitset<253>& bits);
// Every 253-bit string whose image under ell2_prime is a (at most 8).
std::vector<std::bitset<253>> ell2_prime_inverse(const GroupElement& a);

// Bit layout: b1..b128 are the bits of w, least significant bit of w[0]
// first; b129..b253 are the first 125 bits of SHA-256(w) in the same order.
std::bitset<253> lizard_bits(const Address128& w);
GroupElement lizard_encode(const Address128& w);
// nullopt when no preimage passes the hash check; throws AmbiguousDecode
// when more than one does.
std::optional<Address128> lizard_decode(const GroupElement& a);

// Throws ParseError on anything but a valid IPv4 or IPv6 literal.
Address128 ip_to_address128(std::string_view text);
// Mapped IPv4 addresses print in dotted form.
std::string address128_to_ip(const Address128& a);

}  // namespace pep3
