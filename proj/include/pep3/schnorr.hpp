#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "pep3/group.hpp"

namespace pep3 {

struct Signature {
  GroupElement r;
  Scalar s;

  using Encoding = std::array<std::uint8_t, 64>;
  Encoding encode() const;
  static std::optional<Signature> decode(std::span<const std::uint8_t, 64> in);
};

// Schnorr key pair in the same group; used for node authentication and by
// the certification authority.
struct SigningKey {
  Scalar secret;
  GroupElement public_key;

  static SigningKey generate(RandomSource& rng);
  static SigningKey from_secret(const Scalar& x);
  std::string secret_hex() const { return secret.to_hex(); }
  static std::optional<SigningKey> from_secret_hex(std::string_view hex);
};

// Challenge is hash(tag, R || public || msg); nonce is hedged with fresh randomness.
Signature sign(const SigningKey& key, std::string_view tag, std::span<const std::uint8_t> msg,
               RandomSource& rng);
bool verify_signature(const GroupElement& public_key, std::string_view tag,
                      std::span<const std::uint8_t> msg, const Signature& sig);

}  // namespace pep3
