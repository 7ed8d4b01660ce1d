#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "pep3/group.hpp"

namespace pep3 {

// ElGamal triple (blinding, core, target). Wire form is the three 32-byte
// encodings concatenated in that order.
struct Cyphertext {
  GroupElement blinding;
  GroupElement core;
  GroupElement target;

  using Encoding = std::array<std::uint8_t, 96>;
  Encoding encode() const;
  static std::optional<Cyphertext> decode(std::span<const std::uint8_t, 96> in);
  std::string to_hex() const;
  static std::optional<Cyphertext> from_hex(std::string_view hex);

  friend bool operator==(const Cyphertext& a, const Cyphertext& b) {
    return a.blinding == b.blinding && a.core == b.core && a.target == b.target;
  }
};

// (rB, M + r*target, target)
Cyphertext encrypt(const GroupElement& m, const GroupElement& target, const Scalar& r);
Cyphertext encrypt(const GroupElement& m, const GroupElement& target, RandomSource& rng);

// core - s*blinding. Meaningful only when target = sB.
GroupElement decrypt(const Cyphertext& c, const Scalar& s);

// (s^-1 blinding, core, s target); throws ZeroKey for s = 0.
Cyphertext rekey(const Cyphertext& c, const Scalar& s);
// (n blinding, n core, target); throws ZeroKey for n = 0.
Cyphertext reshuffle(const Cyphertext& c, const Scalar& n);
// (blinding + rB, core + r target, target)
Cyphertext rerandomise(const Cyphertext& c, const Scalar& r);

// rekey(reshuffle(rerandomise(c, r), n), s) in one pass:
// (n s^-1 (blinding + rB), n (core + r target), s target).
Cyphertext rsk(const Cyphertext& c, const Scalar& s, const Scalar& n, const Scalar& r);
// Same, when the caller already knows the resulting target s*target, which
// saves one general scalar multiplication.
Cyphertext rsk(const Cyphertext& c, const Scalar& s, const Scalar& n, const Scalar& r,
               const GroupElement& new_target);

struct KeyPair {
  Scalar s;  // encryption key
  Scalar n;  // pseudonym key
};

// rsk(c, s_Q/s_P, n_Q/n_P, r)
Cyphertext translate(const Cyphertext& c, const KeyPair& from, const KeyPair& to, const Scalar& r);

}  // namespace pep3
