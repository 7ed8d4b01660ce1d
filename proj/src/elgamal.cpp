#include "pep3/elgamal.hpp"

#include <cstring>

#include "pep3/bytes.hpp"
#include "pep3/error.hpp"

namespace pep3 {
namespace {

void require_nonzero(const Scalar& k, const char* what) {
  if (k.is_zero()) throw Error(ErrorCode::ZeroKey, what);
}

}  // namespace

Cyphertext::Encoding Cyphertext::encode() const {
  Encoding out{};
  const auto b = blinding.encode(), c = core.encode(), t = target.encode();
  std::memcpy(out.data(), b.data(), 32);
  std::memcpy(out.data() + 32, c.data(), 32);
  std::memcpy(out.data() + 64, t.data(), 32);
  return out;
}

std::optional<Cyphertext> Cyphertext::decode(std::span<const std::uint8_t, 96> in) {
  auto b = GroupElement::decode(in.subspan<0, 32>());
  auto c = GroupElement::decode(in.subspan<32, 32>());
  auto t = GroupElement::decode(in.subspan<64, 32>());
  if (!b || !c || !t) return std::nullopt;
  return Cyphertext{*b, *c, *t};
}

std::string Cyphertext::to_hex() const { return bytes_to_hex(encode()); }

std::optional<Cyphertext> Cyphertext::from_hex(std::string_view hex) {
  auto bytes = hex_to_array<96>(hex);
  if (!bytes) return std::nullopt;
  return decode(*bytes);
}

Cyphertext encrypt(const GroupElement& m, const GroupElement& target, const Scalar& r) {
  return {GroupElement::base_mul(r), m + r * target, target};
}

Cyphertext encrypt(const GroupElement& m, const GroupElement& target, RandomSource& rng) {
  return encrypt(m, target, Scalar::random_nonzero(rng));
}

GroupElement decrypt(const Cyphertext& c, const Scalar& s) { return c.core - s * c.blinding; }

Cyphertext rekey(const Cyphertext& c, const Scalar& s) {
  require_nonzero(s, "rekey with zero key");
  return {s.invert() * c.blinding, c.core, s * c.target};
}

Cyphertext reshuffle(const Cyphertext& c, const Scalar& n) {
  require_nonzero(n, "reshuffle with zero factor");
  return {n * c.blinding, n * c.core, c.target};
}

Cyphertext rerandomise(const Cyphertext& c, const Scalar& r) {
  return {c.blinding + GroupElement::base_mul(r), c.core + r * c.target, c.target};
}

Cyphertext rsk(const Cyphertext& c, const Scalar& s, const Scalar& n, const Scalar& r,
               const GroupElement& new_target) {
  require_nonzero(s, "rsk with zero key");
  require_nonzero(n, "rsk with zero factor");
  const Scalar k = n * s.invert();
  // n s^-1 (beta + rB) = k beta + (k r) B
  const GroupElement blinding = k * c.blinding + GroupElement::base_mul(k * r);
  const GroupElement core = n * c.core + (n * r) * c.target;
  return {blinding, core, new_target};
}

Cyphertext rsk(const Cyphertext& c, const Scalar& s, const Scalar& n, const Scalar& r) {
  require_nonzero(s, "rsk with zero key");
  return rsk(c, s, n, r, s * c.target);
}

Cyphertext translate(const Cyphertext& c, const KeyPair& from, const KeyPair& to, const Scalar& r) {
  require_nonzero(from.s, "zero source key");
  require_nonzero(from.n, "zero source factor");
  return rsk(c, to.s * from.s.invert(), to.n * from.n.invert(), r);
}

}  // namespace pep3
