#include "pep3/schnorr.hpp"

#include <cstring>

#include "pep3/bytes.hpp"

namespace pep3 {
namespace {

Scalar challenge(std::string_view tag, const GroupElement& r, const GroupElement& pk,
                 std::span<const std::uint8_t> msg) {
  ByteWriter w;
  w.raw(r.encode()).raw(pk.encode()).raw(msg);
  return hash_bytes_to_scalar(tag, w.bytes());
}

}  // namespace

Signature::Encoding Signature::encode() const {
  Encoding out{};
  const auto a = r.encode(), b = s.to_bytes();
  std::memcpy(out.data(), a.data(), 32);
  std::memcpy(out.data() + 32, b.data(), 32);
  return out;
}

std::optional<Signature> Signature::decode(std::span<const std::uint8_t, 64> in) {
  auto r = GroupElement::decode(in.subspan<0, 32>());
  auto s = Scalar::from_bytes_canonical(in.subspan<32, 32>());
  if (!r || !s) return std::nullopt;
  return Signature{*r, *s};
}

SigningKey SigningKey::generate(RandomSource& rng) { return from_secret(Scalar::random_nonzero(rng)); }

SigningKey SigningKey::from_secret(const Scalar& x) { return {x, GroupElement::base_mul(x)}; }

std::optional<SigningKey> SigningKey::from_secret_hex(std::string_view hex) {
  auto bytes = hex_to_array<32>(hex);
  if (!bytes) return std::nullopt;
  auto s = Scalar::from_bytes_canonical(*bytes);
  if (!s || s->is_zero()) return std::nullopt;
  return from_secret(*s);
}

Signature sign(const SigningKey& key, std::string_view tag, std::span<const std::uint8_t> msg,
               RandomSource& rng) {
  std::array<std::uint8_t, 32> fresh{};
  rng.fill(fresh);
  ByteWriter w;
  w.raw(key.secret.to_bytes()).raw(fresh).raw(msg);
  const Scalar k = hash_bytes_to_scalar("pep3-sig-nonce", w.bytes());
  const GroupElement r = GroupElement::base_mul(k);
  const Scalar e = challenge(tag, r, key.public_key, msg);
  return {r, k + e * key.secret};
}

bool verify_signature(const GroupElement& public_key, std::string_view tag,
                      std::span<const std::uint8_t> msg, const Signature& sig) {
  const Scalar e = challenge(tag, sig.r, public_key, msg);
  return GroupElement::double_mul(sig.s, GroupElement::base(), -e, public_key) == sig.r;
}

}  // namespace pep3
