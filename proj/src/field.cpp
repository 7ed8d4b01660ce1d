#include "pep3/field.hpp"

#include <cstring>

namespace pep3 {
namespace {

constexpr std::uint64_t kMask51 = (1ULL << 51) - 1;

std::uint64_t load64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

FieldElement FieldElement::from_u64(std::uint64_t x) {
  return FieldElement(Limbs{x & kMask51, x >> 51, 0, 0, 0});
}

FieldElement FieldElement::from_bytes(std::span<const std::uint8_t, 32> in) {
  const std::uint8_t* s = in.data();
  Limbs h;
  h[0] = load64(s) & kMask51;
  h[1] = (load64(s + 6) >> 3) & kMask51;
  h[2] = (load64(s + 12) >> 6) & kMask51;
  h[3] = (load64(s + 19) >> 1) & kMask51;
  h[4] = (load64(s + 24) >> 12) & kMask51;
  return FieldElement(h);
}

std::optional<FieldElement> FieldElement::from_bytes_canonical(
    std::span<const std::uint8_t, 32> in) {
  if (in[31] & 0x80) return std::nullopt;
  FieldElement f = from_bytes(in);
  auto back = f.to_bytes();
  if (std::memcmp(back.data(), in.data(), 32) != 0) return std::nullopt;
  return f;
}

std::array<std::uint8_t, 32> FieldElement::to_bytes() const {
  Limbs t = carry(carry(v_));
  // t < 2^255 + small; compute t mod p by adding 19 and checking the carry
  // out of bit 255.
  std::uint64_t q = (t[0] + 19) >> 51;
  q = (t[1] + q) >> 51;
  q = (t[2] + q) >> 51;
  q = (t[3] + q) >> 51;
  q = (t[4] + q) >> 51;
  t[0] += 19 * q;
  t[1] += t[0] >> 51; t[0] &= kMask51;
  t[2] += t[1] >> 51; t[1] &= kMask51;
  t[3] += t[2] >> 51; t[2] &= kMask51;
  t[4] += t[3] >> 51; t[3] &= kMask51;
  t[4] &= kMask51;

  std::array<std::uint8_t, 32> out{};
  const std::uint64_t w0 = t[0] | (t[1] << 51);
  const std::uint64_t w1 = (t[1] >> 13) | (t[2] << 38);
  const std::uint64_t w2 = (t[2] >> 26) | (t[3] << 25);
  const std::uint64_t w3 = (t[3] >> 39) | (t[4] << 12);
  const std::uint64_t words[4] = {w0, w1, w2, w3};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 8; ++j) out[8 * i + j] = static_cast<std::uint8_t>(words[i] >> (8 * j));
  return out;
}

bool FieldElement::is_zero() const {
  auto b = to_bytes();
  std::uint8_t acc = 0;
  for (auto x : b) acc |= x;
  return acc == 0;
}

bool FieldElement::is_negative() const { return to_bytes()[0] & 1; }

bool operator==(const FieldElement& a, const FieldElement& b) {
  return a.to_bytes() == b.to_bytes();
}

FieldElement FieldElement::square_n(int n) const {
  FieldElement r = *this;
  for (int i = 0; i < n; ++i) r = r.square();
  return r;
}

FieldElement FieldElement::pow22523() const {
  // Addition chain for 2^252 - 3.
  const FieldElement& z = *this;
  FieldElement t0 = z.square();
  FieldElement t1 = t0.square_n(2);
  t1 = z * t1;
  t0 = t0 * t1;
  t0 = t0.square();
  t0 = t1 * t0;
  t1 = t0.square_n(5);
  t0 = t1 * t0;
  t1 = t0.square_n(10);
  t1 = t1 * t0;
  FieldElement t2 = t1.square_n(20);
  t1 = t2 * t1;
  t1 = t1.square_n(10);
  t0 = t1 * t0;
  t1 = t0.square_n(50);
  t1 = t1 * t0;
  t2 = t1.square_n(100);
  t1 = t2 * t1;
  t1 = t1.square_n(50);
  t0 = t1 * t0;
  t0 = t0.square_n(2);
  return t0 * z;
}

FieldElement FieldElement::invert() const {
  // z^(p-2) = (z^((p-5)/8))^8 * z^3
  const FieldElement z3 = square() * *this;
  return pow22523().square_n(3) * z3;
}

std::pair<bool, FieldElement> FieldElement::sqrt_ratio_m1(const FieldElement& u,
                                                          const FieldElement& v) {
  using field_constants::sqrt_m1;
  const FieldElement v3 = v.square() * v;
  const FieldElement v7 = v3.square() * v;
  FieldElement r = (u * v3) * (u * v7).pow22523();
  const FieldElement check = v * r.square();
  const FieldElement neg_u = -u;
  const bool correct_sign = check == u;
  const bool flipped_sign = check == neg_u;
  const bool flipped_sign_i = check == neg_u * sqrt_m1;
  if (flipped_sign || flipped_sign_i) r = r * sqrt_m1;
  return {correct_sign || flipped_sign, r.abs()};
}

}  // namespace pep3
