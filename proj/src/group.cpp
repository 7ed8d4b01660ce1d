#include "pep3/group.hpp"

#include <sodium.h>

#include <algorithm>
#include <mutex>

#include "pep3/bytes.hpp"

namespace pep3 {
namespace {

using Fe = FieldElement;
using Extended = GroupElement::Extended;
namespace fc = field_constants;

// (Y+X, Y-X, 2Z, 2dT): the addend form used by all table lookups.
struct Cached {
  Fe y_plus_x, y_minus_x, z2, t2d;
};

Cached to_cached(const Extended& p) {
  return {p.y + p.x, p.y - p.x, p.z + p.z, p.t * fc::d2};
}

Extended add(const Extended& p, const Cached& q) {
  const Fe a = (p.y - p.x) * q.y_minus_x;
  const Fe b = (p.y + p.x) * q.y_plus_x;
  const Fe c = p.t * q.t2d;
  const Fe d = p.z * q.z2;
  const Fe e = b - a, f = d - c, g = d + c, h = b + a;
  return {e * f, g * h, f * g, e * h};
}

Extended sub(const Extended& p, const Cached& q) {
  const Fe a = (p.y - p.x) * q.y_plus_x;
  const Fe b = (p.y + p.x) * q.y_minus_x;
  const Fe c = p.t * q.t2d;
  const Fe d = p.z * q.z2;
  const Fe e = b - a, f = d + c, g = d - c, h = b + a;
  return {e * f, g * h, f * g, e * h};
}

Extended dbl(const Extended& p) {
  const Fe a = p.x.square();
  const Fe b = p.y.square();
  const Fe c = p.z.square() + p.z.square();
  const Fe e = (p.x + p.y).square() - a - b;
  const Fe g = b - a;
  const Fe f = g - c;
  const Fe h = -(a + b);
  return {e * f, g * h, f * g, e * h};
}

Extended identity_ext() { return {Fe::zero(), Fe::one(), Fe::one(), Fe::zero()}; }

// Signed radix-16 digits in [-8, 8); the top digit absorbs the final carry.
std::array<std::int8_t, 64> radix16(const Scalar& s) {
  const auto bytes = s.to_bytes();
  std::array<std::int8_t, 64> e{};
  for (int i = 0; i < 32; ++i) {
    e[2 * i] = static_cast<std::int8_t>(bytes[i] & 15);
    e[2 * i + 1] = static_cast<std::int8_t>(bytes[i] >> 4);
  }
  std::int8_t carry = 0;
  for (int i = 0; i < 63; ++i) {
    e[i] = static_cast<std::int8_t>(e[i] + carry);
    carry = static_cast<std::int8_t>((e[i] + 8) >> 4);
    e[i] = static_cast<std::int8_t>(e[i] - (carry << 4));
  }
  e[63] = static_cast<std::int8_t>(e[63] + carry);
  return e;
}

Extended add_digit(const Extended& acc, const std::array<Cached, 8>& table, std::int8_t digit) {
  if (digit > 0) return add(acc, table[digit - 1]);
  if (digit < 0) return sub(acc, table[-digit - 1]);
  return acc;
}

std::array<Cached, 8> multiples(const Extended& p) {
  std::array<Cached, 8> table;
  Extended acc = p;
  table[0] = to_cached(p);
  for (int j = 1; j < 8; ++j) {
    acc = add(acc, table[0]);
    table[j] = to_cached(acc);
  }
  return table;
}

const Extended& base_point() {
  static const Extended b = [] {
    const auto enc = *GroupElement::decode(
        *hex_to_array<32>("e2f2ae0a6abc4e71a884a961c500515f58e30b6aa582dd8db6a65945e08d2d76"));
    return enc.extended();
  }();
  return b;
}

// table[i][j] = (j+1) * 16^i * B
const std::array<std::array<Cached, 8>, 64>& base_table() {
  static const auto table = [] {
    std::array<std::array<Cached, 8>, 64> t;
    Extended row = base_point();
    for (int i = 0; i < 64; ++i) {
      t[i] = multiples(row);
      for (int k = 0; k < 4; ++k) row = dbl(row);
    }
    return t;
  }();
  return table;
}

thread_local OpCounters t_counters;

}  // namespace

OpCounters& op_counters() { return t_counters; }
void reset_op_counters() { t_counters = OpCounters{}; }

GroupElement::GroupElement() : p_(identity_ext()) {}

const GroupElement& GroupElement::base() {
  static const GroupElement b(base_point());
  return b;
}

std::optional<GroupElement> GroupElement::decode(std::span<const std::uint8_t, 32> in) {
  const auto s_opt = Fe::from_bytes_canonical(in);
  if (!s_opt || s_opt->is_negative()) return std::nullopt;
  const Fe s = *s_opt;
  const Fe ss = s.square();
  const Fe u1 = Fe::one() - ss;
  const Fe u2 = Fe::one() + ss;
  const Fe u2_sqr = u2.square();
  const Fe v = -(fc::d * u1.square()) - u2_sqr;
  const auto [was_square, invsqrt] = Fe::sqrt_ratio_m1(Fe::one(), v * u2_sqr);
  const Fe den_x = invsqrt * u2;
  const Fe den_y = invsqrt * den_x * v;
  const Fe x = (s + s) * den_x;
  const Fe x_abs = x.abs();
  const Fe y = u1 * den_y;
  const Fe t = x_abs * y;
  if (!was_square || t.is_negative() || y.is_zero()) return std::nullopt;
  return GroupElement(Extended{x_abs, y, Fe::one(), t});
}

std::optional<GroupElement> GroupElement::from_hex(std::string_view hex) {
  const auto bytes = hex_to_array<32>(hex);
  if (!bytes) return std::nullopt;
  return decode(*bytes);
}

GroupElement::Encoding GroupElement::encode() const {
  const auto& [x0, y0, z0, t0] = p_;
  const Fe u1 = (z0 + y0) * (z0 - y0);
  const Fe u2 = x0 * y0;
  const auto [ignored, invsqrt] = Fe::sqrt_ratio_m1(Fe::one(), u1 * u2.square());
  (void)ignored;
  const Fe den1 = invsqrt * u1;
  const Fe den2 = invsqrt * u2;
  const Fe z_inv = den1 * den2 * t0;
  const bool rotate = (t0 * z_inv).is_negative();
  Fe x = x0, y = y0, den_inv = den2;
  if (rotate) {
    x = y0 * fc::sqrt_m1;
    y = x0 * fc::sqrt_m1;
    den_inv = den1 * fc::invsqrt_a_minus_d;
  }
  if ((x * z_inv).is_negative()) y = -y;
  return (den_inv * (z0 - y)).abs().to_bytes();
}

std::string GroupElement::to_hex() const { return bytes_to_hex(encode()); }

bool GroupElement::is_identity() const { return *this == GroupElement(); }

bool operator==(const GroupElement& a, const GroupElement& b) {
  const auto& p = a.p_;
  const auto& q = b.p_;
  return (p.x * q.y == p.y * q.x) || (p.y * q.y == p.x * q.x);
}

GroupElement operator+(const GroupElement& a, const GroupElement& b) {
  return GroupElement(add(a.p_, to_cached(b.p_)));
}

GroupElement operator-(const GroupElement& a, const GroupElement& b) {
  return GroupElement(sub(a.p_, to_cached(b.p_)));
}

GroupElement operator-(const GroupElement& a) {
  return GroupElement(Extended{-a.p_.x, a.p_.y, a.p_.z, -a.p_.t});
}

GroupElement GroupElement::dbl() const { return GroupElement(pep3::dbl(p_)); }

GroupElement operator*(const Scalar& s, const GroupElement& p) {
  ++t_counters.general;
  const auto digits = radix16(s);
  const auto table = multiples(p.p_);
  Extended acc = identity_ext();
  for (int i = 63; i >= 0; --i) {
    if (i != 63) {
      for (int k = 0; k < 4; ++k) acc = dbl(acc);
    }
    acc = add_digit(acc, table, digits[i]);
  }
  return GroupElement(acc);
}

GroupElement GroupElement::base_mul(const Scalar& s) {
  ++t_counters.base;
  const auto digits = radix16(s);
  const auto& table = base_table();
  Extended acc = identity_ext();
  for (int i = 0; i < 64; ++i) acc = add_digit(acc, table[i], digits[i]);
  return GroupElement(acc);
}

GroupElement GroupElement::double_mul(const Scalar& a, const GroupElement& p, const Scalar& b,
                                      const GroupElement& q) {
  ++t_counters.dual;
  const auto da = radix16(a);
  const auto db = radix16(b);
  const auto ta = multiples(p.p_);
  const auto tb = multiples(q.p_);
  Extended acc = identity_ext();
  for (int i = 63; i >= 0; --i) {
    if (i != 63) {
      for (int k = 0; k < 4; ++k) acc = pep3::dbl(acc);
    }
    acc = add_digit(acc, ta, da[i]);
    acc = add_digit(acc, tb, db[i]);
  }
  return GroupElement(acc);
}

// --- hashing ---------------------------------------------------------------

Scalar hash_bytes_to_scalar(std::string_view domain_tag, std::span<const std::uint8_t> data) {
  crypto_hash_sha512_state st;
  crypto_hash_sha512_init(&st);
  const auto tag_len = static_cast<std::uint8_t>(domain_tag.size());
  crypto_hash_sha512_update(&st, &tag_len, 1);
  crypto_hash_sha512_update(&st, reinterpret_cast<const unsigned char*>(domain_tag.data()),
                            domain_tag.size());
  crypto_hash_sha512_update(&st, data.data(), data.size());
  std::array<std::uint8_t, 64> digest{};
  crypto_hash_sha512_final(&st, digest.data());
  return Scalar::from_bytes_wide(digest);
}

Scalar hash_to_scalar(std::string_view domain_tag, std::span<const GroupElement> inputs) {
  Bytes buf;
  buf.reserve(32 * inputs.size());
  for (const auto& e : inputs) {
    const auto enc = e.encode();
    buf.insert(buf.end(), enc.begin(), enc.end());
  }
  return hash_bytes_to_scalar(domain_tag, buf);
}

Scalar hash_to_scalar(std::string_view domain_tag, std::initializer_list<GroupElement> inputs) {
  return hash_to_scalar(domain_tag, std::span<const GroupElement>(inputs.begin(), inputs.size()));
}

// --- elligator2 ------------------------------------------------------------

GroupElement ell2(const FieldElement& t) {
  const Fe one = Fe::one();
  const Fe r = fc::sqrt_m1 * t.square();
  const Fe u = (r + one) * fc::one_minus_d_sq;
  const Fe v = (-one - r * fc::d) * (r + fc::d);
  auto [was_square, s] = Fe::sqrt_ratio_m1(u, v);
  Fe c = -one;
  if (!was_square) {
    s = -(s * t).abs();
    c = r;
  }
  const Fe n = c * (r - one) * fc::d_minus_one_sq - v;
  const Fe s2 = s.square();
  const Fe w0 = (s + s) * v;
  const Fe w1 = n * fc::sqrt_ad_minus_one;
  const Fe w2 = one - s2;
  const Fe w3 = one + s2;
  return GroupElement::from_extended(Extended{w0 * w3, w2 * w1, w1 * w3, w0 * w2});
}

std::vector<FieldElement> ell2_candidates(const GroupElement& a, bool verify) {
  // The forward map sends t to the Edwards point with
  //   y = (1 - s^2)/(1 + s^2),  x = 2 s v / (N sqrt(ad-1))
  // where, with r = i t^2, both branches satisfy
  //   (r + 1)/(r - 1) = +-s^2 (d-1) x sqrt(ad-1) / ((2s + x sqrt(ad-1)) (d+1)).
  // Each of the four Edwards representatives of the ristretto class, with
  // both signs of s and both signs of the ratio, yields one candidate r and
  // hence t = sqrt(-i r).
  const Fe one = Fe::one();
  const auto& e = a.extended();
  const Fe z_inv = e.z.invert();
  const Fe x = e.x * z_inv;
  const Fe y = e.y * z_inv;
  const Fe ix = x * fc::sqrt_m1;
  const Fe iy = y * fc::sqrt_m1;
  const std::array<std::pair<Fe, Fe>, 4> reps = {
      std::pair{x, y}, std::pair{-x, -y}, std::pair{iy, ix}, std::pair{-iy, -ix}};
  const Fe d_plus_one = fc::d + one;
  const Fe d_minus_one = fc::d - one;
  const Fe minus_i = -fc::sqrt_m1;

  std::vector<FieldElement> out;
  std::vector<std::array<std::uint8_t, 32>> seen;
  for (const auto& [rx, ry] : reps) {
    if ((ry + one).is_zero() || rx.is_zero()) continue;
    const auto [is_sq, s0] = Fe::sqrt_ratio_m1(one - ry, one + ry);
    if (!is_sq) continue;
    const Fe xs = rx * fc::sqrt_ad_minus_one;
    for (const Fe& s : {s0, -s0}) {
      const Fe den = (s + s + xs) * d_plus_one;
      if (den.is_zero()) continue;
      const Fe num = s.square() * d_minus_one * xs;
      for (const Fe& q : {num, -num}) {
        const Fe lower = q - den;
        if (lower.is_zero()) continue;
        const auto [ok, t] = Fe::sqrt_ratio_m1(minus_i * (q + den), lower);
        if (!ok) continue;
        const auto enc = t.to_bytes();
        if (std::find(seen.begin(), seen.end(), enc) != seen.end()) continue;
        seen.push_back(enc);
        if (verify && !(ell2(t) == a)) continue;
        out.push_back(t);
      }
    }
  }
  return out;
}

std::vector<FieldElement> ell2_inverse(const GroupElement& a) {
  std::vector<FieldElement> out;
  for (const auto& t : ell2_candidates(a, true)) {
    out.push_back(t);
    if (!t.is_zero()) out.push_back(-t);
  }
  return out;
}

}  // namespace pep3
