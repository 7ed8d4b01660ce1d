#include "pep3/scalar.hpp"

#include <bit>

#include "pep3/error.hpp"

namespace pep3 {
namespace {

using u128 = unsigned __int128;
using Words = Scalar::Words;

constexpr Words kOrder = {0x5812631a5cf5d3edULL, 0x14def9dea2f79cd6ULL, 0, 0x1000000000000000ULL};
constexpr Words kOrderMinusOne = {0x5812631a5cf5d3ecULL, 0x14def9dea2f79cd6ULL, 0,
                                  0x1000000000000000ULL};
constexpr Words kOrderMinusTwo = {0x5812631a5cf5d3ebULL, 0x14def9dea2f79cd6ULL, 0,
                                  0x1000000000000000ULL};

constexpr bool geq(const Words& a, const Words& b) {
  for (int i = 3; i >= 0; --i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return true;
}

// a - b, assuming a >= b.
constexpr Words sub_words(const Words& a, const Words& b) {
  Words r{};
  std::uint64_t borrow = 0;
  for (int i = 0; i < 4; ++i) {
    const u128 d = static_cast<u128>(a[i]) - b[i] - borrow;
    r[i] = static_cast<std::uint64_t>(d);
    borrow = static_cast<std::uint64_t>(d >> 64) ? 1 : 0;
  }
  return r;
}

// Returns carry out.
constexpr std::uint64_t add_words(Words& r, const Words& a, const Words& b) {
  u128 c = 0;
  for (int i = 0; i < 4; ++i) {
    c += static_cast<u128>(a[i]) + b[i];
    r[i] = static_cast<std::uint64_t>(c);
    c >>= 64;
  }
  return static_cast<std::uint64_t>(c);
}

constexpr Words add_mod(const Words& a, const Words& b) {
  Words r{};
  const std::uint64_t carry = add_words(r, a, b);
  if (carry || geq(r, kOrder)) r = sub_words(r, kOrder);
  return r;
}

// -l^{-1} mod 2^64 by Newton iteration.
constexpr std::uint64_t compute_n0() {
  std::uint64_t inv = 1;
  for (int i = 0; i < 7; ++i) inv *= 2 - kOrder[0] * inv;
  return ~inv + 1;
}
constexpr std::uint64_t kN0 = compute_n0();

// 2^(64*4*k) mod l by repeated doubling.
constexpr Words compute_r_power(int doublings) {
  Words r = {1, 0, 0, 0};
  for (int i = 0; i < doublings; ++i) r = add_mod(r, r);
  return r;
}
constexpr Words kR2 = compute_r_power(512);

// Montgomery product a*b*2^-256 mod l for a < 2^256, b < l.
Words mont_mul(const Words& a, const Words& b) {
  std::uint64_t t[6] = {0, 0, 0, 0, 0, 0};
  for (int i = 0; i < 4; ++i) {
    u128 c = 0;
    for (int j = 0; j < 4; ++j) {
      c += static_cast<u128>(a[j]) * b[i] + t[j];
      t[j] = static_cast<std::uint64_t>(c);
      c >>= 64;
    }
    c += t[4];
    t[4] = static_cast<std::uint64_t>(c);
    t[5] = static_cast<std::uint64_t>(c >> 64);

    const std::uint64_t m = t[0] * kN0;
    c = static_cast<u128>(m) * kOrder[0] + t[0];
    c >>= 64;
    for (int j = 1; j < 4; ++j) {
      c += static_cast<u128>(m) * kOrder[j] + t[j];
      t[j - 1] = static_cast<std::uint64_t>(c);
      c >>= 64;
    }
    c += t[4];
    t[3] = static_cast<std::uint64_t>(c);
    t[4] = t[5] + static_cast<std::uint64_t>(c >> 64);
  }
  Words r = {t[0], t[1], t[2], t[3]};
  if (t[4] || geq(r, kOrder)) r = sub_words(r, kOrder);
  return r;
}

Words reduce_256(Words x) {
  while (geq(x, kOrder)) x = sub_words(x, kOrder);
  return x;
}

Words load_words(const std::uint8_t* in) {
  Words w{};
  for (int i = 0; i < 4; ++i) {
    std::uint64_t v = 0;
    for (int j = 7; j >= 0; --j) v = (v << 8) | in[8 * i + j];
    w[i] = v;
  }
  return w;
}

std::array<std::uint8_t, 32> store_words(const Words& w) {
  std::array<std::uint8_t, 32> out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 8; ++j) out[8 * i + j] = static_cast<std::uint8_t>(w[i] >> (8 * j));
  return out;
}

// base^exp mod l, exponent given as words (any 256-bit value).
Words pow_words(const Words& base, const Words& exp) {
  const Words base_m = mont_mul(base, kR2);
  Words acc = mont_mul({1, 0, 0, 0}, kR2);
  for (int i = 255; i >= 0; --i) {
    acc = mont_mul(acc, acc);
    if ((exp[i >> 6] >> (i & 63)) & 1) acc = mont_mul(acc, base_m);
  }
  return mont_mul(acc, {1, 0, 0, 0});
}

}  // namespace

const Scalar::Words& Scalar::order() { return kOrder; }

Scalar Scalar::from_u64(std::uint64_t x) { return Scalar(Words{x, 0, 0, 0}); }

std::optional<Scalar> Scalar::from_bytes_canonical(std::span<const std::uint8_t, 32> in) {
  const Words w = load_words(in.data());
  if (geq(w, kOrder)) return std::nullopt;
  return Scalar(w);
}

Scalar Scalar::from_bytes_wide(std::span<const std::uint8_t, 64> in) {
  const Words lo = reduce_256(load_words(in.data()));
  const Words hi = reduce_256(load_words(in.data() + 32));
  // hi * 2^256 = mont_mul(hi, 2^512)
  return Scalar(add_mod(lo, mont_mul(hi, kR2)));
}

Scalar Scalar::random(RandomSource& rng) {
  std::array<std::uint8_t, 64> buf{};
  rng.fill(buf);
  return from_bytes_wide(buf);
}

Scalar Scalar::random_nonzero(RandomSource& rng) {
  for (;;) {
    Scalar s = random(rng);
    if (!s.is_zero()) return s;
  }
}

std::array<std::uint8_t, 32> Scalar::to_bytes() const { return store_words(w_); }

std::string Scalar::to_hex() const {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (auto b : to_bytes()) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 15]);
  }
  return out;
}

Scalar operator+(const Scalar& a, const Scalar& b) { return Scalar(add_mod(a.w_, b.w_)); }

Scalar operator-(const Scalar& a, const Scalar& b) {
  if (geq(a.w_, b.w_)) return Scalar(sub_words(a.w_, b.w_));
  return Scalar(add_mod(sub_words(kOrder, b.w_), a.w_));
}

Scalar operator*(const Scalar& a, const Scalar& b) {
  return Scalar(mont_mul(mont_mul(a.w_, b.w_), kR2));
}

Scalar Scalar::invert() const {
  if (is_zero()) throw Error(ErrorCode::InversionOfZero, "scalar inverse of zero");
  return Scalar(pow_words(w_, kOrderMinusTwo));
}

Scalar Scalar::pow(const ExponentScalar& e) const { return Scalar(pow_words(w_, e.words())); }

// --- ExponentScalar -------------------------------------------------------

ExponentScalar ExponentScalar::from_u64(std::uint64_t x) { return ExponentScalar(Words{x, 0, 0, 0}); }

ExponentScalar ExponentScalar::from_bytes_wide(std::span<const std::uint8_t, 64> in) {
  // Binary long division; the remainder stays below 2^254 so four words
  // suffice even after the shift.
  Words r{};
  for (int i = 511; i >= 0; --i) {
    const std::uint64_t bit = (in[i >> 3] >> (i & 7)) & 1;
    for (int k = 3; k > 0; --k) r[k] = (r[k] << 1) | (r[k - 1] >> 63);
    r[0] = (r[0] << 1) | bit;
    if (geq(r, kOrderMinusOne)) r = sub_words(r, kOrderMinusOne);
  }
  return ExponentScalar(r);
}

std::optional<ExponentScalar> ExponentScalar::from_bytes_canonical(
    std::span<const std::uint8_t, 32> in) {
  const Words w = load_words(in.data());
  if (geq(w, kOrderMinusOne)) return std::nullopt;
  return ExponentScalar(w);
}

std::array<std::uint8_t, 32> ExponentScalar::to_bytes() const { return store_words(w_); }

int ExponentScalar::popcount() const {
  int n = 0;
  for (auto w : w_) n += std::popcount(w);
  return n;
}

int ExponentScalar::bit_length() const {
  for (int i = 3; i >= 0; --i) {
    if (w_[i]) return 64 * i + 64 - std::countl_zero(w_[i]);
  }
  return 0;
}

}  // namespace pep3
