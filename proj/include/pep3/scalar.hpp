#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "pep3/random.hpp"

namespace pep3 {

class ExponentScalar;

// Integer modulo the group order
//   l = 2^252 + 27742317777372353535851937790883648493.
// Always held fully reduced as four little-endian 64-bit words.
class Scalar {
 public:
  using Words = std::array<std::uint64_t, 4>;

  constexpr Scalar() = default;

  static Scalar zero() { return Scalar(); }
  static Scalar one() { return from_u64(1); }
  static Scalar from_u64(std::uint64_t x);
  // 32-byte little-endian; nullopt unless the value is < l.
  static std::optional<Scalar> from_bytes_canonical(std::span<const std::uint8_t, 32> in);
  // Any 64-byte little-endian string, reduced mod l.
  static Scalar from_bytes_wide(std::span<const std::uint8_t, 64> in);
  static Scalar random(RandomSource& rng);
  static Scalar random_nonzero(RandomSource& rng);

  std::array<std::uint8_t, 32> to_bytes() const;
  std::string to_hex() const;
  const Words& words() const { return w_; }

  bool is_zero() const { return (w_[0] | w_[1] | w_[2] | w_[3]) == 0; }
  bool bit(int i) const { return (w_[i >> 6] >> (i & 63)) & 1; }

  // Throws Error(InversionOfZero) for zero.
  Scalar invert() const;
  // this^e mod l for an exponent taken mod l-1.
  Scalar pow(const ExponentScalar& e) const;

  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a) { return zero() - a; }
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  Scalar& operator+=(const Scalar& b) { return *this = *this + b; }
  Scalar& operator*=(const Scalar& b) { return *this = *this * b; }

  friend bool operator==(const Scalar&, const Scalar&) = default;

  // l as words; l - 1 for the exponent ring.
  static const Words& order();

 private:
  explicit constexpr Scalar(const Words& w) : w_(w) {}
  Words w_{};
};

// Integer modulo l - 1, used as the exponent when deriving per-party shares
// from master keys.
class ExponentScalar {
 public:
  using Words = std::array<std::uint64_t, 4>;

  constexpr ExponentScalar() = default;
  static ExponentScalar from_u64(std::uint64_t x);
  // Reduce an arbitrary 64-byte little-endian string mod l - 1.
  static ExponentScalar from_bytes_wide(std::span<const std::uint8_t, 64> in);
  static std::optional<ExponentScalar> from_bytes_canonical(std::span<const std::uint8_t, 32> in);

  std::array<std::uint8_t, 32> to_bytes() const;
  const Words& words() const { return w_; }
  bool is_zero() const { return (w_[0] | w_[1] | w_[2] | w_[3]) == 0; }
  bool bit(int i) const { return (w_[i >> 6] >> (i & 63)) & 1; }
  int popcount() const;
  // Highest set bit index + 1; at most 253.
  int bit_length() const;

  friend bool operator==(const ExponentScalar&, const ExponentScalar&) = default;

 private:
  explicit constexpr ExponentScalar(const Words& w) : w_(w) {}
  Words w_{};
};

}  // namespace pep3
