#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>

namespace pep3 {

// Element of GF(p), p = 2^255 - 19, in five unsigned 51-bit limbs.
// Limbs are kept loosely reduced (< 2^52) between operations; to_bytes()
// produces the unique canonical encoding.
class FieldElement {
 public:
  using Limbs = std::array<std::uint64_t, 5>;

  constexpr FieldElement() = default;
  constexpr explicit FieldElement(const Limbs& limbs) : v_(limbs) {}

  static constexpr FieldElement zero() { return FieldElement(); }
  static constexpr FieldElement one() { return FieldElement(Limbs{1, 0, 0, 0, 0}); }
  static FieldElement from_u64(std::uint64_t x);

  // Little-endian; the top bit of byte 31 is ignored and values >= p are
  // reduced.
  static FieldElement from_bytes(std::span<const std::uint8_t, 32> in);
  // Rejects encodings with the top bit set or a value >= p.
  static std::optional<FieldElement> from_bytes_canonical(std::span<const std::uint8_t, 32> in);
  std::array<std::uint8_t, 32> to_bytes() const;

  bool is_zero() const;
  // "Negative" means the canonical encoding is odd.
  bool is_negative() const;
  FieldElement abs() const { return is_negative() ? -*this : *this; }

  FieldElement square() const { return *this * *this; }
  FieldElement square_n(int n) const;
  FieldElement invert() const;
  FieldElement pow22523() const;  // x^((p-5)/8)

  // Returns (was_square, r) with r non-negative and r^2 = u/v when u/v is a
  // square, otherwise r^2 = sqrt(-1) * u/v. The ristretto255 convention.
  static std::pair<bool, FieldElement> sqrt_ratio_m1(const FieldElement& u, const FieldElement& v);

  const Limbs& limbs() const { return v_; }

  friend FieldElement operator+(const FieldElement& a, const FieldElement& b) {
    Limbs h;
    for (int i = 0; i < 5; ++i) h[i] = a.v_[i] + b.v_[i];
    return FieldElement(carry(h));
  }

  friend FieldElement operator-(const FieldElement& a, const FieldElement& b) {
    // Add 4p before subtracting so limbs stay non-negative.
    Limbs h;
    h[0] = (a.v_[0] + 0x1fffffffffffb4ULL) - b.v_[0];
    h[1] = (a.v_[1] + 0x1ffffffffffffcULL) - b.v_[1];
    h[2] = (a.v_[2] + 0x1ffffffffffffcULL) - b.v_[2];
    h[3] = (a.v_[3] + 0x1ffffffffffffcULL) - b.v_[3];
    h[4] = (a.v_[4] + 0x1ffffffffffffcULL) - b.v_[4];
    return FieldElement(carry(h));
  }

  friend FieldElement operator-(const FieldElement& a) { return zero() - a; }

  friend FieldElement operator*(const FieldElement& f, const FieldElement& g) {
    using u128 = unsigned __int128;
    const auto& a = f.v_;
    const auto& b = g.v_;
    const std::uint64_t b1_19 = b[1] * 19, b2_19 = b[2] * 19, b3_19 = b[3] * 19, b4_19 = b[4] * 19;
    u128 t0 = (u128)a[0] * b[0] + (u128)a[1] * b4_19 + (u128)a[2] * b3_19 + (u128)a[3] * b2_19 +
              (u128)a[4] * b1_19;
    u128 t1 = (u128)a[0] * b[1] + (u128)a[1] * b[0] + (u128)a[2] * b4_19 + (u128)a[3] * b3_19 +
              (u128)a[4] * b2_19;
    u128 t2 = (u128)a[0] * b[2] + (u128)a[1] * b[1] + (u128)a[2] * b[0] + (u128)a[3] * b4_19 +
              (u128)a[4] * b3_19;
    u128 t3 = (u128)a[0] * b[3] + (u128)a[1] * b[2] + (u128)a[2] * b[1] + (u128)a[3] * b[0] +
              (u128)a[4] * b4_19;
    u128 t4 = (u128)a[0] * b[4] + (u128)a[1] * b[3] + (u128)a[2] * b[2] + (u128)a[3] * b[1] +
              (u128)a[4] * b[0];
    constexpr std::uint64_t mask = (1ULL << 51) - 1;
    Limbs h;
    std::uint64_t c;
    h[0] = (std::uint64_t)t0 & mask; c = (std::uint64_t)(t0 >> 51);
    t1 += c; h[1] = (std::uint64_t)t1 & mask; c = (std::uint64_t)(t1 >> 51);
    t2 += c; h[2] = (std::uint64_t)t2 & mask; c = (std::uint64_t)(t2 >> 51);
    t3 += c; h[3] = (std::uint64_t)t3 & mask; c = (std::uint64_t)(t3 >> 51);
    t4 += c; h[4] = (std::uint64_t)t4 & mask; c = (std::uint64_t)(t4 >> 51);
    h[0] += c * 19;
    h[1] += h[0] >> 51;
    h[0] &= mask;
    return FieldElement(h);
  }

  // Compares canonical encodings.
  friend bool operator==(const FieldElement& a, const FieldElement& b);

 private:
  static Limbs carry(Limbs h) {
    constexpr std::uint64_t mask = (1ULL << 51) - 1;
    std::uint64_t c;
    c = h[0] >> 51; h[1] += c; h[0] &= mask;
    c = h[1] >> 51; h[2] += c; h[1] &= mask;
    c = h[2] >> 51; h[3] += c; h[2] &= mask;
    c = h[3] >> 51; h[4] += c; h[3] &= mask;
    c = h[4] >> 51; h[0] += c * 19; h[4] &= mask;
    return h;
  }

  Limbs v_{};
};

namespace field_constants {
// Curve constants for the twisted Edwards form -x^2 + y^2 = 1 + d x^2 y^2.
inline constexpr FieldElement d{{0x34dca135978a3, 0x1a8283b156ebd, 0x5e7a26001c029,
                                 0x739c663a03cbb, 0x52036cee2b6ff}};
inline constexpr FieldElement d2{{0x69b9426b2f159, 0x35050762add7a, 0x3cf44c0038052,
                                  0x6738cc7407977, 0x2406d9dc56dff}};
// 2^((p-1)/4), non-negative.
inline constexpr FieldElement sqrt_m1{{0x61b274a0ea0b0, 0xd5a5fc8f189d, 0x7ef5e9cbd0c60,
                                       0x78595a6804c9e, 0x2b8324804fc1d}};
// sqrt(a*d - 1); the odd root.
inline constexpr FieldElement sqrt_ad_minus_one{{0x7f6a0497b2e1b, 0x1836f0a97afd2,
                                                 0x7d747f6be7638, 0x456079e7e6498,
                                                 0x376931bf2b834}};
// 1/sqrt(a - d), non-negative.
inline constexpr FieldElement invsqrt_a_minus_d{{0xfdaa805d40ea, 0x2eb482e57d339,
                                                 0x7610274bc58, 0x6510b613dc8ff,
                                                 0x786c8905cfaff}};
inline constexpr FieldElement one_minus_d_sq{{0x409c1945fc176, 0x719abc6a1fc4f,
                                              0x1c37f90b20684, 0x6bccca55eedf,
                                              0x29072a8b2b3e}};
inline constexpr FieldElement d_minus_one_sq{{0x55aaa44ed4d20, 0x59603c3332635,
                                              0x26d3baf4a7928, 0x120a66e6997a9,
                                              0x5968b37af66c2}};
}  // namespace field_constants

}  // namespace pep3
