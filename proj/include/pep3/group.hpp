#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pep3/field.hpp"
#include "pep3/scalar.hpp"

namespace pep3 {

// Element of the ristretto255 prime-order group. Internally one Edwards
// representative in extended coordinates; equality and encoding are on the
// ristretto class, so two GroupElements compare equal whenever they encode
// to the same 32 bytes.
class GroupElement {
 public:
  using Encoding = std::array<std::uint8_t, 32>;

  GroupElement();  // identity

  static GroupElement identity() { return GroupElement(); }
  static const GroupElement& base();

  // Canonical ristretto255 decoding; nullopt for the ~94% of 32-byte strings
  // that do not encode a group element.
  static std::optional<GroupElement> decode(std::span<const std::uint8_t, 32> in);
  static std::optional<GroupElement> from_hex(std::string_view hex);
  Encoding encode() const;
  std::string to_hex() const;

  bool is_identity() const;

  friend GroupElement operator+(const GroupElement& a, const GroupElement& b);
  friend GroupElement operator-(const GroupElement& a, const GroupElement& b);
  friend GroupElement operator-(const GroupElement& a);
  GroupElement& operator+=(const GroupElement& b) { return *this = *this + b; }
  GroupElement& operator-=(const GroupElement& b) { return *this = *this - b; }
  GroupElement dbl() const;

  // General variable-base scalar multiplication (instrumented).
  friend GroupElement operator*(const Scalar& s, const GroupElement& p);
  // Fixed-base multiplication s*B from a precomputed table (instrumented).
  static GroupElement base_mul(const Scalar& s);
  // a*P + b*Q in one interleaved pass (instrumented separately).
  static GroupElement double_mul(const Scalar& a, const GroupElement& p, const Scalar& b,
                                 const GroupElement& q);

  friend bool operator==(const GroupElement& a, const GroupElement& b);

  // Edwards representative, for encoding-level algorithms (elligator inverse).
  struct Extended {
    FieldElement x, y, z, t;
  };
  const Extended& extended() const { return p_; }
  static GroupElement from_extended(const Extended& p) { return GroupElement(p); }

 private:
  explicit GroupElement(const Extended& p) : p_(p) {}
  Extended p_;
};

// Per-thread counters of scalar multiplications; used to check the cost
// profile of the cyphertext operations.
struct OpCounters {
  std::uint64_t general = 0;
  std::uint64_t base = 0;
  std::uint64_t dual = 0;
};
OpCounters& op_counters();
void reset_op_counters();

// SHA-512 of (len(tag) || tag || encodings...), reduced mod l.
Scalar hash_to_scalar(std::string_view domain_tag, std::span<const GroupElement> inputs);
Scalar hash_to_scalar(std::string_view domain_tag, std::initializer_list<GroupElement> inputs);
// Same construction over raw bytes.
Scalar hash_bytes_to_scalar(std::string_view domain_tag, std::span<const std::uint8_t> data);

// The ristretto255 elligator2 map of a single field element. ell2(x) = ell2(-x).
GroupElement ell2(const FieldElement& x);

// All x with ell2(x) == a (both signs of each preimage; at most 16).
std::vector<FieldElement> ell2_inverse(const GroupElement& a);

// Non-negative candidate preimages of a, at most 8, each verified or not
// according to `verify`. Unverified candidates are what the algebraic
// inversion yields and are exact in practice; callers that need certainty
// either pass verify=true or re-check with ell2().
std::vector<FieldElement> ell2_candidates(const GroupElement& a, bool verify);

}  // namespace pep3
