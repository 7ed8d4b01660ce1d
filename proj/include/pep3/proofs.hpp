#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pep3/bytes.hpp"
#include "pep3/elgamal.hpp"
#include "pep3/group.hpp"

namespace pep3 {

inline constexpr std::string_view kTagDhCert = "pep3-dh-cert";
inline constexpr std::string_view kTagRsk = "pep3-rsk";
inline constexpr std::string_view kTagChain = "pep3-chain";
inline constexpr std::string_view kTagDerive = "pep3-derive";

// (A, M, N) with A = aB and N = aM for some a.
struct Triplet {
  GroupElement a, m, n;
};

struct DHCertificate {
  GroupElement r_m;
  GroupElement r_b;
  Scalar s;

  using Encoding = std::array<std::uint8_t, 96>;
  Encoding encode() const;
  static std::optional<DHCertificate> decode(std::span<const std::uint8_t, 96> in);
  friend bool operator==(const DHCertificate&, const DHCertificate&) = default;
};

// Deterministic nonce stream: the i-th nonce is a hash of (seed, i). A
// prover that keeps the seed can regenerate byte-identical certificates.
class NonceStream {
 public:
  explicit NonceStream(const std::array<std::uint8_t, 32>& seed) : seed_(seed) {}
  static NonceStream fresh(RandomSource& rng);
  Scalar next();
  const std::array<std::uint8_t, 32>& seed() const { return seed_; }

 private:
  std::array<std::uint8_t, 32> seed_;
  std::uint32_t counter_ = 0;
};

// Proves knowledge of a with A = aB and N = aM; returns N and the certificate.
std::pair<GroupElement, DHCertificate> dh_prove(const Scalar& a, const GroupElement& A,
                                               const GroupElement& M, const Scalar& nonce,
                                               std::string_view tag = kTagDhCert);
std::pair<GroupElement, DHCertificate> dh_prove(const Scalar& a, const GroupElement& A,
                                               const GroupElement& M, RandomSource& rng,
                                               std::string_view tag = kTagDhCert);
// Variant when N is already known to the prover (saves one multiplication).
DHCertificate dh_certify(const Scalar& a, const Triplet& t, const Scalar& nonce,
                         std::string_view tag = kTagDhCert);
bool dh_verify(const Triplet& t, const DHCertificate& cert, std::string_view tag = kTagDhCert);

// Proof that `result` = (f_1 ... f_k) B given the points f_i B. Links holds
// the running products (f_1 ... f_j) B for j = 2..k, each certified against
// the previous running product and the next factor. k = 0 yields B.
struct ChainProof {
  struct Link {
    GroupElement product;
    DHCertificate cert;
  };
  std::vector<Link> links;

  void write(ByteWriter& w) const;
  static ChainProof read(ByteReader& r);
  friend bool operator==(const ChainProof& a, const ChainProof& b);
};

ChainProof chain_prove(std::span<const Scalar> factors, NonceStream& nonces,
                       std::string_view tag = kTagChain);
// Returns the certified product point, or nullopt if any link fails or the
// chain length does not match the number of factor points.
std::optional<GroupElement> chain_verify(std::span<const GroupElement> factor_points,
                                         const ChainProof& proof, std::string_view tag = kTagChain);

// A composite key factor f = to / from, where from and to are each products of
// publicly known share points. `ratio` certifies (fB, from_point, to_point).
struct CompositeFactorProof {
  GroupElement from_point;
  GroupElement to_point;
  ChainProof from_chain;
  ChainProof to_chain;
  DHCertificate ratio;

  void write(ByteWriter& w) const;
  static CompositeFactorProof read(ByteReader& r);
};

CompositeFactorProof composite_prove(std::span<const Scalar> from_factors,
                                     std::span<const Scalar> to_factors, NonceStream& nonces);
// Checks the chains against the given share points and that factor_point is
// the certified ratio.
bool composite_verify(const GroupElement& factor_point, std::span<const GroupElement> from_points,
                      std::span<const GroupElement> to_points, const CompositeFactorProof& proof);

// Certificate for c_out = rsk(c_in, s, n, r). The five triplets are
//   (k B, beta + rB, beta'), (nB, gamma + r tau, gamma'), (sB, tau, tau'),
//   (sB, kB, nB), (rB, tau, r tau)
// with k = n/s; beta + rB and gamma + r tau are rebuilt from c_in, rB and r tau.
struct RSKCertificate {
  GroupElement s_point;
  GroupElement n_point;
  GroupElement k_point;
  GroupElement r_point;
  GroupElement r_tau;
  std::array<DHCertificate, 5> certs;
  std::optional<CompositeFactorProof> s_factor;
  std::optional<CompositeFactorProof> n_factor;

  Bytes encode() const;
  static RSKCertificate decode(std::span<const std::uint8_t> in);  // throws Malformed
  void write(ByteWriter& w) const;
  static RSKCertificate read(ByteReader& r);

  // The five triplets implied by (c_in, c_out) and the stated points.
  std::array<Triplet, 5> triplets(const Cyphertext& c_in, const Cyphertext& c_out) const;
};

// Throws InconsistentInput unless c_out = rsk(c_in, s, n, r).
RSKCertificate rsk_prove(const Cyphertext& c_in, const Cyphertext& c_out, const Scalar& s,
                         const Scalar& n, const Scalar& r, NonceStream& nonces);
bool rsk_verify(const Cyphertext& c_in, const Cyphertext& c_out, const GroupElement& expected_sB,
                const GroupElement& expected_nB, const RSKCertificate& cert);

// Expected composite structure for one factor: the share points whose
// product forms the numerator and the denominator.
struct FactorShares {
  std::vector<GroupElement> from;
  std::vector<GroupElement> to;
};
// Accepts when both composite proofs are present, tie the stated sB and nB
// to the given share points, and the five triplets verify.
bool rsk_verify_composite(const Cyphertext& c_in, const Cyphertext& c_out, const FactorShares& s_shares,
                          const FactorShares& n_shares, const RSKCertificate& cert);

// Derivation of (master^e) B from the published powers (master^(2^i)) B.
struct DerivationProof {
  ChainProof chain;
  void write(ByteWriter& w) const { chain.write(w); }
  static DerivationProof read(ByteReader& r) { return {ChainProof::read(r)}; }
};

inline constexpr int kPowersCount = 253;
using PowersTable = std::vector<GroupElement>;  // kPowersCount entries

// Throws InvalidArgument for a zero exponent.
DerivationProof derivation_prove(const Scalar& master, const ExponentScalar& exponent,
                                 NonceStream& nonces);
bool derivation_verify(const PowersTable& powers, const ExponentScalar& exponent,
                       const GroupElement& claimed_key, const DerivationProof& proof);
// (master^(2^i)) B for i = 0..252.
PowersTable powers_table(const Scalar& master);

void write_element(ByteWriter& w, const GroupElement& e);
GroupElement read_element(ByteReader& r);  // throws Malformed
void write_scalar(ByteWriter& w, const Scalar& s);
Scalar read_scalar(ByteReader& r);  // throws Malformed
void write_cyphertext(ByteWriter& w, const Cyphertext& c);
Cyphertext read_cyphertext(ByteReader& r);  // throws Malformed

}  // namespace pep3
