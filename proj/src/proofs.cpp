#include "pep3/proofs.hpp"

#include <cstring>

#include "pep3/error.hpp"

namespace pep3 {

// --- encodings -------------------------------------------------------------

void write_element(ByteWriter& w, const GroupElement& e) { w.raw(e.encode()); }

GroupElement read_element(ByteReader& r) {
  auto e = GroupElement::decode(r.fixed<32>());
  if (!e) throw Error(ErrorCode::Malformed, "invalid group element encoding");
  return *e;
}

void write_scalar(ByteWriter& w, const Scalar& s) { w.raw(s.to_bytes()); }

Scalar read_scalar(ByteReader& r) {
  auto s = Scalar::from_bytes_canonical(r.fixed<32>());
  if (!s) throw Error(ErrorCode::Malformed, "non-canonical scalar");
  return *s;
}

void write_cyphertext(ByteWriter& w, const Cyphertext& c) { w.raw(c.encode()); }

Cyphertext read_cyphertext(ByteReader& r) {
  auto c = Cyphertext::decode(r.fixed<96>());
  if (!c) throw Error(ErrorCode::Malformed, "invalid cyphertext encoding");
  return *c;
}

DHCertificate::Encoding DHCertificate::encode() const {
  Encoding out{};
  const auto a = r_m.encode(), b = r_b.encode(), c = s.to_bytes();
  std::memcpy(out.data(), a.data(), 32);
  std::memcpy(out.data() + 32, b.data(), 32);
  std::memcpy(out.data() + 64, c.data(), 32);
  return out;
}

std::optional<DHCertificate> DHCertificate::decode(std::span<const std::uint8_t, 96> in) {
  auto rm = GroupElement::decode(in.subspan<0, 32>());
  auto rb = GroupElement::decode(in.subspan<32, 32>());
  auto s = Scalar::from_bytes_canonical(in.subspan<64, 32>());
  if (!rm || !rb || !s) return std::nullopt;
  return DHCertificate{*rm, *rb, *s};
}

namespace {

void write_cert(ByteWriter& w, const DHCertificate& c) { w.raw(c.encode()); }

DHCertificate read_cert(ByteReader& r) {
  auto c = DHCertificate::decode(r.fixed<96>());
  if (!c) throw Error(ErrorCode::Malformed, "invalid certificate encoding");
  return *c;
}

Scalar challenge(std::string_view tag, const Triplet& t, const GroupElement& r_m,
                 const GroupElement& r_b) {
  return hash_to_scalar(tag, {t.a, t.m, t.n, r_m, r_b});
}

}  // namespace

// --- nonces ----------------------------------------------------------------

NonceStream NonceStream::fresh(RandomSource& rng) {
  std::array<std::uint8_t, 32> seed{};
  rng.fill(seed);
  return NonceStream(seed);
}

Scalar NonceStream::next() {
  ByteWriter w;
  w.raw(seed_).u32(counter_++);
  return hash_bytes_to_scalar("pep3-nonce", w.bytes());
}

// --- DH triplets -----------------------------------------------------------

DHCertificate dh_certify(const Scalar& a, const Triplet& t, const Scalar& nonce,
                         std::string_view tag) {
  const GroupElement r_b = GroupElement::base_mul(nonce);
  const GroupElement r_m = nonce * t.m;
  const Scalar h = challenge(tag, t, r_m, r_b);
  return {r_m, r_b, nonce + h * a};
}

std::pair<GroupElement, DHCertificate> dh_prove(const Scalar& a, const GroupElement& A,
                                               const GroupElement& M, const Scalar& nonce,
                                               std::string_view tag) {
  const GroupElement N = a * M;
  return {N, dh_certify(a, Triplet{A, M, N}, nonce, tag)};
}

std::pair<GroupElement, DHCertificate> dh_prove(const Scalar& a, const GroupElement& A,
                                               const GroupElement& M, RandomSource& rng,
                                               std::string_view tag) {
  return dh_prove(a, A, M, Scalar::random(rng), tag);
}

bool dh_verify(const Triplet& t, const DHCertificate& cert, std::string_view tag) {
  const Scalar h = challenge(tag, t, cert.r_m, cert.r_b);
  const Scalar neg_h = -h;
  // sB = R_B + hA and sM = R_M + hN
  if (!(GroupElement::double_mul(cert.s, GroupElement::base(), neg_h, t.a) == cert.r_b)) return false;
  return GroupElement::double_mul(cert.s, t.m, neg_h, t.n) == cert.r_m;
}

// --- product chains --------------------------------------------------------

void ChainProof::write(ByteWriter& w) const {
  w.u16(static_cast<std::uint16_t>(links.size()));
  for (const auto& l : links) {
    write_element(w, l.product);
    write_cert(w, l.cert);
  }
}

ChainProof ChainProof::read(ByteReader& r) {
  ChainProof p;
  const auto n = r.u16();
  p.links.reserve(n);
  for (std::uint16_t i = 0; i < n; ++i) {
    GroupElement product = read_element(r);
    p.links.push_back({product, read_cert(r)});
  }
  return p;
}

bool operator==(const ChainProof& a, const ChainProof& b) {
  if (a.links.size() != b.links.size()) return false;
  for (std::size_t i = 0; i < a.links.size(); ++i) {
    if (!(a.links[i].product == b.links[i].product) || !(a.links[i].cert == b.links[i].cert))
      return false;
  }
  return true;
}

ChainProof chain_prove(std::span<const Scalar> factors, NonceStream& nonces, std::string_view tag) {
  ChainProof proof;
  if (factors.size() < 2) return proof;
  Scalar running = factors[0];
  GroupElement running_point = GroupElement::base_mul(running);
  for (std::size_t j = 1; j < factors.size(); ++j) {
    const Scalar next = running * factors[j];
    const GroupElement next_point = GroupElement::base_mul(next);
    const Triplet t{running_point, GroupElement::base_mul(factors[j]), next_point};
    proof.links.push_back({next_point, dh_certify(running, t, nonces.next(), tag)});
    running = next;
    running_point = next_point;
  }
  return proof;
}

std::optional<GroupElement> chain_verify(std::span<const GroupElement> factor_points,
                                         const ChainProof& proof, std::string_view tag) {
  if (factor_points.empty()) {
    if (!proof.links.empty()) return std::nullopt;
    return GroupElement::base();
  }
  if (proof.links.size() != factor_points.size() - 1) return std::nullopt;
  GroupElement current = factor_points[0];
  for (std::size_t j = 0; j < proof.links.size(); ++j) {
    const auto& link = proof.links[j];
    if (!dh_verify(Triplet{current, factor_points[j + 1], link.product}, link.cert, tag))
      return std::nullopt;
    current = link.product;
  }
  return current;
}

// --- composite factors -----------------------------------------------------

void CompositeFactorProof::write(ByteWriter& w) const {
  write_element(w, from_point);
  write_element(w, to_point);
  from_chain.write(w);
  to_chain.write(w);
  write_cert(w, ratio);
}

CompositeFactorProof CompositeFactorProof::read(ByteReader& r) {
  CompositeFactorProof p;
  p.from_point = read_element(r);
  p.to_point = read_element(r);
  p.from_chain = ChainProof::read(r);
  p.to_chain = ChainProof::read(r);
  p.ratio = read_cert(r);
  return p;
}

namespace {
Scalar product(std::span<const Scalar> xs) {
  Scalar p = Scalar::one();
  for (const auto& x : xs) p *= x;
  return p;
}
}  // namespace

CompositeFactorProof composite_prove(std::span<const Scalar> from_factors,
                                     std::span<const Scalar> to_factors, NonceStream& nonces) {
  CompositeFactorProof p;
  const Scalar from = product(from_factors);
  const Scalar to = product(to_factors);
  const Scalar f = to * from.invert();
  p.from_point = GroupElement::base_mul(from);
  p.to_point = GroupElement::base_mul(to);
  p.from_chain = chain_prove(from_factors, nonces);
  p.to_chain = chain_prove(to_factors, nonces);
  p.ratio = dh_certify(f, Triplet{GroupElement::base_mul(f), p.from_point, p.to_point}, nonces.next());
  return p;
}

bool composite_verify(const GroupElement& factor_point, std::span<const GroupElement> from_points,
                      std::span<const GroupElement> to_points, const CompositeFactorProof& proof) {
  const auto from = chain_verify(from_points, proof.from_chain);
  if (!from || !(*from == proof.from_point)) return false;
  const auto to = chain_verify(to_points, proof.to_chain);
  if (!to || !(*to == proof.to_point)) return false;
  return dh_verify(Triplet{factor_point, proof.from_point, proof.to_point}, proof.ratio);
}

// --- RSK certificates ------------------------------------------------------

std::array<Triplet, 5> RSKCertificate::triplets(const Cyphertext& c_in, const Cyphertext& c_out) const {
  return {Triplet{k_point, c_in.blinding + r_point, c_out.blinding},
          Triplet{n_point, c_in.core + r_tau, c_out.core},
          Triplet{s_point, c_in.target, c_out.target},
          Triplet{s_point, k_point, n_point},
          Triplet{r_point, c_in.target, r_tau}};
}

void RSKCertificate::write(ByteWriter& w) const {
  write_element(w, s_point);
  write_element(w, n_point);
  write_element(w, k_point);
  write_element(w, r_point);
  write_element(w, r_tau);
  for (const auto& c : certs) write_cert(w, c);
  w.u8(static_cast<std::uint8_t>((s_factor ? 1 : 0) | (n_factor ? 2 : 0)));
  if (s_factor) s_factor->write(w);
  if (n_factor) n_factor->write(w);
}

RSKCertificate RSKCertificate::read(ByteReader& r) {
  RSKCertificate c;
  c.s_point = read_element(r);
  c.n_point = read_element(r);
  c.k_point = read_element(r);
  c.r_point = read_element(r);
  c.r_tau = read_element(r);
  for (auto& cert : c.certs) cert = read_cert(r);
  const auto flags = r.u8();
  if (flags & ~3u) throw Error(ErrorCode::Malformed, "unknown certificate flags");
  if (flags & 1) c.s_factor = CompositeFactorProof::read(r);
  if (flags & 2) c.n_factor = CompositeFactorProof::read(r);
  return c;
}

Bytes RSKCertificate::encode() const {
  ByteWriter w;
  write(w);
  return w.take();
}

RSKCertificate RSKCertificate::decode(std::span<const std::uint8_t> in) {
  ByteReader r(in);
  auto c = read(r);
  r.expect_done();
  return c;
}

RSKCertificate rsk_prove(const Cyphertext& c_in, const Cyphertext& c_out, const Scalar& s,
                         const Scalar& n, const Scalar& r, NonceStream& nonces) {
  if (s.is_zero() || n.is_zero()) throw Error(ErrorCode::InconsistentInput, "zero rsk factor");
  if (!(rsk(c_in, s, n, r) == c_out))
    throw Error(ErrorCode::InconsistentInput, "output is not rsk of input under the given scalars");
  const Scalar k = n * s.invert();
  RSKCertificate cert;
  cert.s_point = GroupElement::base_mul(s);
  cert.n_point = GroupElement::base_mul(n);
  cert.k_point = GroupElement::base_mul(k);
  cert.r_point = GroupElement::base_mul(r);
  cert.r_tau = r * c_in.target;
  const auto t = cert.triplets(c_in, c_out);
  const Scalar witnesses[5] = {k, n, s, s, r};
  for (int i = 0; i < 5; ++i) cert.certs[i] = dh_certify(witnesses[i], t[i], nonces.next(), kTagRsk);
  return cert;
}

namespace {
bool five_triplets_verify(const Cyphertext& c_in, const Cyphertext& c_out, const RSKCertificate& cert) {
  const auto t = cert.triplets(c_in, c_out);
  for (int i = 0; i < 5; ++i) {
    if (!dh_verify(t[i], cert.certs[i], kTagRsk)) return false;
  }
  return true;
}
}  // namespace

bool rsk_verify(const Cyphertext& c_in, const Cyphertext& c_out, const GroupElement& expected_sB,
                const GroupElement& expected_nB, const RSKCertificate& cert) {
  if (!(cert.s_point == expected_sB) || !(cert.n_point == expected_nB)) return false;
  return five_triplets_verify(c_in, c_out, cert);
}

bool rsk_verify_composite(const Cyphertext& c_in, const Cyphertext& c_out, const FactorShares& s_shares,
                          const FactorShares& n_shares, const RSKCertificate& cert) {
  if (!cert.s_factor || !cert.n_factor) return false;
  if (!composite_verify(cert.s_point, s_shares.from, s_shares.to, *cert.s_factor)) return false;
  if (!composite_verify(cert.n_point, n_shares.from, n_shares.to, *cert.n_factor)) return false;
  return five_triplets_verify(c_in, c_out, cert);
}

// --- derivation ------------------------------------------------------------

PowersTable powers_table(const Scalar& master) {
  PowersTable out;
  out.reserve(kPowersCount);
  Scalar x = master;
  for (int i = 0; i < kPowersCount; ++i) {
    out.push_back(GroupElement::base_mul(x));
    x = x * x;
  }
  return out;
}

DerivationProof derivation_prove(const Scalar& master, const ExponentScalar& exponent,
                                 NonceStream& nonces) {
  if (exponent.is_zero()) throw Error(ErrorCode::InvalidArgument, "zero derivation exponent");
  std::vector<Scalar> factors;
  Scalar x = master;
  const int len = exponent.bit_length();
  for (int i = 0; i < len; ++i) {
    if (exponent.bit(i)) factors.push_back(x);
    x = x * x;
  }
  return {chain_prove(factors, nonces, kTagDerive)};
}

bool derivation_verify(const PowersTable& powers, const ExponentScalar& exponent,
                       const GroupElement& claimed_key, const DerivationProof& proof) {
  if (powers.size() != kPowersCount || exponent.is_zero()) return false;
  std::vector<GroupElement> points;
  for (int i = 0; i < exponent.bit_length(); ++i) {
    if (exponent.bit(i)) points.push_back(powers[i]);
  }
  const auto end = chain_verify(points, proof.chain, kTagDerive);
  return end && *end == claimed_key;
}

}  // namespace pep3
