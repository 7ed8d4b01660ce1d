#include <doctest.h>

#include "pep3/elgamal.hpp"
#include "pep3/error.hpp"

using namespace pep3;

namespace {

GroupElement random_element(RandomSource& rng) { return GroupElement::base_mul(Scalar::random(rng)); }

}  // namespace

TEST_CASE("encrypt with zero randomness") {
  DeterministicRandom rng(20);
  const auto m = random_element(rng);
  const Scalar s = Scalar::random_nonzero(rng);
  const auto sb = GroupElement::base_mul(s);
  const auto c = encrypt(m, sb, Scalar::zero());
  CHECK(c.blinding.is_identity());
  CHECK(c.core == m);
  CHECK(c.target == sb);
}

TEST_CASE("decrypt inverts encrypt") {
  DeterministicRandom rng(21);
  for (int i = 0; i < 200; ++i) {
    const auto m = random_element(rng);
    const Scalar s = Scalar::random_nonzero(rng);
    const auto c = encrypt(m, GroupElement::base_mul(s), rng);
    CHECK(decrypt(c, s) == m);
    CHECK(decrypt(Cyphertext{GroupElement::identity(), m, c.target}, s) == m);
  }
}

TEST_CASE("encrypting to the wrong target leaves a residue") {
  DeterministicRandom rng(22);
  const auto m = random_element(rng);
  const Scalar s = Scalar::random_nonzero(rng), other = Scalar::random_nonzero(rng);
  const Scalar r = Scalar::random_nonzero(rng);
  const auto tau = GroupElement::base_mul(other);
  const auto c = encrypt(m, tau, r);
  const auto expected = m + r * (tau - GroupElement::base_mul(s));
  CHECK(decrypt(c, s) == expected);
  CHECK_FALSE(decrypt(c, s) == m);
}

TEST_CASE("primitive identities and composition") {
  DeterministicRandom rng(23);
  const Scalar s = Scalar::random_nonzero(rng);
  const auto c = encrypt(random_element(rng), GroupElement::base_mul(s), rng);
  CHECK(rekey(c, Scalar::one()) == c);
  CHECK(reshuffle(c, Scalar::one()) == c);
  CHECK(rerandomise(c, Scalar::zero()) == c);
  CHECK(rsk(c, Scalar::one(), Scalar::one(), Scalar::zero()) == c);
  const Scalar a = Scalar::random_nonzero(rng), b = Scalar::random_nonzero(rng);
  CHECK(rekey(rekey(c, a), b) == rekey(c, a * b));
  CHECK(reshuffle(reshuffle(c, a), b) == reshuffle(c, a * b));
  CHECK_THROWS_AS(rekey(c, Scalar::zero()), Error);
  CHECK_THROWS_AS(reshuffle(c, Scalar::zero()), Error);
  CHECK_THROWS_AS(rsk(c, Scalar::zero(), a, b), Error);
}

TEST_CASE("rekey moves the decryption key") {
  DeterministicRandom rng(24);
  for (int i = 0; i < 50; ++i) {
    const auto m = random_element(rng);
    const Scalar sp = Scalar::random_nonzero(rng), sq = Scalar::random_nonzero(rng);
    const auto c = encrypt(m, GroupElement::base_mul(sp), rng);
    CHECK(decrypt(rekey(c, sq * sp.invert()), sq) == m);
  }
}

TEST_CASE("reshuffle scales the message") {
  DeterministicRandom rng(25);
  const auto m = random_element(rng);
  const Scalar s = Scalar::random_nonzero(rng), n = Scalar::random_nonzero(rng);
  const auto c = encrypt(m, GroupElement::base_mul(s), rng);
  CHECK(decrypt(reshuffle(c, n), s) == n * m);
}

TEST_CASE("rsk equals the stepwise composition") {
  DeterministicRandom rng(26);
  for (int i = 0; i < 50; ++i) {
    const Scalar s0 = Scalar::random_nonzero(rng);
    const auto c = encrypt(random_element(rng), GroupElement::base_mul(s0), rng);
    const Scalar s = Scalar::random_nonzero(rng), n = Scalar::random_nonzero(rng),
                 r = Scalar::random(rng);
    CHECK(rsk(c, s, n, r) == rekey(reshuffle(rerandomise(c, r), n), s));
    CHECK(rsk(c, s, n, r, s * c.target) == rsk(c, s, n, r));
  }
}

TEST_CASE("translation and pseudonymisation composites") {
  DeterministicRandom rng(27);
  for (int i = 0; i < 50; ++i) {
    const auto a = random_element(rng);
    const KeyPair p{Scalar::random_nonzero(rng), Scalar::random_nonzero(rng)};
    const KeyPair q{Scalar::random_nonzero(rng), Scalar::random_nonzero(rng)};
    const auto c = encrypt(p.n * a, GroupElement::base_mul(p.s), rng);
    CHECK(decrypt(translate(c, p, q, Scalar::random(rng)), q.s) == q.n * a);
    CHECK(translate(c, p, p, Scalar::zero()) == c);
    // Pseudonymise: plain A under s_P becomes n_Q A under s_Q.
    const auto plain = encrypt(a, GroupElement::base_mul(p.s), rng);
    const auto out = rsk(plain, q.s * p.s.invert(), q.n, Scalar::random(rng));
    CHECK(decrypt(out, q.s) == q.n * a);
  }
}

TEST_CASE("spoofed target does not yield a valid pseudonym") {
  // An attacker submits (0, n_P A, s_P B) hoping the transcryptor will treat
  // it as a fresh encryption; rerandomisation and translation to Q must not
  // give the attacker n_Q A under a key of their choosing.
  DeterministicRandom rng(28);
  const auto a = random_element(rng);
  const KeyPair p{Scalar::random_nonzero(rng), Scalar::random_nonzero(rng)};
  const KeyPair q{Scalar::random_nonzero(rng), Scalar::random_nonzero(rng)};
  const Scalar attacker = Scalar::random_nonzero(rng);
  const Cyphertext spoof{GroupElement::identity(), p.n * a, GroupElement::base_mul(p.s)};
  const auto out = translate(rerandomise(spoof, Scalar::random_nonzero(rng)), p, q,
                             Scalar::random_nonzero(rng));
  CHECK(decrypt(out, q.s) == q.n * a);  // only the genuine key holder learns it
  CHECK_FALSE(decrypt(out, attacker) == q.n * a);
  CHECK(out.target == GroupElement::base_mul(q.s));
}

TEST_CASE("cyphertext wire form") {
  DeterministicRandom rng(29);
  const auto c = encrypt(random_element(rng), random_element(rng), rng);
  const auto enc = c.encode();
  CHECK(enc.size() == 96);
  CHECK(*Cyphertext::decode(enc) == c);
  auto bad = enc;
  bad[31] ^= 0x80;
  CHECK_FALSE(Cyphertext::decode(bad).has_value());
  CHECK(*Cyphertext::from_hex(c.to_hex()) == c);
}

TEST_CASE("scalar multiplication counts per operation") {
  DeterministicRandom rng(30);
  const Scalar s = Scalar::random_nonzero(rng);
  const auto target = GroupElement::base_mul(s);
  const auto m = random_element(rng);
  reset_op_counters();
  const auto c = encrypt(m, target, rng);
  CHECK(op_counters().general == 1);
  CHECK(op_counters().base == 1);
  reset_op_counters();
  (void)decrypt(c, s);
  CHECK(op_counters().general == 1);
  CHECK(op_counters().base == 0);
  const Scalar k = Scalar::random_nonzero(rng), n = Scalar::random_nonzero(rng);
  reset_op_counters();
  (void)rsk(c, k, n, Scalar::random(rng));
  CHECK(op_counters().general == 4);
  CHECK(op_counters().base == 1);
  const auto fixed = GroupElement::base_mul(k * s);
  reset_op_counters();
  (void)rsk(c, k, n, Scalar::random(rng), fixed);
  CHECK(op_counters().general == 3);
  CHECK(op_counters().base == 1);
}
