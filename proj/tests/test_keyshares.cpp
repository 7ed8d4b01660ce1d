#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <set>

#include "pep3/elgamal.hpp"
#include "pep3/error.hpp"
#include "pep3/keyshares.hpp"

using namespace pep3;

namespace {

const std::array<MasterSecrets, kPeerCount>& cluster_secrets() {
  static const auto secrets = [] {
    DeterministicRandom rng(60);
    return run_setup(rng);
  }();
  return secrets;
}

Scalar full_key(const std::array<MasterSecrets, kPeerCount>& ms, std::string_view id, KeyKind k) {
  std::vector<Scalar> shares;
  for (auto t : all_triples()) {
    const auto holder = triple_members(t)[0];
    shares.push_back(derive_share(ms[peer_index(holder)].master(t, k), id));
  }
  return assemble_party_key(shares);
}

}  // namespace

TEST_CASE("triple naming and membership") {
  CHECK(triple_name(TripleId{0}) == "ABE");
  CHECK(triple_name(TripleId{9}) == "BCE");
  CHECK(triple_from_name("EBA") == TripleId{0});
  CHECK(triple_from_name("acd") == TripleId{5});
  CHECK_FALSE(triple_from_name("AAB").has_value());
  std::set<int> seen;
  for (auto t : all_triples()) {
    int bits = 0;
    for (auto p : triple_members(t)) bits |= 1 << peer_index(p);
    seen.insert(bits);
  }
  CHECK(seen.size() == 10);
  for (auto p : kAllPeers) CHECK(mask_triples(triples_of(p)).size() == 6);
}

TEST_CASE("partition for active ACD") {
  const auto parts = partition_triples(parse_active("ACD"));
  auto names = [](TripleMask m) {
    std::set<std::string> out;
    for (auto t : mask_triples(m)) out.insert(triple_name(t));
    return out;
  };
  CHECK(names(parts[peer_index(PeerId::A)]) ==
        std::set<std::string>{"ABE", "ABC", "ADE", "ACD", "ACE", "ABD"});
  CHECK(names(parts[peer_index(PeerId::C)]) == std::set<std::string>{"BCD", "CDE", "BCE"});
  CHECK(names(parts[peer_index(PeerId::D)]) == std::set<std::string>{"BDE"});
  CHECK(parts[peer_index(PeerId::B)] == 0);
  CHECK(parts[peer_index(PeerId::E)] == 0);
  CHECK_THROWS_AS(parse_active("AAC"), Error);
  CHECK_THROWS_AS(parse_active("AB"), Error);
  CHECK_THROWS_AS(partition_triples({PeerId::A, PeerId::A, PeerId::B}), Error);
}

TEST_CASE("every active set covers every triple exactly once") {
  for (const auto& act : all_active_sets()) {
    const auto parts = partition_triples(act);
    TripleMask uni = 0;
    int total = 0;
    for (auto p : kAllPeers) {
      uni |= parts[peer_index(p)];
      total += static_cast<int>(mask_triples(parts[peer_index(p)]).size());
      for (auto t : mask_triples(parts[peer_index(p)])) CHECK(triple_contains(t, p));
    }
    CHECK(uni == kAllTriplesMask);
    CHECK(total == 10);
  }
}

TEST_CASE("collusion structure") {
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      const TripleMask both = triples_of(static_cast<PeerId>(i)) | triples_of(static_cast<PeerId>(j));
      CHECK(both != kAllTriplesMask);
    }
  }
  for (const auto& act : all_active_sets()) {
    TripleMask m = 0;
    for (auto p : act) m |= triples_of(p);
    CHECK(m == kAllTriplesMask);
  }
}

TEST_CASE("hash_id") {
  CHECK(hash_id("researcher-1") == hash_id("researcher-1"));
  CHECK_THROWS_AS(hash_id(""), Error);
  std::set<std::array<std::uint8_t, 32>> seen;
  for (int i = 0; i < 10000; ++i) {
    const auto e = hash_id("party-" + std::to_string(i));
    CHECK_FALSE(e.is_zero());
    CHECK(e.bit_length() <= 253);
    seen.insert(e.to_bytes());
  }
  CHECK(seen.size() == 10000);
}

TEST_CASE("derive_share and assemble_party_key") {
  DeterministicRandom rng(61);
  CHECK(derive_share(Scalar::one(), "anyone") == Scalar::one());
  const Scalar m = Scalar::random_nonzero(rng);
  Scalar sq = m;
  for (int i = 0; i < 5; ++i) sq = sq * sq;
  CHECK(derive_share(m, ExponentScalar::from_u64(32)) == sq);
  const std::vector<Scalar> ones(10, Scalar::one());
  CHECK(assemble_party_key(ones) == Scalar::one());
  std::vector<Scalar> shares;
  for (int i = 0; i < 10; ++i) shares.push_back(Scalar::random_nonzero(rng));
  auto reversed = shares;
  std::reverse(reversed.begin(), reversed.end());
  CHECK(assemble_party_key(shares) == assemble_party_key(reversed));
  shares[3] = Scalar::zero();
  CHECK_THROWS_AS(assemble_party_key(shares), Error);
}

TEST_CASE("derived share matches the derivation proof endpoint") {
  DeterministicRandom rng(62);
  const Scalar m = Scalar::random_nonzero(rng);
  const auto powers = powers_table(m);
  auto nonces = NonceStream::fresh(rng);
  const auto e = hash_id("party-x");
  const auto proof = derivation_prove(m, e, nonces);
  CHECK(derivation_verify(powers, e, GroupElement::base_mul(derive_share(m, "party-x")), proof));
  CHECK_FALSE(derivation_verify(powers, hash_id("party-y"),
                                GroupElement::base_mul(derive_share(m, "party-x")), proof));
}

TEST_CASE("honest setup is consistent") {
  const auto& ms = cluster_secrets();
  for (auto t : all_triples()) {
    std::optional<Scalar> n;
    for (auto p : kAllPeers) {
      CHECK(ms[peer_index(p)].holds(t) == triple_contains(t, p));
      if (!ms[peer_index(p)].holds(t)) continue;
      if (n) CHECK(ms[peer_index(p)].master(t, KeyKind::Pseudonym) == *n);
      n = ms[peer_index(p)].master(t, KeyKind::Pseudonym);
      CHECK(ms[peer_index(p)].publics(t).n_powers[0] == GroupElement::base_mul(*n));
    }
    for (auto p : kAllPeers) {
      CHECK(ms[peer_index(p)].publics(t).n_powers.size() == 253u);
      CHECK(ms[peer_index(p)].publics(t).s_powers[252] == ms[0].publics(t).s_powers[252]);
    }
  }
  CHECK_THROWS_AS(ms[peer_index(PeerId::D)].secrets(*triple_from_name("ABC")), Error);
}

TEST_CASE("setup aborts on inconsistent missives or publics") {
  for (int bad = 0; bad < kPeerCount; ++bad) {
    DeterministicRandom rng(70 + bad);
    std::array<SetupFault, kPeerCount> faults{};
    faults[bad].corrupt_missive = true;
    try {
      run_setup(rng, faults);
      FAIL("setup should abort");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MismatchAbort);
      CHECK(std::string(e.what()).find("missives") != std::string::npos);
    }
    faults[bad] = SetupFault{false, true};
    try {
      run_setup(rng, faults);
      FAIL("setup should abort");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MismatchAbort);
      CHECK(std::string(e.what()).find("n-table entry 17") != std::string::npos);
    }
  }
}

TEST_CASE("partition factors multiply to the full key") {
  const auto& ms = cluster_secrets();
  for (const auto& act : all_active_sets()) {
    const auto parts = partition_triples(act);
    Scalar prod = Scalar::one();
    for (auto p : act) prod *= partition_factor(ms[peer_index(p)], parts[peer_index(p)], "sf", KeyKind::Pseudonym);
    CHECK(prod == full_key(ms, "sf", KeyKind::Pseudonym));
  }
  CHECK(partition_factor(ms[0], 0, "sf", KeyKind::Encryption) == Scalar::one());
  const auto abe = *triple_from_name("ABE");
  CHECK(partition_factor(ms[0], mask_with(0, abe), "sf", KeyKind::Encryption) ==
        derive_share(ms[0].master(abe, KeyKind::Encryption), "sf"));
  CHECK_THROWS_AS(partition_factor(ms[peer_index(PeerId::C)], mask_with(0, abe), "sf", KeyKind::Encryption),
                  Error);
}

TEST_CASE("ten-step and three-step translation agree") {
  const auto& ms = cluster_secrets();
  DeterministicRandom rng(63);
  const std::string p_id = "party-p", q_id = "party-q";
  const KeyPair p{full_key(ms, p_id, KeyKind::Encryption), full_key(ms, p_id, KeyKind::Pseudonym)};
  const KeyPair q{full_key(ms, q_id, KeyKind::Encryption), full_key(ms, q_id, KeyKind::Pseudonym)};
  for (int i = 0; i < 5; ++i) {
    const auto a = GroupElement::base_mul(Scalar::random(rng));
    const auto c = encrypt(p.n * a, GroupElement::base_mul(p.s), rng);
    Cyphertext ten = c;
    for (auto t : all_triples()) {
      const auto& m = ms[peer_index(triple_members(t)[0])];
      const KeyPair from{derive_share(m.master(t, KeyKind::Encryption), p_id),
                         derive_share(m.master(t, KeyKind::Pseudonym), p_id)};
      const KeyPair to{derive_share(m.master(t, KeyKind::Encryption), q_id),
                       derive_share(m.master(t, KeyKind::Pseudonym), q_id)};
      ten = translate(ten, from, to, Scalar::random_nonzero(rng));
    }
    const auto expect = q.n * a;
    CHECK(decrypt(ten, q.s) == expect);
    for (const auto& act : all_active_sets()) {
      const auto parts = partition_triples(act);
      Cyphertext three = c;
      for (auto x : act) {
        const auto& m = ms[peer_index(x)];
        const auto mask = parts[peer_index(x)];
        const KeyPair from{partition_factor(m, mask, p_id, KeyKind::Encryption),
                           partition_factor(m, mask, p_id, KeyKind::Pseudonym)};
        const KeyPair to{partition_factor(m, mask, q_id, KeyKind::Encryption),
                         partition_factor(m, mask, q_id, KeyKind::Pseudonym)};
        three = translate(three, from, to, Scalar::random_nonzero(rng));
      }
      CHECK(decrypt(three, q.s) == expect);
    }
  }
}

TEST_CASE("master secrets persist encrypted") {
  const auto& ms = cluster_secrets();
  const auto path = (std::filesystem::temp_directory_path() / "pep3_test_master.bin").string();
  std::array<std::uint8_t, 32> key{};
  key[0] = 42;
  ms[2].save(path, key);
  const auto back = MasterSecrets::load(path, key);
  CHECK(back.serialise() == ms[2].serialise());
  key[0] = 43;
  CHECK_THROWS_AS(MasterSecrets::load(path, key), Error);
  std::filesystem::remove(path);
}
