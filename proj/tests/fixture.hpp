#pragma once

#include <array>
#include <memory>
#include <string>

#include "pep3/elgamal.hpp"
#include "pep3/keyshares.hpp"
#include "pep3/peer.hpp"
#include "pep3/permit.hpp"
#include "pep3/transport.hpp"

namespace pep3::testing {

// Five peers from one deterministic setup, with a directory of the usual
// parties and a CA. Shares computed here serve as the oracle.
struct PeerWorld {
  std::array<MasterSecrets, kPeerCount> secrets;
  std::array<SigningKey, kPeerCount> peer_keys;
  std::map<std::string, SigningKey> party_keys;
  SigningKey ca;
  Directory directory;

  explicit PeerWorld(std::uint64_t seed) {
    DeterministicRandom rng(seed);
    secrets = run_setup(rng);
    for (auto p : kAllPeers) {
      peer_keys[peer_index(p)] = SigningKey::generate(rng);
      directory.add({std::string(1, peer_letter(p)), Role::Peer, peer_keys[peer_index(p)].public_key});
    }
    const std::pair<const char*, Role> parties[] = {{"mp", Role::Metering},
                                                    {"sf", Role::Storage},
                                                    {"researcher", Role::Researcher},
                                                    {"researcher-2", Role::Researcher},
                                                    {"investigator", Role::Investigator}};
    for (const auto& [id, role] : parties) {
      party_keys[id] = SigningKey::generate(rng);
      directory.add({id, role, party_keys[id].public_key});
    }
    ca = SigningKey::generate(rng);
  }

  std::unique_ptr<PeerNode> node(PeerId p, PeerFaults faults = {}) const {
    return std::make_unique<PeerNode>(secrets[peer_index(p)], peer_keys[peer_index(p)], directory, ca.public_key,
                                      faults);
  }

  Scalar share(const std::string& party, KeyKind kind, TripleId t) const {
    return derive_share(secrets[peer_index(triple_members(t)[0])].master(t, kind), party);
  }

  GroupElement share_point(const ShareRef& ref) const {
    return GroupElement::base_mul(share(ref.party, ref.kind, ref.triple));
  }

  Scalar key(const std::string& party, KeyKind kind) const {
    Scalar k = Scalar::one();
    for (auto t : all_triples()) k *= share(party, kind, t);
    return k;
  }

  Permit permit(const std::string& subject, Mode op, const std::string& from, const std::string& to,
                std::optional<Cyphertext> c = std::nullopt, std::int64_t expiry = unix_now() + 3600) const {
    return ca_issue_permit(ca, subject, op, {from}, {to}, c, expiry, secure_random());
  }
};

}  // namespace pep3::testing
