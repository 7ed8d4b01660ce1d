#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pep3/bytes.hpp"
#include "pep3/group.hpp"
#include "pep3/proofs.hpp"

namespace pep3 {

enum class PeerId : std::uint8_t { A = 0, B, C, D, E };
inline constexpr int kPeerCount = 5;
inline constexpr int kTripleCount = 10;
inline constexpr std::array<PeerId, 5> kAllPeers = {PeerId::A, PeerId::B, PeerId::C, PeerId::D,
                                                    PeerId::E};

char peer_letter(PeerId p);
std::optional<PeerId> peer_from_letter(char c);
inline int peer_index(PeerId p) { return static_cast<int>(p); }

// Index into the canonical order ABE, ABC, BCD, CDE, ADE, ACD, BDE, ACE, ABD, BCE.
struct TripleId {
  std::uint8_t index = 0;
  friend bool operator==(TripleId, TripleId) = default;
};

std::array<PeerId, 3> triple_members(TripleId t);
bool triple_contains(TripleId t, PeerId p);
std::string triple_name(TripleId t);
// Accepts the three letters in any order.
std::optional<TripleId> triple_from_name(std::string_view name);
std::array<TripleId, kTripleCount> all_triples();

// Set of triples as a bit mask over canonical indices.
using TripleMask = std::uint16_t;
inline constexpr TripleMask kAllTriplesMask = 0x3ff;
inline bool mask_has(TripleMask m, TripleId t) { return (m >> t.index) & 1; }
inline TripleMask mask_with(TripleMask m, TripleId t) {
  return static_cast<TripleMask>(m | (1u << t.index));
}
std::vector<TripleId> mask_triples(TripleMask m);
// All triples that contain p.
TripleMask triples_of(PeerId p);

using ActiveSet = std::array<PeerId, 3>;
// Parses "ACD" style strings; throws InvalidArgument.
ActiveSet parse_active(std::string_view letters);
std::string active_name(const ActiveSet& a);
// All ten 3-subsets in lexicographic order.
std::array<ActiveSet, 10> all_active_sets();

// Each triple goes to the first active peer, in A..E order, that belongs to
// it. Result is indexed by peer; inactive peers get an empty mask. Throws
// InvalidArgument unless the three peers are distinct.
std::array<TripleMask, kPeerCount> partition_triples(const ActiveSet& active);

enum class KeyKind : std::uint8_t { Pseudonym = 0, Encryption = 1 };

// H(id): SHA-512 of a tagged id and counter, reduced mod l-1; the counter is
// bumped in the (never observed) case of a zero result.
ExponentScalar hash_id(std::string_view id);
Scalar derive_share(const Scalar& master, std::string_view id);
Scalar derive_share(const Scalar& master, const ExponentScalar& exponent);
// Product of the shares; throws ZeroKey if any share is zero.
Scalar assemble_party_key(std::span<const Scalar> shares);

struct TripleSecrets {
  Scalar n;
  Scalar s;
};

struct TriplePublic {
  PowersTable n_powers;
  PowersTable s_powers;
  const PowersTable& powers(KeyKind k) const { return k == KeyKind::Pseudonym ? n_powers : s_powers; }
};

// A peer's durable state after setup.
class MasterSecrets {
 public:
  MasterSecrets() = default;
  MasterSecrets(PeerId self, std::array<std::optional<TripleSecrets>, kTripleCount> held,
                std::array<TriplePublic, kTripleCount> publics,
                std::array<std::uint8_t, 32> ticket_key);

  PeerId self() const { return self_; }
  bool holds(TripleId t) const { return held_[t.index].has_value(); }
  // Throws MissingShare for a triple this peer is not in.
  const TripleSecrets& secrets(TripleId t) const;
  const Scalar& master(TripleId t, KeyKind k) const;
  const TriplePublic& publics(TripleId t) const { return publics_[t.index]; }
  const std::array<std::uint8_t, 32>& ticket_key() const { return ticket_key_; }

  Bytes serialise() const;
  static MasterSecrets deserialise(std::span<const std::uint8_t> in);  // throws Malformed

  // Encrypted at rest: "PEP3MS01" || nonce || secretbox(serialise()).
  void save(const std::string& path, const std::array<std::uint8_t, 32>& file_key) const;
  static MasterSecrets load(const std::string& path, const std::array<std::uint8_t, 32>& file_key);

 private:
  PeerId self_ = PeerId::A;
  std::array<std::optional<TripleSecrets>, kTripleCount> held_;
  std::array<TriplePublic, kTripleCount> publics_;
  std::array<std::uint8_t, 32> ticket_key_{};
};

// Product of derive_share over the assigned triples. Throws MissingShare if
// this peer does not hold one of them.
Scalar partition_factor(const MasterSecrets& ms, TripleMask assigned, std::string_view id,
                        KeyKind which);

// ---------------------------------------------------------------------------
// Setup: five participants exchange encoded messages. Every pair agrees on
// pair secrets by Diffie-Hellman; each triple secret is the product of its
// three pair secrets; the member outside a pair is sent that pair's secret
// by both holders and compares the copies; finally all powers tables are
// published and cross-checked. Any disagreement raises MismatchAbort.

struct SetupMessage {
  PeerId from;
  PeerId to;  // broadcast messages are delivered once per recipient
  Bytes body;
};

// Scripted misbehaviour for setup experiments.
struct SetupFault {
  bool corrupt_missive = false;  // send a wrong pair secret copy
  bool corrupt_public = false;   // publish a wrong powers-table entry
};

class SetupParticipant {
 public:
  SetupParticipant(PeerId self, RandomSource& rng, SetupFault fault = {});

  PeerId self() const { return self_; }
  // Round 1: ephemeral DH points to every other peer.
  std::vector<SetupMessage> hello();
  // Round 2: pair-secret missives for third members.
  std::vector<SetupMessage> missives(const std::vector<SetupMessage>& hellos);
  // Round 3: publish powers tables for held triples.
  std::vector<SetupMessage> publish(const std::vector<SetupMessage>& missives);
  // Round 4: digest of the adopted public tables.
  std::vector<SetupMessage> digest(const std::vector<SetupMessage>& publications);
  MasterSecrets finish(const std::vector<SetupMessage>& digests);

 private:
  PeerId self_;
  RandomSource& rng_;
  SetupFault fault_;
  Scalar ephemeral_;
  std::array<std::optional<TripleSecrets>, kPeerCount * kPeerCount> pair_;  // [min*5+max]
  std::array<std::optional<TripleSecrets>, kTripleCount> held_;
  std::array<TriplePublic, kTripleCount> publics_;
  std::array<Bytes, kTripleCount> own_tables_;
  std::array<std::uint8_t, 32> digest_{};
};

// Runs all rounds in-process and returns each peer's MasterSecrets, indexed
// by peer. Throws MismatchAbort on any inconsistency.
std::array<MasterSecrets, kPeerCount> run_setup(RandomSource& rng,
                                                const std::array<SetupFault, kPeerCount>& faults = {});

}  // namespace pep3
