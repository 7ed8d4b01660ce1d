#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pep3/flow.hpp"
#include "pep3/peer.hpp"
#include "pep3/permit.hpp"
#include "pep3/storage.hpp"
#include "pep3/transport.hpp"

namespace pep3 {

struct EnrolmentReport {
  std::vector<PeerId> responded;
  std::vector<PeerId> liars;  // disagreed with the majority tables or sent a bad share
};

struct Detection {
  PeerId peer;
  std::uint64_t operation;  // index among this client's single-peer operations
  std::string reason;
};

struct SamplingStats {
  std::uint64_t operations = 0;  // cyphertext x peer steps
  std::uint64_t sampled = 0;
  std::uint64_t verified = 0;
  std::vector<Detection> detections;
};

// A party's connection to the transcryptor: enrolment, three-peer
// transcription with random proof sampling, and share-point bookkeeping.
class PartyClient {
 public:
  PartyClient(std::string id, SigningKey auth_key, const Directory& directory, Connector& connector,
              RandomSource& rng = secure_random());

  const std::string& id() const { return id_; }

  // Fetches tables and shares from every reachable peer (at least three),
  // follows the majority on the tables, and assembles s_P.
  EnrolmentReport enrol();
  bool enrolled() const { return key_.has_value(); }
  const Scalar& encryption_key() const;
  GroupElement encryption_public() const { return GroupElement::base_mul(encryption_key()); }

  void set_active(std::optional<ActiveSet> active) { active_ = active; }
  // Override, or the first three peers that accept a connection.
  ActiveSet active();
  void set_sampling(double q);
  double sampling() const { return sampling_; }
  // When false, failed samples are only recorded in stats().
  void set_throw_on_detection(bool v) { throw_on_detection_ = v; }
  void set_sampling_rng(RandomSource& rng) { sample_rng_ = &rng; }
  const SamplingStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }

  // Runs the cyphertexts through the active peers in order. Each output is
  // proof-checked with the sampling probability. Throws
  // ProofVerificationFailure after the batch if any check failed (unless
  // disabled), naming the peer.
  std::vector<Cyphertext> transcrypt(Mode mode, const std::string& from, const std::string& to,
                                     const std::vector<Cyphertext>& in, const Permit& permit);

  // Depseudonymisation walk: proofs at every hop, chain passed along.
  // Throws ChainBreak naming the peer whose certificate fails.
  Cyphertext depseudonymise(const Cyphertext& c, const Permit& warrant);

  // Share point s_P^T B / n_P^T B, checked against the majority tables.
  GroupElement share_point(const ShareRef& ref, std::optional<PeerId> ask = std::nullopt);

  RpcChannel& peer_channel(PeerId p);
  RpcChannel open_channel(const std::string& node);

 private:
  const TriplePublic& table(TripleId t) const;
  bool check_hop(PeerId p, Mode mode, const std::string& from, const std::string& to, TripleMask mask,
                 const Cyphertext& c_in, const Cyphertext& c_out, const RSKCertificate& cert);

  std::string id_;
  SigningKey auth_;
  const Directory& directory_;
  Connector& connector_;
  RandomSource& rng_;
  RandomSource* sample_rng_;
  std::optional<Scalar> key_;
  std::array<std::optional<TriplePublic>, kTripleCount> tables_;
  std::map<std::tuple<std::string, int, int>, GroupElement> points_;
  std::map<PeerId, std::unique_ptr<RpcChannel>> channels_;
  std::optional<ActiveSet> active_;
  double sampling_ = 0.01;
  bool throw_on_detection_ = true;
  SamplingStats stats_;
};

// Bounded LRU map from plaintext address to SF-encrypted pseudonym.
class AddressCache {
 public:
  explicit AddressCache(std::size_t capacity) : capacity_(capacity) {}
  std::optional<Cyphertext> get(const Address128& a);
  void put(const Address128& a, const Cyphertext& c);
  std::size_t size() const { return map_.size(); }

 private:
  using Entry = std::pair<Address128, Cyphertext>;
  std::size_t capacity_;
  std::list<Entry> order_;
  std::map<Address128, std::list<Entry>::iterator> map_;
};

struct MeteringStats {
  std::uint64_t records = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  std::uint64_t peer_round_trips = 0;  // transcrypt batches sent through the chain
};

// Metering process: encrypts unique addresses under its own key and has the
// transcryptor turn them into encrypted SF pseudonyms.
class MeteringProcess {
 public:
  MeteringProcess(PartyClient& client, Permit permit, std::string sf_id, std::size_t cache_capacity = 1 << 20);

  std::vector<EncryptedFlow> pseudonymise(const std::vector<PlainFlow>& flows);
  const MeteringStats& stats() const { return stats_; }

 private:
  PartyClient& client_;
  Permit permit_;
  std::string sf_id_;
  AddressCache cache_;
  MeteringStats stats_;
};

// Researcher-side retrieval. Arguments are the caller's own pseudonym points;
// the result's pseudonym values are the caller's own pseudonyms, or the
// own-key cyphertexts when `encrypted` output is requested.
struct Retrieval {
  ResultSet<GroupElement> plain;
  ResultSet<Cyphertext> encrypted;
};

Retrieval retrieve(PartyClient& client, StorageClient& sf, const std::string& sf_id, const std::string& query,
                   const std::vector<GroupElement>& own_pseudonyms, const Permit& to_sf, const Permit& from_sf);

// Walks the depseudonymisation chain and lizard-decodes the address.
// Throws ChainBreak or NotAnAddress.
std::string investigate_depseudonymise(PartyClient& client, const Cyphertext& c, const Permit& warrant);

class CertificationAuthority {
 public:
  explicit CertificationAuthority(SigningKey key, RandomSource& rng = secure_random()) : key_(std::move(key)), rng_(rng) {}
  const GroupElement& public_key() const { return key_.public_key; }
  Permit issue(std::string subject, Mode op, std::vector<std::string> from, std::vector<std::string> to,
               std::optional<Cyphertext> cyphertext = std::nullopt, std::int64_t lifetime_seconds = 24 * 3600);

 private:
  SigningKey key_;
  RandomSource& rng_;
};

}  // namespace pep3
