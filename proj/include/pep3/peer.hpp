#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>

#include "pep3/keyshares.hpp"
#include "pep3/permit.hpp"
#include "pep3/random.hpp"
#include "pep3/transport.hpp"
#include "pep3/wire.hpp"

namespace pep3 {

// One share point s_P^T B or n_P^T B.
struct ShareRef {
  std::string party;
  KeyKind kind;
  TripleId triple;
};

// Share points that make up the rsk factors of one hop, in canonical triple
// order: s = s_to / s_from; n = n_to / n_from for translate, n_to for
// pseudonymise, 1 / n_from for depseudonymise.
std::vector<ShareRef> factor_share_refs(Mode mode, const std::string& from, const std::string& to,
                                        TripleMask mask);

using ShareLookup = std::function<GroupElement(const ShareRef&)>;

// Checks a hop certificate including its composite-factor proofs.
bool verify_hop(const Cyphertext& c_in, const Cyphertext& c_out, const RSKCertificate& cert, Mode mode,
                const std::string& from, const std::string& to, TripleMask mask, const ShareLookup& lookup);

// Scripted misbehaviour for adversary experiments; all off by default.
struct PeerFaults {
  double corrupt_probability = 0.0;  // corrupt-result: per output cyphertext
  std::uint64_t corrupt_after = 0;   // operations served honestly first
  bool refuse_proof = false;
  std::optional<TripleId> enrolment_lie;  // wrong-enrolment-share for this triple
};

class PeerNode final : public Service {
 public:
  using Clock = std::function<std::int64_t()>;

  PeerNode(MasterSecrets secrets, SigningKey auth_key, const Directory& directory, GroupElement ca_public,
           PeerFaults faults = {}, RandomSource& rng = secure_random(), Clock clock = unix_now);

  PeerId peer() const { return secrets_.self(); }
  const MasterSecrets& secrets() const { return secrets_; }

  TranscryptResponse handle_transcrypt(const std::string& client, const TranscryptRequest& req,
                                       const Hash32& request_hash);
  RSKCertificate handle_proof_request(const ProofRequest& req);
  EnrolResponse handle_enrolment(const std::string& party);
  DerivationResponse handle_derivation_proof_request(const DerivationRequest& req);

  std::uint64_t operations() const { return ops_.load(); }
  std::uint64_t corrupted() const { return corrupted_.load(); }

 protected:
  Frame handle(const std::string& client, const Frame& request) override;

 private:
  struct Factors {
    Scalar s;
    Scalar n;
    std::vector<Scalar> s_from, s_to, n_from, n_to;
  };

  void check_party(const std::string& id) const;
  Scalar share(const std::string& party, KeyKind kind, TripleId t);
  Factors factors(Mode mode, const std::string& from, const std::string& to, TripleMask mask);
  RSKCertificate prove(const TicketRecord& rec, const Factors& f, const Scalar& n_used);
  ShareClaim claim(const ShareRef& ref);
  GroupElement verified_point(const ShareRef& ref, const std::vector<ShareClaim>& claims);
  void verify_chain(const TranscryptRequest& req);
  Scalar fault_tweak(const std::array<std::uint8_t, 32>& seed) const;
  const Scalar& lie_master();

  MasterSecrets secrets_;
  GroupElement ca_public_;
  PeerFaults faults_;
  RandomSource& rng_;
  Clock clock_;
  std::atomic<std::uint64_t> ops_{0};
  std::atomic<std::uint64_t> corrupted_{0};

  std::mutex cache_mu_;
  std::map<std::tuple<std::string, int, int>, Scalar> shares_;
  std::map<std::tuple<std::string, int, int>, ShareClaim> claims_;
  std::map<std::tuple<std::string, int, int>, GroupElement> verified_;
  std::optional<Scalar> lie_master_;
  std::optional<TriplePublic> lie_public_;
};

}  // namespace pep3
