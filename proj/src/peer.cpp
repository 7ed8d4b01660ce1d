#include "pep3/peer.hpp"

#include <unordered_map>

namespace pep3 {
namespace {

std::tuple<std::string, int, int> cache_key(const std::string& party, KeyKind kind, TripleId t) {
  return {party, static_cast<int>(kind), t.index};
}

}  // namespace

std::vector<ShareRef> factor_share_refs(Mode mode, const std::string& from, const std::string& to,
                                        TripleMask mask) {
  std::vector<ShareRef> out;
  const auto triples = mask_triples(mask);
  for (auto t : triples) out.push_back({from, KeyKind::Encryption, t});
  for (auto t : triples) out.push_back({to, KeyKind::Encryption, t});
  if (mode != Mode::Pseudonymise)
    for (auto t : triples) out.push_back({from, KeyKind::Pseudonym, t});
  if (mode != Mode::Depseudonymise)
    for (auto t : triples) out.push_back({to, KeyKind::Pseudonym, t});
  return out;
}

bool verify_hop(const Cyphertext& c_in, const Cyphertext& c_out, const RSKCertificate& cert, Mode mode,
                const std::string& from, const std::string& to, TripleMask mask, const ShareLookup& lookup) {
  FactorShares s, n;
  for (auto t : mask_triples(mask)) {
    s.from.push_back(lookup({from, KeyKind::Encryption, t}));
    s.to.push_back(lookup({to, KeyKind::Encryption, t}));
    if (mode != Mode::Pseudonymise) n.from.push_back(lookup({from, KeyKind::Pseudonym, t}));
    if (mode != Mode::Depseudonymise) n.to.push_back(lookup({to, KeyKind::Pseudonym, t}));
  }
  return rsk_verify_composite(c_in, c_out, s, n, cert);
}

PeerNode::PeerNode(MasterSecrets secrets, SigningKey auth_key, const Directory& directory, GroupElement ca_public,
                   PeerFaults faults, RandomSource& rng, Clock clock)
    : Service(std::string(1, peer_letter(secrets.self())), std::move(auth_key), directory),
      secrets_(std::move(secrets)),
      ca_public_(ca_public),
      faults_(faults),
      rng_(rng),
      clock_(std::move(clock)) {}

void PeerNode::check_party(const std::string& id) const {
  const auto& info = directory().at(id);
  if (info.role == Role::Peer) throw Error(ErrorCode::UnknownParty, id + " is a peer, not a party");
}

Scalar PeerNode::share(const std::string& party, KeyKind kind, TripleId t) {
  const auto key = cache_key(party, kind, t);
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = shares_.find(key); it != shares_.end()) return it->second;
  }
  const Scalar v = derive_share(secrets_.master(t, kind), party);
  std::lock_guard lock(cache_mu_);
  shares_.emplace(key, v);
  return v;
}

PeerNode::Factors PeerNode::factors(Mode mode, const std::string& from, const std::string& to, TripleMask mask) {
  Factors f;
  for (auto t : mask_triples(mask)) {
    f.s_from.push_back(share(from, KeyKind::Encryption, t));
    f.s_to.push_back(share(to, KeyKind::Encryption, t));
    if (mode != Mode::Pseudonymise) f.n_from.push_back(share(from, KeyKind::Pseudonym, t));
    if (mode != Mode::Depseudonymise) f.n_to.push_back(share(to, KeyKind::Pseudonym, t));
  }
  auto product = [](const std::vector<Scalar>& v) {
    Scalar p = Scalar::one();
    for (const auto& x : v) p *= x;
    return p;
  };
  f.s = product(f.s_to) * product(f.s_from).invert();
  f.n = product(f.n_to) * product(f.n_from).invert();
  return f;
}

Scalar PeerNode::fault_tweak(const std::array<std::uint8_t, 32>& seed) const {
  Scalar t = hash_bytes_to_scalar("pep3-fault", seed);
  return t.is_zero() ? Scalar::from_u64(2) : t;
}

RSKCertificate PeerNode::prove(const TicketRecord& rec, const Factors& f, const Scalar& n_used) {
  NonceStream nonces(rec.nonce_seed);
  auto cert = rsk_prove(rec.c_in, rec.c_out, f.s, n_used, rec.r, nonces);
  cert.s_factor = composite_prove(f.s_from, f.s_to, nonces);
  cert.n_factor = composite_prove(f.n_from, f.n_to, nonces);
  return cert;
}

ShareClaim PeerNode::claim(const ShareRef& ref) {
  const auto key = cache_key(ref.party, ref.kind, ref.triple);
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = claims_.find(key); it != claims_.end()) return it->second;
  }
  const Scalar& m = secrets_.master(ref.triple, ref.kind);
  std::array<std::uint8_t, 32> seed{};
  rng_.fill(seed);
  NonceStream nonces(seed);
  const auto e = hash_id(ref.party);
  ShareClaim c{ref.party, ref.kind, ref.triple, GroupElement::base_mul(share(ref.party, ref.kind, ref.triple)),
               derivation_prove(m, e, nonces)};
  std::lock_guard lock(cache_mu_);
  claims_.emplace(key, c);
  return c;
}

GroupElement PeerNode::verified_point(const ShareRef& ref, const std::vector<ShareClaim>& claims) {
  if (secrets_.holds(ref.triple)) return GroupElement::base_mul(share(ref.party, ref.kind, ref.triple));
  const auto key = cache_key(ref.party, ref.kind, ref.triple);
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = verified_.find(key); it != verified_.end()) return it->second;
  }
  for (const auto& c : claims) {
    if (c.party != ref.party || c.kind != ref.kind || !(c.triple == ref.triple)) continue;
    if (!derivation_verify(secrets_.publics(ref.triple).powers(ref.kind), hash_id(ref.party), c.point, c.proof))
      throw Error(ErrorCode::ChainInvalid, "derivation proof for " + triple_name(ref.triple) + " rejected");
    std::lock_guard lock(cache_mu_);
    verified_.emplace(key, c.point);
    return c.point;
  }
  throw Error(ErrorCode::ChainInvalid, "no share claim for " + ref.party + " on " + triple_name(ref.triple));
}

void PeerNode::verify_chain(const TranscryptRequest& req) {
  const Cyphertext& named = *req.permit.cyphertext;
  if (req.chain.empty()) {
    if (!(req.cyphertexts[0] == named))
      throw Error(ErrorCode::ChainInvalid, "input is not the cyphertext named by the permit");
    return;
  }
  Cyphertext prev = named;
  TripleMask used = 0;
  std::uint8_t seen_peers = 0;
  for (const auto& link : req.chain) {
    const auto bit = static_cast<std::uint8_t>(1u << peer_index(link.peer));
    if (link.peer == peer() || (seen_peers & bit))
      throw Error(ErrorCode::ChainInvalid, "peer repeated in chain");
    seen_peers |= bit;
    if ((link.mask & ~triples_of(link.peer)) || (link.mask & used))
      throw Error(ErrorCode::ChainInvalid, "chain masks overlap or are not held by the hop's peer");
    used |= link.mask;
    const auto lookup = [&](const ShareRef& ref) { return verified_point(ref, link.claims); };
    if (!verify_hop(prev, link.c_out, link.cert, Mode::Depseudonymise, req.from, req.to, link.mask, lookup))
      throw Error(ErrorCode::ChainInvalid,
                  std::string("certificate of peer ") + peer_letter(link.peer) + " does not verify");
    prev = link.c_out;
  }
  if (!(prev == req.cyphertexts[0])) throw Error(ErrorCode::ChainInvalid, "input does not continue the chain");
  if (req.mask & used) throw Error(ErrorCode::ChainInvalid, "assigned triples already processed");
}

TranscryptResponse PeerNode::handle_transcrypt(const std::string& client, const TranscryptRequest& req,
                                               const Hash32& request_hash) {
  if (req.cyphertexts.empty()) throw Error(ErrorCode::InvalidArgument, "empty cyphertext list");
  if (req.mask & ~triples_of(peer()))
    throw Error(ErrorCode::NotMyTriples, std::string("peer ") + peer_letter(peer()) + " is not in every assigned triple");
  check_party(req.from);
  check_party(req.to);
  check_permit(req.permit, ca_public_, client, req.mode, req.from, req.to, clock_());
  if (req.mode == Mode::Depseudonymise) {
    if (req.cyphertexts.size() != 1) throw Error(ErrorCode::InvalidArgument, "depseudonymisation is per cyphertext");
    verify_chain(req);
  } else if (!req.chain.empty()) {
    throw Error(ErrorCode::InvalidArgument, "chain only applies to depseudonymisation");
  }

  const Factors f = factors(req.mode, req.from, req.to, req.mask);
  const bool attach = req.flags & kFlagAttachProofs;
  std::vector<ShareClaim> claims;
  if (attach && req.mode == Mode::Depseudonymise)
    for (const auto& ref : factor_share_refs(req.mode, req.from, req.to, req.mask)) claims.push_back(claim(ref));

  // All cyphertexts sharing a target share the new target s * tau.
  std::unordered_map<std::string, GroupElement> targets;
  TranscryptResponse out;
  out.items.reserve(req.cyphertexts.size());
  for (const auto& c : req.cyphertexts) {
    const auto key = c.target.encode();
    std::string k(key.begin(), key.end());
    auto it = targets.find(k);
    if (it == targets.end()) it = targets.emplace(k, f.s * c.target).first;

    TicketRecord rec;
    rec.request_hash = request_hash;
    rec.mode = req.mode;
    rec.from = req.from;
    rec.to = req.to;
    rec.mask = req.mask;
    rec.c_in = c;
    rec.r = Scalar::random_nonzero(rng_);
    rng_.fill(rec.nonce_seed);

    Scalar n_used = f.n;
    const auto op = ops_.fetch_add(1);
    if (faults_.corrupt_probability > 0 && op >= faults_.corrupt_after &&
        rng_.next_unit() < faults_.corrupt_probability) {
      n_used = f.n * fault_tweak(rec.nonce_seed);
      corrupted_.fetch_add(1);
    }
    rec.c_out = rsk(c, f.s, n_used, rec.r, it->second);

    TranscryptItem item;
    item.c_out = rec.c_out;
    item.ticket = seal_ticket(rec, secrets_.ticket_key(), peer(), rng_);
    if (attach) {
      item.cert = prove(rec, f, n_used);
      item.claims = claims;
    }
    out.items.push_back(std::move(item));
  }
  return out;
}

RSKCertificate PeerNode::handle_proof_request(const ProofRequest& req) {
  const auto rec = open_ticket(req.ticket, secrets_.ticket_key(), peer());
  if (rec.request_hash != req.request_hash || !(rec.c_in == req.c_in) || !(rec.c_out == req.c_out))
    throw Error(ErrorCode::TicketMismatch, "ticket does not belong to this operation");
  if (faults_.refuse_proof) throw Error(ErrorCode::InvalidArgument, "proof refused");
  const Factors f = factors(rec.mode, rec.from, rec.to, rec.mask);
  if (rsk(rec.c_in, f.s, f.n, rec.r) == rec.c_out) return prove(rec, f, f.n);
  // Only a corrupting peer gets here; it certifies what it actually did.
  const Scalar n_used = f.n * fault_tweak(rec.nonce_seed);
  return prove(rec, f, n_used);
}

const Scalar& PeerNode::lie_master() {
  std::lock_guard lock(cache_mu_);
  if (!lie_master_) {
    const std::uint8_t tag[] = {faults_.enrolment_lie->index};
    lie_master_ = hash_bytes_to_scalar("pep3-fault-enrol", tag);
    lie_public_ = secrets_.publics(*faults_.enrolment_lie);
    lie_public_->s_powers = powers_table(*lie_master_);
  }
  return *lie_master_;
}

EnrolResponse PeerNode::handle_enrolment(const std::string& party) {
  check_party(party);
  const bool lying = faults_.enrolment_lie && secrets_.holds(*faults_.enrolment_lie);
  if (lying) lie_master();
  EnrolResponse out;
  for (auto t : all_triples()) {
    const bool fake = lying && t == *faults_.enrolment_lie;
    out.tables[t.index] = encode_triple_public(fake ? *lie_public_ : secrets_.publics(t));
    if (!secrets_.holds(t)) continue;
    std::array<std::uint8_t, 32> seed{};
    rng_.fill(seed);
    NonceStream nonces(seed);
    const Scalar& m = fake ? *lie_master_ : secrets_.master(t, KeyKind::Encryption);
    const auto e = hash_id(party);
    out.shares.push_back({t, fake ? derive_share(m, e) : share(party, KeyKind::Encryption, t),
                          derivation_prove(m, e, nonces)});
  }
  return out;
}

DerivationResponse PeerNode::handle_derivation_proof_request(const DerivationRequest& req) {
  if (!secrets_.holds(req.triple))
    throw Error(ErrorCode::NotMyTriples, std::string("peer ") + peer_letter(peer()) + " is not in " +
                                             triple_name(req.triple));
  check_party(req.party);
  const auto c = claim({req.party, req.kind, req.triple});
  return {c.point, c.proof};
}

Frame PeerNode::handle(const std::string& client, const Frame& request) {
  switch (request.tag) {
    case MsgTag::TranscryptRequest: {
      const auto req = TranscryptRequest::decode(request.payload);
      return {MsgTag::TranscryptResponse, handle_transcrypt(client, req, sha256(request.payload)).encode()};
    }
    case MsgTag::ProofRequest:
      return {MsgTag::ProofResponse, handle_proof_request(ProofRequest::decode(request.payload)).encode()};
    case MsgTag::EnrolRequest:
      if (!request.payload.empty()) throw Error(ErrorCode::Malformed, "enrolment request carries no payload");
      return {MsgTag::EnrolResponse, handle_enrolment(client).encode()};
    case MsgTag::DerivationRequest:
      return {MsgTag::DerivationResponse,
              handle_derivation_proof_request(DerivationRequest::decode(request.payload)).encode()};
    default:
      throw Error(ErrorCode::Malformed, "unsupported message for a peer");
  }
}

}  // namespace pep3
