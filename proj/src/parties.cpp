#include "pep3/parties.hpp"

#include <algorithm>
#include <set>

namespace pep3 {
namespace {

constexpr std::size_t kBatch = 4096;

std::tuple<std::string, int, int> point_key(const ShareRef& ref) {
  return {ref.party, static_cast<int>(ref.kind), ref.triple.index};
}

std::string peer_name(PeerId p) { return std::string(1, peer_letter(p)); }

}  // namespace

PartyClient::PartyClient(std::string id, SigningKey auth_key, const Directory& directory, Connector& connector,
                         RandomSource& rng)
    : id_(std::move(id)),
      auth_(std::move(auth_key)),
      directory_(directory),
      connector_(connector),
      rng_(rng),
      sample_rng_(&rng) {}

const Scalar& PartyClient::encryption_key() const {
  if (!key_) throw Error(ErrorCode::InvalidArgument, id_ + " is not enrolled");
  return *key_;
}

void PartyClient::set_sampling(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::InvalidArgument, "sampling probability must be in [0,1]");
  sampling_ = q;
}

RpcChannel PartyClient::open_channel(const std::string& node) {
  const auto& info = directory_.at(node);
  return RpcChannel(connector_.connect(node), id_, auth_, node, info.auth_public, rng_);
}

RpcChannel& PartyClient::peer_channel(PeerId p) {
  auto it = channels_.find(p);
  if (it == channels_.end())
    it = channels_.emplace(p, std::make_unique<RpcChannel>(open_channel(peer_name(p)))).first;
  return *it->second;
}

ActiveSet PartyClient::active() {
  if (active_) return *active_;
  std::vector<PeerId> up;
  for (auto p : kAllPeers) {
    if (up.size() == 3) break;
    try {
      peer_channel(p);
      up.push_back(p);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::PeerUnreachable) throw;
    }
  }
  if (up.size() < 3) throw Error(ErrorCode::PeerUnreachable, "fewer than three peers reachable");
  return {up[0], up[1], up[2]};
}

const TriplePublic& PartyClient::table(TripleId t) const {
  if (!tables_[t.index]) throw Error(ErrorCode::InvalidArgument, id_ + " is not enrolled");
  return *tables_[t.index];
}

EnrolmentReport PartyClient::enrol() {
  EnrolmentReport report;
  std::map<PeerId, EnrolResponse> responses;
  std::set<PeerId> liars;
  for (auto p : kAllPeers) {
    try {
      const auto bytes = peer_channel(p).call(MsgTag::EnrolRequest, {}, MsgTag::EnrolResponse);
      responses.emplace(p, EnrolResponse::decode(bytes));
      report.responded.push_back(p);
    } catch (const Error& e) {
      channels_.erase(p);
      if (e.code() == ErrorCode::PeerUnreachable) continue;
      liars.insert(p);
    }
  }
  if (responses.size() < 3) throw Error(ErrorCode::PeerUnreachable, "enrolment needs at least three peers");

  for (auto t : all_triples()) {
    std::map<Hash32, std::vector<PeerId>> votes;
    for (const auto& [p, r] : responses) votes[sha256(r.tables[t.index])].push_back(p);
    auto best = std::max_element(votes.begin(), votes.end(),
                                 [](const auto& a, const auto& b) { return a.second.size() < b.second.size(); });
    if (best->second.size() < 3)
      throw Error(ErrorCode::MismatchAbort, "no majority on the powers tables of " + triple_name(t));
    for (const auto& [h, ps] : votes)
      if (h != best->first) liars.insert(ps.begin(), ps.end());
    tables_[t.index] = decode_triple_public(responses.at(best->second.front()).tables[t.index]);
  }

  const auto e = hash_id(id_);
  Scalar key = Scalar::one();
  for (auto t : all_triples()) {
    std::optional<Scalar> accepted;
    for (auto p : triple_members(t)) {
      auto it = responses.find(p);
      if (it == responses.end()) continue;
      const auto& shares = it->second.shares;
      auto sh = std::find_if(shares.begin(), shares.end(), [&](const EnrolShare& s) { return s.triple == t; });
      if (sh == shares.end()) {
        liars.insert(p);
        continue;
      }
      if (accepted && sh->share == *accepted) continue;
      if (!accepted &&
          derivation_verify(tables_[t.index]->s_powers, e, GroupElement::base_mul(sh->share), sh->proof)) {
        accepted = sh->share;
        continue;
      }
      liars.insert(p);
    }
    if (!accepted) throw Error(ErrorCode::MismatchAbort, "no valid share for " + triple_name(t));
    // Honest members that answered before an accepted share was found are
    // re-checked against it.
    for (auto p : triple_members(t)) {
      auto it = responses.find(p);
      if (it == responses.end()) continue;
      for (const auto& s : it->second.shares)
        if (s.triple == t && s.share != *accepted) liars.insert(p);
    }
    key *= *accepted;
    points_[point_key({id_, KeyKind::Encryption, t})] = GroupElement::base_mul(*accepted);
  }
  key_ = key;
  report.liars.assign(liars.begin(), liars.end());
  return report;
}

GroupElement PartyClient::share_point(const ShareRef& ref, std::optional<PeerId> ask) {
  const auto key = point_key(ref);
  if (auto it = points_.find(key); it != points_.end()) return it->second;
  PeerId who = ask && triple_contains(ref.triple, *ask) ? *ask : triple_members(ref.triple)[0];
  const auto bytes = peer_channel(who).call(MsgTag::DerivationRequest,
                                            DerivationRequest{ref.party, ref.kind, ref.triple}.encode(),
                                            MsgTag::DerivationResponse);
  const auto resp = DerivationResponse::decode(bytes);
  if (!derivation_verify(table(ref.triple).powers(ref.kind), hash_id(ref.party), resp.point, resp.proof))
    throw Error(ErrorCode::ProofVerificationFailure,
                "derivation proof from peer " + peer_name(who) + " for " + triple_name(ref.triple) + " rejected");
  points_[key] = resp.point;
  return resp.point;
}

bool PartyClient::check_hop(PeerId p, Mode mode, const std::string& from, const std::string& to, TripleMask mask,
                            const Cyphertext& c_in, const Cyphertext& c_out, const RSKCertificate& cert) {
  return verify_hop(c_in, c_out, cert, mode, from, to, mask,
                    [&](const ShareRef& ref) { return share_point(ref, p); });
}

std::vector<Cyphertext> PartyClient::transcrypt(Mode mode, const std::string& from, const std::string& to,
                                                const std::vector<Cyphertext>& in, const Permit& permit) {
  if (mode == Mode::Depseudonymise) throw Error(ErrorCode::InvalidArgument, "use depseudonymise()");
  const auto act = active();
  const auto parts = partition_triples(act);
  const auto detections_before = stats_.detections.size();
  std::vector<Cyphertext> out;
  out.reserve(in.size());
  for (std::size_t start = 0; start < in.size(); start += kBatch) {
    std::vector<Cyphertext> cur(in.begin() + static_cast<std::ptrdiff_t>(start),
                                in.begin() + static_cast<std::ptrdiff_t>(std::min(in.size(), start + kBatch)));
    for (auto p : act) {
      const TripleMask mask = parts[peer_index(p)];
      const TranscryptRequest req{mode, from, to, mask, 0, permit, cur, {}};
      const auto payload = req.encode();
      const auto hash = sha256(payload);
      auto& ch = peer_channel(p);
      const auto resp = TranscryptResponse::decode(ch.call(MsgTag::TranscryptRequest, payload, MsgTag::TranscryptResponse));
      if (resp.items.size() != cur.size()) throw Error(ErrorCode::Malformed, "peer returned a wrong batch size");
      std::vector<Cyphertext> next;
      next.reserve(cur.size());
      for (std::size_t i = 0; i < cur.size(); ++i) {
        const auto& item = resp.items[i];
        const auto op = stats_.operations++;
        next.push_back(item.c_out);
        if (!(sample_rng_->next_unit() < sampling_)) continue;
        ++stats_.sampled;
        std::string reason = "certificate rejected";
        bool ok = false;
        try {
          const ProofRequest pr{hash, item.ticket, cur[i], item.c_out};
          const auto cert = RSKCertificate::decode(ch.call(MsgTag::ProofRequest, pr.encode(), MsgTag::ProofResponse));
          ok = check_hop(p, mode, from, to, mask, cur[i], item.c_out, cert);
        } catch (const Error& e) {
          if (e.code() == ErrorCode::PeerUnreachable) throw;
          reason = e.what();
        }
        if (ok) ++stats_.verified;
        else stats_.detections.push_back({p, op, reason});
      }
      cur = std::move(next);
    }
    out.insert(out.end(), cur.begin(), cur.end());
  }
  if (throw_on_detection_ && stats_.detections.size() > detections_before) {
    const auto& d = stats_.detections[detections_before];
    throw Error(ErrorCode::ProofVerificationFailure, "peer " + peer_name(d.peer) + ": " + d.reason);
  }
  return out;
}

Cyphertext PartyClient::depseudonymise(const Cyphertext& c, const Permit& warrant) {
  const auto act = active();
  const auto parts = partition_triples(act);
  std::vector<ChainLink> chain;
  Cyphertext cur = c;
  for (auto p : act) {
    const TripleMask mask = parts[peer_index(p)];
    const TranscryptRequest req{Mode::Depseudonymise, id_, id_, mask, kFlagAttachProofs, warrant, {cur}, chain};
    const auto resp =
        TranscryptResponse::decode(peer_channel(p).call(MsgTag::TranscryptRequest, req.encode(), MsgTag::TranscryptResponse));
    if (resp.items.size() != 1 || !resp.items[0].cert)
      throw Error(ErrorCode::ChainBreak, "peer " + peer_name(p) + " returned no certificate");
    const auto& item = resp.items[0];
    const auto lookup = [&](const ShareRef& ref) {
      const auto key = point_key(ref);
      if (auto it = points_.find(key); it != points_.end()) return it->second;
      for (const auto& cl : item.claims) {
        if (cl.party == ref.party && cl.kind == ref.kind && cl.triple == ref.triple &&
            derivation_verify(table(ref.triple).powers(ref.kind), hash_id(ref.party), cl.point, cl.proof)) {
          points_[key] = cl.point;
          return cl.point;
        }
      }
      return share_point(ref, p);
    };
    bool ok = false;
    try {
      ok = verify_hop(cur, item.c_out, *item.cert, Mode::Depseudonymise, id_, id_, mask, lookup);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::PeerUnreachable) throw;
    }
    if (!ok) throw Error(ErrorCode::ChainBreak, "certificate of peer " + peer_name(p) + " does not verify");
    chain.push_back({p, mask, item.c_out, *item.cert, item.claims});
    cur = item.c_out;
  }
  return cur;
}

std::optional<Cyphertext> AddressCache::get(const Address128& a) {
  auto it = map_.find(a);
  if (it == map_.end()) return std::nullopt;
  order_.splice(order_.begin(), order_, it->second);
  return it->second->second;
}

void AddressCache::put(const Address128& a, const Cyphertext& c) {
  if (capacity_ == 0) return;
  if (auto it = map_.find(a); it != map_.end()) {
    it->second->second = c;
    order_.splice(order_.begin(), order_, it->second);
    return;
  }
  order_.emplace_front(a, c);
  map_[a] = order_.begin();
  if (map_.size() > capacity_) {
    map_.erase(order_.back().first);
    order_.pop_back();
  }
}

MeteringProcess::MeteringProcess(PartyClient& client, Permit permit, std::string sf_id, std::size_t cache_capacity)
    : client_(client), permit_(std::move(permit)), sf_id_(std::move(sf_id)), cache_(cache_capacity) {}

std::vector<EncryptedFlow> MeteringProcess::pseudonymise(const std::vector<PlainFlow>& flows) {
  std::map<Address128, Cyphertext> resolved;
  std::vector<Address128> pending;
  std::set<Address128> pending_set;
  auto want = [&](const Address128& a) {
    if (resolved.count(a) || pending_set.count(a)) {
      ++stats_.cache_hits;
      return;
    }
    if (auto c = cache_.get(a)) {
      ++stats_.cache_hits;
      resolved.emplace(a, *c);
      return;
    }
    ++stats_.cache_misses;
    pending.push_back(a);
    pending_set.insert(a);
  };
  for (const auto& f : flows) {
    want(f.src);
    want(f.dst);
  }
  if (!pending.empty()) {
    const auto target = client_.encryption_public();
    std::vector<Cyphertext> cs;
    cs.reserve(pending.size());
    for (const auto& a : pending) cs.push_back(encrypt(lizard_encode(a), target, secure_random()));
    const auto out = client_.transcrypt(Mode::Pseudonymise, client_.id(), sf_id_, cs, permit_);
    stats_.peer_round_trips += (pending.size() + kBatch - 1) / kBatch;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      resolved.emplace(pending[i], out[i]);
      cache_.put(pending[i], out[i]);
    }
  }
  std::vector<EncryptedFlow> result;
  result.reserve(flows.size());
  for (const auto& f : flows) result.push_back(f.map<Cyphertext>([&](const Address128& a) { return resolved.at(a); }));
  stats_.records += flows.size();
  return result;
}

Retrieval retrieve(PartyClient& client, StorageClient& sf, const std::string& sf_id, const std::string& query,
                   const std::vector<GroupElement>& own_pseudonyms, const Permit& to_sf, const Permit& from_sf) {
  parse_query(query);
  const auto own = client.encryption_public();
  std::vector<Cyphertext> args;
  for (const auto& p : own_pseudonyms) args.push_back(encrypt(p, own, secure_random()));
  if (!args.empty()) args = client.transcrypt(Mode::Translate, client.id(), sf_id, args, to_sf);
  auto res = sf.query(query, args);

  Retrieval out;
  out.plain.columns = res.columns;
  out.plain.count = res.count;
  std::vector<Cyphertext> returned;
  for (const auto& row : res.rows)
    for (const auto& v : row)
      if (const auto* c = std::get_if<Cyphertext>(&v)) returned.push_back(*c);
  if (!returned.empty()) returned = client.transcrypt(Mode::Translate, sf_id, client.id(), returned, from_sf);
  std::size_t k = 0;
  for (auto& row : res.rows) {
    std::vector<ResultSet<GroupElement>::Value> plain;
    for (auto& v : row) {
      if (std::holds_alternative<Cyphertext>(v)) {
        v = returned[k++];
        plain.emplace_back(decrypt(std::get<Cyphertext>(v), client.encryption_key()));
      } else {
        plain.emplace_back(std::get<std::uint64_t>(v));
      }
    }
    out.plain.rows.push_back(std::move(plain));
  }
  out.encrypted = std::move(res);
  return out;
}

std::string investigate_depseudonymise(PartyClient& client, const Cyphertext& c, const Permit& warrant) {
  const auto result = client.depseudonymise(c, warrant);
  const auto point = decrypt(result, client.encryption_key());
  const auto addr = lizard_decode(point);
  if (!addr) throw Error(ErrorCode::NotAnAddress, "depseudonymised point does not decode to an address");
  return address128_to_ip(*addr);
}

Permit CertificationAuthority::issue(std::string subject, Mode op, std::vector<std::string> from,
                                     std::vector<std::string> to, std::optional<Cyphertext> cyphertext,
                                     std::int64_t lifetime_seconds) {
  return ca_issue_permit(key_, std::move(subject), op, std::move(from), std::move(to), std::move(cyphertext),
                         unix_now() + lifetime_seconds, rng_);
}

}  // namespace pep3
