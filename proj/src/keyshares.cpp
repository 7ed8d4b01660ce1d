#include "pep3/keyshares.hpp"

#include <sodium.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>

#include "pep3/error.hpp"

namespace pep3 {
namespace {

constexpr std::array<const char*, kTripleCount> kTripleNames = {"ABE", "ABC", "BCD", "CDE", "ADE",
                                                                "ACD", "BDE", "ACE", "ABD", "BCE"};

int letter_bit(char c) { return 1 << (c - 'A'); }

int name_bits(std::string_view name) {
  int bits = 0;
  for (char c : name) bits |= letter_bit(c);
  return bits;
}

}  // namespace

char peer_letter(PeerId p) { return static_cast<char>('A' + peer_index(p)); }

std::optional<PeerId> peer_from_letter(char c) {
  if (c >= 'a' && c <= 'e') c = static_cast<char>(c - 'a' + 'A');
  if (c < 'A' || c > 'E') return std::nullopt;
  return static_cast<PeerId>(c - 'A');
}

std::array<PeerId, 3> triple_members(TripleId t) {
  const char* n = kTripleNames.at(t.index);
  std::array<PeerId, 3> out{*peer_from_letter(n[0]), *peer_from_letter(n[1]), *peer_from_letter(n[2])};
  std::sort(out.begin(), out.end());
  return out;
}

bool triple_contains(TripleId t, PeerId p) {
  return name_bits(kTripleNames.at(t.index)) & (1 << peer_index(p));
}

std::string triple_name(TripleId t) { return kTripleNames.at(t.index); }

std::optional<TripleId> triple_from_name(std::string_view name) {
  if (name.size() != 3) return std::nullopt;
  std::string upper(name);
  for (char& c : upper) {
    auto p = peer_from_letter(c);
    if (!p) return std::nullopt;
    c = peer_letter(*p);
  }
  const int bits = name_bits(upper);
  for (std::uint8_t i = 0; i < kTripleCount; ++i) {
    if (name_bits(kTripleNames[i]) == bits) return TripleId{i};
  }
  return std::nullopt;
}

std::array<TripleId, kTripleCount> all_triples() {
  std::array<TripleId, kTripleCount> out;
  for (std::uint8_t i = 0; i < kTripleCount; ++i) out[i] = TripleId{i};
  return out;
}

std::vector<TripleId> mask_triples(TripleMask m) {
  std::vector<TripleId> out;
  for (auto t : all_triples()) {
    if (mask_has(m, t)) out.push_back(t);
  }
  return out;
}

TripleMask triples_of(PeerId p) {
  TripleMask m = 0;
  for (auto t : all_triples()) {
    if (triple_contains(t, p)) m = mask_with(m, t);
  }
  return m;
}

ActiveSet parse_active(std::string_view letters) {
  if (letters.size() != 3) throw Error(ErrorCode::InvalidArgument, "active set needs three peers");
  ActiveSet out;
  for (int i = 0; i < 3; ++i) {
    auto p = peer_from_letter(letters[i]);
    if (!p) throw Error(ErrorCode::InvalidArgument, "unknown peer letter in active set");
    out[i] = *p;
  }
  if (out[0] == out[1] || out[0] == out[2] || out[1] == out[2])
    throw Error(ErrorCode::InvalidArgument, "active peers must be distinct");
  return out;
}

std::string active_name(const ActiveSet& a) {
  return {peer_letter(a[0]), peer_letter(a[1]), peer_letter(a[2])};
}

std::array<ActiveSet, 10> all_active_sets() {
  std::array<ActiveSet, 10> out;
  int k = 0;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j)
      for (int l = j + 1; l < 5; ++l)
        out[k++] = {static_cast<PeerId>(i), static_cast<PeerId>(j), static_cast<PeerId>(l)};
  return out;
}

std::array<TripleMask, kPeerCount> partition_triples(const ActiveSet& active) {
  if (active[0] == active[1] || active[0] == active[2] || active[1] == active[2])
    throw Error(ErrorCode::InvalidArgument, "active peers must be distinct");
  ActiveSet sorted = active;
  std::sort(sorted.begin(), sorted.end());
  std::array<TripleMask, kPeerCount> out{};
  for (auto t : all_triples()) {
    for (auto p : sorted) {
      if (triple_contains(t, p)) {
        out[peer_index(p)] = mask_with(out[peer_index(p)], t);
        break;
      }
    }
  }
  return out;
}

// --- derivation ------------------------------------------------------------

ExponentScalar hash_id(std::string_view id) {
  if (id.empty()) throw Error(ErrorCode::InvalidArgument, "empty party id");
  for (std::uint32_t counter = 0;; ++counter) {
    ByteWriter w;
    w.str("pep3-id").str(id).u32(counter);
    std::array<std::uint8_t, 64> digest{};
    crypto_hash_sha512(digest.data(), w.bytes().data(), w.bytes().size());
    auto e = ExponentScalar::from_bytes_wide(digest);
    if (!e.is_zero()) return e;
  }
}

Scalar derive_share(const Scalar& master, const ExponentScalar& exponent) {
  return master.pow(exponent);
}

Scalar derive_share(const Scalar& master, std::string_view id) {
  return derive_share(master, hash_id(id));
}

Scalar assemble_party_key(std::span<const Scalar> shares) {
  Scalar out = Scalar::one();
  for (const auto& s : shares) {
    if (s.is_zero()) throw Error(ErrorCode::ZeroKey, "zero key share");
    out *= s;
  }
  return out;
}

// --- master secrets --------------------------------------------------------

MasterSecrets::MasterSecrets(PeerId self, std::array<std::optional<TripleSecrets>, kTripleCount> held,
                             std::array<TriplePublic, kTripleCount> publics,
                             std::array<std::uint8_t, 32> ticket_key)
    : self_(self), held_(std::move(held)), publics_(std::move(publics)), ticket_key_(ticket_key) {}

const TripleSecrets& MasterSecrets::secrets(TripleId t) const {
  if (!held_[t.index]) {
    throw Error(ErrorCode::MissingShare,
                std::string("peer ") + peer_letter(self_) + " does not hold " + triple_name(t));
  }
  return *held_[t.index];
}

const Scalar& MasterSecrets::master(TripleId t, KeyKind k) const {
  const auto& s = secrets(t);
  return k == KeyKind::Pseudonym ? s.n : s.s;
}

Scalar partition_factor(const MasterSecrets& ms, TripleMask assigned, std::string_view id,
                        KeyKind which) {
  Scalar out = Scalar::one();
  if (assigned == 0) return out;
  const auto e = hash_id(id);
  for (auto t : mask_triples(assigned)) out *= derive_share(ms.master(t, which), e);
  return out;
}

namespace {

void write_table(ByteWriter& w, const PowersTable& t) {
  for (const auto& e : t) w.raw(e.encode());
}

PowersTable read_table(ByteReader& r) {
  PowersTable t;
  t.reserve(kPowersCount);
  for (int i = 0; i < kPowersCount; ++i) t.push_back(read_element(r));
  return t;
}

constexpr char kMasterMagic[8] = {'P', 'E', 'P', '3', 'M', 'S', '0', '1'};

}  // namespace

Bytes MasterSecrets::serialise() const {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(self_));
  TripleMask mask = 0;
  for (auto t : all_triples()) {
    if (holds(t)) mask = mask_with(mask, t);
  }
  w.u16(mask);
  for (auto t : mask_triples(mask)) {
    write_scalar(w, held_[t.index]->n);
    write_scalar(w, held_[t.index]->s);
  }
  for (const auto& p : publics_) {
    write_table(w, p.n_powers);
    write_table(w, p.s_powers);
  }
  w.raw(ticket_key_);
  return w.take();
}

MasterSecrets MasterSecrets::deserialise(std::span<const std::uint8_t> in) {
  ByteReader r(in);
  const auto self = r.u8();
  if (self >= kPeerCount) throw Error(ErrorCode::Malformed, "bad peer id in master file");
  const auto mask = r.u16();
  if (mask & ~kAllTriplesMask) throw Error(ErrorCode::Malformed, "bad triple mask in master file");
  std::array<std::optional<TripleSecrets>, kTripleCount> held;
  for (auto t : mask_triples(mask)) {
    const Scalar n = read_scalar(r);
    const Scalar s = read_scalar(r);
    held[t.index] = TripleSecrets{n, s};
  }
  std::array<TriplePublic, kTripleCount> publics;
  for (auto& p : publics) {
    p.n_powers = read_table(r);
    p.s_powers = read_table(r);
  }
  const auto key = r.fixed<32>();
  r.expect_done();
  return MasterSecrets(static_cast<PeerId>(self), std::move(held), std::move(publics), key);
}

void MasterSecrets::save(const std::string& path, const std::array<std::uint8_t, 32>& file_key) const {
  const Bytes plain = serialise();
  std::array<std::uint8_t, crypto_secretbox_NONCEBYTES> nonce{};
  randombytes_buf(nonce.data(), nonce.size());
  Bytes boxed(plain.size() + crypto_secretbox_MACBYTES);
  crypto_secretbox_easy(boxed.data(), plain.data(), plain.size(), nonce.data(), file_key.data());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out.write(kMasterMagic, sizeof kMasterMagic);
  out.write(reinterpret_cast<const char*>(nonce.data()), nonce.size());
  out.write(reinterpret_cast<const char*>(boxed.data()), static_cast<std::streamsize>(boxed.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path);
}

MasterSecrets MasterSecrets::load(const std::string& path, const std::array<std::uint8_t, 32>& file_key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  const Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t header = sizeof kMasterMagic + crypto_secretbox_NONCEBYTES;
  if (data.size() < header + crypto_secretbox_MACBYTES ||
      !std::equal(std::begin(kMasterMagic), std::end(kMasterMagic), data.begin()))
    throw Error(ErrorCode::Malformed, "not a master-secret file: " + path);
  Bytes plain(data.size() - header - crypto_secretbox_MACBYTES);
  if (crypto_secretbox_open_easy(plain.data(), data.data() + header, data.size() - header,
                                 data.data() + sizeof kMasterMagic, file_key.data()) != 0)
    throw Error(ErrorCode::Malformed, "master-secret file fails authentication: " + path);
  return deserialise(plain);
}

// --- setup -----------------------------------------------------------------

namespace {

enum SetupKind : std::uint8_t { kHello = 1, kMissive = 2, kPublish = 3, kDigest = 4 };

int pair_index(PeerId a, PeerId b) {
  const int x = std::min(peer_index(a), peer_index(b));
  const int y = std::max(peer_index(a), peer_index(b));
  return x * kPeerCount + y;
}

std::string pair_name(PeerId a, PeerId b) {
  std::string s{peer_letter(a), peer_letter(b)};
  std::sort(s.begin(), s.end());
  return s;
}

ByteReader open_body(const SetupMessage& m, SetupKind kind) {
  ByteReader r(m.body);
  if (r.u8() != kind) throw Error(ErrorCode::Malformed, "unexpected setup message kind");
  return r;
}

[[noreturn]] void abort_setup(PeerId self, const std::string& what) {
  throw Error(ErrorCode::MismatchAbort, std::string("peer ") + peer_letter(self) + ": " + what);
}

}  // namespace

SetupParticipant::SetupParticipant(PeerId self, RandomSource& rng, SetupFault fault)
    : self_(self), rng_(rng), fault_(fault), ephemeral_(Scalar::random_nonzero(rng)) {}

std::vector<SetupMessage> SetupParticipant::hello() {
  std::vector<SetupMessage> out;
  const auto point = GroupElement::base_mul(ephemeral_);
  for (auto p : kAllPeers) {
    if (p == self_) continue;
    ByteWriter w;
    w.u8(kHello);
    write_element(w, point);
    out.push_back({self_, p, w.take()});
  }
  return out;
}

std::vector<SetupMessage> SetupParticipant::missives(const std::vector<SetupMessage>& hellos) {
  const auto mine = GroupElement::base_mul(ephemeral_);
  for (const auto& m : hellos) {
    auto r = open_body(m, kHello);
    const auto theirs = read_element(r);
    const auto shared = ephemeral_ * theirs;
    const bool self_first = peer_index(self_) < peer_index(m.from);
    const GroupElement lo = self_first ? mine : theirs;
    const GroupElement hi = self_first ? theirs : mine;
    const std::string tag = "pep3-setup-" + pair_name(self_, m.from);
    const Scalar n = hash_to_scalar(tag + "-n", {lo, hi, shared});
    const Scalar s = hash_to_scalar(tag + "-s", {lo, hi, shared});
    if (n.is_zero() || s.is_zero()) abort_setup(self_, "degenerate pair secret");
    pair_[pair_index(self_, m.from)] = TripleSecrets{n, s};
  }
  std::vector<SetupMessage> out;
  bool corrupted = false;
  for (auto t : all_triples()) {
    if (!triple_contains(t, self_)) continue;
    std::vector<PeerId> others;
    for (auto p : triple_members(t)) {
      if (p != self_) others.push_back(p);
    }
    // Each of the other two members lacks the pair formed by us and the third.
    for (int k = 0; k < 2; ++k) {
      const PeerId recipient = others[k];
      const PeerId partner = others[1 - k];
      const auto& secret = pair_[pair_index(self_, partner)];
      if (!secret) abort_setup(self_, "missing hello from " + std::string(1, peer_letter(partner)));
      Scalar n = secret->n;
      if (fault_.corrupt_missive && !corrupted) {
        n += Scalar::one();
        corrupted = true;
      }
      ByteWriter w;
      w.u8(kMissive).u8(t.index).u8(static_cast<std::uint8_t>(pair_index(self_, partner)));
      write_scalar(w, n);
      write_scalar(w, secret->s);
      out.push_back({self_, recipient, w.take()});
    }
  }
  return out;
}

std::vector<SetupMessage> SetupParticipant::publish(const std::vector<SetupMessage>& missives) {
  // Per triple, the copies of the missing pair secret received.
  std::map<int, std::vector<TripleSecrets>> received;
  for (const auto& m : missives) {
    auto r = open_body(m, kMissive);
    const std::uint8_t triple = r.u8();
    const std::uint8_t pair = r.u8();
    if (triple >= kTripleCount) throw Error(ErrorCode::Malformed, "bad triple index");
    const TripleId t{triple};
    const int a = pair / kPeerCount, b = pair % kPeerCount;
    const PeerId pa = static_cast<PeerId>(a), pb = static_cast<PeerId>(b);
    if (!triple_contains(t, self_) || !triple_contains(t, pa) || !triple_contains(t, pb) ||
        pa == self_ || pb == self_ || (m.from != pa && m.from != pb))
      abort_setup(self_, "unexpected missive from " + std::string(1, peer_letter(m.from)));
    const Scalar n = read_scalar(r);
    const Scalar s = read_scalar(r);
    received[triple].push_back({n, s});
  }
  std::vector<SetupMessage> out;
  bool corrupted = false;
  for (auto t : all_triples()) {
    if (!triple_contains(t, self_)) continue;
    const auto& copies = received[t.index];
    if (copies.size() != 2) abort_setup(self_, "missing missive for " + triple_name(t));
    if (!(copies[0].n == copies[1].n) || !(copies[0].s == copies[1].s))
      abort_setup(self_, "missives for " + triple_name(t) + " disagree");
    TripleSecrets secret = copies[0];
    for (auto p : triple_members(t)) {
      if (p == self_) continue;
      secret.n *= pair_[pair_index(self_, p)]->n;
      secret.s *= pair_[pair_index(self_, p)]->s;
    }
    held_[t.index] = secret;

    auto n_table = powers_table(secret.n);
    const auto s_table = powers_table(secret.s);
    if (fault_.corrupt_public && !corrupted) {
      n_table[17] += GroupElement::base();
      corrupted = true;
    }
    ByteWriter w;
    w.u8(kPublish).u8(t.index);
    write_table(w, n_table);
    write_table(w, s_table);
    own_tables_[t.index] = w.bytes();
    for (auto p : kAllPeers) {
      if (p != self_) out.push_back({self_, p, w.bytes()});
    }
  }
  return out;
}

std::vector<SetupMessage> SetupParticipant::digest(const std::vector<SetupMessage>& publications) {
  std::array<std::vector<const SetupMessage*>, kTripleCount> by_triple;
  for (const auto& m : publications) {
    auto r = open_body(m, kPublish);
    const std::uint8_t triple = r.u8();
    if (triple >= kTripleCount || !triple_contains(TripleId{triple}, m.from))
      abort_setup(self_, "publication from non-member " + std::string(1, peer_letter(m.from)));
    by_triple[triple].push_back(&m);
  }
  crypto_hash_sha256_state st;
  crypto_hash_sha256_init(&st);
  for (auto t : all_triples()) {
    std::vector<const Bytes*> copies;
    for (auto* m : by_triple[t.index]) copies.push_back(&m->body);
    if (triple_contains(t, self_)) copies.push_back(&own_tables_[t.index]);
    if (copies.size() != 3) abort_setup(self_, "missing publication for " + triple_name(t));
    for (std::size_t i = 1; i < copies.size(); ++i) {
      if (*copies[i] == *copies[0]) continue;
      // Locate the first differing entry for the diagnostic.
      std::size_t pos = 0;
      while (pos < copies[0]->size() && (*copies[0])[pos] == (*copies[i])[pos]) ++pos;
      const std::size_t entry = (pos - 2) / 32;
      const bool is_n = entry < kPowersCount;
      abort_setup(self_, "published powers for " + triple_name(t) + " disagree at " +
                             (is_n ? "n" : "s") + "-table entry " +
                             std::to_string(is_n ? entry : entry - kPowersCount));
    }
    ByteReader r(*copies[0]);
    r.u8();
    r.u8();
    publics_[t.index].n_powers = read_table(r);
    publics_[t.index].s_powers = read_table(r);
    crypto_hash_sha256_update(&st, copies[0]->data(), copies[0]->size());
  }
  crypto_hash_sha256_final(&st, digest_.data());
  std::vector<SetupMessage> out;
  for (auto p : kAllPeers) {
    if (p == self_) continue;
    ByteWriter w;
    w.u8(kDigest).raw(digest_);
    out.push_back({self_, p, w.take()});
  }
  return out;
}

MasterSecrets SetupParticipant::finish(const std::vector<SetupMessage>& digests) {
  if (digests.size() != kPeerCount - 1) abort_setup(self_, "missing digests");
  for (const auto& m : digests) {
    auto r = open_body(m, kDigest);
    if (r.fixed<32>() != digest_)
      abort_setup(self_, std::string("public tables differ from those seen by peer ") +
                             peer_letter(m.from));
  }
  std::array<std::uint8_t, 32> ticket_key{};
  rng_.fill(ticket_key);
  return MasterSecrets(self_, held_, publics_, ticket_key);
}

std::array<MasterSecrets, kPeerCount> run_setup(RandomSource& rng,
                                                const std::array<SetupFault, kPeerCount>& faults) {
  std::vector<SetupParticipant> parts;
  parts.reserve(kPeerCount);
  for (auto p : kAllPeers) parts.emplace_back(p, rng, faults[peer_index(p)]);

  using Inbox = std::array<std::vector<SetupMessage>, kPeerCount>;
  auto route = [](std::vector<SetupMessage>&& msgs, Inbox& inbox) {
    for (auto& m : msgs) inbox[peer_index(m.to)].push_back(std::move(m));
  };
  Inbox hellos, missives, pubs, digests;
  for (auto& p : parts) route(p.hello(), hellos);
  for (auto& p : parts) route(p.missives(hellos[peer_index(p.self())]), missives);
  for (auto& p : parts) route(p.publish(missives[peer_index(p.self())]), pubs);
  for (auto& p : parts) route(p.digest(pubs[peer_index(p.self())]), digests);
  std::array<MasterSecrets, kPeerCount> out;
  for (auto& p : parts) out[peer_index(p.self())] = p.finish(digests[peer_index(p.self())]);
  return out;
}

}  // namespace pep3
