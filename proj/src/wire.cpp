#include "pep3/wire.hpp"

namespace pep3 {
namespace {

template <typename F>
auto parse_all(std::span<const std::uint8_t> in, F&& f) {
  ByteReader r(in);
  auto out = f(r);
  r.expect_done();
  return out;
}

Signature read_signature(ByteReader& r) {
  auto sig = Signature::decode(r.fixed<64>());
  if (!sig) throw Error(ErrorCode::Malformed, "signature encoding");
  return *sig;
}

TripleId read_triple(ByteReader& r) {
  const auto t = r.u8();
  if (t >= kTripleCount) throw Error(ErrorCode::Malformed, "triple index");
  return TripleId{t};
}

KeyKind read_kind(ByteReader& r) {
  const auto k = r.u8();
  if (k > 1) throw Error(ErrorCode::Malformed, "key kind");
  return static_cast<KeyKind>(k);
}

TripleMask read_mask(ByteReader& r) {
  const auto m = r.u16();
  if (m & ~kAllTriplesMask) throw Error(ErrorCode::Malformed, "triple mask");
  return m;
}

}  // namespace

Bytes encode_frame(const Frame& f) {
  if (f.payload.size() + 1 > kMaxFrameBytes) throw Error(ErrorCode::InvalidArgument, "frame too large");
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(f.payload.size() + 1)).u8(static_cast<std::uint8_t>(f.tag)).raw(f.payload);
  return w.take();
}

Frame decode_frame(std::span<const std::uint8_t> in) {
  ByteReader r(in);
  const auto len = r.u32();
  if (len == 0 || len > kMaxFrameBytes) throw Error(ErrorCode::Malformed, "frame length");
  const auto tag = static_cast<MsgTag>(r.u8());
  auto payload = r.raw(len - 1);
  r.expect_done();
  return {tag, Bytes(payload.begin(), payload.end())};
}

Frame error_frame(const Error& e) {
  ByteWriter w;
  std::string msg = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
  if (msg.size() > 4000) msg.resize(4000);
  w.u8(static_cast<std::uint8_t>(e.code())).str(msg);
  return {MsgTag::Error, w.take()};
}

void throw_error_frame(const Frame& f) {
  ByteReader r(f.payload);
  const auto code = r.u8();
  const auto msg = r.str();
  if (code > static_cast<std::uint8_t>(ErrorCode::Config)) throw Error(ErrorCode::Malformed, "error frame code");
  throw Error(static_cast<ErrorCode>(code), msg);
}

Bytes Hello::encode() const {
  ByteWriter w;
  w.str(client_id).raw(client_nonce);
  return w.take();
}

Hello Hello::decode(std::span<const std::uint8_t> in) {
  return parse_all(in, [](ByteReader& r) {
    Hello h;
    h.client_id = r.str();
    h.client_nonce = r.fixed<32>();
    return h;
  });
}

Bytes Challenge::encode() const {
  ByteWriter w;
  w.str(server_id).raw(server_nonce).raw(signature.encode());
  return w.take();
}

Challenge Challenge::decode(std::span<const std::uint8_t> in) {
  return parse_all(in, [](ByteReader& r) {
    Challenge c;
    c.server_id = r.str();
    c.server_nonce = r.fixed<32>();
    c.signature = read_signature(r);
    return c;
  });
}

Bytes AuthResponse::encode() const {
  ByteWriter w;
  w.raw(signature.encode());
  return w.take();
}

AuthResponse AuthResponse::decode(std::span<const std::uint8_t> in) {
  return parse_all(in, [](ByteReader& r) { return AuthResponse{read_signature(r)}; });
}

Bytes server_auth_message(const Hash32& client_nonce, const Hash32& server_nonce, std::string_view client_id) {
  ByteWriter w;
  w.raw(client_nonce).raw(server_nonce).str(client_id);
  return w.take();
}

Bytes client_auth_message(const Hash32& server_nonce, const Hash32& client_nonce, std::string_view server_id) {
  ByteWriter w;
  w.raw(server_nonce).raw(client_nonce).str(server_id);
  return w.take();
}

void ShareClaim::write(ByteWriter& w) const {
  w.str(party).u8(static_cast<std::uint8_t>(kind)).u8(triple.index);
  write_element(w, point);
  proof.write(w);
}

ShareClaim ShareClaim::read(ByteReader& r) {
  ShareClaim c;
  c.party = r.str();
  c.kind = read_kind(r);
  c.triple = read_triple(r);
  c.point = read_element(r);
  c.proof = DerivationProof::read(r);
  return c;
}

void ChainLink::write(ByteWriter& w) const {
  w.u8(static_cast<std::uint8_t>(peer)).u16(mask);
  write_cyphertext(w, c_out);
  cert.write(w);
  w.u16(static_cast<std::uint16_t>(claims.size()));
  for (const auto& c : claims) c.write(w);
}

ChainLink ChainLink::read(ByteReader& r) {
  ChainLink l;
  const auto p = r.u8();
  if (p >= kPeerCount) throw Error(ErrorCode::Malformed, "peer index");
  l.peer = static_cast<PeerId>(p);
  l.mask = read_mask(r);
  l.c_out = read_cyphertext(r);
  l.cert = RSKCertificate::read(r);
  const auto n = r.u16();
  for (int i = 0; i < n; ++i) l.claims.push_back(ShareClaim::read(r));
  return l;
}

Bytes TranscryptRequest::encode() const {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(mode)).str(from).str(to).u16(mask).u8(flags);
  permit.write(w);
  w.u32(static_cast<std::uint32_t>(cyphertexts.size()));
  for (const auto& c : cyphertexts) write_cyphertext(w, c);
  w.u16(static_cast<std::uint16_t>(chain.size()));
  for (const auto& l : chain) l.write(w);
  return w.take();
}

TranscryptRequest TranscryptRequest::decode(std::span<const std::uint8_t> in) {
  return parse_all(in, [](ByteReader& r) {
    TranscryptRequest q;
    const auto m = r.u8();
    if (m > 2) throw Error(ErrorCode::Malformed, "mode");
    q.mode = static_cast<Mode>(m);
    q.from = r.str();
    q.to = r.str();
    q.mask = read_mask(r);
    q.flags = r.u8();
    q.permit = Permit::read(r);
    const auto n = r.u32();
    if (n > r.remaining() / 96) throw Error(ErrorCode::Malformed, "cyphertext count");
    q.cyphertexts.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) q.cyphertexts.push_back(read_cyphertext(r));
    const auto k = r.u16();
    for (int i = 0; i < k; ++i) q.chain.push_back(ChainLink::read(r));
    return q;
  });
}

Bytes TranscryptResponse::encode() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(items.size()));
  for (const auto& it : items) {
    write_cyphertext(w, it.c_out);
    w.blob(it.ticket);
    w.u8(it.cert ? 1 : 0);
    if (it.cert) it.cert->write(w);
    w.u16(static_cast<std::uint16_t>(it.claims.size()));
    for (const auto& c : it.claims) c.write(w);
  }
  return w.take();
}

TranscryptResponse TranscryptResponse::decode(std::span<const std::uint8_t> in) {
  return parse_all(in, [](ByteReader& r) {
    TranscryptResponse out;
    const auto n = r.u32();
    if (n > r.remaining() / 96) throw Error(ErrorCode::Malformed, "item count");
    out.items.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      TranscryptItem it;
      it.c_out = read_cyphertext(r);
      it.ticket = r.blob();
      const auto has = r.u8();
      if (has > 1) throw Error(ErrorCode::Malformed, "certificate flag");
      if (has) it.cert = RSKCertificate::read(r);
      const auto k = r.u16();
      for (int j = 0; j < k; ++j) it.claims.push_back(ShareClaim::read(r));
      out.items.push_back(std::move(it));
    }
    return out;
  });
}

Bytes ProofRequest::encode() const {
  ByteWriter w;
  w.raw(request_hash).blob(ticket);
  write_cyphertext(w, c_in);
  write_cyphertext(w, c_out);
  return w.take();
}

ProofRequest ProofRequest::decode(std::span<const std::uint8_t> in) {
  return parse_all(in, [](ByteReader& r) {
    ProofRequest p;
    p.request_hash = r.fixed<32>();
    p.ticket = r.blob();
    p.c_in = read_cyphertext(r);
    p.c_out = read_cyphertext(r);
    return p;
  });
}

Bytes encode_triple_public(const TriplePublic& p) {
  ByteWriter w;
  for (const auto& e : p.n_powers) w.raw(e.encode());
  for (const auto& e : p.s_powers) w.raw(e.encode());
  return w.take();
}

TriplePublic decode_triple_public(std::span<const std::uint8_t> in) {
  if (in.size() != 2u * kPowersCount * 32) throw Error(ErrorCode::Malformed, "powers table size");
  ByteReader r(in);
  TriplePublic p;
  p.n_powers.reserve(kPowersCount);
  p.s_powers.reserve(kPowersCount);
  for (int i = 0; i < kPowersCount; ++i) p.n_powers.push_back(read_element(r));
  for (int i = 0; i < kPowersCount; ++i) p.s_powers.push_back(read_element(r));
  return p;
}

Bytes EnrolResponse::encode() const {
  ByteWriter w;
  for (const auto& t : tables) w.blob(t);
  w.u8(static_cast<std::uint8_t>(shares.size()));
  for (const auto& s : shares) {
    w.u8(s.triple.index);
    write_scalar(w, s.share);
    s.proof.write(w);
  }
  return w.take();
}

EnrolResponse EnrolResponse::decode(std::span<const std::uint8_t> in) {
  return parse_all(in, [](ByteReader& r) {
    EnrolResponse e;
    for (auto& t : e.tables) t = r.blob();
    const auto n = r.u8();
    if (n > kTripleCount) throw Error(ErrorCode::Malformed, "share count");
    for (int i = 0; i < n; ++i) {
      EnrolShare s;
      s.triple = read_triple(r);
      s.share = read_scalar(r);
      s.proof = DerivationProof::read(r);
      e.shares.push_back(std::move(s));
    }
    return e;
  });
}

Bytes DerivationRequest::encode() const {
  ByteWriter w;
  w.str(party).u8(static_cast<std::uint8_t>(kind)).u8(triple.index);
  return w.take();
}

DerivationRequest DerivationRequest::decode(std::span<const std::uint8_t> in) {
  return parse_all(in, [](ByteReader& r) {
    DerivationRequest d;
    d.party = r.str();
    d.kind = read_kind(r);
    d.triple = read_triple(r);
    return d;
  });
}

Bytes DerivationResponse::encode() const {
  ByteWriter w;
  write_element(w, point);
  proof.write(w);
  return w.take();
}

DerivationResponse DerivationResponse::decode(std::span<const std::uint8_t> in) {
  return parse_all(in, [](ByteReader& r) {
    DerivationResponse d;
    d.point = read_element(r);
    d.proof = DerivationProof::read(r);
    return d;
  });
}

}  // namespace pep3
