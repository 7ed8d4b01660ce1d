#include "pep3/ticket.hpp"

#include <sodium.h>

#include "pep3/proofs.hpp"

namespace pep3 {
namespace {

constexpr std::size_t kNonce = crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;
constexpr std::size_t kTag = crypto_aead_xchacha20poly1305_ietf_ABYTES;

std::array<std::uint8_t, 12> associated(PeerId peer) {
  std::array<std::uint8_t, 12> ad{'p', 'e', 'p', '3', '-', 't', 'i', 'c', 'k', 'e', 't', 0};
  ad[11] = static_cast<std::uint8_t>(peer_letter(peer));
  return ad;
}

}  // namespace

Hash32 sha256(std::span<const std::uint8_t> in) {
  Hash32 out{};
  crypto_hash_sha256(out.data(), in.data(), in.size());
  return out;
}

Bytes TicketRecord::serialise() const {
  ByteWriter w;
  w.u8(1).raw(request_hash).u8(static_cast<std::uint8_t>(mode)).str(from).str(to).u16(mask);
  write_cyphertext(w, c_in);
  write_cyphertext(w, c_out);
  write_scalar(w, r);
  w.raw(nonce_seed);
  return w.take();
}

TicketRecord TicketRecord::deserialise(std::span<const std::uint8_t> in) {
  ByteReader rd(in);
  if (rd.u8() != 1) throw Error(ErrorCode::Malformed, "ticket version");
  TicketRecord t;
  t.request_hash = rd.fixed<32>();
  const auto m = rd.u8();
  if (m > 2) throw Error(ErrorCode::Malformed, "ticket mode");
  t.mode = static_cast<Mode>(m);
  t.from = rd.str();
  t.to = rd.str();
  t.mask = rd.u16();
  t.c_in = read_cyphertext(rd);
  t.c_out = read_cyphertext(rd);
  t.r = read_scalar(rd);
  t.nonce_seed = rd.fixed<32>();
  rd.expect_done();
  return t;
}

Bytes seal_ticket(const TicketRecord& rec, const std::array<std::uint8_t, 32>& key, PeerId peer,
                  RandomSource& rng) {
  const Bytes plain = rec.serialise();
  Bytes out(kNonce + plain.size() + kTag);
  rng.fill(std::span(out.data(), kNonce));
  const auto ad = associated(peer);
  unsigned long long clen = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(out.data() + kNonce, &clen, plain.data(), plain.size(), ad.data(),
                                             ad.size(), nullptr, out.data(), key.data());
  out.resize(kNonce + clen);
  return out;
}

TicketRecord open_ticket(std::span<const std::uint8_t> blob, const std::array<std::uint8_t, 32>& key,
                         PeerId peer) {
  if (blob.size() < kNonce + kTag) throw Error(ErrorCode::TicketForged, "ticket too short");
  Bytes plain(blob.size() - kNonce - kTag);
  unsigned long long plen = 0;
  const auto ad = associated(peer);
  if (crypto_aead_xchacha20poly1305_ietf_decrypt(plain.data(), &plen, nullptr, blob.data() + kNonce,
                                                 blob.size() - kNonce, ad.data(), ad.size(), blob.data(),
                                                 key.data()) != 0)
    throw Error(ErrorCode::TicketForged, "ticket does not authenticate");
  try {
    return TicketRecord::deserialise(plain);
  } catch (const Error&) {
    throw Error(ErrorCode::TicketForged, "ticket contents malformed");
  }
}

}  // namespace pep3
