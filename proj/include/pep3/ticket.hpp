#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "pep3/bytes.hpp"
#include "pep3/elgamal.hpp"
#include "pep3/keyshares.hpp"
#include "pep3/permit.hpp"

namespace pep3 {

using Hash32 = std::array<std::uint8_t, 32>;

Hash32 sha256(std::span<const std::uint8_t> in);

// Everything a peer needs to rebuild the certificate for one past operation.
struct TicketRecord {
  Hash32 request_hash{};
  Mode mode = Mode::Translate;
  std::string from;
  std::string to;
  TripleMask mask = 0;
  Cyphertext c_in;
  Cyphertext c_out;
  Scalar r;
  std::array<std::uint8_t, 32> nonce_seed{};

  Bytes serialise() const;
  static TicketRecord deserialise(std::span<const std::uint8_t> in);  // throws Malformed
};

// XChaCha20-Poly1305 under the peer's ticket key, with the peer letter as
// associated data. Blob is nonce(24) || ciphertext || tag(16).
Bytes seal_ticket(const TicketRecord& rec, const std::array<std::uint8_t, 32>& key, PeerId peer,
                  RandomSource& rng);
// Throws TicketForged if the blob does not authenticate.
TicketRecord open_ticket(std::span<const std::uint8_t> blob, const std::array<std::uint8_t, 32>& key,
                         PeerId peer);

}  // namespace pep3
