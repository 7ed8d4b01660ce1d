#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pep3/bytes.hpp"
#include "pep3/elgamal.hpp"
#include "pep3/keyshares.hpp"
#include "pep3/permit.hpp"
#include "pep3/proofs.hpp"
#include "pep3/schnorr.hpp"
#include "pep3/ticket.hpp"

namespace pep3 {

// Frame: u32 big-endian length of (tag + payload), u8 tag, payload.
enum class MsgTag : std::uint8_t {
  Hello = 0x01,
  Challenge = 0x02,
  AuthResponse = 0x03,
  AuthOk = 0x04,
  TranscryptRequest = 0x10,
  TranscryptResponse = 0x11,
  ProofRequest = 0x12,
  ProofResponse = 0x13,
  EnrolRequest = 0x14,
  EnrolResponse = 0x15,
  DerivationRequest = 0x16,
  DerivationResponse = 0x17,
  SfIngest = 0x20,
  SfIngestAck = 0x21,
  SfQuery = 0x22,
  SfQueryResult = 0x23,
  Error = 0x7f,
};

inline constexpr std::uint32_t kMaxFrameBytes = 64u << 20;

struct Frame {
  MsgTag tag;
  Bytes payload;
};

Bytes encode_frame(const Frame& f);
// Decodes exactly one frame occupying the whole buffer; throws Malformed.
Frame decode_frame(std::span<const std::uint8_t> in);

// Error frame payload: u8 code, str message.
Frame error_frame(const Error& e);
[[noreturn]] void throw_error_frame(const Frame& f);

// --- authentication --------------------------------------------------------
inline constexpr std::string_view kTagAuthServer = "pep3-auth-server";
inline constexpr std::string_view kTagAuthClient = "pep3-auth-client";

struct Hello {
  std::string client_id;
  Hash32 client_nonce{};
  Bytes encode() const;
  static Hello decode(std::span<const std::uint8_t> in);
};

// Server signs client_nonce || server_nonce || client_id.
struct Challenge {
  std::string server_id;
  Hash32 server_nonce{};
  Signature signature{};
  Bytes encode() const;
  static Challenge decode(std::span<const std::uint8_t> in);
};

// Client signs server_nonce || client_nonce || server_id.
struct AuthResponse {
  Signature signature{};
  Bytes encode() const;
  static AuthResponse decode(std::span<const std::uint8_t> in);
};

Bytes server_auth_message(const Hash32& client_nonce, const Hash32& server_nonce, std::string_view client_id);
Bytes client_auth_message(const Hash32& server_nonce, const Hash32& client_nonce, std::string_view server_id);

// --- transcryption ---------------------------------------------------------

// A share point claimed together with its derivation proof from the public
// powers tables.
struct ShareClaim {
  std::string party;
  KeyKind kind = KeyKind::Encryption;
  TripleId triple;
  GroupElement point;
  DerivationProof proof;

  void write(ByteWriter& w) const;
  static ShareClaim read(ByteReader& r);
};

// One hop of a depseudonymisation chain.
struct ChainLink {
  PeerId peer = PeerId::A;
  TripleMask mask = 0;
  Cyphertext c_out;
  RSKCertificate cert;
  std::vector<ShareClaim> claims;

  void write(ByteWriter& w) const;
  static ChainLink read(ByteReader& r);
};

inline constexpr std::uint8_t kFlagAttachProofs = 1;

struct TranscryptRequest {
  Mode mode = Mode::Translate;
  std::string from;
  std::string to;
  TripleMask mask = 0;
  std::uint8_t flags = 0;
  Permit permit;
  std::vector<Cyphertext> cyphertexts;
  std::vector<ChainLink> chain;

  Bytes encode() const;
  static TranscryptRequest decode(std::span<const std::uint8_t> in);
};

struct TranscryptItem {
  Cyphertext c_out;
  Bytes ticket;
  std::optional<RSKCertificate> cert;  // present when proofs were requested
  std::vector<ShareClaim> claims;
};

struct TranscryptResponse {
  std::vector<TranscryptItem> items;
  Bytes encode() const;
  static TranscryptResponse decode(std::span<const std::uint8_t> in);
};

struct ProofRequest {
  Hash32 request_hash{};
  Bytes ticket;
  Cyphertext c_in;
  Cyphertext c_out;
  Bytes encode() const;
  static ProofRequest decode(std::span<const std::uint8_t> in);
};

// --- enrolment and derivation proofs ---------------------------------------

struct EnrolShare {
  TripleId triple;
  Scalar share;  // s_P^T
  DerivationProof proof;
};

// Tables are kept as raw bytes (n powers then s powers, 32 bytes each) so a
// client can vote on them before decoding.
struct EnrolResponse {
  std::array<Bytes, kTripleCount> tables;
  std::vector<EnrolShare> shares;
  Bytes encode() const;
  static EnrolResponse decode(std::span<const std::uint8_t> in);
};

Bytes encode_triple_public(const TriplePublic& p);
// Throws Malformed on a wrong size or an invalid point.
TriplePublic decode_triple_public(std::span<const std::uint8_t> in);

struct DerivationRequest {
  std::string party;
  KeyKind kind = KeyKind::Encryption;
  TripleId triple;
  Bytes encode() const;
  static DerivationRequest decode(std::span<const std::uint8_t> in);
};

struct DerivationResponse {
  GroupElement point;
  DerivationProof proof;
  Bytes encode() const;
  static DerivationResponse decode(std::span<const std::uint8_t> in);
};

}  // namespace pep3
