#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pep3/bytes.hpp"
#include "pep3/elgamal.hpp"
#include "pep3/schnorr.hpp"

namespace pep3 {

// Transcryption mode; also the operation class a permit authorises.
enum class Mode : std::uint8_t { Translate = 0, Pseudonymise = 1, Depseudonymise = 2 };

std::string_view mode_name(Mode m);
std::optional<Mode> mode_from_name(std::string_view name);

inline constexpr std::string_view kTagPermit = "pep3-permit";
inline constexpr std::string_view kWildcard = "*";

// CA-signed authorisation. from/to list party ids, "*" matches any party.
struct Permit {
  std::string subject;
  Mode op = Mode::Translate;
  std::vector<std::string> from;
  std::vector<std::string> to;
  std::optional<Cyphertext> cyphertext;  // required for Depseudonymise
  std::int64_t expiry = 0;               // unix seconds
  Signature signature{};

  // Canonical encoding of every field except the signature.
  Bytes signed_body() const;
  void write(ByteWriter& w) const;
  static Permit read(ByteReader& r);  // throws Malformed
  Bytes encode() const;
  static Permit decode(std::span<const std::uint8_t> in);

  bool covers(std::string_view who, Mode mode, std::string_view from_id, std::string_view to_id) const;
};

Permit ca_issue_permit(const SigningKey& ca, std::string subject, Mode op, std::vector<std::string> from,
                       std::vector<std::string> to, std::optional<Cyphertext> cyphertext,
                       std::int64_t expiry, RandomSource& rng);

// Throws PermitInvalid on a bad signature, expiry, mismatched scope, or a
// depseudonymisation permit that does not name a cyphertext.
void check_permit(const Permit& p, const GroupElement& ca_public, std::string_view subject, Mode mode,
                  std::string_view from_id, std::string_view to_id, std::int64_t now);

std::int64_t unix_now();

}  // namespace pep3
