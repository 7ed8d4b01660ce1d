#include "pep3/permit.hpp"

#include <algorithm>
#include <chrono>

#include "pep3/proofs.hpp"

namespace pep3 {
namespace {

void write_ids(ByteWriter& w, const std::vector<std::string>& ids) {
  w.u16(static_cast<std::uint16_t>(ids.size()));
  for (const auto& id : ids) w.str(id);
}

std::vector<std::string> read_ids(ByteReader& r) {
  const auto n = r.u16();
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(r.str());
  return out;
}

bool listed(const std::vector<std::string>& ids, std::string_view who) {
  return std::any_of(ids.begin(), ids.end(), [&](const std::string& s) { return s == kWildcard || s == who; });
}

}  // namespace

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::Translate: return "translate";
    case Mode::Pseudonymise: return "pseudonymise";
    case Mode::Depseudonymise: return "depseudonymise";
  }
  return "unknown";
}

std::optional<Mode> mode_from_name(std::string_view name) {
  for (auto m : {Mode::Translate, Mode::Pseudonymise, Mode::Depseudonymise})
    if (mode_name(m) == name) return m;
  return std::nullopt;
}

Bytes Permit::signed_body() const {
  ByteWriter w;
  w.str("PEP3PERMIT1").str(subject).u8(static_cast<std::uint8_t>(op));
  write_ids(w, from);
  write_ids(w, to);
  w.u8(cyphertext ? 1 : 0);
  if (cyphertext) w.raw(cyphertext->encode());
  w.u64(static_cast<std::uint64_t>(expiry));
  return w.take();
}

void Permit::write(ByteWriter& w) const {
  w.blob(signed_body());
  w.raw(signature.encode());
}

Permit Permit::read(ByteReader& r) {
  const Bytes body = r.blob();
  const auto sig_bytes = r.fixed<64>();
  ByteReader b(body);
  Permit p;
  if (b.str() != "PEP3PERMIT1") throw Error(ErrorCode::Malformed, "permit version");
  p.subject = b.str();
  const auto op = b.u8();
  if (op > 2) throw Error(ErrorCode::Malformed, "permit operation class");
  p.op = static_cast<Mode>(op);
  p.from = read_ids(b);
  p.to = read_ids(b);
  const auto has_c = b.u8();
  if (has_c > 1) throw Error(ErrorCode::Malformed, "permit flag");
  if (has_c) p.cyphertext = read_cyphertext(b);
  p.expiry = static_cast<std::int64_t>(b.u64());
  b.expect_done();
  auto sig = Signature::decode(sig_bytes);
  if (!sig) throw Error(ErrorCode::Malformed, "permit signature encoding");
  p.signature = *sig;
  return p;
}

Bytes Permit::encode() const {
  ByteWriter w;
  write(w);
  return w.take();
}

Permit Permit::decode(std::span<const std::uint8_t> in) {
  ByteReader r(in);
  auto p = read(r);
  r.expect_done();
  return p;
}

bool Permit::covers(std::string_view who, Mode mode, std::string_view from_id, std::string_view to_id) const {
  return subject == who && op == mode && listed(from, from_id) && listed(to, to_id);
}

Permit ca_issue_permit(const SigningKey& ca, std::string subject, Mode op, std::vector<std::string> from,
                       std::vector<std::string> to, std::optional<Cyphertext> cyphertext,
                       std::int64_t expiry, RandomSource& rng) {
  Permit p{std::move(subject), op, std::move(from), std::move(to), std::move(cyphertext), expiry, {}};
  p.signature = sign(ca, kTagPermit, p.signed_body(), rng);
  return p;
}

void check_permit(const Permit& p, const GroupElement& ca_public, std::string_view subject, Mode mode,
                  std::string_view from_id, std::string_view to_id, std::int64_t now) {
  if (!verify_signature(ca_public, kTagPermit, p.signed_body(), p.signature))
    throw Error(ErrorCode::PermitInvalid, "signature does not verify");
  if (now >= p.expiry) throw Error(ErrorCode::PermitInvalid, "expired");
  if (!p.covers(subject, mode, from_id, to_id))
    throw Error(ErrorCode::PermitInvalid, "permit does not cover " + std::string(mode_name(mode)) + " " +
                                              std::string(from_id) + "->" + std::string(to_id) + " for " +
                                              std::string(subject));
  if (mode == Mode::Depseudonymise && !p.cyphertext)
    throw Error(ErrorCode::PermitInvalid, "blanket depseudonymisation permit");
}

std::int64_t unix_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace pep3
