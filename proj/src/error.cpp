#include "pep3/error.hpp"

namespace pep3 {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InversionOfZero: return "inversion-of-zero";
    case ErrorCode::ZeroKey: return "zero-key";
    case ErrorCode::Malformed: return "malformed";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::AmbiguousDecode: return "ambiguous-decode";
    case ErrorCode::InconsistentInput: return "inconsistent-input";
    case ErrorCode::MissingShare: return "missing-share";
    case ErrorCode::MismatchAbort: return "mismatch-abort";
    case ErrorCode::PermitInvalid: return "permit-invalid";
    case ErrorCode::ChainInvalid: return "chain-invalid";
    case ErrorCode::NotMyTriples: return "not-my-triples";
    case ErrorCode::TicketForged: return "ticket-forged";
    case ErrorCode::TicketMismatch: return "ticket-mismatch";
    case ErrorCode::UnknownParty: return "unknown-party";
    case ErrorCode::Unauthenticated: return "unauthenticated";
    case ErrorCode::WhitelistViolation: return "whitelist-violation";
    case ErrorCode::PeerUnreachable: return "peer-unreachable";
    case ErrorCode::ProofVerificationFailure: return "proof-verification-failure";
    case ErrorCode::ChainBreak: return "chain-break";
    case ErrorCode::NotAnAddress: return "not-an-address";
    case ErrorCode::Io: return "io";
    case ErrorCode::Config: return "config";
  }
  return "unknown";
}

}  // namespace pep3
