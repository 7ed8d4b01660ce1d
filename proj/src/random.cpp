#include "pep3/random.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace pep3 {
namespace {

void ensure_sodium() {
  static const bool ok = [] { return sodium_init() >= 0; }();
  if (!ok) throw std::runtime_error("libsodium initialisation failed");
}

}  // namespace

std::uint64_t RandomSource::next_u64() {
  std::array<std::uint8_t, 8> buf{};
  fill(buf);
  std::uint64_t v = 0;
  std::memcpy(&v, buf.data(), sizeof v);
  return v;
}

double RandomSource::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

void SecureRandom::fill(std::span<std::uint8_t> out) {
  ensure_sodium();
  randombytes_buf(out.data(), out.size());
}

SecureRandom& secure_random() {
  static SecureRandom rng;
  return rng;
}

DeterministicRandom::DeterministicRandom(std::uint64_t seed) {
  ensure_sodium();
  std::memcpy(key_.data(), &seed, sizeof seed);
  key_[31] = 0x5a;
}

void DeterministicRandom::fill(std::span<std::uint8_t> out) {
  std::lock_guard lock(mu_);
  std::array<std::uint8_t, crypto_stream_chacha20_NONCEBYTES> nonce{};
  std::memcpy(nonce.data(), &counter_, sizeof counter_);
  ++counter_;
  crypto_stream_chacha20(out.data(), out.size(), nonce.data(), key_.data());
}

}  // namespace pep3
