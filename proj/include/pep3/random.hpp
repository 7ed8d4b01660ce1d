#pragma once

#include <array>
#include <cstdint>
#include <mutex>
#include <span>

namespace pep3 {

class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  std::uint64_t next_u64();
  // Uniform double in [0, 1).
  double next_unit();
};

// Operating-system CSPRNG; thread-safe.
class SecureRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

SecureRandom& secure_random();

// Seeded ChaCha20 keystream. Reproducible; for tests and simulations only.
class DeterministicRandom final : public RandomSource {
 public:
  explicit DeterministicRandom(std::uint64_t seed);
  void fill(std::span<std::uint8_t> out) override;

 private:
  std::array<std::uint8_t, 32> key_{};
  std::uint64_t counter_ = 0;
  std::mutex mu_;
};

}  // namespace pep3
