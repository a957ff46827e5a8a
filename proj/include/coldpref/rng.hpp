#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace coldpref {

// Child seed for a named role. Streams keyed on distinct (parent, role, index)
// triples are independent for all practical purposes.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view role, std::uint64_t index = 0);

// Thin wrapper over mt19937_64 whose uniform/integer draws do not depend on
// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  bool coin() { return (engine_() >> 63) != 0; }

  double normal();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace coldpref
