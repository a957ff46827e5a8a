#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coldpref {

// Bad input or violated precondition. The CLI maps these to exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when the data cannot support the requested computation
// (all-zero feature matrix, no usable columns, ...).
class DegenerateData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PoolExhausted : public std::runtime_error {
 public:
  PoolExhausted(std::size_t requested, std::size_t remaining)
      : std::runtime_error("pair pool exhausted: requested " + std::to_string(requested) +
                           " pairs but only " + std::to_string(remaining) + " remain"),
        requested_(requested),
        remaining_(remaining) {}

  std::size_t requested() const noexcept { return requested_; }
  std::size_t remaining() const noexcept { return remaining_; }

 private:
  std::size_t requested_;
  std::size_t remaining_;
};

}  // namespace coldpref
