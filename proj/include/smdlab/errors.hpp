#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace smd {

/// Invalid or unsupported configuration (bad pairing, missing constants, unknown keys).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A call received arguments outside its domain.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Output could not be written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite value produced during iteration.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::uint64_t step, std::int64_t trial = -1)
      : std::runtime_error(what), step_(step), trial_(trial) {}

  std::uint64_t step() const noexcept { return step_; }
  std::int64_t trial() const noexcept { return trial_; }

 private:
  std::uint64_t step_;
  std::int64_t trial_;
};

}  // namespace smd
