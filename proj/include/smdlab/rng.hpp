#pragma once

#include <cstdint>
#include <limits>

namespace smd {

/// Purpose tags keep audit/probe draws out of the iterate stream.
enum class StreamPurpose : std::uint64_t {
  Oracle = 0x6f7261636c65ULL,
  Audit = 0x6175646974ULL,
  Moments = 0x6d6f6d656e7473ULL,
  Diagnostic = 0x64696167ULL,
};

/// Counter-based random stream. The (seed, trial, step, purpose) key fully
/// determines the sequence, so any step of any trial can be replayed alone.
/// Satisfies UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, std::uint64_t trial, std::uint64_t step,
         StreamPurpose purpose = StreamPurpose::Oracle) noexcept {
    std::uint64_t h = mix(seed ^ 0x9e3779b97f4a7c15ULL);
    h = mix(h ^ trial);
    h = mix(h ^ (step * 0xd1b54a32d192ed03ULL));
    state_ = mix(h ^ static_cast<std::uint64_t>(purpose));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace smd
