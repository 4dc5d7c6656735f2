#pragma once

#include <cstdint>
#include <limits>

namespace lrvec {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// SplitMix64 generator. Satisfies UniformRandomBitGenerator, so it plugs into
/// the Boost and standard distributions. Construction is free, which lets every
/// replicate and every limit-law draw own an independent substream.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Stream(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    state_ += kGamma;
    return mix64(state_);
  }

  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

 private:
  std::uint64_t state_;
};

/// Purpose tags for the substream counter scheme.
enum class StreamPurpose : std::uint64_t {
  kReplicateData = 1,
  kLimitLaw = 2,
  kFisher = 3,
  kAuxiliary = 4,
};

/// Substream for (master seed, purpose, index).
///
/// The stream id is `tag * 2^40 + index`, and the stream's starting state is the
/// id-th output of a SplitMix64 sequence seeded with the master seed. Indices
/// must stay below 2^40.
Stream substream(std::uint64_t master_seed, StreamPurpose purpose, std::uint64_t index);

}  // namespace lrvec
