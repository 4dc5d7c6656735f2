#include "lrvec/rng.hpp"

#include "lrvec/errors.hpp"

namespace lrvec {

namespace {
constexpr std::uint64_t kIndexBits = 40;
}

Stream substream(std::uint64_t master_seed, StreamPurpose purpose, std::uint64_t index) {
  if (index >= (std::uint64_t{1} << kIndexBits)) {
    throw InputError("substream index exceeds 2^40");
  }
  const std::uint64_t id = (static_cast<std::uint64_t>(purpose) << kIndexBits) + index;
  return Stream(mix64(master_seed + Stream::kGamma * (id + 1)));
}

}  // namespace lrvec
