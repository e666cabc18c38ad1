#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

// Counter-based random numbers.
//
// Every random quantity in the project is a pure function of a 64-bit stream
// key and a 64-bit counter, so results never depend on call order or on the
// standard library's distribution implementations:
//
//   bits(key, c)    = splitmix64_finalize(key + (c + 1) * 0x9E3779B97F4A7C15)
//   uniform(key, c) = ((bits >> 11) + 0.5) * 2^-53            in (0, 1)
//   normal(key, i)  = Box-Muller on the pair (uniform(2p), uniform(2p + 1)),
//                     p = i / 2; even i takes the cosine branch, odd i the sine
//   below(key, c, n)= high 64 bits of bits(key, c) * n          in [0, n)
//
// Stream keys are derived with derive(key, x) = finalize(key ^ finalize(x + golden)).
// permutation() is a Fisher-Yates shuffle drawing below(key, i, i + 1) for
// i = n - 1 down to 1.
namespace uadrive::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive(std::uint64_t key, std::uint64_t x) {
  return finalize(key ^ finalize(x + kGolden));
}

/// Fixed stream tags so distinct consumers of one seed never share noise.
enum class Stream : std::uint64_t {
  InitWeights = 1,
  Split = 2,
  Batches = 3,
  ElboNoise = 4,
  Predict = 5,
  ValidationNoise = 6,
  ExpertPerturbation = 7,
};

inline std::uint64_t stream_key(std::uint64_t seed, Stream stream) {
  return derive(finalize(seed), static_cast<std::uint64_t>(stream));
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t key() const { return key_; }

  std::uint64_t bits(std::uint64_t counter) const {
    return finalize(key_ + (counter + 1) * kGolden);
  }
  double uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }
  std::uint64_t below(std::uint64_t counter, std::uint64_t n) const {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(bits(counter)) * n) >> 64);
  }
  double normal(std::uint64_t index) const;

  /// out[k] = normal(first + k).
  void fill_normal(std::span<double> out, std::uint64_t first = 0) const;

 private:
  std::uint64_t key_;
};

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t key);

}  // namespace uadrive::rng
