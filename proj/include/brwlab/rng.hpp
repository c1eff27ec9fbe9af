#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace brwlab {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3").  Pure: the output depends only on counter and key.
constexpr std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                                     std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53;
  constexpr std::uint32_t kM1 = 0xCD9E8D57;
  constexpr std::uint32_t kW0 = 0x9E3779B9;
  constexpr std::uint32_t kW1 = 0xBB67AE85;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * counter[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * counter[2];
    counter = {static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ key[0],
               static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ key[1],
               static_cast<std::uint32_t>(p0)};
  }
  return counter;
}

/// SplitMix64 finalizer.  Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream id of the `index`-th substream of `base` (node children, replicates).
constexpr std::uint64_t derive_stream(std::uint64_t base, std::uint64_t index) {
  return mix64(base ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

/// 64-bit FNV-1a, used to turn experiment names into stream ids.
constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Stream id for replicate `replicate` of the experiment named `experiment`.
constexpr std::uint64_t replicate_stream(std::string_view experiment,
                                         std::uint64_t replicate) {
  return derive_stream(fnv1a64(experiment), replicate);
}

/**
 * Counter-based random stream.
 *
 * The i-th 64-bit output is a pure function of (master_seed, stream_id, i):
 * Philox block (i / 2) keyed by master_seed with the stream id in the upper
 * counter words.  Copying a stream forks it; the copies produce identical
 * outputs from the same counter onwards.
 */
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id,
            std::uint64_t counter = 0)
      : master_seed_(master_seed), stream_id_(stream_id), counter_(counter) {}

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t counter() const { return counter_; }

  /// Independent stream with the same master seed.
  RngStream substream(std::uint64_t index) const {
    return {master_seed_, derive_stream(stream_id_, index), 0};
  }

  std::uint64_t next_u64() {
    const std::uint64_t block = counter_ >> 1;
    if (block != cached_block_) {
      block_ = philox4x32_10(
          {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
           static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)},
          {static_cast<std::uint32_t>(master_seed_),
           static_cast<std::uint32_t>(master_seed_ >> 32)});
      cached_block_ = block;
    }
    const unsigned half = static_cast<unsigned>(counter_ & 1) * 2;
    ++counter_;
    return (static_cast<std::uint64_t>(block_[half + 1]) << 32) | block_[half];
  }

  /// Uniform on the open interval (0,1); 0 and 1 are never produced.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exponential(1) by inversion.
  double exponential() { return -std::log(uniform()); }

  /// Standard normal (Box-Muller, one output per call).
  double normal();

  /// Uniform integer in [lo, hi], unbiased (Lemire's multiply-and-reject).
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

  // UniformRandomBitGenerator, so the stream can drive std algorithms.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

 private:
  std::uint64_t master_seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t counter_ = 0;
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  std::array<std::uint32_t, 4> block_{};
};

}  // namespace brwlab
