#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ipsm {

/// Stream tags keep the draws for different purposes independent even when
/// they share a user seed.
enum class Stream : std::uint32_t {
  Topology = 1,
  InitialState = 2,
  Dataset = 3,
  Sampling = 4,
};

/// Counter-addressed random stream.
///
/// Draws for key (seed, index, stream) come from std::mt19937_64 seeded with
/// std::seed_seq{seed_lo, seed_hi, index_lo, index_hi, stream}. Both engine
/// and seed_seq are fully specified by the standard, and the conversions
/// below avoid the implementation-defined std distributions, so a stream
/// replays bit-identically on any conforming toolchain. The draw index is
/// the position within the stream.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t index, Stream stream);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open_closed() { return 1.0 - uniform(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound);

  /// Uniformly random permutation of {0, ..., n-1} (Fisher-Yates).
  std::vector<int> permutation(int n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace ipsm
