#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace plg {

/// Counter-based random stream (Philox4x32-10).
///
/// The 64-bit seed is the cipher key. The 128-bit counter is split into the
/// 64-bit stream id (high half) and a 64-bit block index (low half), so every
/// (seed, stream_id) pair addresses a disjoint region of the key's output and
/// streams never overlap. Satisfies UniformRandomBitGenerator, so it can be
/// handed to the <random> distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();

  /// Independent child stream; deterministic in (seed, stream_id, index).
  RngStream derive(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Raw Philox4x32-10 block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> ctr,
                                             std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int used_ = 2;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace plg
