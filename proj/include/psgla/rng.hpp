#pragma once

#include <cstdint>

namespace psgla {

/// Counter-based SplitMix64 stream.
///
/// Word i of stream (seed, stream_id) is mix64(key + (i + 1) * 0x9E3779B97F4A7C15)
/// with key = mix64(seed) + mix64(stream_id ^ 0xD1B54A32D192ED03). mix64 is the
/// SplitMix64 finalizer, a bijection on 64-bit words, so for a fixed seed
/// distinct stream ids get distinct keys. Output depends only on integer
/// arithmetic and is identical on every platform.
///
/// Gaussians use the Marsaglia polar method; the spare variate is part of the
/// stream state. A stream has a single owner and is never shared.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }
  [[nodiscard]] std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace psgla
