#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace tcs {

/// Deterministic random stream identified by (seed, stream_id).
///
/// The engine is std::mt19937_64 seeded through std::seed_seq, both of which
/// are fully specified by the standard. The variate transforms below are
/// written out by hand because the std distributions are implementation
/// defined, so identical (seed, stream_id) pairs give identical draws on every
/// conforming platform.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate = 1.0);
  /// Standard normal (Marsaglia polar method).
  double normal();
  /// +1 or -1 with equal probability.
  int sign();
  /// Uniform index in {0, ..., n-1}.
  std::size_t index(std::size_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tcs
