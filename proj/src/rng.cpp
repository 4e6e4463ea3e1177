#include "tcsampler/rng.hpp"

#include <cmath>
#include <limits>

#include "tcsampler/errors.hpp"

namespace tcs {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32), 0x7463u};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(seeded_engine(seed, stream_id)) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
  // (k + 0.5) / 2^53 never hits 0 or 1.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::exponential(double rate) {
  if (!(rate >= 0.0)) {
    throw InvalidArgument("exponential: rate must be non-negative");
  }
  if (rate == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return -std::log(uniform_open()) / rate;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  double v = 0.0;
  double q = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    q = u * u + v * v;
  } while (q >= 1.0 || q == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(q) / q);
  spare_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

int RngStream::sign() { return (engine_() >> 63) != 0u ? 1 : -1; }

std::size_t RngStream::index(std::size_t n) {
  if (n == 0) {
    throw InvalidArgument("index: empty range");
  }
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t draw = 0;
  do {
    draw = engine_();
  } while (draw >= limit);
  return static_cast<std::size_t>(draw % range);
}

}  // namespace tcs
