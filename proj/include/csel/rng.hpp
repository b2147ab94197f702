#ifndef CSEL_RNG_HPP
#define CSEL_RNG_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace csel {

/**
 * Counter-based random stream keyed by (seed, label).
 *
 * Draw i of a stream is a pure function of (key, i), so results do not depend
 * on the platform's standard-library distributions. split() derives an
 * independent child stream from a sub-label without consuming draws.
 */
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view label);

  RngStream split(std::string_view label) const;

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal (Box-Muller, one value per call).
  double normal();

  std::uint64_t seed() const { return seed_; }
  const std::string& label() const { return label_; }
  std::uint64_t counter() const { return counter_; }

 private:
  RngStream(std::uint64_t seed, std::string label, std::uint64_t key);

  std::uint64_t seed_;
  std::string label_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t mix64(std::uint64_t x);

}  // namespace csel

#endif  // CSEL_RNG_HPP
