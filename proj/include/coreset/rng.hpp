#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace coreset {

/// Counter-based splittable generator. A stream is identified by
/// (seed, path); draw number i of a stream is a pure function of
/// (seed, path, i), so children never share state with their parent.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  explicit SeededRng(std::uint64_t seed = 0);

  /// Child stream keyed by (seed, path ∥ index).
  [[nodiscard]] SeededRng child(std::uint64_t index) const;

  std::uint64_t operator()();

  /// Uniform in the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double exponential();
  bool bernoulli(double prob);
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  double rademacher() { return ((*this)() & 1U) ? 1.0 : -1.0; }

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] const std::vector<std::uint64_t>& path() const { return path_; }
  [[nodiscard]] std::uint64_t draws() const { return counter_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  SeededRng(std::uint64_t seed, std::vector<std::uint64_t> path);

  std::uint64_t seed_;
  std::vector<std::uint64_t> path_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Fisher–Yates sample of `count` distinct indices from [0, n), in draw order.
std::vector<long> sample_without_replacement(long n, long count, SeededRng& rng);

}  // namespace coreset
