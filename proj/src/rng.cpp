#include "coreset/rng.hpp"

#include <cmath>
#include <numeric>
#include <utility>

namespace coreset {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, const std::vector<std::uint64_t>& path) {
  std::uint64_t key = mix64(seed + kGolden);
  for (std::uint64_t p : path) key = mix64(key ^ mix64(p + 0xD1B54A32D192ED03ULL));
  return key;
}

}  // namespace

SeededRng::SeededRng(std::uint64_t seed) : SeededRng(seed, {}) {}

SeededRng::SeededRng(std::uint64_t seed, std::vector<std::uint64_t> path)
    : seed_(seed), path_(std::move(path)), key_(derive_key(seed_, path_)) {}

SeededRng SeededRng::child(std::uint64_t index) const {
  auto p = path_;
  p.push_back(index);
  return SeededRng(seed_, std::move(p));
}

std::uint64_t SeededRng::operator()() {
  const std::uint64_t c = counter_++;
  return mix64(key_ ^ mix64(c * kGolden + 1));
}

double SeededRng::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double SeededRng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double SeededRng::exponential() { return -std::log(uniform()); }

bool SeededRng::bernoulli(double prob) {
  if (prob >= 1.0) {
    (*this)();
    return true;
  }
  return uniform() < prob;
}

std::uint64_t SeededRng::below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t x = (*this)();
  while (x >= limit) x = (*this)();
  return x % bound;
}

std::vector<long> sample_without_replacement(long n, long count, SeededRng& rng) {
  std::vector<long> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0L);
  if (count > n) count = n;
  for (long i = 0; i < count; ++i) {
    const long j = i + static_cast<long>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

}  // namespace coreset
