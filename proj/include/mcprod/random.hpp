#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace mcprod {

/// One reproducible random sequence. Not thread-safe; give each task its own.
class Stream {
 public:
  using result_type = std::mt19937_64::result_type;

  Stream(std::uint64_t master_seed, std::uint64_t index);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double gamma(double shape);
  double beta(double a, double b);
  bool bernoulli(double p) { return uniform() < p; }
  std::size_t index_below(std::size_t n);

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t index() const { return index_; }

 private:
  std::uint64_t seed_;
  std::uint64_t index_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Family of independent streams derived from one master seed.
class RandomStreamSet {
 public:
  RandomStreamSet(std::uint64_t master_seed, std::size_t count);

  Stream stream(std::size_t index) const;
  std::size_t size() const { return count_; }
  std::uint64_t master_seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::size_t count_;
};

RandomStreamSet make_streams(std::uint64_t master_seed, std::int64_t count);

}  // namespace mcprod
