#include "mcprod/random.hpp"

#include <cmath>

#include "mcprod/error.hpp"

namespace mcprod {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t index) {
  // seed_seq mixes every word, so neighbouring (seed, index) pairs land on
  // unrelated engine states.
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x6d637072u};
  return std::mt19937_64(seq);
}

}  // namespace

Stream::Stream(std::uint64_t master_seed, std::uint64_t index)
    : seed_(master_seed), index_(index), engine_(seeded_engine(master_seed, index)) {}

double Stream::uniform() { return std::generate_canonical<double, 53>(engine_); }

double Stream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Stream::normal() { return normal_(engine_); }

double Stream::gamma(double shape) {
  std::gamma_distribution<double> g(shape, 1.0);
  return g(engine_);
}

double Stream::beta(double a, double b) {
  for (;;) {
    const double x = gamma(a);
    const double y = gamma(b);
    const double s = x + y;
    if (s > 0.0) return x / s;
  }
}

std::size_t Stream::index_below(std::size_t n) {
  std::uniform_int_distribution<std::size_t> d(0, n - 1);
  return d(engine_);
}

RandomStreamSet::RandomStreamSet(std::uint64_t master_seed, std::size_t count)
    : seed_(master_seed), count_(count) {
  if (count == 0) throw InputError("RandomStreamSet: count must be positive");
}

Stream RandomStreamSet::stream(std::size_t index) const {
  if (index >= count_) throw InputError("RandomStreamSet: stream index out of range");
  return Stream(seed_, index);
}

RandomStreamSet make_streams(std::uint64_t master_seed, std::int64_t count) {
  if (count <= 0) throw InputError("make_streams: count must be positive");
  return RandomStreamSet(master_seed, static_cast<std::size_t>(count));
}

}  // namespace mcprod
