#include "callosim/random.hpp"

#include <cmath>

namespace callosim {

double uniform(Rng& rng, double lo, double hi) {
  if (!(hi > lo)) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  if (hi <= lo) return lo;
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

double log_uniform(Rng& rng, double lo, double hi) {
  if (!(hi > lo)) return lo;
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

}  // namespace callosim
