#include "countdag/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace countdag {
namespace {

std::uint64_t poisson_inversion(SplitMix64& rng, double lambda) {
  const double u = rng.uniform();
  double prob = std::exp(-lambda);
  double cdf = prob;
  std::uint64_t k = 0;
  // The tail beyond k = 200 has mass far below 2^-53 for lambda < 30.
  while (u >= cdf && k < 200) {
    ++k;
    prob *= lambda / static_cast<double>(k);
    cdf += prob;
  }
  return k;
}

// Hormann (1993), "The transformed rejection method for generating Poisson random variables".
std::uint64_t poisson_ptrs(SplitMix64& rng, double lambda) {
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -lambda + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace

std::uint64_t poisson(SplitMix64& rng, double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) throw std::invalid_argument("Poisson rate must be finite and >= 0");
  if (lambda == 0.0) return 0;
  return lambda < 30.0 ? poisson_inversion(rng, lambda) : poisson_ptrs(rng, lambda);
}

}  // namespace countdag
