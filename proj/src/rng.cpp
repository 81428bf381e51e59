#include "rpchol/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rpchol {

double sample_normal(SplitMix64& rng) {
  // Box-Muller; u1 is shifted away from zero so log() stays finite.
  const double u1 = rng.next_double();
  const double u2 = rng.next_double();
  const double r = std::sqrt(-2.0 * std::log1p(-u1));
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::Index sample_proportional(const Eigen::VectorXd& weights, double total,
                                 SplitMix64& rng) {
  if (weights.size() == 0) throw std::invalid_argument("sample_proportional: empty weights");
  if (!(total > 0.0)) throw std::invalid_argument("sample_proportional: nonpositive total");
  const double u = rng.next_double() * total;
  double acc = 0.0;
  Eigen::Index last_positive = -1;
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    const double w = weights[j];
    if (w > 0.0) {
      acc += w;
      last_positive = j;
      if (u < acc) return j;
    }
  }
  // Roundoff in the running sum can leave u barely above acc; the draw then
  // falls on the last admissible index.
  if (last_positive < 0) throw std::invalid_argument("sample_proportional: no positive weight");
  return last_positive;
}

}  // namespace rpchol
