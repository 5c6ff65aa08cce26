#include "puprior/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

namespace puprior {

namespace {

constexpr double kMassTolerance = 1e-12;   // atom masses may undershoot 0 by this
constexpr double kSumTolerance = 1e-9;     // accepted drift of the total mass

void require_same_support(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.atoms() != b.atoms()) {
    throw InvalidInputError("measures live on different atom sets (" +
                            std::to_string(a.atoms()) + " vs " +
                            std::to_string(b.atoms()) + ")");
  }
}

bool atomwise_equal(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  for (std::size_t i = 0; i < a.atoms(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<double> masses)
    : masses_(std::move(masses)) {
  if (masses_.empty()) throw InvalidInputError("measure needs at least one atom");
  double total = 0.0;
  for (double& m : masses_) {
    if (!(m >= -kMassTolerance)) {
      throw InvalidInputError("negative atom mass " + std::to_string(m));
    }
    if (m < 0.0) m = 0.0;
    total += m;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw InvalidInputError("atom masses sum to " + std::to_string(total) +
                            ", expected 1");
  }
  for (double& m : masses_) m /= total;
}

PriorPair::PriorPair(double alpha_value, double beta_value)
    : alpha(alpha_value), beta(beta_value) {
  if (!(0.0 <= alpha && alpha < beta && beta <= 1.0)) {
    throw InvalidInputError("prior pair requires 0 <= alpha < beta <= 1, got (" +
                            std::to_string(alpha) + ", " + std::to_string(beta) +
                            ")");
  }
}

double amax(const DiscreteMeasure& mixture, const DiscreteMeasure& component) {
  require_same_support(mixture, component);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mixture.atoms(); ++i) {
    if (component[i] > 0.0) best = std::min(best, mixture[i] / component[i]);
  }
  if (!std::isfinite(best)) {
    throw InvalidInputError("component measure has no positive atom");
  }
  return std::clamp(best, 0.0, 1.0);
}

double amax_subset_infimum(const DiscreteMeasure& mixture,
                           const DiscreteMeasure& component) {
  require_same_support(mixture, component);
  const std::size_t n = mixture.atoms();
  if (n > 20) {
    throw InvalidInputError("subset enumeration limited to 20 atoms");
  }
  double best = std::numeric_limits<double>::infinity();
  const std::size_t limit = std::size_t{1} << n;
  for (std::size_t mask = 1; mask < limit; ++mask) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) {
        num += mixture[i];
        den += component[i];
      }
    }
    if (den > 0.0) best = std::min(best, num / den);
  }
  if (!std::isfinite(best)) {
    throw InvalidInputError("component measure has no positive atom");
  }
  return std::clamp(best, 0.0, 1.0);
}

std::optional<std::pair<DiscreteMeasure, DiscreteMeasure>> decompose(
    const DiscreteMeasure& mu, const DiscreteMeasure& nu,
    const PriorPair& pair) {
  require_same_support(mu, nu);
  const double alpha = pair.alpha;
  const double beta = pair.beta;
  if (beta - alpha <= 0.0) {
    throw InvalidInputError("decompose requires alpha < beta");
  }
  const std::size_t n = mu.atoms();
  std::vector<double> mu0(n), mu1(n);
  for (std::size_t i = 0; i < n; ++i) {
    mu0[i] = (beta * mu[i] - alpha * nu[i]) / (beta - alpha);
    mu1[i] = ((1.0 - alpha) * nu[i] - (1.0 - beta) * mu[i]) / (beta - alpha);
    if (mu0[i] < -kMassTolerance || mu1[i] < -kMassTolerance) {
      return std::nullopt;
    }
  }
  return std::make_pair(DiscreteMeasure(std::move(mu0)),
                        DiscreteMeasure(std::move(mu1)));
}

std::pair<double, double> correction(double alpha_plus, double beta_plus) {
  if (!(alpha_plus >= 0.0 && alpha_plus < 1.0) ||
      !(beta_plus >= 0.0 && beta_plus < 1.0)) {
    throw InvalidInputError("correction inputs must lie in [0, 1)");
  }
  const double denom = 1.0 - alpha_plus * beta_plus;
  if (denom <= 0.0) {
    throw InvalidInputError("correction requires alpha_plus*beta_plus < 1");
  }
  const double alpha_star = alpha_plus * (1.0 - beta_plus) / denom;
  const double beta_star = (1.0 - beta_plus) / denom;
  return {alpha_star, beta_star};
}

CanonicalForm canonical(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_support(mu, nu);
  if (atomwise_equal(mu, nu)) {
    throw InvalidInputError("canonical form undefined for equal measures");
  }
  const double alpha_plus = amax(mu, nu);
  const double beta_plus = amax(nu, mu);
  if (alpha_plus >= 1.0 - 1e-15 || beta_plus >= 1.0 - 1e-15) {
    throw InvalidInputError("measures are numerically equal");
  }
  const auto [alpha_star, beta_star] = correction(alpha_plus, beta_plus);

  const std::size_t n = mu.atoms();
  std::vector<double> mu0(n), mu1(n);
  for (std::size_t i = 0; i < n; ++i) {
    mu0[i] = (mu[i] - alpha_plus * nu[i]) / (1.0 - alpha_plus);
    mu1[i] = (nu[i] - beta_plus * mu[i]) / (1.0 - beta_plus);
  }
  return CanonicalForm{alpha_star, beta_star, DiscreteMeasure(std::move(mu0)),
                       DiscreteMeasure(std::move(mu1))};
}

DiscreteMeasure mix(double weight, const DiscreteMeasure& m1,
                    const DiscreteMeasure& m0) {
  require_same_support(m1, m0);
  if (!(weight >= 0.0 && weight <= 1.0)) {
    throw InvalidInputError("mixing weight outside [0, 1]");
  }
  std::vector<double> out(m1.atoms());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = weight * m1[i] + (1.0 - weight) * m0[i];
  }
  return DiscreteMeasure(std::move(out));
}

}  // namespace puprior
