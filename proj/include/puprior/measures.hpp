#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "puprior/errors.hpp"

namespace puprior {

// Probability vector over a finite set of atoms. Masses are validated
// (non-negative up to -1e-12, unit total up to 1e-9) and renormalized on
// construction so the stored invariant holds to machine precision.
class DiscreteMeasure {
 public:
  explicit DiscreteMeasure(std::vector<double> masses);

  std::size_t atoms() const { return masses_.size(); }
  double operator[](std::size_t i) const { return masses_[i]; }
  const std::vector<double>& masses() const { return masses_; }

  bool operator==(const DiscreteMeasure& other) const {
    return masses_ == other.masses_;
  }

 private:
  std::vector<double> masses_;
};

// Mixing-proportion pair constrained to 0 <= alpha < beta <= 1.
struct PriorPair {
  double alpha;
  double beta;
  PriorPair(double alpha_value, double beta_value);
};

// The unique mutually irreducible representation of a pair of mixtures:
// neither component contains the other, which pins down the proportions.
struct CanonicalForm {
  double alpha_star;
  double beta_star;
  DiscreteMeasure mu0_star;
  DiscreteMeasure mu1_star;
};

// Maximum proportion with which `component` can appear as a mixture part of
// `mixture`: the minimum over atoms with positive component mass of
// mixture(a)/component(a), clipped to [0, 1].
double amax(const DiscreteMeasure& mixture, const DiscreteMeasure& component);

// Same quantity by exhaustive enumeration of all 2^n - 1 nonempty atom
// subsets. Exponential; requires atoms <= 20. Kept as the brute-force
// cross-check for amax().
double amax_subset_infimum(const DiscreteMeasure& mixture,
                           const DiscreteMeasure& component);

// Component pair recovered from (mu, nu) for the given proportions:
//   mu0 = (beta*mu - alpha*nu) / (beta - alpha)
//   mu1 = ((1-alpha)*nu - (1-beta)*mu) / (beta - alpha)
// Returns nullopt when either candidate fails to be a probability measure
// (an atom mass below -1e-12).
std::optional<std::pair<DiscreteMeasure, DiscreteMeasure>> decompose(
    const DiscreteMeasure& mu, const DiscreteMeasure& nu,
    const PriorPair& pair);

// Maps the two one-sided maximum proportions (alpha_plus, beta_plus) to the
// identifiable pair:
//   alpha_star = alpha_plus*(1 - beta_plus) / (1 - alpha_plus*beta_plus)
//   beta_star  = (1 - beta_plus) / (1 - alpha_plus*beta_plus)
// Inputs must lie in [0, 1). The inverse identities
// alpha_star/beta_star == alpha_plus and
// (1-beta_star)/(1-alpha_star) == beta_plus hold by construction.
std::pair<double, double> correction(double alpha_plus, double beta_plus);

// Full canonical decomposition of a pair of distinct measures:
// alpha_plus = amax(mu, nu), beta_plus = amax(nu, mu), corrected proportions,
// and the irreducible components
//   mu0_star = (mu - alpha_plus*nu) / (1 - alpha_plus)
//   mu1_star = (nu - beta_plus*mu) / (1 - beta_plus).
CanonicalForm canonical(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// weight*m1 + (1-weight)*m0 over a shared atom set.
DiscreteMeasure mix(double weight, const DiscreteMeasure& m1,
                    const DiscreteMeasure& m0);

}  // namespace puprior
