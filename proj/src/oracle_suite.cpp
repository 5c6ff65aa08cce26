#include "puprior/oracle_suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "puprior/measures.hpp"
#include "puprior/rng.hpp"

namespace puprior {

namespace {

std::vector<double> random_masses(Rng& rng, int atoms, bool allow_zeros) {
  std::vector<double> masses(static_cast<std::size_t>(atoms));
  double total = 0.0;
  for (double& m : masses) {
    m = -std::log(rng.uniform_open());
    if (allow_zeros && rng.uniform() < 0.3) m = 0.0;
    total += m;
  }
  if (total == 0.0) {
    masses[rng.bounded(masses.size())] = 1.0;
    total = 1.0;
  }
  for (double& m : masses) m /= total;
  return masses;
}

DiscreteMeasure random_measure(Rng& rng, int atoms, bool allow_zeros) {
  return DiscreteMeasure(random_masses(rng, atoms, allow_zeros));
}

// Pair with a private atom each, so neither is a mixture containing the other.
std::pair<DiscreteMeasure, DiscreteMeasure> irreducible_pair(Rng& rng,
                                                             int atoms) {
  auto m0 = random_masses(rng, atoms, true);
  auto m1 = random_masses(rng, atoms, true);
  const std::size_t a0 = 0, a1 = 1;
  m0[a0] = std::max(m0[a0], 0.05);
  m1[a0] = 0.0;
  m1[a1] = std::max(m1[a1], 0.05);
  m0[a1] = 0.0;
  auto renorm = [](std::vector<double>& m) {
    double t = 0.0;
    for (double x : m) t += x;
    for (double& x : m) x /= t;
  };
  renorm(m0);
  renorm(m1);
  return {DiscreteMeasure(std::move(m0)), DiscreteMeasure(std::move(m1))};
}

void note(OracleSuiteResult& result, const std::string& message) {
  if (result.failure_notes.size() < 8) result.failure_notes.push_back(message);
}

}  // namespace

OracleSuiteResult run_oracle_suite(const OracleSuiteConfig& config) {
  Rng rng(config.seed);
  OracleSuiteResult result;
  const int atoms_cap = std::min(config.atoms, 12);

  for (int trial = 0; trial < config.trials; ++trial) {
    ++result.trials_run;
    const int atoms = 2 + static_cast<int>(rng.bounded(
                              static_cast<std::uint64_t>(atoms_cap - 1)));

    // (a) atom-ratio minimum equals the subset infimum.
    {
      const auto lambda = random_measure(rng, atoms, true);
      const auto lambda1 = random_measure(rng, atoms, true);
      const double by_atoms = amax(lambda, lambda1);
      const double by_subsets = amax_subset_infimum(lambda, lambda1);
      if (std::abs(by_atoms - by_subsets) > 1e-12) {
        ++result.amax_mismatches;
        note(result, "amax mismatch at trial " + std::to_string(trial));
      }
    }

    // (b) canonical round trip on an irreducible construction.
    {
      const auto [mu0, mu1] = irreducible_pair(rng, atoms);
      const double alpha = 0.95 * rng.uniform();
      const double beta =
          alpha + 0.01 + (1.0 - alpha - 0.01) * rng.uniform();
      const auto mu = mix(alpha, mu1, mu0);
      const auto nu = mix(beta, mu1, mu0);
      const auto form = canonical(mu, nu);
      bool ok = std::abs(form.alpha_star - alpha) <= 1e-8 &&
                std::abs(form.beta_star - beta) <= 1e-8;
      for (std::size_t i = 0; ok && i < mu0.atoms(); ++i) {
        ok = std::abs(form.mu0_star[i] - mu0[i]) <= 1e-8 &&
             std::abs(form.mu1_star[i] - mu1[i]) <= 1e-8;
      }
      if (!ok) {
        ++result.roundtrip_failures;
        note(result, "round trip failed at trial " + std::to_string(trial));
      }
    }

    // (c) correction followed by its inverse identities.
    {
      const double ap = rng.uniform() * 0.999;
      const double bp = rng.uniform() * 0.999;
      const auto [as, bs] = correction(ap, bp);
      const double ap_back = bs > 0.0 ? as / bs : 0.0;
      const double bp_back = (1.0 - bs) / (1.0 - as);
      if (std::abs(ap_back - ap) > 1e-12 || std::abs(bp_back - bp) > 1e-12 ||
          !(as < bs)) {
        ++result.correction_failures;
        note(result, "correction identity failed at trial " +
                         std::to_string(trial));
      }
    }

    // (d) decompose feasibility matches the ratio boundary conditions.
    {
      const auto mu = random_measure(rng, atoms, true);
      const auto nu = random_measure(rng, atoms, true);
      bool distinct = false;
      for (std::size_t i = 0; i < mu.atoms(); ++i) {
        if (std::abs(mu[i] - nu[i]) > 1e-9) distinct = true;
      }
      if (distinct) {
        const double alpha_plus = amax(mu, nu);
        const double beta_plus = amax(nu, mu);
        const double alpha = rng.uniform() * 0.98;
        const double beta = alpha + 0.01 + (1.0 - alpha - 0.01) * rng.uniform();
        const double lhs0 = alpha / beta;
        const double lhs1 = (1.0 - beta) / (1.0 - alpha);
        // Skip draws sitting on the boundary itself.
        if (std::abs(lhs0 - alpha_plus) > 1e-9 &&
            std::abs(lhs1 - beta_plus) > 1e-9) {
          const bool predicted = lhs0 <= alpha_plus && lhs1 <= beta_plus;
          const bool feasible =
              decompose(mu, nu, PriorPair(alpha, beta)).has_value();
          if (predicted != feasible) {
            ++result.boundary_mismatches;
            note(result,
                 "feasibility boundary mismatch at trial " +
                     std::to_string(trial));
          }
        }

        // (e) at least two feasible pairs exist whenever both one-sided
        // proportions are positive.
        if (alpha_plus > 1e-9 && beta_plus > 1e-9) {
          const double t = rng.uniform_open();
          const bool w1 = decompose(mu, nu, PriorPair(0.0, 1.0)).has_value();
          const bool w2 =
              decompose(mu, nu, PriorPair(alpha_plus * t, 1.0)).has_value();
          if (!w1 || !w2) {
            ++result.witness_failures;
            note(result, "unidentifiability witness failed at trial " +
                             std::to_string(trial));
          }
        }
      }
    }
  }
  return result;
}

}  // namespace puprior
