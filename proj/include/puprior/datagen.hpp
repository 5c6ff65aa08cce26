#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "puprior/dataset.hpp"

namespace puprior {

enum class Family { Gaussian, Laplace };

std::string family_name(Family family);
Family family_from_name(const std::string& name);

// Selection process that routes each point to the unlabeled sample, the noisy
// positive sample, or nowhere. gamma1 is the success probability for true
// positives, gamma0 the noise rate for true negatives; gamma0 < gamma1 keeps
// the labeled sample positive-enriched.
struct LabelingConfig {
  double select_prob;
  double gamma1;
  double gamma0;

  LabelingConfig(double select_prob_value, double gamma1_value,
                 double gamma0_value);
};

// Univariate two-component location family: component 0 at the origin,
// component 1 shifted by delta_mu; unit variance (Gaussian) or unit scale
// (Laplace).
struct SyntheticSpec {
  Family family = Family::Gaussian;
  double delta_mu = 2.0;
  double alpha = 0.25;    // positive proportion in the unlabeled sample
  double beta = 0.95;     // positive proportion in the labeled sample
  std::int64_t n_unlabeled = 10000;
  std::int64_t n_labeled = 1000;
  std::uint64_t seed = 1;

  void validate() const;
};

// Routes labeled points through the selection process. Records the implied
// labeled-sample purity gamma1*a / (gamma1*a + gamma0*(1-a)), with a the
// positive fraction of the input labels.
PUDataset simulate_labeling(const Eigen::MatrixXd& points,
                            const std::vector<int>& labels,
                            const LabelingConfig& config, std::uint64_t seed);

// Draws both samples i.i.d. from the two-component mixture. Deterministic
// for a fixed spec (including its seed).
PUDataset gen_synthetic(const SyntheticSpec& spec);

// Builds a labeled sample of exactly round(beta*n_labeled) positives plus
// negatives chosen at random; every remaining point becomes unlabeled (so the
// unlabeled class prior co-varies with beta), uniformly subsampled down to
// unlabeled_cap. alpha_true records the pre-cap positive fraction.
PUDataset pu_split(const Eigen::MatrixXd& points,
                   const std::vector<int>& labels, std::int64_t n_labeled,
                   double beta, std::uint64_t seed,
                   std::int64_t unlabeled_cap = 10000);

}  // namespace puprior
