#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "puprior/dataset.hpp"
#include "puprior/prior_estimate.hpp"

namespace puprior {

// Two Gaussian mixtures sharing components (u0, sigma0) and (u1, sigma1):
// the unlabeled sample mixes them with weight alpha on component 1, the
// labeled sample with weight beta.
struct MsGmmParams {
  double alpha = 0.5;
  double beta = 0.5;
  Eigen::VectorXd u0, u1;
  Eigen::MatrixXd sigma0, sigma1;
};

// Posterior membership of component 1 for every point of each sample.
struct Responsibilities {
  Eigen::VectorXd w_u;
  Eigen::VectorXd w_l;
};

struct MsGmmConfig {
  int restarts = 10;
  int max_iter = 500;
  double tol = 1e-7;  // stop when |delta ll| < tol * max(1, |ll|)
  std::uint64_t seed = 1;
};

// Component-1 responsibilities, evaluated in log space.
Responsibilities e_step(const PUDataset& data, const MsGmmParams& params);

// One maximization step. Mixing weights become responsibility means; the
// component means pool both samples; the covariances are responsibility-
// weighted scatters about the previous means, plus a trace-scaled ridge.
// Throws DegenerateComponentError when a component loses its mass.
MsGmmParams m_step(const PUDataset& data, const Responsibilities& resp,
                   const MsGmmParams& previous);

// Sum of both samples' mixture log-likelihoods under the shared components.
double combined_loglik(const PUDataset& data, const MsGmmParams& params);

struct MsGmmFit {
  MsGmmParams params;
  PriorEstimate estimate;
  double loglik = 0.0;
  int iterations = 0;
  std::vector<double> ll_trace;                    // winning restart
  std::vector<std::vector<double>> restart_traces; // all non-degenerate runs
  int failed_restarts = 0;
};

// Best-of-restarts EM on the combined likelihood. If the converged mixing
// weights come out with alpha > beta, component identities are swapped so the
// labeled sample stays the positive-enriched one.
MsGmmFit fit_msgmm(const PUDataset& data, const MsGmmConfig& config = {});

}  // namespace puprior
