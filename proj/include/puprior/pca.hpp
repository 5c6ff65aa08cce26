#pragma once

#include <Eigen/Dense>

namespace puprior {

struct PcaResult {
  Eigen::MatrixXd projected;       // n x k_used
  Eigen::VectorXd explained;       // variance fraction per kept component
  int k_used = 0;
  bool k_reduced = false;          // requested k exceeded the effective rank
};

// Z-score normalization (zero-variance columns dropped) followed by
// projection onto the top-k eigenvectors of the sample covariance.
// Eigenvector signs are fixed so the largest-magnitude loading is positive,
// keeping outputs reproducible. k is reduced to the effective rank if needed.
PcaResult zscore_pca(const Eigen::MatrixXd& points, int k);

}  // namespace puprior
