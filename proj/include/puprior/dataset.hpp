#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace puprior {

// Ground truth carried by generated or split data: per-row class labels and
// the population mixing proportions the sample was produced with.
struct TruthInfo {
  std::vector<int> labels_unlabeled;
  std::vector<int> labels_labeled;
  double alpha_true = 0.0;
  double beta_true = 1.0;
};

// An unlabeled sample and a noisy positive sample over the same features.
struct PUDataset {
  Eigen::MatrixXd unlabeled;  // n_u x d
  Eigen::MatrixXd labeled;    // n_l x d
  std::optional<TruthInfo> truth;

  Eigen::Index dim() const { return unlabeled.cols(); }
  Eigen::Index n_unlabeled() const { return unlabeled.rows(); }
  Eigen::Index n_labeled() const { return labeled.rows(); }
};

}  // namespace puprior
