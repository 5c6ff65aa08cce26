#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "json.hpp"
#include "puprior/dataset.hpp"

namespace puprior {

// One probabilistic scorer: d inputs -> `hidden` sigmoid units -> sigmoid
// output, trained on the cross-entropy of labeled-vs-unlabeled pseudo-labels.
struct Mlp {
  int dim = 0;
  int hidden = 0;
  std::vector<double> w1;  // hidden x dim, row-major by hidden unit
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;

  double forward(const double* x) const;

  // Flat parameter vector in the order w1, b1, w2, b2.
  std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& params);
};

// Cross-entropy of one example and its gradient with respect to the
// flattened parameters; exposed for finite-difference verification.
double mlp_point_loss(const Mlp& net, const double* x, int label);
std::vector<double> mlp_point_grad(const Mlp& net, const double* x, int label);

struct MlpConfig {
  int members = 100;
  int hidden = 5;
  int epochs = 200;
  int batch_size = 128;
  double learn_rate = 0.1;
  double lr_decay = 0.01;          // lr_epoch = learn_rate / (1 + lr_decay*epoch)
  double bootstrap_fraction = 1.0; // resample size, with replacement
  int max_retries = 3;             // on non-finite loss, halve lr and retrain
  int threads = 0;                 // 0: hardware concurrency
};

// Scores on both samples; the univariate stand-in for the raw features.
struct TransformedPU {
  Eigen::VectorXd scores_unlabeled;
  Eigen::VectorXd scores_labeled;
  double sample_ratio = 0.0;  // |U| / |L|
};

// Bagged ensemble over the pooled sample (unlabeled rows first, labeled rows
// after). Every pooled point is out-of-bag for at least one member.
class ScoreModel {
 public:
  const MlpConfig& config() const { return config_; }
  const std::vector<Mlp>& members() const { return members_; }
  const std::vector<std::vector<std::uint8_t>>& inbag() const { return inbag_; }
  std::int64_t train_points() const { return train_points_; }
  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }

  // Full-ensemble mean score; for points outside the training sample.
  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

  nlohmann::ordered_json to_json() const;
  static ScoreModel from_json(const nlohmann::json& doc);

  friend ScoreModel fit_nontraditional(const PUDataset& data,
                                       const MlpConfig& config,
                                       std::uint64_t seed);

 private:
  MlpConfig config_;
  std::uint64_t seed_ = 0;
  int dim_ = 0;
  std::int64_t train_points_ = 0;
  std::vector<Mlp> members_;
  std::vector<std::vector<std::uint8_t>> inbag_;  // member x pooled index
};

// Trains the labeled-vs-unlabeled ensemble on bootstrap resamples of the
// pooled data. Deterministic given the seed.
ScoreModel fit_nontraditional(const PUDataset& data, const MlpConfig& config,
                              std::uint64_t seed);

// Out-of-bag score per point: mean output of the members whose bootstrap
// excluded it. `data` must be the sample the model was fitted on.
TransformedPU oob_scores(const ScoreModel& model, const PUDataset& data);

struct PosteriorParams {
  double alpha_star = 0.0;
  double beta_star = 1.0;
  double ratio = 1.0;  // estimate of p(unlabeled)/p(labeled), e.g. |U|/|L|
};

// Maps a labeled-vs-unlabeled score tau to the class posterior
//   clamp01( a(1-a)/(b-a) * ( ratio*tau/(1-tau) - (1-b)/(1-a) ) )
// with (a, b) = (alpha_star, beta_star). tau == 1 returns the limit 1.
double posterior(double tau, const PosteriorParams& params);

// Probability that a labeled score ranks above an unlabeled one (ties count
// half); the separability diagnostic reported next to the estimates.
double auc_labeled_vs_unlabeled(const Eigen::VectorXd& labeled_scores,
                                const Eigen::VectorXd& unlabeled_scores);

}  // namespace puprior
