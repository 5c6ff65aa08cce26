#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "puprior/alphamax.hpp"
#include "puprior/datagen.hpp"
#include "puprior/errors.hpp"
#include "puprior/rng.hpp"
#include "puprior/transform.hpp"

using namespace puprior;

namespace {

PUDataset two_normals(double delta, double alpha, double beta, int n_u,
                      int n_l, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.family = Family::Gaussian;
  spec.delta_mu = delta;
  spec.alpha = alpha;
  spec.beta = beta;
  spec.n_unlabeled = n_u;
  spec.n_labeled = n_l;
  spec.seed = seed;
  return gen_synthetic(spec);
}

Mlp random_net(int dim, int hidden, Rng& rng) {
  Mlp net;
  net.dim = dim;
  net.hidden = hidden;
  net.w1.resize(static_cast<std::size_t>(dim) * hidden);
  net.b1.resize(static_cast<std::size_t>(hidden));
  net.w2.resize(static_cast<std::size_t>(hidden));
  for (double& w : net.w1) w = rng.normal();
  for (double& w : net.b1) w = rng.normal();
  for (double& w : net.w2) w = rng.normal();
  net.b2 = rng.normal();
  return net;
}

}  // namespace

TEST_CASE("backpropagated gradients match central differences") {
  Rng rng(41);
  int probes = 0;
  while (probes < 40) {
    const int dim = 1 + static_cast<int>(rng.bounded(4));
    Mlp net = random_net(dim, 5, rng);
    std::vector<double> x(static_cast<std::size_t>(dim));
    for (double& xi : x) xi = 2.0 * rng.normal();
    const int label = rng.uniform() < 0.5 ? 1 : 0;

    const auto grad = mlp_point_grad(net, x.data(), label);
    const auto params = net.flatten();
    auto loss_at = [&](const std::vector<double>& p) {
      Mlp probe = net;
      probe.unflatten(p);
      return mlp_point_loss(probe, x.data(), label);
    };
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double numeric = test_oracle::central_diff(
          loss_at, params, i, 1e-5 * (1.0 + std::abs(params[i])));
      const double denom = std::max(1e-6, std::abs(grad[i]) + std::abs(numeric));
      CHECK(std::abs(grad[i] - numeric) / denom < 1e-4);
    }
    ++probes;
  }
}

TEST_CASE("posterior: worked values") {
  CHECK(posterior(0.5, {0.5, 1.0, 1.0}) == doctest::Approx(0.5).epsilon(1e-14));

  // below the noise floor the raw expression goes negative and clamps
  CHECK(posterior(1e-9, {0.25, 0.95, 1.0}) == 0.0);

  const double value = posterior(0.0343, {0.25, 0.95, 10.0});
  const double expected =
      0.25 * 0.75 / 0.70 * (10.0 * 0.0343 / 0.9657 - 0.05 / 0.75);
  CHECK(value == doctest::Approx(expected).epsilon(1e-14));
  CHECK(value == doctest::Approx(0.07728109883282296).epsilon(1e-12));
  CHECK(std::abs(value - 0.0773) < 1e-4);

  CHECK(posterior(1.0, {0.25, 0.95, 10.0}) == 1.0);
  CHECK(posterior(1.0, {0.0, 0.95, 10.0}) == 0.0);  // no positives anywhere
  CHECK_THROWS_AS(posterior(0.5, {0.5, 0.5, 1.0}), InvalidInputError);
  CHECK_THROWS_AS(posterior(1.5, {0.25, 0.95, 1.0}), InvalidInputError);
}

TEST_CASE("posterior: non-decreasing in the score") {
  const PosteriorParams params{0.25, 0.95, 10.0};
  double previous = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double tau = static_cast<double>(i) / 1000.0;
    const double value = posterior(tau, params);
    CHECK(value >= previous);
    CHECK(value >= 0.0);
    CHECK(value <= 1.0);
    previous = value;
  }
}

TEST_CASE("fit_nontraditional: indistinguishable samples score the base rate") {
  const auto data = two_normals(0.0, 0.0, 1.0, 2000, 500, 51);
  MlpConfig config;
  config.members = 24;
  config.epochs = 60;
  const auto model = fit_nontraditional(data, config, 7);
  const auto scores = oob_scores(model, data);

  const double base_rate = 500.0 / 2500.0;
  const double mean_u = scores.scores_unlabeled.mean();
  const double mean_l = scores.scores_labeled.mean();
  CHECK(std::abs(mean_u - base_rate) <= 0.02);
  CHECK(std::abs(mean_l - base_rate) <= 0.02);
  CHECK(scores.sample_ratio == doctest::Approx(4.0));
}

TEST_CASE("fit_nontraditional: separable samples rank well out-of-bag") {
  const auto data = two_normals(4.0, 0.25, 1.0, 2000, 400, 52);
  MlpConfig config;
  config.members = 24;
  config.epochs = 80;
  const auto model = fit_nontraditional(data, config, 8);
  const auto scores = oob_scores(model, data);
  const double auc =
      auc_labeled_vs_unlabeled(scores.scores_labeled, scores.scores_unlabeled);
  CHECK(auc > 0.85);
  CHECK(scores.scores_unlabeled.minCoeff() > 0.0);
  CHECK(scores.scores_unlabeled.maxCoeff() < 1.0);
}

TEST_CASE("fit_nontraditional: single member cannot cover out-of-bag") {
  const auto data = two_normals(2.0, 0.3, 1.0, 40, 20, 53);
  MlpConfig config;
  config.members = 1;
  config.epochs = 2;
  CHECK_THROWS_AS(fit_nontraditional(data, config, 9), DegenerateOutputError);
}

TEST_CASE("fit_nontraditional: deterministic and serializable") {
  const auto data = two_normals(2.0, 0.25, 0.95, 300, 60, 54);
  MlpConfig config;
  config.members = 8;
  config.epochs = 30;
  const auto model_a = fit_nontraditional(data, config, 10);
  const auto model_b = fit_nontraditional(data, config, 10);
  const auto scores_a = oob_scores(model_a, data);
  const auto scores_b = oob_scores(model_b, data);
  CHECK(scores_a.scores_unlabeled == scores_b.scores_unlabeled);
  CHECK(scores_a.scores_labeled == scores_b.scores_labeled);

  const auto doc = model_a.to_json();
  const auto restored = ScoreModel::from_json(doc);
  const auto scores_c = oob_scores(restored, data);
  CHECK(scores_a.scores_unlabeled == scores_c.scores_unlabeled);

  Eigen::RowVectorXd x(1);
  x << 1.3;
  CHECK(model_a.predict(x) == restored.predict(x));
}

TEST_CASE("oob_scores: constant members give constant scores") {
  // two members with all-zero weights output sigmoid(0) = 0.5 everywhere
  nlohmann::ordered_json doc;
  doc["format"] = "puprior-score-model/1";
  doc["seed"] = 0;
  doc["dim"] = 1;
  doc["train_points"] = 4;
  doc["config"] = {{"members", 2},       {"hidden", 2},
                   {"epochs", 1},        {"batch_size", 8},
                   {"learn_rate", 0.1},  {"lr_decay", 0.0},
                   {"bootstrap_fraction", 1.0}, {"max_retries", 3}};
  nlohmann::ordered_json member;
  member["w1"] = std::vector<double>{0.0, 0.0};
  member["b1"] = std::vector<double>{0.0, 0.0};
  member["w2"] = std::vector<double>{0.0, 0.0};
  member["b2"] = 0.0;
  member["inbag"] = "1010";
  nlohmann::ordered_json member2 = member;
  member2["inbag"] = "0101";
  doc["members"] = nlohmann::ordered_json::array({member, member2});

  const auto model = ScoreModel::from_json(doc);
  PUDataset data;
  data.unlabeled.resize(3, 1);
  data.unlabeled << -1.0, 0.0, 1.0;
  data.labeled.resize(1, 1);
  data.labeled << 2.0;
  const auto scores = oob_scores(model, data);
  for (Eigen::Index i = 0; i < 3; ++i) {
    CHECK(scores.scores_unlabeled(i) == doctest::Approx(0.5).epsilon(1e-14));
  }
  CHECK(scores.scores_labeled(0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("score transform: monotone reparameterization leaves the estimate") {
  const auto data = two_normals(2.0, 0.25, 0.95, 8000, 1200, 55);
  MlpConfig config;
  config.members = 40;
  config.epochs = 100;
  const auto model = fit_nontraditional(data, config, 11);
  const auto scores = oob_scores(model, data);

  AlphaMaxConfig fine_grid;
  fine_grid.r_points = 99;  // reduce grid quantization in the comparison
  const auto direct = alphamax_n(scores, fine_grid);
  TransformedPU logit_scores = scores;
  auto logit = [](double p) { return std::log(p / (1.0 - p)); };
  for (Eigen::Index i = 0; i < logit_scores.scores_unlabeled.size(); ++i) {
    logit_scores.scores_unlabeled(i) = logit(scores.scores_unlabeled(i));
  }
  for (Eigen::Index i = 0; i < logit_scores.scores_labeled.size(); ++i) {
    logit_scores.scores_labeled(i) = logit(scores.scores_labeled(i));
  }
  const auto reparam = alphamax_n(logit_scores, fine_grid);
  CHECK(std::abs(direct.alpha_star - reparam.alpha_star) <= 0.02);
}

TEST_CASE("posterior base rate on synthetic data with true parameters") {
  const auto data = two_normals(2.0, 0.25, 0.95, 4000, 800, 56);
  MlpConfig config;
  config.members = 30;
  config.epochs = 100;
  const auto model = fit_nontraditional(data, config, 12);
  const auto scores = oob_scores(model, data);

  PosteriorParams params{0.25, 0.95, scores.sample_ratio};
  double mean_posterior = 0.0;
  for (Eigen::Index i = 0; i < scores.scores_unlabeled.size(); ++i) {
    mean_posterior += posterior(scores.scores_unlabeled(i), params);
  }
  mean_posterior /= static_cast<double>(scores.scores_unlabeled.size());
  CHECK(std::abs(mean_posterior - 0.25) <= 0.05);
}

TEST_CASE("auc: hand values") {
  Eigen::VectorXd pos(2), neg(2);
  pos << 0.9, 0.8;
  neg << 0.1, 0.2;
  CHECK(auc_labeled_vs_unlabeled(pos, neg) == 1.0);
  Eigen::VectorXd tie_pos(1), tie_neg(1);
  tie_pos << 0.5;
  tie_neg << 0.5;
  CHECK(auc_labeled_vs_unlabeled(tie_pos, tie_neg) == 0.5);
}
