#include "puprior/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>

#include "puprior/errors.hpp"
#include "puprior/rng.hpp"

namespace puprior {

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& points,
                          const std::vector<std::int64_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), points.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = points.row(rows[i]);
  }
  return out;
}

std::vector<int> take_labels(const std::vector<int>& labels,
                             const std::vector<std::int64_t>& rows) {
  std::vector<int> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[i] = labels[static_cast<std::size_t>(rows[i])];
  }
  return out;
}

}  // namespace

std::string family_name(Family family) {
  return family == Family::Gaussian ? "gaussian" : "laplace";
}

Family family_from_name(const std::string& name) {
  if (name == "gaussian") return Family::Gaussian;
  if (name == "laplace") return Family::Laplace;
  throw InvalidInputError("unknown family '" + name + "'");
}

LabelingConfig::LabelingConfig(double select_prob_value, double gamma1_value,
                               double gamma0_value)
    : select_prob(select_prob_value),
      gamma1(gamma1_value),
      gamma0(gamma0_value) {
  if (!(select_prob > 0.0 && select_prob < 1.0)) {
    throw InvalidInputError("select_prob must lie in (0, 1)");
  }
  if (!(gamma1 > 0.0 && gamma1 < 1.0)) {
    throw InvalidInputError("gamma1 must lie in (0, 1)");
  }
  if (!(gamma0 >= 0.0 && gamma0 < 1.0)) {
    throw InvalidInputError("gamma0 must lie in [0, 1)");
  }
  if (!(gamma0 < gamma1)) {
    throw InvalidInputError("gamma0 < gamma1 required");
  }
}

void SyntheticSpec::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw InvalidInputError("alpha must lie in [0, 1)");
  }
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw InvalidInputError("beta must lie in (0, 1]");
  }
  if (n_unlabeled < 1 || n_labeled < 1) {
    throw InvalidInputError("sample sizes must be at least 1");
  }
  if (!std::isfinite(delta_mu)) {
    throw InvalidInputError("delta_mu must be finite");
  }
}

PUDataset simulate_labeling(const Eigen::MatrixXd& points,
                            const std::vector<int>& labels,
                            const LabelingConfig& config, std::uint64_t seed) {
  if (static_cast<Eigen::Index>(labels.size()) != points.rows()) {
    throw InvalidInputError("labels and points disagree in length");
  }
  if (points.rows() == 0) throw InvalidInputError("no points to route");

  Rng rng(seed);
  std::vector<std::int64_t> unlabeled_rows, labeled_rows;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    if (rng.uniform() < 1.0 - config.select_prob) {
      unlabeled_rows.push_back(i);
      continue;
    }
    const double success = labels[static_cast<std::size_t>(i)] == 1
                               ? config.gamma1
                               : config.gamma0;
    if (rng.uniform() < success) labeled_rows.push_back(i);
    // otherwise dropped: selection must discard some points for the
    // unlabeled sample to keep the population distribution
  }
  if (unlabeled_rows.empty() || labeled_rows.empty()) {
    throw DegenerateOutputError("labeling produced an empty sample");
  }

  const double n = static_cast<double>(points.rows());
  const double positives =
      static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double a = positives / n;

  TruthInfo truth;
  truth.labels_unlabeled = take_labels(labels, unlabeled_rows);
  truth.labels_labeled = take_labels(labels, labeled_rows);
  truth.alpha_true = a;
  truth.beta_true =
      config.gamma0 == 0.0
          ? 1.0
          : config.gamma1 * a /
                (config.gamma1 * a + config.gamma0 * (1.0 - a));

  PUDataset out;
  out.unlabeled = take_rows(points, unlabeled_rows);
  out.labeled = take_rows(points, labeled_rows);
  out.truth = std::move(truth);
  return out;
}

PUDataset gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  auto draw = [&](double proportion, Eigen::Index count, Eigen::MatrixXd& x,
                  std::vector<int>& labels) {
    x.resize(count, 1);
    labels.resize(static_cast<std::size_t>(count));
    for (Eigen::Index i = 0; i < count; ++i) {
      const int y = rng.uniform() < proportion ? 1 : 0;
      const double base =
          spec.family == Family::Gaussian ? rng.normal() : rng.laplace();
      x(i, 0) = base + (y == 1 ? spec.delta_mu : 0.0);
      labels[static_cast<std::size_t>(i)] = y;
    }
  };

  PUDataset out;
  TruthInfo truth;
  draw(spec.alpha, spec.n_unlabeled, out.unlabeled, truth.labels_unlabeled);
  draw(spec.beta, spec.n_labeled, out.labeled, truth.labels_labeled);
  truth.alpha_true = spec.alpha;
  truth.beta_true = spec.beta;
  out.truth = std::move(truth);
  return out;
}

PUDataset pu_split(const Eigen::MatrixXd& points,
                   const std::vector<int>& labels, std::int64_t n_labeled,
                   double beta, std::uint64_t seed,
                   std::int64_t unlabeled_cap) {
  if (static_cast<Eigen::Index>(labels.size()) != points.rows()) {
    throw InvalidInputError("labels and points disagree in length");
  }
  if (n_labeled < 1) throw InvalidInputError("n_labeled must be at least 1");
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw InvalidInputError("beta must lie in (0, 1]");
  }
  if (unlabeled_cap < 1) throw InvalidInputError("unlabeled_cap must be >= 1");

  const std::int64_t want_pos = std::llround(beta * static_cast<double>(n_labeled));
  const std::int64_t want_neg = n_labeled - want_pos;

  std::vector<std::int64_t> pos, neg;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    (labels[static_cast<std::size_t>(i)] == 1 ? pos : neg).push_back(i);
  }
  if (static_cast<std::int64_t>(pos.size()) < want_pos ||
      static_cast<std::int64_t>(neg.size()) < want_neg) {
    throw InvalidInputError(
        "not enough positives/negatives for the requested labeled sample");
  }
  if (points.rows() <= static_cast<Eigen::Index>(n_labeled)) {
    throw InvalidInputError("no points left for the unlabeled sample");
  }

  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);

  std::vector<std::int64_t> labeled_rows(pos.begin(), pos.begin() + want_pos);
  labeled_rows.insert(labeled_rows.end(), neg.begin(), neg.begin() + want_neg);

  std::vector<std::int64_t> rest(pos.begin() + want_pos, pos.end());
  rest.insert(rest.end(), neg.begin() + want_neg, neg.end());
  std::sort(rest.begin(), rest.end());  // restore input order before subsampling

  const double rest_pos =
      static_cast<double>(pos.size() - static_cast<std::size_t>(want_pos));
  const double alpha_true = rest_pos / static_cast<double>(rest.size());

  if (static_cast<std::int64_t>(rest.size()) > unlabeled_cap) {
    rng.shuffle(rest);
    rest.resize(static_cast<std::size_t>(unlabeled_cap));
    std::sort(rest.begin(), rest.end());
  }

  TruthInfo truth;
  truth.labels_unlabeled = take_labels(labels, rest);
  truth.labels_labeled = take_labels(labels, labeled_rows);
  truth.alpha_true = alpha_true;
  truth.beta_true =
      static_cast<double>(want_pos) / static_cast<double>(n_labeled);

  PUDataset out;
  out.unlabeled = take_rows(points, rest);
  out.labeled = take_rows(points, labeled_rows);
  out.truth = std::move(truth);
  return out;
}

}  // namespace puprior
