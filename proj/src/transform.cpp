#include "puprior/transform.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

#include "puprior/errors.hpp"
#include "puprior/rng.hpp"

namespace puprior {

namespace {

constexpr double kScoreClip = 1e-12;

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double clip_unit(double p) {
  return std::clamp(p, kScoreClip, 1.0 - kScoreClip);
}

struct MlpGrad {
  std::vector<double> w1, b1, w2;
  double b2 = 0.0;

  void reset(int dim, int hidden) {
    w1.assign(static_cast<std::size_t>(dim) * hidden, 0.0);
    b1.assign(static_cast<std::size_t>(hidden), 0.0);
    w2.assign(static_cast<std::size_t>(hidden), 0.0);
    b2 = 0.0;
  }
};

// Forward pass plus gradient accumulation for one example. Returns the
// cross-entropy contribution.
double accumulate_example(const Mlp& net, const double* x, int label,
                          MlpGrad& grad, std::vector<double>& hidden_buf) {
  const int h = net.hidden;
  const int d = net.dim;
  double z2 = net.b2;
  for (int j = 0; j < h; ++j) {
    double a = net.b1[static_cast<std::size_t>(j)];
    const double* row = net.w1.data() + static_cast<std::size_t>(j) * d;
    for (int i = 0; i < d; ++i) a += row[i] * x[i];
    const double s = sigmoid(a);
    hidden_buf[static_cast<std::size_t>(j)] = s;
    z2 += net.w2[static_cast<std::size_t>(j)] * s;
  }
  const double p = sigmoid(z2);
  const double pc = clip_unit(p);
  const double loss =
      label == 1 ? -std::log(pc) : -std::log(1.0 - pc);

  const double dz2 = p - static_cast<double>(label);
  grad.b2 += dz2;
  for (int j = 0; j < h; ++j) {
    const double s = hidden_buf[static_cast<std::size_t>(j)];
    grad.w2[static_cast<std::size_t>(j)] += dz2 * s;
    const double dz1 = dz2 * net.w2[static_cast<std::size_t>(j)] * s * (1.0 - s);
    grad.b1[static_cast<std::size_t>(j)] += dz1;
    double* grow = grad.w1.data() + static_cast<std::size_t>(j) * d;
    for (int i = 0; i < d; ++i) grow[i] += dz1 * x[i];
  }
  return loss;
}

void apply_step(Mlp& net, const MlpGrad& grad, double lr, double inv_count) {
  const double scale = lr * inv_count;
  for (std::size_t i = 0; i < net.w1.size(); ++i) net.w1[i] -= scale * grad.w1[i];
  for (std::size_t i = 0; i < net.b1.size(); ++i) net.b1[i] -= scale * grad.b1[i];
  for (std::size_t i = 0; i < net.w2.size(); ++i) net.w2[i] -= scale * grad.w2[i];
  net.b2 -= scale * grad.b2;
}

void init_weights(Mlp& net, int dim, int hidden, Rng& rng) {
  net.dim = dim;
  net.hidden = hidden;
  net.w1.resize(static_cast<std::size_t>(dim) * hidden);
  net.b1.resize(static_cast<std::size_t>(hidden));
  net.w2.resize(static_cast<std::size_t>(hidden));
  auto draw = [&rng] { return (rng.uniform() - 0.5); };  // uniform on +-0.5
  for (double& w : net.w1) w = draw();
  for (double& w : net.b1) w = draw();
  for (double& w : net.w2) w = draw();
  net.b2 = draw();
}

bool finite_params(const Mlp& net) {
  auto ok = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(),
                       [](double x) { return std::isfinite(x); });
  };
  return ok(net.w1) && ok(net.b1) && ok(net.w2) && std::isfinite(net.b2);
}

// Mini-batch gradient descent over the member's bootstrap resample.
// Returns false if the loss or the weights went non-finite.
bool train_member(Mlp& net, const Eigen::MatrixXd& pooled,
                  const std::vector<int>& pseudo_labels,
                  const std::vector<std::int64_t>& resample,
                  const MlpConfig& config, double lr, Rng& rng) {
  const int d = net.dim;
  std::vector<std::int64_t> order(resample);
  std::vector<double> hidden_buf(static_cast<std::size_t>(net.hidden));
  std::vector<double> point(static_cast<std::size_t>(d));
  MlpGrad grad;

  const int batch = std::max(1, config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    const double lr_epoch = lr / (1.0 + config.lr_decay * epoch);
    double epoch_loss = 0.0;
    std::size_t at = 0;
    while (at < order.size()) {
      const std::size_t stop = std::min(order.size(), at + batch);
      grad.reset(d, net.hidden);
      for (std::size_t k = at; k < stop; ++k) {
        const auto row = order[k];
        for (int i = 0; i < d; ++i) point[static_cast<std::size_t>(i)] = pooled(row, i);
        epoch_loss += accumulate_example(
            net, point.data(), pseudo_labels[static_cast<std::size_t>(row)],
            grad, hidden_buf);
      }
      apply_step(net, grad, lr_epoch, 1.0 / static_cast<double>(stop - at));
      at = stop;
    }
    if (!std::isfinite(epoch_loss) || !finite_params(net)) return false;
  }
  return true;
}

}  // namespace

double Mlp::forward(const double* x) const {
  double z2 = b2;
  for (int j = 0; j < hidden; ++j) {
    double a = b1[static_cast<std::size_t>(j)];
    const double* row = w1.data() + static_cast<std::size_t>(j) * dim;
    for (int i = 0; i < dim; ++i) a += row[i] * x[i];
    z2 += w2[static_cast<std::size_t>(j)] * sigmoid(a);
  }
  return sigmoid(z2);
}

std::vector<double> Mlp::flatten() const {
  std::vector<double> out;
  out.reserve(w1.size() + b1.size() + w2.size() + 1);
  out.insert(out.end(), w1.begin(), w1.end());
  out.insert(out.end(), b1.begin(), b1.end());
  out.insert(out.end(), w2.begin(), w2.end());
  out.push_back(b2);
  return out;
}

void Mlp::unflatten(const std::vector<double>& params) {
  const std::size_t expect = w1.size() + b1.size() + w2.size() + 1;
  if (params.size() != expect) {
    throw InvalidInputError("flat parameter size mismatch");
  }
  std::size_t at = 0;
  for (double& w : w1) w = params[at++];
  for (double& w : b1) w = params[at++];
  for (double& w : w2) w = params[at++];
  b2 = params[at];
}

double mlp_point_loss(const Mlp& net, const double* x, int label) {
  const double p = clip_unit(net.forward(x));
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

std::vector<double> mlp_point_grad(const Mlp& net, const double* x,
                                   int label) {
  MlpGrad grad;
  grad.reset(net.dim, net.hidden);
  std::vector<double> hidden_buf(static_cast<std::size_t>(net.hidden));
  accumulate_example(net, x, label, grad, hidden_buf);
  std::vector<double> out;
  out.reserve(grad.w1.size() + grad.b1.size() + grad.w2.size() + 1);
  out.insert(out.end(), grad.w1.begin(), grad.w1.end());
  out.insert(out.end(), grad.b1.begin(), grad.b1.end());
  out.insert(out.end(), grad.w2.begin(), grad.w2.end());
  out.push_back(grad.b2);
  return out;
}

double ScoreModel::predict(
    const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  if (x.size() != dim_) throw InvalidInputError("point dimension mismatch");
  std::vector<double> point(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) point[static_cast<std::size_t>(i)] = x(i);
  double total = 0.0;
  for (const auto& net : members_) total += net.forward(point.data());
  return clip_unit(total / static_cast<double>(members_.size()));
}

ScoreModel fit_nontraditional(const PUDataset& data, const MlpConfig& config,
                              std::uint64_t seed) {
  const Eigen::Index n_u = data.n_unlabeled();
  const Eigen::Index n_l = data.n_labeled();
  if (n_u < 10 || n_l < 10) {
    throw InvalidInputError("need at least 10 points in each sample");
  }
  if (data.labeled.cols() != data.unlabeled.cols()) {
    throw InvalidInputError("samples disagree in dimension");
  }
  if (config.members < 1 || config.hidden < 1 || config.epochs < 1) {
    throw InvalidInputError("members, hidden and epochs must be positive");
  }
  if (!(config.bootstrap_fraction > 0.0)) {
    throw InvalidInputError("bootstrap_fraction must be positive");
  }

  const Eigen::Index n = n_u + n_l;
  const int d = static_cast<int>(data.unlabeled.cols());
  Eigen::MatrixXd pooled(n, d);
  pooled.topRows(n_u) = data.unlabeled;
  pooled.bottomRows(n_l) = data.labeled;
  std::vector<int> pseudo(static_cast<std::size_t>(n), 0);
  std::fill(pseudo.begin() + n_u, pseudo.end(), 1);

  const auto resample_size = static_cast<std::int64_t>(
      std::llround(config.bootstrap_fraction * static_cast<double>(n)));
  if (resample_size < 1) throw InvalidInputError("empty bootstrap resample");

  ScoreModel model;
  model.config_ = config;
  model.seed_ = seed;
  model.dim_ = d;
  model.train_points_ = n;
  model.members_.resize(static_cast<std::size_t>(config.members));
  model.inbag_.assign(static_cast<std::size_t>(config.members),
                      std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0));

  // Draw bootstrap memberships, then redraw individual bags until every
  // point is out-of-bag for at least one member. A redraw forced by point i
  // samples that member's bag from the remaining indices.
  std::vector<std::vector<std::int64_t>> resamples(
      static_cast<std::size_t>(config.members));
  for (int m = 0; m < config.members; ++m) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(m)));
    auto& rows = resamples[static_cast<std::size_t>(m)];
    auto& mask = model.inbag_[static_cast<std::size_t>(m)];
    rows.resize(static_cast<std::size_t>(resample_size));
    for (auto& row : rows) {
      row = static_cast<std::int64_t>(
          rng.bounded(static_cast<std::uint64_t>(n)));
      mask[static_cast<std::size_t>(row)] = 1;
    }
  }

  auto uncovered_points = [&] {
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < n; ++i) {
      bool oob = false;
      for (int m = 0; m < config.members && !oob; ++m) {
        oob = model.inbag_[static_cast<std::size_t>(m)]
                          [static_cast<std::size_t>(i)] == 0;
      }
      if (!oob) out.push_back(i);
    }
    return out;
  };

  // Repair pass: evict an uncovered point from one member's bag, replacing
  // its draws with an index already present there. No other point's
  // membership changes, so the uncovered set strictly shrinks.
  constexpr int kCoverageRounds = 8;
  for (int round = 0; round < kCoverageRounds; ++round) {
    const auto uncovered = uncovered_points();
    if (uncovered.empty()) break;
    if (config.members < 2 && n > 1) break;  // a lone member cannot cover
    for (const auto point : uncovered) {
      const int member = static_cast<int>(
          (static_cast<std::uint64_t>(point) + static_cast<unsigned>(round)) %
          static_cast<std::uint64_t>(config.members));
      auto& rows = resamples[static_cast<std::size_t>(member)];
      std::int64_t replacement = -1;
      for (const auto row : rows) {
        if (row != point) {
          replacement = row;
          break;
        }
      }
      if (replacement < 0) continue;  // bag holds only this point
      for (auto& row : rows) {
        if (row == point) row = replacement;
      }
      model.inbag_[static_cast<std::size_t>(member)]
                  [static_cast<std::size_t>(point)] = 0;
    }
  }
  if (!uncovered_points().empty()) {
    throw DegenerateOutputError(
        "could not draw bootstraps leaving every point out-of-bag; "
        "use more ensemble members");
  }

  const int want_threads = config.threads > 0
                               ? config.threads
                               : static_cast<int>(std::max(
                                     1u, std::thread::hardware_concurrency()));
  const int n_threads = std::min(want_threads, config.members);

  std::atomic<int> next_member{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const int m = next_member.fetch_add(1);
      if (m >= config.members || failed.load()) return;
      Mlp& net = model.members_[static_cast<std::size_t>(m)];
      const auto& rows = resamples[static_cast<std::size_t>(m)];
      bool trained = false;
      for (int attempt = 0; attempt <= config.max_retries && !trained;
           ++attempt) {
        Rng rng(derive_seed(seed, 0x900000u + 0x100u * static_cast<unsigned>(m) +
                                      static_cast<unsigned>(attempt)));
        init_weights(net, d, config.hidden, rng);
        const double lr = config.learn_rate / static_cast<double>(1 << attempt);
        trained = train_member(net, pooled, pseudo, rows, config, lr, rng);
      }
      if (!trained) {
        failed.store(true);
        std::lock_guard<std::mutex> lock(failure_mutex);
        failure = "member " + std::to_string(m) +
                  " diverged after learning-rate retries";
      }
    }
  };

  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw EstimationFailedError(failure);
  return model;
}

TransformedPU oob_scores(const ScoreModel& model, const PUDataset& data) {
  const Eigen::Index n_u = data.n_unlabeled();
  const Eigen::Index n_l = data.n_labeled();
  const Eigen::Index n = n_u + n_l;
  if (n != model.train_points() || data.dim() != model.dim()) {
    throw InvalidInputError("data does not match the fitted sample");
  }

  const int d = model.dim();
  std::vector<double> point(static_cast<std::size_t>(d));
  Eigen::VectorXd scores(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool from_labeled = i >= n_u;
    const Eigen::Index row = from_labeled ? i - n_u : i;
    for (int c = 0; c < d; ++c) {
      point[static_cast<std::size_t>(c)] =
          from_labeled ? data.labeled(row, c) : data.unlabeled(row, c);
    }
    double total = 0.0;
    int count = 0;
    for (std::size_t m = 0; m < model.members().size(); ++m) {
      if (model.inbag()[m][static_cast<std::size_t>(i)] == 0) {
        total += model.members()[m].forward(point.data());
        ++count;
      }
    }
    // count >= 1 is guaranteed by the fitting invariant
    scores(i) = clip_unit(total / static_cast<double>(count));
  }

  TransformedPU out;
  out.scores_unlabeled = scores.head(n_u);
  out.scores_labeled = scores.tail(n_l);
  out.sample_ratio = static_cast<double>(n_u) / static_cast<double>(n_l);
  return out;
}

double posterior(double tau, const PosteriorParams& params) {
  if (!(params.alpha_star >= 0.0 && params.alpha_star < 1.0) ||
      !(params.beta_star > 0.0 && params.beta_star <= 1.0) ||
      !(params.beta_star > params.alpha_star)) {
    throw InvalidInputError("posterior requires 0 <= alpha_star < beta_star <= 1");
  }
  if (!(params.ratio > 0.0)) throw InvalidInputError("ratio must be positive");
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw InvalidInputError("tau must lie in [0, 1]");
  }
  if (params.alpha_star == 0.0) return 0.0;  // no positives at all
  if (tau >= 1.0) return 1.0;                // odds limit

  const double odds = params.ratio * tau / (1.0 - tau);
  const double offset =
      (1.0 - params.beta_star) / (1.0 - params.alpha_star);
  const double scale = params.alpha_star * (1.0 - params.alpha_star) /
                       (params.beta_star - params.alpha_star);
  return std::clamp(scale * (odds - offset), 0.0, 1.0);
}

double auc_labeled_vs_unlabeled(const Eigen::VectorXd& labeled_scores,
                                const Eigen::VectorXd& unlabeled_scores) {
  const Eigen::Index nl = labeled_scores.size();
  const Eigen::Index nu = unlabeled_scores.size();
  if (nl == 0 || nu == 0) throw InvalidInputError("empty score vector");

  struct Entry {
    double score;
    int positive;
  };
  std::vector<Entry> all;
  all.reserve(static_cast<std::size_t>(nl + nu));
  for (Eigen::Index i = 0; i < nl; ++i) all.push_back({labeled_scores(i), 1});
  for (Eigen::Index i = 0; i < nu; ++i) all.push_back({unlabeled_scores(i), 0});
  std::sort(all.begin(), all.end(),
            [](const Entry& a, const Entry& b) { return a.score < b.score; });

  // Rank sum with midranks for ties.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (all[k].positive) rank_sum += midrank;
    }
    i = j;
  }
  const double nl_d = static_cast<double>(nl);
  const double nu_d = static_cast<double>(nu);
  return (rank_sum - nl_d * (nl_d + 1.0) / 2.0) / (nl_d * nu_d);
}

nlohmann::ordered_json ScoreModel::to_json() const {
  nlohmann::ordered_json doc;
  doc["format"] = "puprior-score-model/1";
  doc["seed"] = seed_;
  doc["dim"] = dim_;
  doc["train_points"] = train_points_;
  doc["config"] = {{"members", config_.members},
                   {"hidden", config_.hidden},
                   {"epochs", config_.epochs},
                   {"batch_size", config_.batch_size},
                   {"learn_rate", config_.learn_rate},
                   {"lr_decay", config_.lr_decay},
                   {"bootstrap_fraction", config_.bootstrap_fraction},
                   {"max_retries", config_.max_retries}};
  nlohmann::ordered_json members = nlohmann::ordered_json::array();
  for (std::size_t m = 0; m < members_.size(); ++m) {
    const Mlp& net = members_[m];
    nlohmann::ordered_json entry;
    entry["w1"] = net.w1;
    entry["b1"] = net.b1;
    entry["w2"] = net.w2;
    entry["b2"] = net.b2;
    std::string mask(inbag_[m].size(), '0');
    for (std::size_t i = 0; i < inbag_[m].size(); ++i) {
      if (inbag_[m][i]) mask[i] = '1';
    }
    entry["inbag"] = std::move(mask);
    members.push_back(std::move(entry));
  }
  doc["members"] = std::move(members);
  return doc;
}

ScoreModel ScoreModel::from_json(const nlohmann::json& doc) {
  if (!doc.contains("format") ||
      doc.at("format").get<std::string>() != "puprior-score-model/1") {
    throw InvalidInputError("unrecognized model document");
  }
  ScoreModel model;
  model.seed_ = doc.at("seed").get<std::uint64_t>();
  model.dim_ = doc.at("dim").get<int>();
  model.train_points_ = doc.at("train_points").get<std::int64_t>();
  const auto& cfg = doc.at("config");
  model.config_.members = cfg.at("members").get<int>();
  model.config_.hidden = cfg.at("hidden").get<int>();
  model.config_.epochs = cfg.at("epochs").get<int>();
  model.config_.batch_size = cfg.at("batch_size").get<int>();
  model.config_.learn_rate = cfg.at("learn_rate").get<double>();
  model.config_.lr_decay = cfg.at("lr_decay").get<double>();
  model.config_.bootstrap_fraction = cfg.at("bootstrap_fraction").get<double>();
  model.config_.max_retries = cfg.at("max_retries").get<int>();

  for (const auto& entry : doc.at("members")) {
    Mlp net;
    net.dim = model.dim_;
    net.hidden = model.config_.hidden;
    net.w1 = entry.at("w1").get<std::vector<double>>();
    net.b1 = entry.at("b1").get<std::vector<double>>();
    net.w2 = entry.at("w2").get<std::vector<double>>();
    net.b2 = entry.at("b2").get<double>();
    if (net.w1.size() != static_cast<std::size_t>(net.dim) * net.hidden ||
        net.b1.size() != static_cast<std::size_t>(net.hidden) ||
        net.w2.size() != static_cast<std::size_t>(net.hidden)) {
      throw InvalidInputError("member weight shapes are inconsistent");
    }
    const auto mask = entry.at("inbag").get<std::string>();
    if (mask.size() != static_cast<std::size_t>(model.train_points_)) {
      throw InvalidInputError("inbag mask length mismatch");
    }
    std::vector<std::uint8_t> bits(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) bits[i] = mask[i] == '1';
    model.members_.push_back(std::move(net));
    model.inbag_.push_back(std::move(bits));
  }
  if (model.members_.empty()) throw InvalidInputError("model has no members");
  return model;
}

}  // namespace puprior
