#include "puprior/msgmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "puprior/errors.hpp"
#include "puprior/rng.hpp"

namespace puprior {

namespace {

constexpr double kMinComponentMass = 1e-8;
constexpr double kRidgeScale = 1e-6;

struct CholDensity {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd mu;
  double log_norm = 0.0;
};

CholDensity make_density(const Eigen::VectorXd& mu,
                         const Eigen::MatrixXd& sigma) {
  CholDensity out;
  out.mu = mu;
  out.llt.compute(sigma);
  if (out.llt.info() != Eigen::Success) {
    throw DegenerateComponentError("covariance is not positive definite");
  }
  const double logdet =
      2.0 * out.llt.matrixLLT().diagonal().array().log().sum();
  const double d = static_cast<double>(mu.size());
  out.log_norm = -0.5 * (d * std::log(2.0 * std::numbers::pi) + logdet);
  return out;
}

Eigen::VectorXd logpdf(const CholDensity& density, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd diff = (x.rowwise() - density.mu.transpose()).transpose();
  density.llt.matrixL().solveInPlace(diff);
  return (-0.5 * diff.colwise().squaredNorm().array() + density.log_norm)
      .matrix()
      .transpose();
}

// Responsibilities and log-likelihood of one sample under a two-component
// mixture with weight `w1` on component 1.
void mixture_terms(const Eigen::MatrixXd& x, double w1,
                   const CholDensity& c0, const CholDensity& c1,
                   Eigen::VectorXd& resp, double& ll) {
  const Eigen::Index n = x.rows();
  resp.resize(n);
  if (n == 0) {
    ll = 0.0;
    return;
  }
  const Eigen::VectorXd lp0 = logpdf(c0, x);
  const Eigen::VectorXd lp1 = logpdf(c1, x);
  if (w1 <= 0.0) {
    resp.setZero();
    ll = lp0.sum();
    return;
  }
  if (w1 >= 1.0) {
    resp.setOnes();
    ll = lp1.sum();
    return;
  }
  const Eigen::ArrayXd la = lp1.array() + std::log(w1);
  const Eigen::ArrayXd lb = lp0.array() + std::log1p(-w1);
  const Eigen::ArrayXd top = la.max(lb);
  const Eigen::ArrayXd ea = (la - top).exp();
  const Eigen::ArrayXd eb = (lb - top).exp();
  const Eigen::ArrayXd denom = ea + eb;
  resp = (ea / denom).matrix();
  ll = (top + denom.log()).sum();
}

struct StepEval {
  Responsibilities resp;
  double ll = 0.0;
};

StepEval evaluate(const PUDataset& data, const MsGmmParams& params) {
  const CholDensity c0 = make_density(params.u0, params.sigma0);
  const CholDensity c1 = make_density(params.u1, params.sigma1);
  StepEval out;
  double ll_u = 0.0, ll_l = 0.0;
  mixture_terms(data.unlabeled, params.alpha, c0, c1, out.resp.w_u, ll_u);
  mixture_terms(data.labeled, params.beta, c0, c1, out.resp.w_l, ll_l);
  out.ll = ll_u + ll_l;
  return out;
}

Eigen::MatrixXd weighted_scatter(const Eigen::MatrixXd& x,
                                 const Eigen::VectorXd& weights,
                                 const Eigen::VectorXd& center) {
  if (x.rows() == 0) {
    return Eigen::MatrixXd::Zero(x.cols(), x.cols());
  }
  const Eigen::MatrixXd centered = x.rowwise() - center.transpose();
  return centered.transpose() * (weights.asDiagonal() * centered);
}

Eigen::MatrixXd regularize(Eigen::MatrixXd sigma) {
  const Eigen::Index d = sigma.rows();
  const double trace = sigma.trace();
  if (!(trace > 0.0) || !sigma.allFinite()) {
    throw DegenerateComponentError("collapsed covariance");
  }
  sigma = 0.5 * (sigma + sigma.transpose());
  sigma.diagonal().array() += kRidgeScale * trace / static_cast<double>(d);
  return sigma;
}

// Lexicographic row order; makes initial point picks independent of the
// storage order of the samples.
std::vector<Eigen::Index> lex_order(const Eigen::MatrixXd& x) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&x](Eigen::Index a, Eigen::Index b) {
                     for (Eigen::Index c = 0; c < x.cols(); ++c) {
                       if (x(a, c) != x(b, c)) return x(a, c) < x(b, c);
                     }
                     return false;
                   });
  return order;
}

}  // namespace

Responsibilities e_step(const PUDataset& data, const MsGmmParams& params) {
  return evaluate(data, params).resp;
}

double combined_loglik(const PUDataset& data, const MsGmmParams& params) {
  return evaluate(data, params).ll;
}

MsGmmParams m_step(const PUDataset& data, const Responsibilities& resp,
                   const MsGmmParams& previous) {
  const auto& xu = data.unlabeled;
  const auto& xl = data.labeled;
  const Eigen::Index n_u = xu.rows();
  const Eigen::Index n_l = xl.rows();
  if (resp.w_u.size() != n_u || resp.w_l.size() != n_l) {
    throw InvalidInputError("responsibility lengths do not match the data");
  }

  const double su1 = resp.w_u.sum();
  const double sl1 = resp.w_l.sum();
  const double s1 = su1 + sl1;
  const double s0 =
      (static_cast<double>(n_u) - su1) + (static_cast<double>(n_l) - sl1);
  if (s1 < kMinComponentMass || s0 < kMinComponentMass) {
    throw DegenerateComponentError("component responsibility mass vanished");
  }

  const Eigen::VectorXd wu0 =
      Eigen::VectorXd::Ones(n_u) - resp.w_u;
  const Eigen::VectorXd wl0 =
      Eigen::VectorXd::Ones(n_l) - resp.w_l;

  MsGmmParams next;
  next.alpha = su1 / static_cast<double>(n_u);
  next.beta = n_l > 0 ? sl1 / static_cast<double>(n_l) : previous.beta;
  next.u1 = (xu.transpose() * resp.w_u + xl.transpose() * resp.w_l) / s1;
  next.u0 = (xu.transpose() * wu0 + xl.transpose() * wl0) / s0;
  next.sigma1 = regularize((weighted_scatter(xu, resp.w_u, previous.u1) +
                            weighted_scatter(xl, resp.w_l, previous.u1)) /
                           s1);
  next.sigma0 = regularize((weighted_scatter(xu, wu0, previous.u0) +
                            weighted_scatter(xl, wl0, previous.u0)) /
                           s0);
  return next;
}

MsGmmFit fit_msgmm(const PUDataset& data, const MsGmmConfig& config) {
  const Eigen::Index n_u = data.n_unlabeled();
  const Eigen::Index n_l = data.n_labeled();
  const Eigen::Index d = data.dim();
  if (n_u < 2 || n_l < 2) {
    throw InvalidInputError("need at least two points per sample");
  }
  if (d < 1 || data.labeled.cols() != d) {
    throw InvalidInputError("inconsistent dimensions");
  }
  if (config.restarts < 1 || config.max_iter < 1 || !(config.tol > 0.0)) {
    throw InvalidInputError("bad solver configuration");
  }

  const Eigen::Index n = n_u + n_l;
  Eigen::MatrixXd pooled(n, d);
  pooled.topRows(n_u) = data.unlabeled;
  pooled.bottomRows(n_l) = data.labeled;
  const std::vector<Eigen::Index> order = lex_order(pooled);

  const Eigen::RowVectorXd pooled_mean = pooled.colwise().mean();
  const Eigen::MatrixXd pooled_centered = pooled.rowwise() - pooled_mean;
  Eigen::MatrixXd sigma_init =
      (pooled_centered.transpose() * pooled_centered) /
      static_cast<double>(n - 1);
  const double init_trace = sigma_init.trace();
  if (!(init_trace > 0.0)) {
    throw EstimationFailedError("pooled sample has zero variance");
  }
  sigma_init.diagonal().array() +=
      kRidgeScale * init_trace / static_cast<double>(d);

  MsGmmFit best;
  bool have_best = false;
  std::string last_error = "no restart ran";

  for (int restart = 0; restart < config.restarts; ++restart) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(restart)));
    MsGmmParams params;
    params.alpha = 0.3;
    params.beta = 0.7;
    const Eigen::Index pick0 =
        order[rng.bounded(static_cast<std::uint64_t>(n))];
    params.u0 = pooled.row(pick0).transpose();

    // The second seed point: farthest of a handful of random candidates.
    Eigen::Index pick1 = pick0;
    double best_dist = -1.0;
    const int candidates = static_cast<int>(std::min<Eigen::Index>(32, n));
    for (int c = 0; c < candidates; ++c) {
      const Eigen::Index cand =
          order[rng.bounded(static_cast<std::uint64_t>(n))];
      const double dist =
          (pooled.row(cand) - pooled.row(pick0)).squaredNorm();
      if (dist > best_dist) {
        best_dist = dist;
        pick1 = cand;
      }
    }
    if (best_dist <= 0.0) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if ((pooled.row(order[static_cast<std::size_t>(i)]) -
             pooled.row(pick0))
                .squaredNorm() > 0.0) {
          pick1 = order[static_cast<std::size_t>(i)];
          break;
        }
      }
    }
    params.u1 = pooled.row(pick1).transpose();
    params.sigma0 = sigma_init;
    params.sigma1 = sigma_init;

    try {
      std::vector<double> trace;
      trace.reserve(64);
      double ll_prev = -std::numeric_limits<double>::infinity();
      for (int it = 0; it < config.max_iter; ++it) {
        StepEval eval = evaluate(data, params);
        trace.push_back(eval.ll);
        if (std::abs(eval.ll - ll_prev) <
            config.tol * std::max(1.0, std::abs(eval.ll))) {
          break;
        }
        ll_prev = eval.ll;
        params = m_step(data, eval.resp, params);
      }
      const double final_ll = trace.back();
      best.restart_traces.push_back(trace);
      if (!have_best || final_ll > best.loglik) {
        best.params = params;
        best.loglik = final_ll;
        best.iterations = static_cast<int>(trace.size());
        best.ll_trace = std::move(trace);
        have_best = true;
      }
    } catch (const DegenerateOutputError& err) {
      ++best.failed_restarts;
      last_error = err.what();
    }
  }

  if (!have_best) {
    throw EstimationFailedError(
        "all " + std::to_string(config.restarts) +
        " restarts degenerated; last failure: " + last_error);
  }

  // Keep the labeled sample the component-1-enriched one.
  if (best.params.alpha > best.params.beta) {
    std::swap(best.params.u0, best.params.u1);
    std::swap(best.params.sigma0, best.params.sigma1);
    best.params.alpha = 1.0 - best.params.alpha;
    best.params.beta = 1.0 - best.params.beta;
  }

  PriorEstimate estimate;
  estimate.method = Method::MSGMM;
  estimate.alpha_star = best.params.alpha;
  estimate.beta_star = best.params.beta;
  estimate.alpha_plus =
      best.params.beta > 0.0 ? best.params.alpha / best.params.beta
                             : std::numeric_limits<double>::quiet_NaN();
  estimate.beta_plus =
      best.params.alpha < 1.0
          ? (1.0 - best.params.beta) / (1.0 - best.params.alpha)
          : std::numeric_limits<double>::quiet_NaN();
  best.estimate = estimate;
  return best;
}

}  // namespace puprior
