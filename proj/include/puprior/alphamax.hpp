#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "puprior/prior_estimate.hpp"
#include "puprior/transform.hpp"

namespace puprior {

// Uniform-width histogram over a shared 1-D grid.
struct HistogramDensity {
  std::vector<double> edges;            // k+1 boundaries, uniform spacing
  std::vector<double> masses;           // k bin probabilities, sum 1
  std::vector<std::int64_t> counts;     // k raw counts
  double bin_width = 0.0;
  std::int64_t n_samples = 0;
};

// Constrained maximum log-likelihood per grid value of the candidate
// proportion r, with the maximizing component weights.
struct LikelihoodCurve {
  std::vector<double> r_grid;
  std::vector<double> ll;
  Eigen::MatrixXd omega_per_r;           // grid rows x retained bins
  std::vector<std::uint8_t> converged;   // per grid point
  std::vector<std::int64_t> bin_ids;     // retained bin -> original bin
  double n_mixture = 0.0;                // sample sizes behind the curve
  double n_component = 0.0;
  double elbow_r = 0.0;
  bool elbow_degenerate = false;
};

// The per-proportion subproblem is solved exactly: in bin-mass variables
// the constrained likelihood is separable and concave, so the optimum comes
// from a bisection on the single Lagrange multiplier. max_iter caps that
// bisection; tol is the relative bracket width at which it stops. Grid
// points are independent of each other.
struct AlphaMaxConfig {
  int r_points = 50;
  double r_min = 0.01;
  double r_max = 0.99;
  int max_iter = 200;
  double tol = 1e-13;

  std::vector<double> make_grid() const;
};

// Shared grid for a mixture sample M and a component sample C. The bin width
// follows the normal-reference rule 3.5*sd(C)*|C|^(-1/3); bins anchor at
// min(C) and extend to cover M.
std::pair<HistogramDensity, HistogramDensity> build_histograms(
    const Eigen::VectorXd& mixture_sample, const Eigen::VectorXd& component_sample);

// Maximizes, for every r in the grid, the joint log-likelihood of both
// samples under the reweighted-component model subject to
// sum(omega_i * v_i) = r and omega in [0,1]^k. Bins without data are
// dropped; bins holding only component points are widened into the nearest
// mixture-occupied bin, so every density component carries real mixture
// mass and component mass outside the mixture's support keeps its
// (near-zero) ratio evidence.
LikelihoodCurve ll_curve(const HistogramDensity& mixture_hist,
                         const HistogramDensity& component_hist,
                         const std::vector<double>& r_grid,
                         const AlphaMaxConfig& config = {});

struct ElbowResult {
  double r = 1.0;
  bool degenerate = false;  // no usable corner (flat, rising, or line-like)
};

// Two-segment least-squares knee detection: fits a free-knot pair of lines
// over the (r, ll) points, takes the knot with the smallest total squared
// error (ties resolved toward larger r). Curves without a detectable corner
// return 1.0 (flat or rising) or the smallest grid r (strictly falling).
ElbowResult elbow(const LikelihoodCurve& curve);

// Maximum proportion of the component sample's distribution inside the
// mixture sample's distribution. The returned curve pointer (when non-null
// output is requested) carries the diagnostics.
double alphamax(const Eigen::VectorXd& mixture_sample,
                const Eigen::VectorXd& component_sample,
                const AlphaMaxConfig& config = {},
                std::shared_ptr<const LikelihoodCurve>* curve_out = nullptr);

// Multivariate variant on a product-bin histogram, d <= 3; per-dimension
// widths 3.5*sd_k(C)*|C|^(-1/(2+d)).
double alphamax(const Eigen::MatrixXd& mixture_sample,
                const Eigen::MatrixXd& component_sample,
                const AlphaMaxConfig& config = {},
                std::shared_ptr<const LikelihoodCurve>* curve_out = nullptr);

// Two-directional estimate: alpha_plus from (U as mixture, L as component),
// beta_plus from the reverse, then the correction map. Inputs are any
// univariate representations of the two samples (raw values or scores).
PriorEstimate alphamax_n(const Eigen::VectorXd& unlabeled_values,
                         const Eigen::VectorXd& labeled_values,
                         const AlphaMaxConfig& config = {},
                         std::vector<std::string>* warnings = nullptr);

PriorEstimate alphamax_n(const TransformedPU& transformed,
                         const AlphaMaxConfig& config = {},
                         std::vector<std::string>* warnings = nullptr);

// Multivariate two-directional estimate, d <= 3.
PriorEstimate alphamax_n(const Eigen::MatrixXd& unlabeled_points,
                         const Eigen::MatrixXd& labeled_points,
                         const AlphaMaxConfig& config = {},
                         std::vector<std::string>* warnings = nullptr);

// Single-direction estimate treating the labeled sample as clean:
// alpha_star = alphamax(U, L), beta fixed at 1.
PriorEstimate alphamax_clean(const Eigen::VectorXd& unlabeled_values,
                             const Eigen::VectorXd& labeled_values,
                             const AlphaMaxConfig& config = {});

PriorEstimate alphamax_clean(const Eigen::MatrixXd& unlabeled_points,
                             const Eigen::MatrixXd& labeled_points,
                             const AlphaMaxConfig& config = {});

namespace detail {

// Count-form optimization problem over mixture-occupied (possibly widened)
// bins. const_term collects the omega- and r-independent width terms of the
// log-likelihood.
struct CountProblem {
  std::vector<double> v;          // mixture weights m_count/n_m (sum to 1)
  std::vector<double> q;          // component bin masses on the same bins
  std::vector<double> m_count;    // mixture counts
  std::vector<double> c_count;    // component counts
  std::vector<double> log_width;  // log bin volume, after widening
  double n_m = 0.0;
  double n_c = 0.0;
  double const_term = 0.0;        // sum (m_i + c_i) * log_width_i
};

// Builds the problem from two histograms on a shared grid. Empty bins are
// dropped; component-only bins merge into the nearest mixture-occupied bin.
// bin_to_problem (when given) receives, per original bin, the index of the
// problem bin it contributes to, or -1 for dropped bins.
CountProblem make_problem(const HistogramDensity& mixture_hist,
                          const HistogramDensity& component_hist,
                          std::vector<std::int64_t>* bin_to_problem);

double objective(const CountProblem& problem, const std::vector<double>& omega,
                 double r);

// Euclidean projection onto {omega in [0,1]^k : sum(omega_i v_i) = r}.
void project(std::vector<double>& omega, const std::vector<double>& v,
             double r);

LikelihoodCurve solve_curve(const CountProblem& problem,
                            const std::vector<double>& r_grid,
                            const AlphaMaxConfig& config,
                            std::vector<std::int64_t> kept_bins);

}  // namespace detail

}  // namespace puprior
