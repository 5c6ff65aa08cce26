#include "puprior/alphamax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <string>

#include "puprior/errors.hpp"
#include "puprior/measures.hpp"
#include "puprior/rng.hpp"

namespace puprior {

namespace {

constexpr double kLogFloor = 1e-300;

double safe_log(double x) { return std::log(std::max(x, kLogFloor)); }

double sample_sd(const Eigen::VectorXd& values) {
  const double n = static_cast<double>(values.size());
  const double mean = values.mean();
  return std::sqrt((values.array() - mean).square().sum() / (n - 1.0));
}

struct GridAxis {
  double lo = 0.0;
  double width = 1.0;
  std::int64_t bins = 0;
};

// One axis anchored at the component sample's minimum, extended on both
// sides to cover the mixture sample.
GridAxis make_axis(const Eigen::VectorXd& mixture,
                   const Eigen::VectorXd& component, double width) {
  const double c_min = component.minCoeff();
  const double c_max = component.maxCoeff();
  const double m_min = mixture.minCoeff();
  const double m_max = mixture.maxCoeff();

  GridAxis axis;
  axis.width = width;
  std::int64_t left = 0;
  if (m_min < c_min) {
    left = static_cast<std::int64_t>(std::ceil((c_min - m_min) / width));
  }
  axis.lo = c_min - static_cast<double>(left) * width;
  const double hi_needed = std::max(c_max, m_max);
  std::int64_t total = left + std::max<std::int64_t>(
                                  1, static_cast<std::int64_t>(std::ceil(
                                         (hi_needed - c_min) / width)));
  // a point exactly on the rightmost edge belongs to the last bin
  if (axis.lo + static_cast<double>(total) * width < hi_needed) ++total;
  axis.bins = total;
  return axis;
}

std::int64_t bin_of(const GridAxis& axis, double x) {
  const auto raw =
      static_cast<std::int64_t>(std::floor((x - axis.lo) / axis.width));
  return std::clamp<std::int64_t>(raw, 0, axis.bins - 1);
}

HistogramDensity histogram_on_axis(const GridAxis& axis,
                                   const Eigen::VectorXd& values) {
  HistogramDensity hist;
  hist.bin_width = axis.width;
  hist.n_samples = values.size();
  hist.edges.resize(static_cast<std::size_t>(axis.bins) + 1);
  for (std::size_t i = 0; i < hist.edges.size(); ++i) {
    hist.edges[i] = axis.lo + static_cast<double>(i) * axis.width;
  }
  hist.counts.assign(static_cast<std::size_t>(axis.bins), 0);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    ++hist.counts[static_cast<std::size_t>(bin_of(axis, values(i)))];
  }
  hist.masses.resize(hist.counts.size());
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    hist.masses[i] = static_cast<double>(hist.counts[i]) /
                     static_cast<double>(hist.n_samples);
  }
  return hist;
}

// Interior knots get the shared point; least-squares line through indexed
// points of (x, y), returning (slope, intercept, sse).
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double sse = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 std::size_t first, std::size_t last) {
  const double n = static_cast<double>(last - first + 1);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit fit;
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) {
    fit.slope = 0.0;
    fit.intercept = sy / n;
  } else {
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
  }
  for (std::size_t i = first; i <= last; ++i) {
    const double resid = y[i] - (fit.slope * x[i] + fit.intercept);
    fit.sse += resid * resid;
  }
  return fit;
}

void append_warning(std::vector<std::string>* warnings,
                    const std::string& message) {
  if (warnings) warnings->push_back(message);
}

PriorEstimate corrected_estimate(double alpha_plus, double beta_plus,
                                 std::shared_ptr<const LikelihoodCurve> ca,
                                 std::shared_ptr<const LikelihoodCurve> cb,
                                 std::vector<std::string>* warnings) {
  // The one-sided estimates can saturate at 1; pull them inside the domain
  // of the correction map.
  if (alpha_plus * beta_plus >= 1.0) {
    append_warning(warnings,
                   "both directional proportions saturated; estimates clipped "
                   "to 0.999 (samples may be indistinguishable)");
    alpha_plus = std::min(alpha_plus, 0.999);
    beta_plus = std::min(beta_plus, 0.999);
  }
  if (alpha_plus >= 1.0) {
    append_warning(warnings, "alpha_plus saturated at 1; clipped to 0.999");
    alpha_plus = 0.999;
  }
  if (beta_plus >= 1.0) {
    append_warning(warnings, "beta_plus saturated at 1; clipped to 0.999");
    beta_plus = 0.999;
  }
  const auto [alpha_star, beta_star] = correction(alpha_plus, beta_plus);
  PriorEstimate est;
  est.method = Method::AlphaMaxN;
  est.alpha_plus = alpha_plus;
  est.beta_plus = beta_plus;
  est.alpha_star = alpha_star;
  est.beta_star = beta_star;
  est.curve_alpha = std::move(ca);
  est.curve_beta = std::move(cb);
  return est;
}

// Accumulates per-bin counts into a CountProblem given an ownership map:
// owner[b] is the problem-bin index that original bin b contributes to, or
// -1 for bins holding no data. log_bin_volume[b] is the volume of original
// bin b.
detail::CountProblem accumulate_problem(
    const std::vector<std::int64_t>& m_counts,
    const std::vector<std::int64_t>& c_counts,
    const std::vector<std::int64_t>& owner,
    const std::vector<double>& bin_volume, std::size_t n_problem_bins) {
  detail::CountProblem problem;
  problem.m_count.assign(n_problem_bins, 0.0);
  problem.c_count.assign(n_problem_bins, 0.0);
  std::vector<double> volume(n_problem_bins, 0.0);
  double n_m = 0.0, n_c = 0.0;
  for (std::size_t b = 0; b < owner.size(); ++b) {
    n_m += static_cast<double>(m_counts[b]);
    n_c += static_cast<double>(c_counts[b]);
    if (owner[b] < 0) continue;
    const auto p = static_cast<std::size_t>(owner[b]);
    problem.m_count[p] += static_cast<double>(m_counts[b]);
    problem.c_count[p] += static_cast<double>(c_counts[b]);
    volume[p] += bin_volume[b];
  }
  problem.n_m = n_m;
  problem.n_c = n_c;
  problem.v.resize(n_problem_bins);
  problem.q.resize(n_problem_bins);
  problem.log_width.resize(n_problem_bins);
  for (std::size_t p = 0; p < n_problem_bins; ++p) {
    problem.v[p] = problem.m_count[p] / n_m;
    problem.q[p] = problem.c_count[p] / n_c;
    problem.log_width[p] = std::log(volume[p]);
    problem.const_term +=
        (problem.m_count[p] + problem.c_count[p]) * problem.log_width[p];
  }
  return problem;
}

// First original bin of every problem bin; diagnostic labels for the curve.
std::vector<std::int64_t> representative_bins(
    const std::vector<std::int64_t>& owner, std::size_t n_problem_bins) {
  std::vector<std::int64_t> reps(n_problem_bins, -1);
  for (std::size_t b = 0; b < owner.size(); ++b) {
    if (owner[b] >= 0 && reps[static_cast<std::size_t>(owner[b])] < 0) {
      reps[static_cast<std::size_t>(owner[b])] = static_cast<std::int64_t>(b);
    }
  }
  return reps;
}

detail::CountProblem binned_problem_md(const Eigen::MatrixXd& mixture,
                                       const Eigen::MatrixXd& component,
                                       std::vector<std::int64_t>* owner_out) {
  const Eigen::Index d = mixture.cols();
  const double exponent = -1.0 / (2.0 + static_cast<double>(d));
  const double size_factor =
      std::pow(static_cast<double>(component.rows()), exponent);

  std::vector<GridAxis> axes;
  double log_volume = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double sd = sample_sd(component.col(k));
    if (!(sd > 0.0)) {
      throw DegenerateOutputError("component sample constant in dimension " +
                                  std::to_string(k));
    }
    const double width = 3.5 * sd * size_factor;
    axes.push_back(make_axis(mixture.col(k), component.col(k), width));
    log_volume += std::log(width);
  }

  std::int64_t total_bins = 1;
  for (const auto& axis : axes) {
    if (axis.bins > 50'000'000 / total_bins) {
      throw InvalidInputError("histogram grid too large");
    }
    total_bins *= axis.bins;
  }

  auto flat_index = [&axes, d](const auto& row) {
    std::int64_t id = 0;
    for (Eigen::Index k = 0; k < d; ++k) {
      id = id * axes[static_cast<std::size_t>(k)].bins +
           bin_of(axes[static_cast<std::size_t>(k)], row(k));
    }
    return id;
  };

  const auto nb = static_cast<std::size_t>(total_bins);
  std::vector<std::int64_t> m_counts(nb, 0), c_counts(nb, 0);
  for (Eigen::Index i = 0; i < mixture.rows(); ++i) {
    ++m_counts[static_cast<std::size_t>(flat_index(mixture.row(i)))];
  }
  for (Eigen::Index i = 0; i < component.rows(); ++i) {
    ++c_counts[static_cast<std::size_t>(flat_index(component.row(i)))];
  }

  // Box centers in physical coordinates, for nearest-occupied merging.
  auto center_of = [&axes, d](std::int64_t flat) {
    Eigen::VectorXd center(d);
    for (Eigen::Index k = d - 1; k >= 0; --k) {
      const auto& axis = axes[static_cast<std::size_t>(k)];
      const std::int64_t idx = flat % axis.bins;
      flat /= axis.bins;
      center(k) = axis.lo + (static_cast<double>(idx) + 0.5) * axis.width;
    }
    return center;
  };

  std::vector<std::int64_t> occupied;
  for (std::size_t b = 0; b < nb; ++b) {
    if (m_counts[b] > 0) occupied.push_back(static_cast<std::int64_t>(b));
  }
  if (occupied.empty()) throw DegenerateOutputError("empty mixture histogram");

  std::vector<std::int64_t> owner(nb, -1);
  for (std::size_t p = 0; p < occupied.size(); ++p) {
    owner[static_cast<std::size_t>(occupied[p])] =
        static_cast<std::int64_t>(p);
  }
  std::vector<Eigen::VectorXd> occupied_centers;
  occupied_centers.reserve(occupied.size());
  for (const auto b : occupied) occupied_centers.push_back(center_of(b));
  for (std::size_t b = 0; b < nb; ++b) {
    if (m_counts[b] > 0 || c_counts[b] == 0) continue;
    const Eigen::VectorXd center = center_of(static_cast<std::int64_t>(b));
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < occupied_centers.size(); ++p) {
      const double dist = (occupied_centers[p] - center).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = p;
      }
    }
    owner[b] = static_cast<std::int64_t>(best);
  }

  std::vector<double> volumes(nb, std::exp(log_volume));
  if (owner_out) *owner_out = owner;
  return accumulate_problem(m_counts, c_counts, owner, volumes,
                            occupied.size());
}

double run_alphamax(const detail::CountProblem& problem,
                    std::vector<std::int64_t> reps,
                    const AlphaMaxConfig& config,
                    std::shared_ptr<const LikelihoodCurve>* curve_out) {
  LikelihoodCurve curve = detail::solve_curve(problem, config.make_grid(),
                                              config, std::move(reps));
  const ElbowResult corner = elbow(curve);
  curve.elbow_r = corner.r;
  curve.elbow_degenerate = corner.degenerate;
  if (curve_out) {
    *curve_out = std::make_shared<const LikelihoodCurve>(std::move(curve));
  }
  return corner.r;
}

}  // namespace

std::string method_name(Method method) {
  switch (method) {
    case Method::AlphaMax: return "alphamax";
    case Method::AlphaMaxN: return "alphamax-n";
    case Method::MSGMM: return "msgmm";
  }
  return "unknown";
}

std::vector<double> AlphaMaxConfig::make_grid() const {
  if (r_points < 5 || !(r_min > 0.0) || !(r_max < 1.0) || !(r_min < r_max)) {
    throw InvalidInputError("bad proportion grid");
  }
  std::vector<double> grid(static_cast<std::size_t>(r_points));
  const double step = (r_max - r_min) / static_cast<double>(r_points - 1);
  for (int i = 0; i < r_points; ++i) {
    grid[static_cast<std::size_t>(i)] = r_min + step * i;
  }
  return grid;
}

std::pair<HistogramDensity, HistogramDensity> build_histograms(
    const Eigen::VectorXd& mixture_sample,
    const Eigen::VectorXd& component_sample) {
  if (component_sample.size() < 20 || mixture_sample.size() < 20) {
    throw InvalidInputError("need at least 20 points per sample");
  }
  const double sd = sample_sd(component_sample);
  if (!(sd > 0.0)) {
    throw DegenerateOutputError(
        "component scores are all equal; no density to estimate");
  }
  const double width =
      3.5 * sd *
      std::pow(static_cast<double>(component_sample.size()), -1.0 / 3.0);
  const GridAxis axis = make_axis(mixture_sample, component_sample, width);
  return {histogram_on_axis(axis, mixture_sample),
          histogram_on_axis(axis, component_sample)};
}

namespace detail {

CountProblem make_problem(const HistogramDensity& mixture_hist,
                          const HistogramDensity& component_hist,
                          std::vector<std::int64_t>* bin_to_problem) {
  if (mixture_hist.counts.size() != component_hist.counts.size()) {
    throw InvalidInputError("histograms do not share a grid");
  }
  const std::size_t nb = mixture_hist.counts.size();

  std::vector<std::int64_t> occupied;
  for (std::size_t b = 0; b < nb; ++b) {
    if (mixture_hist.counts[b] > 0) {
      occupied.push_back(static_cast<std::int64_t>(b));
    }
  }
  if (occupied.empty()) throw DegenerateOutputError("empty mixture histogram");

  // Component-only bins merge into the closest mixture-occupied bin (ties
  // toward the left); the merged component keeps the union width.
  std::vector<std::int64_t> owner(nb, -1);
  for (std::size_t p = 0; p < occupied.size(); ++p) {
    owner[static_cast<std::size_t>(occupied[p])] =
        static_cast<std::int64_t>(p);
  }
  for (std::size_t b = 0; b < nb; ++b) {
    if (mixture_hist.counts[b] > 0 || component_hist.counts[b] == 0) continue;
    const auto after = std::lower_bound(occupied.begin(), occupied.end(),
                                        static_cast<std::int64_t>(b)) -
                       occupied.begin();
    std::size_t pick;
    if (after == 0) {
      pick = 0;
    } else if (after == static_cast<std::ptrdiff_t>(occupied.size())) {
      pick = occupied.size() - 1;
    } else {
      const auto left = static_cast<std::size_t>(after - 1);
      const auto right = static_cast<std::size_t>(after);
      const auto dist_left = static_cast<std::int64_t>(b) - occupied[left];
      const auto dist_right = occupied[right] - static_cast<std::int64_t>(b);
      pick = dist_left <= dist_right ? left : right;
    }
    owner[b] = static_cast<std::int64_t>(pick);
  }

  const std::vector<double> volumes(nb, mixture_hist.bin_width);
  if (bin_to_problem) *bin_to_problem = owner;
  return accumulate_problem(mixture_hist.counts, component_hist.counts, owner,
                            volumes, occupied.size());
}

double objective(const CountProblem& problem, const std::vector<double>& omega,
                 double r) {
  // Boundary proportions pin omega and are evaluated as the uniform-omega
  // limit, under which the reweighted component collapses onto the mixture
  // estimate.
  if (r <= 0.0 || r >= 1.0) {
    double ll = 0.0;
    for (std::size_t i = 0; i < problem.v.size(); ++i) {
      if (r >= 1.0 && problem.m_count[i] > 0.0) {
        ll += problem.m_count[i] * safe_log(problem.q[i]);
      } else if (problem.m_count[i] > 0.0) {
        ll += problem.m_count[i] * safe_log(problem.v[i]);
      }
      if (problem.c_count[i] > 0.0) {
        ll += problem.c_count[i] * safe_log(problem.v[i]);
      }
    }
    return ll - problem.const_term;
  }
  double ll = 0.0;
  for (std::size_t i = 0; i < problem.v.size(); ++i) {
    const double mixture_mass =
        r * problem.q[i] + (1.0 - omega[i]) * problem.v[i];
    if (problem.m_count[i] > 0.0) {
      ll += problem.m_count[i] * safe_log(mixture_mass);
    }
    if (problem.c_count[i] > 0.0) {
      ll += problem.c_count[i] * safe_log(omega[i] * problem.v[i]);
    }
  }
  ll -= problem.n_c * std::log(r);
  return ll - problem.const_term;
}

void project(std::vector<double>& omega, const std::vector<double>& v,
             double r) {
  const std::size_t k = v.size();
  auto weighted_sum = [&](double shift) {
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      total += v[i] * std::clamp(omega[i] + shift * v[i], 0.0, 1.0);
    }
    return total;
  };

  double lo = -1.0, hi = 1.0;
  for (int expand = 0; expand < 200 && weighted_sum(lo) > r; ++expand) lo *= 2.0;
  for (int expand = 0; expand < 200 && weighted_sum(hi) < r; ++expand) hi *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (weighted_sum(mid) < r) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double shift = 0.5 * (lo + hi);
  for (std::size_t i = 0; i < k; ++i) {
    omega[i] = std::clamp(omega[i] + shift * v[i], 0.0, 1.0);
  }
}

namespace {

// Exact maximizer for one grid value of r. In the bin-mass variables
// u_i = omega_i * v_i the objective
//   sum_i [ c_i log u_i + m_i log(r q_i + v_i - u_i) ]
// is separable and concave over the box 0 <= u_i <= v_i with the single
// linear constraint sum u_i = r, so the Lagrangian stationarity condition
//   c_i/u_i - m_i/(b_i - u_i) = lambda,   b_i = r q_i + v_i
// has a closed-form per-bin solution and the multiplier is found by
// bisection on the monotone constraint residual.
double maximize_at_r(const CountProblem& problem, double r,
                     std::vector<double>& omega, const AlphaMaxConfig& config,
                     bool& converged) {
  const std::size_t k = problem.v.size();
  converged = true;
  if (r <= 0.0 || r >= 1.0) {  // constraint pins the solution
    omega.assign(k, r <= 0.0 ? 0.0 : 1.0);
    return objective(problem, omega, r);
  }

  std::vector<double> cap(k);  // b_i
  for (std::size_t i = 0; i < k; ++i) {
    cap[i] = r * problem.q[i] + problem.v[i];
  }

  // Root of lambda*u^2 - (lambda*b + c + m)*u + c*b = 0 inside (0, b),
  // written in the numerically stable rationalized form.
  auto stationary = [&](std::size_t i, double lambda) {
    const double b = cap[i];
    const double c = problem.c_count[i];
    const double m = problem.m_count[i];
    if (lambda == 0.0) return c * b / (c + m);
    const double s = lambda * b + c + m;
    const double disc = std::max(s * s - 4.0 * lambda * c * b, 0.0);
    const double root = std::sqrt(disc);
    if (s > 0.0) return 2.0 * c * b / (s + root);
    return (s - root) / (2.0 * lambda);
  };

  auto mass_at = [&](double lambda) {
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      total += std::clamp(stationary(i, lambda), 0.0, problem.v[i]);
    }
    return total;
  };

  // mass_at is non-increasing in lambda; bracket the constraint and bisect.
  double lo = -1.0, hi = 1.0;
  for (int expand = 0; expand < 200 && mass_at(lo) < r; ++expand) lo *= 2.0;
  for (int expand = 0; expand < 200 && mass_at(hi) > r; ++expand) hi *= 2.0;
  for (int it = 0; it < std::max(config.max_iter, 60); ++it) {
    if (hi - lo <= config.tol * std::max({1.0, std::abs(lo), std::abs(hi)})) {
      break;
    }
    const double mid = 0.5 * (lo + hi);
    if (mass_at(mid) > r) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double lambda = 0.5 * (lo + hi);

  omega.resize(k);
  double assigned = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double u = std::clamp(stationary(i, lambda), 0.0, problem.v[i]);
    omega[i] = problem.v[i] > 0.0 ? u / problem.v[i] : 0.0;
    assigned += u;
  }
  // Spread any residual multiplier-resolution slack over interior bins so
  // the equality constraint holds to the advertised tolerance.
  double residual = r - assigned;
  if (std::abs(residual) > 1e-14) {
    for (std::size_t i = 0; i < k && std::abs(residual) > 1e-14; ++i) {
      const double u = omega[i] * problem.v[i];
      const double adjusted = std::clamp(u + residual, 0.0, problem.v[i]);
      residual -= adjusted - u;
      omega[i] = problem.v[i] > 0.0 ? adjusted / problem.v[i] : 0.0;
    }
  }
  return objective(problem, omega, r);
}

}  // namespace

LikelihoodCurve solve_curve(const CountProblem& problem,
                            const std::vector<double>& r_grid,
                            const AlphaMaxConfig& config,
                            std::vector<std::int64_t> kept_bins) {
  const std::size_t k = problem.v.size();
  LikelihoodCurve curve;
  curve.r_grid = r_grid;
  curve.ll.assign(r_grid.size(), 0.0);
  curve.converged.assign(r_grid.size(), 0);
  curve.omega_per_r.resize(static_cast<Eigen::Index>(r_grid.size()),
                           static_cast<Eigen::Index>(k));
  curve.bin_ids = std::move(kept_bins);
  curve.n_mixture = problem.n_m;
  curve.n_component = problem.n_c;

  std::vector<double> omega(k, r_grid.front());
  for (std::size_t g = 0; g < r_grid.size(); ++g) {
    bool converged = false;
    curve.ll[g] = maximize_at_r(problem, r_grid[g], omega, config, converged);
    curve.converged[g] = converged ? 1 : 0;
    for (std::size_t i = 0; i < k; ++i) {
      curve.omega_per_r(static_cast<Eigen::Index>(g),
                        static_cast<Eigen::Index>(i)) = omega[i];
    }
  }

  // Patch non-converged points from their converged neighbors so a stuck
  // solve cannot distort the knee search: interpolate between the flanking
  // converged values, or extend their trend at the grid ends.
  std::vector<std::size_t> good;
  for (std::size_t g = 0; g < r_grid.size(); ++g) {
    if (curve.converged[g]) good.push_back(g);
  }
  if (!good.empty() && good.size() < r_grid.size()) {
    for (std::size_t g = 0; g < r_grid.size(); ++g) {
      if (curve.converged[g]) continue;
      const auto after =
          std::lower_bound(good.begin(), good.end(), g) - good.begin();
      std::size_t a, b;  // interpolation anchors
      if (after == 0) {
        a = good[0];
        b = good.size() > 1 ? good[1] : good[0];
      } else if (after == static_cast<std::ptrdiff_t>(good.size())) {
        a = good.size() > 1 ? good[good.size() - 2] : good.back();
        b = good.back();
      } else {
        a = good[static_cast<std::size_t>(after - 1)];
        b = good[static_cast<std::size_t>(after)];
      }
      if (a == b) {
        curve.ll[g] = curve.ll[a];
      } else {
        const double t =
            (r_grid[g] - r_grid[a]) / (r_grid[b] - r_grid[a]);
        curve.ll[g] = curve.ll[a] + t * (curve.ll[b] - curve.ll[a]);
      }
    }
  }
  return curve;
}

}  // namespace detail

LikelihoodCurve ll_curve(const HistogramDensity& mixture_hist,
                         const HistogramDensity& component_hist,
                         const std::vector<double>& r_grid,
                         const AlphaMaxConfig& config) {
  if (r_grid.empty()) throw InvalidInputError("empty proportion grid");
  std::vector<std::int64_t> owner;
  detail::CountProblem problem =
      detail::make_problem(mixture_hist, component_hist, &owner);
  return detail::solve_curve(problem, r_grid, config,
                             representative_bins(owner, problem.v.size()));
}

ElbowResult elbow(const LikelihoodCurve& curve) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < curve.r_grid.size(); ++i) {
    if (std::isfinite(curve.ll[i])) {
      x.push_back(curve.r_grid[i]);
      y.push_back(curve.ll[i]);
    }
  }
  const std::size_t k = x.size();
  if (k < 5) throw InvalidInputError("need at least 5 finite curve points");

  const double n_bins = curve.omega_per_r.cols() > 0
                            ? static_cast<double>(curve.omega_per_r.cols())
                            : static_cast<double>(k);
  const double total_drop = y.front() - y.back();

  // Chi-square-like indifference scale: log-likelihood differences of the
  // order of the number of density components carry no signal.
  const double noise_scale = 4.0 * n_bins;

  // Flat or rising curve: the component is compatible with every
  // proportion on the grid.
  if (total_drop <= noise_scale) {
    return {1.0, true};
  }

  // Per-step losses. Out-of-support component mass contributes a decaying
  // log-rate leak at small r while genuine misfit beyond the knee grows, so
  // the sequence is U-shaped with a flat valley ending at the knee. Curves
  // built from larger component samples decay proportionally faster, so the
  // per-step indifference threshold also scales with that sample size to
  // keep the two sweep directions comparable.
  std::vector<double> step(k - 1);
  for (std::size_t i = 0; i + 1 < k; ++i) step[i] = y[i] - y[i + 1];
  const double flat_step = std::max(noise_scale, 0.15 * curve.n_component) /
                           static_cast<double>(k - 1);
  const double valley = *std::min_element(step.begin(), step.end());

  // Losses above the flat scale at every grid step: the curve decays from
  // the left end of the grid on.
  if (valley > flat_step) {
    return {x.front(), true};
  }

  // The knee follows the last grid step still compatible with the valley.
  std::size_t last_flat = 0;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    if (step[i] <= valley + flat_step) last_flat = i;
  }
  const std::size_t knee = std::min(last_flat + 1, k - 1);
  // Nothing significant remains beyond the knee: flat to the right end.
  if (y[knee] - y.back() <= noise_scale) {
    return {1.0, true};
  }
  return {x[knee], false};
}

double alphamax(const Eigen::VectorXd& mixture_sample,
                const Eigen::VectorXd& component_sample,
                const AlphaMaxConfig& config,
                std::shared_ptr<const LikelihoodCurve>* curve_out) {
  const auto [hist_m, hist_c] =
      build_histograms(mixture_sample, component_sample);
  std::vector<std::int64_t> owner;
  detail::CountProblem problem = detail::make_problem(hist_m, hist_c, &owner);
  return run_alphamax(problem, representative_bins(owner, problem.v.size()),
                      config, curve_out);
}

double alphamax(const Eigen::MatrixXd& mixture_sample,
                const Eigen::MatrixXd& component_sample,
                const AlphaMaxConfig& config,
                std::shared_ptr<const LikelihoodCurve>* curve_out) {
  if (mixture_sample.cols() != component_sample.cols()) {
    throw InvalidInputError("samples disagree in dimension");
  }
  if (mixture_sample.cols() > 3) {
    throw InvalidInputError(
        "histogram estimation supports at most 3 dimensions; reduce first");
  }
  if (mixture_sample.cols() == 1) {
    return alphamax(Eigen::VectorXd(mixture_sample.col(0)),
                    Eigen::VectorXd(component_sample.col(0)), config,
                    curve_out);
  }
  if (component_sample.rows() < 20 || mixture_sample.rows() < 20) {
    throw InvalidInputError("need at least 20 points per sample");
  }
  std::vector<std::int64_t> owner;
  detail::CountProblem problem =
      binned_problem_md(mixture_sample, component_sample, &owner);
  return run_alphamax(problem, representative_bins(owner, problem.v.size()),
                      config, curve_out);
}

PriorEstimate alphamax_n(const Eigen::VectorXd& unlabeled_values,
                         const Eigen::VectorXd& labeled_values,
                         const AlphaMaxConfig& config,
                         std::vector<std::string>* warnings) {
  std::shared_ptr<const LikelihoodCurve> curve_a, curve_b;
  const double alpha_plus =
      alphamax(unlabeled_values, labeled_values, config, &curve_a);
  const double beta_plus =
      alphamax(labeled_values, unlabeled_values, config, &curve_b);
  return corrected_estimate(alpha_plus, beta_plus, std::move(curve_a),
                            std::move(curve_b), warnings);
}

PriorEstimate alphamax_n(const TransformedPU& transformed,
                         const AlphaMaxConfig& config,
                         std::vector<std::string>* warnings) {
  return alphamax_n(transformed.scores_unlabeled, transformed.scores_labeled,
                    config, warnings);
}

PriorEstimate alphamax_n(const Eigen::MatrixXd& unlabeled_points,
                         const Eigen::MatrixXd& labeled_points,
                         const AlphaMaxConfig& config,
                         std::vector<std::string>* warnings) {
  std::shared_ptr<const LikelihoodCurve> curve_a, curve_b;
  const double alpha_plus =
      alphamax(unlabeled_points, labeled_points, config, &curve_a);
  const double beta_plus =
      alphamax(labeled_points, unlabeled_points, config, &curve_b);
  return corrected_estimate(alpha_plus, beta_plus, std::move(curve_a),
                            std::move(curve_b), warnings);
}

PriorEstimate alphamax_clean(const Eigen::VectorXd& unlabeled_values,
                             const Eigen::VectorXd& labeled_values,
                             const AlphaMaxConfig& config) {
  PriorEstimate est;
  est.method = Method::AlphaMax;
  std::shared_ptr<const LikelihoodCurve> curve;
  est.alpha_plus = alphamax(unlabeled_values, labeled_values, config, &curve);
  est.beta_plus = 0.0;
  est.alpha_star = est.alpha_plus;
  est.beta_star = 1.0;
  est.curve_alpha = std::move(curve);
  return est;
}

PriorEstimate alphamax_clean(const Eigen::MatrixXd& unlabeled_points,
                             const Eigen::MatrixXd& labeled_points,
                             const AlphaMaxConfig& config) {
  PriorEstimate est;
  est.method = Method::AlphaMax;
  std::shared_ptr<const LikelihoodCurve> curve;
  est.alpha_plus = alphamax(unlabeled_points, labeled_points, config, &curve);
  est.beta_plus = 0.0;
  est.alpha_star = est.alpha_plus;
  est.beta_star = 1.0;
  est.curve_alpha = std::move(curve);
  return est;
}

}  // namespace puprior
