#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "puprior/alphamax.hpp"
#include "puprior/errors.hpp"
#include "puprior/measures.hpp"
#include "puprior/rng.hpp"

using namespace puprior;

namespace {

Eigen::VectorXd to_vector(const std::vector<double>& values) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = values[i];
  }
  return out;
}

// Mixture of the component's uniform block [0,1) and a disjoint block [5,6).
void disjoint_construction(double proportion, int n_mixture, int n_component,
                           std::uint64_t seed, Eigen::VectorXd& mixture,
                           Eigen::VectorXd& component) {
  Rng rng(seed);
  component.resize(n_component);
  for (Eigen::Index i = 0; i < n_component; ++i) component(i) = rng.uniform();
  mixture.resize(n_mixture);
  for (Eigen::Index i = 0; i < n_mixture; ++i) {
    mixture(i) = rng.uniform() < proportion ? rng.uniform()
                                            : 5.0 + rng.uniform();
  }
}

}  // namespace

TEST_CASE("build_histograms: normal-reference bin width") {
  // component values at +-sqrt(999/1000) around zero: sample sd exactly 1
  const double a = std::sqrt(999.0 / 1000.0);
  std::vector<double> c(1000);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = i % 2 == 0 ? a : -a;
  std::vector<double> m(1000);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = -2.0 + 4.0 * static_cast<double>(i) / 999.0;
  }
  const auto [hist_m, hist_c] = build_histograms(to_vector(m), to_vector(c));
  CHECK(hist_c.bin_width == doctest::Approx(0.35).epsilon(1e-12));
  CHECK(hist_m.bin_width == hist_c.bin_width);
  CHECK(hist_m.edges == hist_c.edges);

  double mass_m = 0.0, mass_c = 0.0;
  for (double v : hist_m.masses) mass_m += v;
  for (double v : hist_c.masses) mass_c += v;
  CHECK(mass_m == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mass_c == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("build_histograms: component occupies its own contiguous block") {
  Rng rng(61);
  std::vector<double> c(200), m(200);
  for (auto& v : c) v = 0.05 * rng.uniform();
  for (auto& v : m) v = 3.0 * rng.uniform();
  const auto [hist_m, hist_c] = build_histograms(to_vector(m), to_vector(c));

  // the width rule ties the bin width to sd(C): the component covers exactly
  // ceil(range/width) bins starting at its own minimum (the grid anchor)
  double c_min = 10.0, c_max = -10.0;
  for (double v : c) {
    c_min = std::min(c_min, v);
    c_max = std::max(c_max, v);
  }
  // the anchor sits at min(C), shifted left by whole bins to cover M
  const auto start = static_cast<int>(
      std::llround((c_min - hist_c.edges.front()) / hist_c.bin_width));
  CHECK(hist_c.edges[static_cast<std::size_t>(start)] ==
        doctest::Approx(c_min).epsilon(1e-12));
  const auto expected_bins = static_cast<int>(
      std::ceil((c_max - c_min) / hist_c.bin_width));
  int occupied = 0;
  for (double v : hist_c.masses) occupied += v > 0.0;
  CHECK(occupied <= expected_bins);
  // all component mass sits in that contiguous block
  double block = 0.0;
  for (int b = start;
       b < start + expected_bins &&
       b < static_cast<int>(hist_c.masses.size());
       ++b) {
    block += hist_c.masses[static_cast<std::size_t>(b)];
  }
  CHECK(block == doctest::Approx(1.0).epsilon(1e-12));

  // identical samples produce identical mass vectors
  const auto [hm, hc] = build_histograms(to_vector(m), to_vector(m));
  CHECK(hm.masses == hc.masses);
}

TEST_CASE("build_histograms: degenerate and invalid inputs") {
  CHECK_THROWS_AS(
      build_histograms(Eigen::VectorXd::Zero(100), Eigen::VectorXd::Zero(100)),
      DegenerateOutputError);
  CHECK_THROWS_AS(
      build_histograms(Eigen::VectorXd::Zero(5), Eigen::VectorXd::Zero(5)),
      InvalidInputError);
}

TEST_CASE("ll_curve: identical samples make a flat curve; constraints hold") {
  Rng rng(62);
  std::vector<double> values(600);
  for (auto& v : values) v = rng.normal();
  const auto sample = to_vector(values);
  const auto [hist_m, hist_c] = build_histograms(sample, sample);

  AlphaMaxConfig config;
  const auto grid = config.make_grid();
  const auto curve = ll_curve(hist_m, hist_c, grid, config);

  REQUIRE(curve.ll.size() == grid.size());
  const double scale = std::abs(curve.ll.front());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CHECK(std::abs(curve.ll[g] - curve.ll.front()) <= 1e-5 * scale);
  }

  // box and equality constraints on every solved weight vector
  const auto problem = detail::make_problem(hist_m, hist_c, nullptr);
  for (Eigen::Index g = 0; g < curve.omega_per_r.rows(); ++g) {
    double weighted = 0.0;
    for (Eigen::Index i = 0; i < curve.omega_per_r.cols(); ++i) {
      const double w = curve.omega_per_r(g, i);
      CHECK(w >= 0.0);
      CHECK(w <= 1.0);
      weighted += w * problem.v[static_cast<std::size_t>(i)];
    }
    CHECK(std::abs(weighted - grid[static_cast<std::size_t>(g)]) <= 1e-6);
  }

  const auto corner = elbow(curve);
  CHECK(corner.degenerate);
  CHECK(corner.r == 1.0);
}

TEST_CASE("ll_curve: boundary proportions stay finite") {
  Rng rng(63);
  std::vector<double> m(300), c(300);
  for (auto& v : m) v = rng.normal();
  for (auto& v : c) v = rng.normal() + 0.5;
  const auto [hist_m, hist_c] = build_histograms(to_vector(m), to_vector(c));
  const std::vector<double> grid{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  const auto curve = ll_curve(hist_m, hist_c, grid, {});
  for (double value : curve.ll) CHECK(std::isfinite(value));
}

TEST_CASE("count-form objective equals pointwise log-likelihood") {
  Rng rng(64);
  std::vector<double> m(160), c(120);
  for (auto& v : m) v = rng.normal();
  for (auto& v : c) v = 0.7 * rng.normal() + 0.8;
  const auto sample_m = to_vector(m);
  const auto sample_c = to_vector(c);
  const auto [hist_m, hist_c] = build_histograms(sample_m, sample_c);

  std::vector<std::int64_t> bin_to_problem;
  const auto problem = detail::make_problem(hist_m, hist_c, &bin_to_problem);

  // probes: the strictly feasible uniform weights and solver outputs
  for (double r : {0.05, 0.3, 0.6, 0.9}) {
    const std::vector<double> omega(problem.v.size(), r);
    const double count_form = detail::objective(problem, omega, r);
    const double pointwise = test_oracle::pointwise_loglik(
        hist_m, problem, bin_to_problem, sample_m, sample_c, omega, r);
    CHECK(std::abs(count_form - pointwise) <= 1e-9);
  }

  AlphaMaxConfig config;
  const std::vector<double> grid{0.1, 0.35, 0.7, 0.95};
  const auto curve = ll_curve(hist_m, hist_c, grid, config);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> omega(problem.v.size());
    for (std::size_t i = 0; i < omega.size(); ++i) {
      omega[i] = curve.omega_per_r(static_cast<Eigen::Index>(g),
                                   static_cast<Eigen::Index>(i));
    }
    const double count_form = detail::objective(problem, omega, grid[g]);
    const double pointwise = test_oracle::pointwise_loglik(
        hist_m, problem, bin_to_problem, sample_m, sample_c, omega, grid[g]);
    CHECK(std::abs(count_form - pointwise) <= 1e-9);
  }
}

TEST_CASE("ll_curve: disjoint construction has its corner at the proportion") {
  Eigen::VectorXd mixture, component;
  disjoint_construction(0.3, 20000, 5000, 65, mixture, component);

  AlphaMaxConfig config;
  std::shared_ptr<const LikelihoodCurve> curve;
  const double estimate = alphamax(mixture, component, config, &curve);
  CHECK(std::abs(estimate - 0.3) <= 0.03);  // within one grid step

  // the curve does not increase beyond the detected corner
  REQUIRE(curve);
  for (std::size_t g = 1; g < curve->r_grid.size(); ++g) {
    if (curve->r_grid[g - 1] >= estimate) {
      CHECK(curve->ll[g] <=
            curve->ll[g - 1] + 1e-6 * (1.0 + std::abs(curve->ll[g - 1])));
    }
  }
}

TEST_CASE("elbow: recovers an exact two-piece knee and handles ties") {
  LikelihoodCurve curve;
  for (int i = 0; i < 50; ++i) {
    const double r = 0.01 + 0.02 * i;
    curve.r_grid.push_back(r);
    // knee exactly on a grid point
    curve.ll.push_back(r <= 0.39 ? -100.0 : -100.0 - 1200.0 * (r - 0.39));
    curve.converged.push_back(1);
  }
  const auto corner = elbow(curve);
  CHECK_FALSE(corner.degenerate);
  CHECK(corner.r == doctest::Approx(0.39).epsilon(1e-12));

  LikelihoodCurve flat;
  for (int i = 0; i < 20; ++i) {
    flat.r_grid.push_back(0.05 * (i + 1));
    flat.ll.push_back(-42.0);
    flat.converged.push_back(1);
  }
  const auto tie = elbow(flat);
  CHECK(tie.degenerate);
  CHECK(tie.r == 1.0);

  LikelihoodCurve rising = flat;
  for (int i = 0; i < 20; ++i) rising.ll[static_cast<std::size_t>(i)] = i;
  const auto up = elbow(rising);
  CHECK(up.degenerate);
  CHECK(up.r == 1.0);

  LikelihoodCurve tiny;
  tiny.r_grid = {0.1, 0.2, 0.3};
  tiny.ll = {-1.0, -2.0, -3.0};
  tiny.converged = {1, 1, 1};
  CHECK_THROWS_AS(elbow(tiny), InvalidInputError);
}

TEST_CASE("elbow: straight decay reports the grid floor") {
  LikelihoodCurve line;
  for (int i = 0; i < 50; ++i) {
    const double r = 0.01 + 0.02 * i;
    line.r_grid.push_back(r);
    line.ll.push_back(-100.0 - 2000.0 * r);
    line.converged.push_back(1);
  }
  const auto corner = elbow(line);
  CHECK(corner.degenerate);
  CHECK(corner.r == doctest::Approx(0.01));
}

TEST_CASE("alphamax: self-containment saturates the estimate") {
  Rng rng(66);
  std::vector<double> c(3000), m(3000);
  for (auto& v : c) v = rng.normal();
  for (auto& v : m) v = rng.normal();  // same distribution
  const double estimate = alphamax(to_vector(m), to_vector(c));
  CHECK(estimate >= 0.95);
}

TEST_CASE("alphamax: agreement with the exact discrete oracle") {
  // Deterministic lattice samples: the mixture holds an exact fraction of
  // the component's uniform block plus a disjoint block, so the empirical
  // bin ratios all equal the mixing proportion and the discrete-measure
  // infimum is attained cleanly.
  for (int trial = 0; trial < 5; ++trial) {
    const double proportion = 0.15 + 0.15 * trial;
    const int n_c = 8000;
    const int n_m = 30000;
    const int n_low = static_cast<int>(proportion * n_m);
    Eigen::VectorXd component(n_c), mixture(n_m);
    for (int i = 0; i < n_c; ++i) {
      component(i) = (i + 0.5) / static_cast<double>(n_c);
    }
    for (int i = 0; i < n_low; ++i) {
      mixture(i) = (i + 0.5) / static_cast<double>(n_low);
    }
    for (int i = n_low; i < n_m; ++i) {
      mixture(i) = 5.0 + (i - n_low + 0.5) / static_cast<double>(n_m - n_low);
    }
    const auto [hist_m, hist_c] = build_histograms(mixture, component);
    const DiscreteMeasure mu(hist_m.masses);
    const DiscreteMeasure nu(hist_c.masses);
    const double exact = amax(mu, nu);
    CHECK(exact == doctest::Approx(proportion).epsilon(0.02));
    const double estimated = alphamax(mixture, component);
    CHECK(std::abs(estimated - exact) <= 0.05);  // max(one grid step, 0.05)
  }
}

TEST_CASE("ll_curve: grid points solve independently of sweep order") {
  Rng rng(68);
  std::vector<double> m(200), c(150);
  for (auto& v : m) v = rng.normal();
  for (auto& v : c) v = 0.8 * rng.normal() + 0.6;
  const auto [hist_m, hist_c] = build_histograms(to_vector(m), to_vector(c));

  AlphaMaxConfig config;
  auto grid = config.make_grid();
  const auto forward = ll_curve(hist_m, hist_c, grid, config);
  std::reverse(grid.begin(), grid.end());
  const auto backward = ll_curve(hist_m, hist_c, grid, config);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const std::size_t mirrored = grid.size() - 1 - g;
    CHECK(std::abs(forward.ll[g] - backward.ll[mirrored]) < 1e-4);
  }

  // per-point solves against a fresh single-point grid
  for (double r : {0.11, 0.47, 0.83}) {
    const std::vector<double> single{0.05, r, 0.95, 0.97, 0.99};
    const auto spot = ll_curve(hist_m, hist_c, single, config);
    const auto reference = ll_curve(hist_m, hist_c, {r}, config);
    CHECK(std::abs(spot.ll[1] - reference.ll[0]) < 1e-4);
  }
}

TEST_CASE("alphamax_n: clean separated case and saturation warning") {
  Rng rng(69);
  // component 1 far away, labels clean: beta_plus ~ 0, alpha_star ~ alpha_plus
  std::vector<double> u(12000), l(2400);
  for (auto& v : l) v = rng.normal() + 8.0;
  for (auto& v : u) {
    v = rng.uniform() < 0.3 ? rng.normal() + 8.0 : rng.normal();
  }
  const auto est = alphamax_n(to_vector(u), to_vector(l));
  CHECK(est.beta_plus <= 0.05);
  CHECK(std::abs(est.alpha_star - est.alpha_plus) <= 0.01);
  CHECK(std::abs(est.alpha_star - 0.3) <= 0.05);
  CHECK(est.method == Method::AlphaMaxN);

  // identical samples: both directions saturate, warning emitted
  std::vector<double> same(2000);
  for (auto& v : same) v = rng.normal();
  std::vector<std::string> warnings;
  const auto sat = alphamax_n(to_vector(same), to_vector(same), {}, &warnings);
  CHECK_FALSE(warnings.empty());
  CHECK(sat.alpha_plus <= 0.999);
  CHECK(sat.beta_plus <= 0.999);
}

TEST_CASE("alphamax: multivariate grid matches the univariate special case") {
  Rng rng(70);
  const int n = 4000;
  Eigen::MatrixXd u(n, 1), l(n / 4, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    u(i, 0) = rng.uniform() < 0.4 ? rng.normal() + 3.0 : rng.normal();
  }
  for (Eigen::Index i = 0; i < n / 4; ++i) l(i, 0) = rng.normal() + 3.0;
  const double from_matrix = alphamax(u, l);
  const double from_vector =
      alphamax(Eigen::VectorXd(u.col(0)), Eigen::VectorXd(l.col(0)));
  CHECK(from_matrix == from_vector);

  Eigen::MatrixXd u2(n, 2), l2(n / 4, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool positive = rng.uniform() < 0.4;
    u2(i, 0) = rng.normal() + (positive ? 3.0 : 0.0);
    u2(i, 1) = rng.normal() + (positive ? 3.0 : 0.0);
  }
  for (Eigen::Index i = 0; i < n / 4; ++i) {
    l2(i, 0) = rng.normal() + 3.0;
    l2(i, 1) = rng.normal() + 3.0;
  }
  const double est2 = alphamax(u2, l2);
  CHECK(std::abs(est2 - 0.4) <= 0.12);

  Eigen::MatrixXd wide(100, 4);
  CHECK_THROWS_AS(alphamax(wide, wide), InvalidInputError);
}
