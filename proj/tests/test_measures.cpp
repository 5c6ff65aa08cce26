#include <cmath>
#include <vector>

#include "doctest.h"
#include "puprior/measures.hpp"
#include "puprior/oracle_suite.hpp"
#include "puprior/rng.hpp"

using namespace puprior;

namespace {

DiscreteMeasure dm(std::vector<double> masses) {
  return DiscreteMeasure(std::move(masses));
}

}  // namespace

TEST_CASE("amax: atom-ratio minimum") {
  CHECK(amax(dm({0.5, 0.5}), dm({1.0, 0.0})) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(amax(dm({0.3, 0.7}), dm({0.3, 0.7})) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(amax(dm({0.5, 0.5}), dm({0.8, 0.2})) == doctest::Approx(0.625).epsilon(1e-14));

  // clipped to [0, 1] even when every ratio exceeds 1
  CHECK(amax(dm({0.5, 0.5}), dm({0.5, 0.5})) == 1.0);

  CHECK_THROWS_AS(amax(dm({0.5, 0.5}), dm({1.0 / 3, 1.0 / 3, 1.0 / 3})),
                  InvalidInputError);
}

TEST_CASE("amax: subset enumeration agrees with the atom minimum") {
  CHECK(amax_subset_infimum(dm({0.5, 0.5}), dm({1.0, 0.0})) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(amax_subset_infimum(dm({0.5, 0.5}), dm({0.8, 0.2})) ==
        doctest::Approx(0.625).epsilon(1e-14));

  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const int atoms = 2 + static_cast<int>(rng.bounded(11));
    auto draw = [&] {
      std::vector<double> m(static_cast<std::size_t>(atoms));
      double total = 0.0;
      for (double& x : m) {
        x = rng.uniform() < 0.25 ? 0.0 : -std::log(rng.uniform_open());
        total += x;
      }
      if (total == 0.0) {
        m[0] = 1.0;
        total = 1.0;
      }
      for (double& x : m) x /= total;
      return DiscreteMeasure(m);
    };
    const auto lambda = draw();
    const auto lambda1 = draw();
    CHECK(std::abs(amax(lambda, lambda1) -
                   amax_subset_infimum(lambda, lambda1)) <= 1e-12);
  }
}

TEST_CASE("measure construction validates masses") {
  CHECK_THROWS_AS(dm({0.0, 0.0}), InvalidInputError);       // no unit mass
  CHECK_THROWS_AS(dm({0.7, -0.1, 0.4}), InvalidInputError); // negative atom
  CHECK_THROWS_AS(dm({}), InvalidInputError);
  CHECK_NOTHROW(dm({0.5, 0.5 - 1e-13, 1e-13}));
}

TEST_CASE("prior pair enforces the family constraint") {
  CHECK_NOTHROW(PriorPair(0.0, 1.0));
  CHECK_THROWS_AS(PriorPair(0.5, 0.5), InvalidInputError);
  CHECK_THROWS_AS(PriorPair(0.8, 0.4), InvalidInputError);
  CHECK_THROWS_AS(PriorPair(-0.1, 0.5), InvalidInputError);
  CHECK_THROWS_AS(PriorPair(0.5, 1.1), InvalidInputError);
}

TEST_CASE("decompose: component recovery and feasibility") {
  const auto mu = dm({0.5, 0.5});
  const auto nu = dm({0.8, 0.2});

  auto parts = decompose(mu, nu, PriorPair(0.5, 0.8));
  REQUIRE(parts.has_value());
  CHECK(parts->first[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(parts->first[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(parts->second[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(parts->second[1] == doctest::Approx(0.0).epsilon(1e-12));

  // trivial proportions give back the mixtures themselves
  auto id = decompose(mu, nu, PriorPair(0.0, 1.0));
  REQUIRE(id.has_value());
  CHECK(id->first[0] == doctest::Approx(mu[0]).epsilon(1e-14));
  CHECK(id->second[0] == doctest::Approx(nu[0]).epsilon(1e-14));

  // alpha/beta = 0.875 exceeds amax(mu, nu) = 0.625
  CHECK_FALSE(decompose(mu, nu, PriorPair(0.7, 0.8)).has_value());

  // reconstruction identity where feasible
  const auto back_mu = mix(0.5, parts->second, parts->first);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(std::abs(back_mu[i] - mu[i]) <= 1e-10);
  }
}

TEST_CASE("correction map and its inverse identities") {
  auto pair0 = correction(0.0, 0.0);
  CHECK(pair0.first == 0.0);
  CHECK(pair0.second == 1.0);

  auto pair1 = correction(0.625, 0.4);
  CHECK(pair1.first == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(pair1.second == doctest::Approx(0.8).epsilon(1e-14));

  auto pair2 = correction(0.5, 0.5);
  CHECK(pair2.first == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(pair2.second == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

  CHECK_THROWS_AS(correction(1.0, 0.5), InvalidInputError);
  CHECK_THROWS_AS(correction(0.5, 1.0), InvalidInputError);

  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const double ap = 0.999 * rng.uniform();
    const double bp = 0.999 * rng.uniform();
    const auto [as, bs] = correction(ap, bp);
    CHECK(as < bs);
    CHECK(std::abs(as / bs - ap) <= 1e-12);
    CHECK(std::abs((1.0 - bs) / (1.0 - as) - bp) <= 1e-12);
  }
}

TEST_CASE("canonical: worked decompositions") {
  {
    const auto form = canonical(dm({0.5, 0.5}), dm({0.8, 0.2}));
    CHECK(form.alpha_star == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(form.beta_star == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(form.mu0_star[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(form.mu0_star[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(form.mu1_star[0] == doctest::Approx(1.0).epsilon(1e-12));
    // the canonical pair is mutually irreducible
    CHECK(amax(form.mu0_star, form.mu1_star) <= 1e-10);
    CHECK(amax(form.mu1_star, form.mu0_star) <= 1e-10);
  }
  {
    // second measure is already a pure component
    const auto form = canonical(dm({0.2, 0.8}), dm({1.0, 0.0}));
    CHECK(form.alpha_star == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(form.beta_star == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(form.mu1_star[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(form.mu0_star[1] == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(canonical(dm({0.4, 0.6}), dm({0.4, 0.6})), InvalidInputError);
}

TEST_CASE("canonical: round trip on irreducible constructions") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const int atoms = 3 + static_cast<int>(rng.bounded(9));
    std::vector<double> m0(static_cast<std::size_t>(atoms), 0.0);
    std::vector<double> m1(static_cast<std::size_t>(atoms), 0.0);
    for (int i = 2; i < atoms; ++i) {
      m0[static_cast<std::size_t>(i)] = -std::log(rng.uniform_open());
      m1[static_cast<std::size_t>(i)] = -std::log(rng.uniform_open());
    }
    m0[0] = 0.3;  // private atoms force mutual irreducibility
    m1[1] = 0.3;
    auto renorm = [](std::vector<double>& m) {
      double t = 0.0;
      for (double x : m) t += x;
      for (double& x : m) x /= t;
    };
    renorm(m0);
    renorm(m1);
    const DiscreteMeasure mu0(m0), mu1(m1);

    const double alpha = 0.9 * rng.uniform();
    const double beta = alpha + 0.05 + (0.95 - alpha) * rng.uniform();
    const auto form = canonical(mix(alpha, mu1, mu0), mix(beta, mu1, mu0));
    CHECK(std::abs(form.alpha_star - alpha) <= 1e-8);
    CHECK(std::abs(form.beta_star - beta) <= 1e-8);
    for (std::size_t i = 0; i < mu0.atoms(); ++i) {
      CHECK(std::abs(form.mu0_star[i] - mu0[i]) <= 1e-8);
      CHECK(std::abs(form.mu1_star[i] - mu1[i]) <= 1e-8);
    }
  }
}

TEST_CASE("feasibility boundary and unidentifiability witnesses") {
  Rng rng(123);
  int boundary_checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int atoms = 2 + static_cast<int>(rng.bounded(9));
    auto draw = [&] {
      std::vector<double> m(static_cast<std::size_t>(atoms));
      double total = 0.0;
      for (double& x : m) {
        x = -std::log(rng.uniform_open());
        total += x;
      }
      for (double& x : m) x /= total;
      return DiscreteMeasure(m);
    };
    const auto mu = draw();
    const auto nu = draw();
    const double ap = amax(mu, nu);
    const double bp = amax(nu, mu);

    const double alpha = 0.98 * rng.uniform();
    const double beta = alpha + 0.01 + (0.99 - alpha) * rng.uniform();
    const double lhs0 = alpha / beta;
    const double lhs1 = (1.0 - beta) / (1.0 - alpha);
    if (std::abs(lhs0 - ap) > 1e-9 && std::abs(lhs1 - bp) > 1e-9) {
      const bool predicted = lhs0 <= ap && lhs1 <= bp;
      CHECK(decompose(mu, nu, PriorPair(alpha, beta)).has_value() == predicted);
      ++boundary_checked;
    }

    if (ap > 1e-9 && bp > 1e-9) {
      CHECK(decompose(mu, nu, PriorPair(0.0, 1.0)).has_value());
      const double t = rng.uniform_open();
      CHECK(decompose(mu, nu, PriorPair(ap * t, 1.0)).has_value());
    }
  }
  CHECK(boundary_checked > 200);
}

TEST_CASE("oracle suite runs clean") {
  OracleSuiteConfig config;
  config.atoms = 10;
  config.trials = 200;
  config.seed = 7;
  const auto result = run_oracle_suite(config);
  CHECK(result.trials_run == 200);
  CHECK(result.ok());
}
