#include "doctest.h"

#include <cmath>

#include "smoney/qmath.hpp"
#include "smoney/rng.hpp"
#include "test_support.hpp"

using namespace smoney::qmath;

TEST_CASE("overlap_O values and domain") {
  CHECK(overlap_O(Angle::radians(0.0)) == doctest::Approx(0.7071067811865476).epsilon(1e-15));
  CHECK(overlap_O(Angle::radians(kPi / 4.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(overlap_O(Angle::degrees(10.0)) ==
        doctest::Approx(0.8191520442889918).epsilon(1e-15));
  CHECK_THROWS_AS(overlap_O(Angle::radians(-0.01)), std::domain_error);
  CHECK_THROWS_AS(overlap_O(Angle::radians(0.9)), std::domain_error);
}

TEST_CASE("overlap_O strictly increasing on [0, pi/4)") {
  double prev = -1.0;
  for (int i = 0; i < 100; ++i) {
    const double v = overlap_O(Angle::radians(i * (kPi / 4.0) / 100.0));
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("lambda_bound values") {
  CHECK(lambda_bound(Angle::radians(0.0), Bias(0.0)) ==
        doctest::Approx(0.14644660940672627).epsilon(1e-15));
  CHECK(lambda_bound(Angle::degrees(17.0), Bias(0.5)) == doctest::Approx(0.0));
  CHECK(lambda_bound(Angle::degrees(10.0), Bias(2.4e-3)) ==
        doctest::Approx(0.090421664516181).epsilon(1e-14));
}

TEST_CASE("lambda_bound agrees with the 2x2 density-matrix route") {
  // Worst-case pair of states at overlap O(theta) mixed with the extreme
  // basis probabilities: the top eigenvalue must equal 1 - lambda.
  for (double theta_deg : {0.0, 4.0, 10.0, 25.0})
    for (double beta : {0.0, 0.05, 0.2, 0.4}) {
      const Angle theta = Angle::degrees(theta_deg);
      QubitState best_a = bb84_state(0, 0), best_b = bb84_state(0, 1);
      double best = -1.0;
      for (int t = 0; t < 2; ++t)
        for (int t2 = 0; t2 < 2; ++t2) {
          const QubitState sa = tilted_state(t, 0, theta.rad());
          const QubitState sb = tilted_state(t2, 1, -theta.rad());
          if (std::abs(sa.inner(sb)) > best) {
            best = std::abs(sa.inner(sb));
            best_a = sa;
            best_b = sb;
          }
        }
      CHECK(best == doctest::Approx(overlap_O(theta)).epsilon(1e-12));
      DensityMatrix2 rho;
      rho.add_pure(0.5 + beta, best_a);
      rho.add_pure(0.5 - beta, best_b);
      const double mu_plus = rho.eigenvalues().second;
      CHECK(1.0 - mu_plus ==
            doctest::Approx(lambda_bound(theta, Bias(beta))).epsilon(1e-12));
    }
}

TEST_CASE("lambda_bound strictly decreasing in theta and beta") {
  for (int i = 0; i + 1 < 100; ++i) {
    const double t0 = i * (kPi / 4.0) / 100.0;
    const double t1 = (i + 1) * (kPi / 4.0) / 100.0;
    CHECK(lambda_bound(Angle::radians(t1), Bias(0.1)) <
          lambda_bound(Angle::radians(t0), Bias(0.1)));
    const double b0 = i * 0.5 / 100.0;
    const double b1 = (i + 1) * 0.5 / 100.0;
    CHECK(lambda_bound(Angle::degrees(5.0), Bias(b1)) <
          lambda_bound(Angle::degrees(5.0), Bias(b0)));
  }
}

TEST_CASE("h_factor values") {
  CHECK(h_factor(Bias(0.0), Bias(0.3), Angle::degrees(12.0)) == 0.0);
  CHECK(h_factor(Bias(0.25), Bias(0.0), Angle::radians(0.0)) ==
        doctest::Approx(0.25 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(h_factor(Bias(0.5), Bias(0.0), Angle::radians(0.0)) ==
        doctest::Approx(0.7071067811865476).epsilon(1e-15));
  // h < 2 beta_PS for theta < pi/4
  CHECK(h_factor(Bias(0.3), Bias(0.2), Angle::degrees(30.0)) < 0.6);
}

TEST_CASE("chernoff_tail exponents") {
  // 0.019 * 4e7 successes expected, epsilon = 1/19.
  const LogProb rob = chernoff_tail(760000.0, 1.0 / 19.0, TailSide::lower);
  CHECK(rob.log_value == doctest::Approx(-1052.6315789473706).epsilon(1e-12));
  const LogProb lim = chernoff_tail(10.0, 1.0 - 1e-13, TailSide::lower);
  CHECK(lim.log_value == doctest::Approx(-5.0).epsilon(1e-9));
  const LogProb up = chernoff_tail(100.0, 0.3, TailSide::upper);
  CHECK(up.log_value == doctest::Approx(-3.0).epsilon(1e-12));
  CHECK_THROWS_AS(chernoff_tail(10.0, 0.0, TailSide::lower), std::domain_error);
  CHECK_THROWS_AS(chernoff_tail(10.0, 1.0, TailSide::lower), std::domain_error);
  CHECK_THROWS_AS(chernoff_tail(-1.0, 0.5, TailSide::lower), std::domain_error);
}

TEST_CASE("chernoff lower/upper relation is exact") {
  for (double mean : {3.0, 50.0, 1e6})
    for (double eps : {0.01, 0.4, 0.95}) {
      const double lower = chernoff_tail(mean, eps, TailSide::lower).log_value;
      const double upper = chernoff_tail(mean, eps, TailSide::upper).log_value;
      // lower = upper * e^{mean eps^2 (1/3 - 1/2)} in linear space.
      CHECK(lower == doctest::Approx(upper + mean * eps * eps *
                                                 (1.0 / 3.0 - 1.0 / 2.0))
                         .epsilon(1e-14));
    }
}

TEST_CASE("binomial_tail_weighted examples") {
  CHECK(binomial_tail_weighted(7, 0.0, 0.3).linear() ==
        doctest::Approx(std::pow(0.3, 7)).epsilon(1e-13));
  CHECK(binomial_tail_weighted(1, 0.0, 0.8535533905932737).linear() ==
        doctest::Approx(0.8535533905932737).epsilon(1e-14));
  CHECK(binomial_tail_weighted(4, 0.3, 0.85).linear() ==
        doctest::Approx(0.8904812499999999).epsilon(1e-13));
}

TEST_CASE("binomial_tail_weighted log-space agrees with the direct sum") {
  smoney::Rng rng(20240811);
  for (int trial = 0; trial < 200; ++trial) {
    const long long N = 1 + static_cast<long long>(rng.uniform() * 29);
    const double gamma = rng.uniform() * 1.2;
    const double lam0 = 0.05 + 0.95 * rng.uniform();
    const double direct = test_support::direct_binomial_tail(N, gamma, lam0);
    const double logspace = binomial_tail_weighted(N, gamma, lam0).linear();
    CHECK(logspace == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("binomial_tail_weighted monotone and saturating") {
  const long long N = 40;
  double prev = -1.0;
  for (double g : {0.0, 0.05, 0.1, 0.3, 0.7, 1.0}) {
    const double v = binomial_tail_weighted(N, g, 0.6).linear();
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(binomial_tail_weighted(N, 1.0, 0.6).log_value == 0.0);
  prev = -1.0;
  for (double lam0 : {0.1, 0.3, 0.6, 0.9, 0.99}) {
    const double v = binomial_tail_weighted(N, 0.2, lam0).linear();
    CHECK(v >= prev);
    prev = v;
  }
  // large-N log-space path stays finite and sane
  const LogProb big = binomial_tail_weighted(100000000, 0.05, 0.9);
  CHECK(std::isfinite(big.log_value));
  CHECK(big.log_value < 0.0);
}

TEST_CASE("bias and angle domain checks") {
  CHECK_THROWS_AS(Bias(-0.01), std::domain_error);
  CHECK_THROWS_AS(Bias(0.51), std::domain_error);
  CHECK(Bias(0.0).value() == 0.0);
  CHECK(Angle::degrees(45.0).rad() == doctest::Approx(kPi / 4.0));
  CHECK(Angle::degrees(10.0).deg() == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("bb84 states and density matrices") {
  for (int u = 0; u < 2; ++u)
    CHECK(std::abs(bb84_state(0, u).inner(bb84_state(1, u))) < 1e-15);
  CHECK(bb84_state(0, 0).overlap2(bb84_state(0, 1)) ==
        doctest::Approx(0.5).epsilon(1e-14));

  DensityMatrix2 rho;
  rho.add_pure(0.5, bb84_state(0, 0));
  rho.add_pure(0.5, bb84_state(0, 1));
  rho.validate();
  const auto [lo, hi] = rho.eigenvalues();
  CHECK(hi == doctest::Approx(0.8535533905932737).epsilon(1e-14));
  CHECK(lo == doctest::Approx(1.0 - 0.8535533905932737).epsilon(1e-13));

  DensityMatrix2 bad(Cmplx{0.7, 0.0}, Cmplx{0.1, 0.0}, Cmplx{0.3, 0.0},
                     Cmplx{0.3, 0.0});
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}
