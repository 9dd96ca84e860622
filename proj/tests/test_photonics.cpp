#include "doctest.h"

#include <cmath>
#include <sstream>

#include "smoney/photonics.hpp"
#include "test_support.hpp"

using namespace smoney::photonics;
using smoney::Rng;
using smoney::qmath::Angle;
using smoney::qmath::Bias;
using smoney::qmath::kPi;

TEST_CASE("p_noqub") {
  CHECK(p_noqub(0.09) == doctest::Approx(0.003815008054361191).epsilon(1e-13));
  CHECK(p_noqub(0.0) == 0.0);
  CHECK(p_noqub(1.0) == doctest::Approx(0.26424111765711533).epsilon(1e-13));
  CHECK_THROWS_AS(p_noqub(-0.1), std::domain_error);
}

TEST_CASE("p_det_theory") {
  CHECK(p_det_theory(0.09, 0.21) ==
        doctest::Approx(0.01863405169026766).epsilon(1e-13));
  CHECK(p_det_theory(0.3, 0.0) == 0.0);
  CHECK(p_det_theory(0.2, 0.5) ==
        doctest::Approx(0.092784012929509).epsilon(1e-13));
}

TEST_CASE("g1 and g2 reference values") {
  CHECK(g1(0, 1, 0.3, 0.4, 0.5, 7) == 0.0);
  CHECK(g1(1, 0, 0.0, 0.0, 0.21, 1) == doctest::Approx(0.105).epsilon(1e-14));
  CHECK(g1(1, 1, 0.001, 0.001, 0.21, 2) ==
        doctest::Approx(0.17781640892077577).epsilon(1e-13));
  CHECK(g2(1, 0.0, 0.0, 0.5, 0) == 0.0);
  CHECK(g2(1, 0.0, 0.0, 0.21, 1) == doctest::Approx(0.21).epsilon(1e-14));
  CHECK(g2(0, 0.01, 0.02, 0.21, 3) ==
        doctest::Approx(0.4783464378).epsilon(1e-13));
}

TEST_CASE("g1 normalisation and g2 exact complement") {
  for (double d : {0.0, 1e-3, 0.02, 0.2})
    for (double eta : {0.05, 0.21, 0.7, 1.0})
      for (int a = 0; a <= 5; ++a) {
        const double total = g1(1, 0, d, d, eta, a) + g1(1, 1, d, d, eta, a) +
                             g1(0, 0, d, d, eta, a) + g1(0, 1, d, d, eta, a);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(g2(0, d, d, eta, a) + g2(1, d, d, eta, a) == 1.0);
      }
}

TEST_CASE("g1 matches exhaustive click-configuration enumeration") {
  // Independent oracle: enumerate photon routing, detection and dark
  // configurations, for several polarizations.
  const double angles[] = {0.0, kPi / 2.0, kPi / 4.0, 1.1};
  for (double d : {0.0, 0.001, 0.05})
    for (double eta : {0.21, 0.8})
      for (int a = 0; a <= 3; ++a) {
        const double dark[4] = {d, d, d, d};
        for (double angle : angles) {
          const auto psi = smoney::qmath::QubitState::bloch(angle);
          const double p0c = psi.overlap2(smoney::qmath::bb84_state(0, 0));
          const double p0h = psi.overlap2(smoney::qmath::bb84_state(0, 1));
          const auto probs =
              test_support::enumerate_strategy1(p0c, p0h, eta, dark, a);
          CHECK(probs.p[1][0] == doctest::Approx(g1(1, 0, d, d, eta, a)).epsilon(1e-12));
          CHECK(probs.p[1][1] == doctest::Approx(g1(1, 1, d, d, eta, a)).epsilon(1e-12));
          CHECK(probs.p[0][0] == doctest::Approx(g1(0, 0, d, d, eta, a)).epsilon(1e-12));
        }
        CHECK(test_support::enumerate_strategy2_m1(eta, d, d, a) ==
              doctest::Approx(g2(1, d, d, eta, a)).epsilon(1e-12));
      }
}

TEST_CASE("g1 enumeration with unequal dark counts satisfying assumption F") {
  // (1-d0)(1-d1) = (1-d+)(1-d-) with d0 != d1.
  const double d0 = 0.01, d1 = 0.03, dp = 0.03, dm = 0.01;
  const double dark[4] = {d0, d1, dp, dm};
  for (int a = 0; a <= 3; ++a) {
    const auto probs = test_support::enumerate_strategy1(0.7, 0.4, 0.3, dark, a);
    CHECK(probs.p[1][0] == doctest::Approx(g1(1, 0, d0, d1, 0.3, a)).epsilon(1e-12));
    CHECK(probs.p[1][1] == doctest::Approx(g1(1, 1, d0, d1, 0.3, a)).epsilon(1e-12));
  }
}

TEST_CASE("detector model validation") {
  DetectorModel det;
  det.eta = 0.21;
  det.dark_d0 = 0.01;
  det.dark_d1 = 0.02;
  det.dark_dp = 0.02;
  det.dark_dm = 0.01;
  det.validate(ReportingStrategy::strategy1);  // products match
  det.dark_dm = 0.015;
  CHECK_THROWS_AS(det.validate(ReportingStrategy::strategy1),
                  std::domain_error);
  det.validate(ReportingStrategy::strategy2);  // no product constraint
  det.eta = 0.0;
  CHECK_THROWS_AS(det.validate(ReportingStrategy::strategy2),
                  std::domain_error);
}

namespace {

struct Tally {
  long long mw[2][2] = {{0, 0}, {0, 0}};
  long long total = 0;
};

Tally run_fixed_photons(int photons, double dark, double eta, long long trials,
                        std::uint64_t seed, ReportingStrategy strategy) {
  SourceModel src;
  src.fixed_photon_number = photons;
  DetectorModel det;
  det.eta = eta;
  det.dark_d0 = det.dark_d1 = det.dark_dp = det.dark_dm = dark;
  PrepConfig prep;
  const auto records = simulate_pulses(src, det, strategy, prep, trials, seed);
  Tally tally;
  for (const auto& r : records) {
    ++tally.mw[r.m][r.w];
    ++tally.total;
  }
  return tally;
}

}  // namespace

TEST_CASE("Monte Carlo matches G functions at fixed photon number") {
  const double eta = 0.21, dark = 0.001;
  const long long trials = 200000;
  for (int a = 0; a <= 3; ++a) {
    const Tally tally = run_fixed_photons(a, dark, eta, trials, 500 + a,
                                          ReportingStrategy::strategy1);
    for (int m = 0; m < 2; ++m)
      for (int w = 0; w < 2; ++w) {
        const double expected = g1(m, w, dark, dark, eta, a);
        const double freq = static_cast<double>(tally.mw[m][w]) / trials;
        const double sigma =
            std::sqrt(std::max(expected * (1.0 - expected), 1e-12) / trials);
        CHECK(std::abs(freq - expected) <= 4.0 * sigma);
      }
    // reported basis is a fair coin conditioned on m = 1
    const long long reported = tally.mw[1][0] + tally.mw[1][1];
    if (reported > 0) {
      const double w0 = static_cast<double>(tally.mw[1][0]) / reported;
      const double sigma = std::sqrt(0.25 / reported);
      CHECK(std::abs(w0 - 0.5) <= 4.0 * sigma);
    }
  }
}

TEST_CASE("Monte Carlo matches G2 at fixed photon number") {
  const double eta = 0.35, dark = 0.002;
  const long long trials = 100000;
  for (int a = 0; a <= 3; ++a) {
    const Tally tally = run_fixed_photons(a, dark, eta, trials, 900 + a,
                                          ReportingStrategy::strategy2);
    const double expected = g2(1, dark, dark, eta, a);
    const double freq =
        static_cast<double>(tally.mw[1][0] + tally.mw[1][1]) / trials;
    const double sigma =
        std::sqrt(std::max(expected * (1.0 - expected), 1e-12) / trials);
    CHECK(std::abs(freq - expected) <= 4.0 * sigma);
  }
}

TEST_CASE("reported statistics do not depend on the transmitted polarization") {
  // Multi-photon attack immunity: the m-marginal is polarization independent.
  const long long trials = 120000;
  const double eta = 0.21, dark = 0.001;
  SourceModel src;
  src.fixed_photon_number = 2;
  DetectorModel det;
  det.eta = eta;
  det.dark_d0 = det.dark_d1 = det.dark_dp = det.dark_dm = dark;

  auto reported_fraction = [&](double bloch_angle, std::uint64_t seed) {
    Rng master(seed);
    long long reported = 0;
    for (long long i = 0; i < trials; ++i) {
      Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
      PulseRecord rec;
      simulate_detection(bloch_angle, 2, det, ReportingStrategy::strategy1, 0,
                         rng, rec);
      reported += rec.m;
    }
    (void)master;
    return static_cast<double>(reported) / trials;
  };

  const double base = reported_fraction(0.0, 4242);
  for (double angle : {kPi / 2.0, kPi / 4.0, 2.2}) {
    const double other = reported_fraction(angle, 4242 ^ 0x5bd1e995);
    const double sigma = std::sqrt(2.0 * 0.36 * 0.64 / trials);
    CHECK(std::abs(other - base) <= 4.0 * sigma);
  }
}

TEST_CASE("pulse stream is reproducible and order independent") {
  SourceModel src;
  src.mu = 0.09;
  DetectorModel det;
  det.eta = 0.21;
  PrepConfig prep;
  prep.beta_pb = Bias(0.01);
  prep.theta = Angle::degrees(5.0);
  const auto a = simulate_pulses(src, det, ReportingStrategy::strategy1, prep,
                                 20000, 77, 1);
  const auto b = simulate_pulses(src, det, ReportingStrategy::strategy1, prep,
                                 20000, 77, 2);
  REQUIRE(a.size() == b.size());
  std::ostringstream sa, sb;
  write_records_csv(sa, a);
  write_records_csv(sb, b);
  CHECK(sa.str() == sb.str());

  const auto c = simulate_pulses(src, det, ReportingStrategy::strategy1, prep,
                                 20000, 78, 1);
  std::ostringstream sc;
  write_records_csv(sc, c);
  CHECK(sa.str() != sc.str());
}

TEST_CASE("record CSV round trip") {
  SourceModel src;
  src.mu = 0.5;
  DetectorModel det;
  det.eta = 0.6;
  det.dark_d0 = det.dark_d1 = det.dark_dp = det.dark_dm = 0.01;
  PrepConfig prep;
  const auto recs = simulate_pulses(src, det, ReportingStrategy::strategy1,
                                    prep, 500, 9);
  std::ostringstream out;
  write_records_csv(out, recs);
  std::istringstream in(out.str());
  const auto parsed = read_records_csv(in);
  REQUIRE(parsed.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(parsed[i].k == recs[i].k);
    CHECK(parsed[i].t == recs[i].t);
    CHECK(parsed[i].u == recs[i].u);
    CHECK(parsed[i].photons == recs[i].photons);
    CHECK(parsed[i].m == recs[i].m);
    CHECK(parsed[i].w == recs[i].w);
    CHECK(parsed[i].x == recs[i].x);
  }
}

TEST_CASE("strategy 1 never reports across-basis double clicks") {
  SourceModel src;
  src.mu = 2.5;  // force plenty of multi-photon pulses and double clicks
  DetectorModel det;
  det.eta = 0.8;
  det.dark_d0 = det.dark_d1 = det.dark_dp = det.dark_dm = 0.05;
  PrepConfig prep;
  const auto recs = simulate_pulses(src, det, ReportingStrategy::strategy1,
                                    prep, 30000, 61);
  bool saw_same_basis_double = false;
  for (const auto& r : recs) {
    const bool comp = r.click_d0 || r.click_d1;
    const bool had = r.click_dp || r.click_dm;
    if (r.m == 1) {
      CHECK((comp ^ had));  // exactly one basis pair fired
      CHECK(r.x >= 0);
      saw_same_basis_double |= (r.click_d0 && r.click_d1) ||
                               (r.click_dp && r.click_dm);
    } else {
      CHECK(r.w == 0);  // m = 0 fixes w = 0
      CHECK(r.x == -1);
      CHECK(((comp && had) || (!comp && !had)));
    }
  }
  // the regime is chosen so same-basis double clicks actually occur
  CHECK(saw_same_basis_double);
}

TEST_CASE("Poisson sampling folds the tail into the cap") {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const int draw = rng.poisson(500.0);  // mean far above the cap
    CHECK(draw == Rng::kPoissonCap);
  }
  Rng rng2(2);
  long long total = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) total += rng2.poisson(0.09);
  const double mean = static_cast<double>(total) / n;
  CHECK(std::abs(mean - 0.09) <= 4.0 * std::sqrt(0.09 / n));
}

TEST_CASE("zero source and zero darks never report") {
  SourceModel src;
  src.mu = 0.0;
  DetectorModel det;
  det.eta = 0.9;
  PrepConfig prep;
  const auto recs =
      simulate_pulses(src, det, ReportingStrategy::strategy1, prep, 5000, 3);
  for (const auto& r : recs) CHECK(r.m == 0);
}
