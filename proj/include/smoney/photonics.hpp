#ifndef SMONEY_PHOTONICS_HPP
#define SMONEY_PHOTONICS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "smoney/qmath.hpp"
#include "smoney/rng.hpp"

namespace smoney::photonics {

struct SourceModel {
  double mu = 0.0;              // mean photon number, Poissonian
  bool phase_randomized = true; // recorded assumption; no observable effect here
  int fixed_photon_number = -1; // >= 0 overrides Poisson sampling (test mode)
};

enum class ReportingStrategy { strategy1 = 1, strategy2 = 2 };

struct DetectorModel {
  double eta = 1.0;  // common detection efficiency, (0, 1]
  double dark_d0 = 0.0, dark_d1 = 0.0, dark_dp = 0.0, dark_dm = 0.0;

  // Strategy 1 requires (1-d0)(1-d1) = (1-d+)(1-d-) within 1e-12.
  void validate(ReportingStrategy strategy) const;
};

struct PrepConfig {
  qmath::Bias beta_ps{0.0};  // P(t = 0) = 1/2 + beta_ps
  qmath::Bias beta_pb{0.0};  // P(u = 0) = 1/2 + beta_pb
  qmath::Angle theta = qmath::Angle::radians(0.0);  // per-pulse tilt ~ U[-theta, theta]
  double inject_error_rate = 0.0;  // extra flip probability on same-basis outcomes
};

struct PulseRecord {
  long long k = 0;
  std::uint8_t t = 0, u = 0;
  int photons = 0;
  bool click_d0 = false, click_d1 = false, click_dp = false, click_dm = false;
  std::uint8_t m = 0;  // reported as successfully measured
  std::uint8_t w = 0;  // assigned basis; convention: m = 0 => w = 0
  int x = -1;          // outcome bit, -1 when m = 0

  bool in_lambda() const { return m == 1; }
};

// P_noqub = 1 - (1 + mu) e^{-mu}: probability a pulse carries >= 2 photons.
double p_noqub(double mu);

// Theoretical detection probability for strategy 1 with zero dark counts:
// 2 (e^{-mu eta / 2} - e^{-mu eta}).
double p_det_theory(double mu, double eta);

// Reporting probabilities for strategy 1 on an a-photon pulse:
//   G1(1, b) = (1-d0)(1-d1)(1-eta/2)^a - (1-d0)^2 (1-d1)^2 (1-eta)^a
//   G1(0, 0) = 1 - 2 G1(1, 0),   G1(0, 1) = 0.
double g1(int m, int w, double d0, double d1, double eta, int a);

// Strategy 2: G2(0) = (1-d0)(1-d1)(1-eta)^a, G2(1) = 1 - G2(0).
double g2(int m, double d0, double d1, double eta, int a);

// Simulates the detection chain of a single pulse whose photons all carry the
// polarization with the given Bloch angle. `z_basis` is the wave-plate
// setting for strategy 2 (ignored for strategy 1). Fills clicks/m/w/x of a
// record; preparation fields are left to the caller.
void simulate_detection(double state_bloch_angle, int photons,
                        const DetectorModel& det, ReportingStrategy strategy,
                        int z_basis, Rng& rng, PulseRecord& rec);

// Full Monte Carlo pulse stream. Deterministic given the seed; pulse k draws
// from an independent stream keyed by (seed, k), so results do not depend on
// worker scheduling. For strategy 2 the run-level basis bit z is drawn from
// the stream keyed by (seed, N).
std::vector<PulseRecord> simulate_pulses(const SourceModel& source,
                                         const DetectorModel& det,
                                         ReportingStrategy strategy,
                                         const PrepConfig& prep, long long N,
                                         std::uint64_t seed, int jobs = 1);

// Record CSV: leading schema comment, then
// k,t,u,L,click_D0,click_D1,click_Dp,click_Dm,m,w,x with empty x when m = 0.
void write_records_csv(std::ostream& out, const std::vector<PulseRecord>& recs);
std::vector<PulseRecord> read_records_csv(std::istream& in);

}  // namespace smoney::photonics

#endif
