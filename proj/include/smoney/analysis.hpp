#ifndef SMONEY_ANALYSIS_HPP
#define SMONEY_ANALYSIS_HPP

#include <optional>
#include <span>
#include <string>

#include "smoney/photonics.hpp"

namespace smoney::analysis {

// Counts over one experimental run, in the shape used by the estimators:
// everything except N is restricted to reported pulses (m = 1). The
// prepared_tu block additionally tallies every transmitted pulse; it is
// only available when the full record stream exists (simulation), not from
// detection-triggered capture.
struct CountTable {
  long long N = 0;                  // transmitted pulses
  long long n = 0;                  // reported pulses
  long long n_tu[2][2] = {{0, 0}, {0, 0}};      // prepared (t,u), reported
  long long n_same[2][2] = {{0, 0}, {0, 0}};    // of those, measured with w = u
  long long n_err[2][2] = {{0, 0}, {0, 0}};     // of those, outcome != t
  long long prepared_tu[2][2] = {{0, 0}, {0, 0}};  // all pulses; 0 if unknown
  bool has_prepared_counts() const;

  void validate() const;
};

struct StatsReport {
  double p_det = 0.0;
  std::optional<double> e_tu[2][2];
  std::optional<double> error_rate;          // E = max over cells
  std::optional<double> beta_pb, beta_ps;
  std::string insufficient;                  // names of unavailable statistics

  std::string to_json(int indent = 2) const;
  // Human-readable report, values rounded to two significant figures.
  std::string render_text() const;
};

// Round to two significant figures, shortest decimal form ("0.019", "0.0024").
std::string format_two_sig(double v);

CountTable tally(std::span<const photonics::PulseRecord> records,
                 long long total_transmitted);

enum class BiasSource {
  reported_pulses,  // detection-triggered capture, as in the reference run
  all_pulses,       // ground-truth preparation counts (simulation only)
};

// Estimators from the count table:
//   P_det = n / N,   E_tu = n_err / n_same,  E = max_tu E_tu,
//   beta_PB = |(n00 + n10)/n - 1/2|,
//   beta_PS = max(|n00/(n00+n10) - 1/2|, |n01/(n01+n11) - 1/2|).
// Empty cells produce "insufficient data" markers instead of estimates.
// With BiasSource::all_pulses the two bias estimators run on the full
// prepared counts instead of the reported subset.
StatsReport estimate_stats(const CountTable& counts,
                           BiasSource bias_source = BiasSource::reported_pulses);

// The count table of the reference experiment (N = 4e7 pulses).
CountTable reference_counts();

}  // namespace smoney::analysis

#endif
