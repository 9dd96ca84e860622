#ifndef SMONEY_PROTOCOL_HPP
#define SMONEY_PROTOCOL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smoney/bounds.hpp"
#include "smoney/spacetime.hpp"

namespace smoney::protocol {

enum class Scheme { IQT1, IQT2, QT1, QT2, QT1M, QT2M };

Scheme scheme_from_string(const std::string& name);
std::string to_string(Scheme s);
bool is_ideal(Scheme s);
bool is_multi(Scheme s);     // step-12 presentation signals active
bool is_variant2(Scheme s);  // fixed-basis family (no d string)

// Presentation points plus the spacetime point where stage I and the
// pre-presentation part of stage II happen.
struct Geometry {
  std::vector<spacetime::Point> presentation;  // 2^M points, labels are bit strings
  spacetime::Point stage_point;

  void validate(int M) const;
  const spacetime::Point& point(const std::string& label) const;

  static Geometry two_points_spacelike();
  static Geometry two_points_timelike();
  // 2^M simultaneous, pairwise spacelike points.
  static Geometry simultaneous(int M);
};

// Bit-string label of presentation point index i, round bit l first.
std::string point_label(unsigned index, int M);

struct Message {
  std::string sender, receiver, kind;
  int round = -1;
  spacetime::Point sent_at, received_at;
  bool depends_on_b = false;
};

struct RoundState {
  std::vector<std::uint8_t> t, u;      // length N (Bob's preparation)
  std::vector<long long> lambda;       // reported labels, ascending (g = numerical order)
  std::vector<std::uint8_t> y, x, d;   // length n (Alice)
  std::vector<std::uint8_t> r, s;      // length n (Bob, via g)
  int z = 0, c = 0;
  bool aborted = false;
};

struct PointDecision {
  std::string label;
  bool token_presented = false;
  bool accepted = false;
  bool blocked_by_prior_signal = false;
  bool causal_ok = true;  // every message read was sent in the causal past
  std::vector<long long> delta_sizes;  // per round |Delta_b|
  std::vector<long long> hamming;      // per round d(x_b, r_b)
};

struct Transcript {
  Scheme scheme = Scheme::IQT1;
  int M = 1;
  long long N = 0;
  std::vector<std::uint8_t> b;
  std::vector<RoundState> rounds;
  std::vector<Message> messages;
  std::vector<PointDecision> decisions;
  bool aborted = false;
  bool validated = false;
  bool causal_check_passed = true;
  long long last_quantum_seq = -1;  // message index of last stage-I quantum event
  long long first_b_seq = -1;       // message index of first b-dependent event

  std::string to_jsonl() const;  // one message per line
};

// Delta = positions where d_tilde agrees with s (0-indexed).
std::vector<std::size_t> compute_delta(std::span<const std::uint8_t> s,
                                       std::span<const std::uint8_t> d_tilde);

// Accept iff hamming(x_b, r_b) <= |Delta_b| * gamma_err (ties accept) and no
// presentation signal arrived from the causal past.
bool validate_token(std::span<const std::uint8_t> x_b,
                    std::span<const std::uint8_t> r_b, double gamma_err,
                    bool prior_presentation_signal);

// One honest run. Qubit measurements are simulated classically: matching
// bases reproduce the prepared bit up to the error rate, mismatched bases
// give uniform outcomes. Detection is Bernoulli(P_det) per state.
Transcript run_honest(Scheme scheme, const bounds::SchemeParams& params,
                      const Geometry& geometry,
                      std::span<const std::uint8_t> b, std::uint64_t seed);

// b is only referenced after every stage-I quantum event.
bool flexibility_check(const Transcript& transcript);

enum class Adversary { measure_once_replay, random_second_token, basis_guess };
Adversary adversary_from_string(const std::string& name);
std::string to_string(Adversary a);

struct ForgeryStats {
  long long trials = 0;
  long long successes = 0;        // accepted at both target points
  long long accepted_first = 0;   // accepted at v
  long long accepted_second = 0;  // accepted at w
  double frequency = 0.0;
  bool causal_check_passed = true;
  std::vector<long long> delta_second_sizes;  // per trial |Delta| at w
};

// Scripted double-spend experiment: the adversary presents tokens at both
// target points in every trial.
ForgeryStats run_double_spend(Adversary adversary, Scheme scheme,
                              const bounds::SchemeParams& params,
                              const Geometry& geometry,
                              const std::pair<std::string, std::string>& target,
                              long long trials, std::uint64_t seed);

}  // namespace smoney::protocol

#endif
