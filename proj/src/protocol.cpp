#include "smoney/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "smoney/rng.hpp"

namespace smoney::protocol {

using spacetime::Point;
using spacetime::causally_precedes;

Scheme scheme_from_string(const std::string& name) {
  if (name == "IQT1") return Scheme::IQT1;
  if (name == "IQT2") return Scheme::IQT2;
  if (name == "QT1") return Scheme::QT1;
  if (name == "QT2") return Scheme::QT2;
  if (name == "QT1M") return Scheme::QT1M;
  if (name == "QT2M") return Scheme::QT2M;
  throw std::invalid_argument("unknown scheme: " + name);
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::IQT1: return "IQT1";
    case Scheme::IQT2: return "IQT2";
    case Scheme::QT1: return "QT1";
    case Scheme::QT2: return "QT2";
    case Scheme::QT1M: return "QT1M";
    case Scheme::QT2M: return "QT2M";
  }
  return "?";
}

bool is_ideal(Scheme s) { return s == Scheme::IQT1 || s == Scheme::IQT2; }
bool is_multi(Scheme s) { return s == Scheme::QT1M || s == Scheme::QT2M; }
bool is_variant2(Scheme s) {
  return s == Scheme::IQT2 || s == Scheme::QT2 || s == Scheme::QT2M;
}

std::string point_label(unsigned index, int M) {
  std::string label(static_cast<std::size_t>(M), '0');
  for (int l = 0; l < M; ++l)
    if ((index >> l) & 1u) label[static_cast<std::size_t>(l)] = '1';
  return label;
}

void Geometry::validate(int M) const {
  const std::size_t expected = 1ull << M;
  if (presentation.size() != expected)
    throw std::invalid_argument("Geometry: need 2^M presentation points");
  for (unsigned i = 0; i < expected; ++i) {
    const std::string want = point_label(i, M);
    bool found = false;
    for (const Point& p : presentation) found |= p.label == want;
    if (!found)
      throw std::invalid_argument("Geometry: missing point label " + want);
  }
  if (!spacetime::intersection_past_contains(stage_point, presentation))
    throw std::invalid_argument(
        "Geometry: stage point outside the intersection of causal pasts");
}

const Point& Geometry::point(const std::string& label) const {
  for (const Point& p : presentation)
    if (p.label == label) return p;
  throw std::invalid_argument("Geometry: no point labelled " + label);
}

Geometry Geometry::two_points_spacelike() {
  Geometry g;
  g.stage_point = Point{0.0, 0.0, "P"};
  g.presentation = {Point{2.0, -1.0, "0"}, Point{2.0, 1.0, "1"}};
  return g;
}

Geometry Geometry::two_points_timelike() {
  Geometry g;
  g.stage_point = Point{0.0, 0.0, "P"};
  g.presentation = {Point{1.0, 0.5, "0"}, Point{3.0, 1.0, "1"}};
  return g;
}

Geometry Geometry::simultaneous(int M) {
  Geometry g;
  const unsigned count = 1u << M;
  g.stage_point = Point{0.0, 0.0, "P"};
  for (unsigned i = 0; i < count; ++i) {
    const double x = 2.0 * (static_cast<double>(i) -
                            (static_cast<double>(count) - 1.0) / 2.0);
    g.presentation.push_back(
        Point{2.0 * static_cast<double>(count), x, point_label(i, M)});
  }
  return g;
}

std::vector<std::size_t> compute_delta(std::span<const std::uint8_t> s,
                                       std::span<const std::uint8_t> d_tilde) {
  if (s.size() != d_tilde.size())
    throw std::invalid_argument("compute_delta: length mismatch");
  std::vector<std::size_t> delta;
  for (std::size_t j = 0; j < s.size(); ++j)
    if (s[j] == d_tilde[j]) delta.push_back(j);
  return delta;
}

bool validate_token(std::span<const std::uint8_t> x_b,
                    std::span<const std::uint8_t> r_b, double gamma_err,
                    bool prior_presentation_signal) {
  if (x_b.size() != r_b.size())
    throw std::invalid_argument("validate_token: length mismatch");
  if (prior_presentation_signal) return false;
  long long distance = 0;
  for (std::size_t j = 0; j < x_b.size(); ++j)
    distance += (x_b[j] != r_b[j]) ? 1 : 0;
  return static_cast<double>(distance) <=
         gamma_err * static_cast<double>(x_b.size());
}

namespace {

struct RunConfig {
  Scheme scheme;
  int M = 1;
  bool ideal = false, multi = false, variant2 = false;
  double p_det = 1.0, error_rate = 0.0;
  double p_t0 = 0.5, p_u0 = 0.5, p_z0 = 0.5;
  double gamma_det = 0.0, gamma_err = 0.0;
};

RunConfig make_config(Scheme scheme, const bounds::SchemeParams& params) {
  RunConfig c;
  c.scheme = scheme;
  c.ideal = is_ideal(scheme);
  c.multi = is_multi(scheme);
  c.variant2 = is_variant2(scheme);
  c.M = c.multi ? params.M : 1;
  if (c.multi && params.M < 1)
    throw std::invalid_argument("run: M must be >= 1");
  c.p_det = c.ideal ? 1.0 : params.p_det;
  c.error_rate = c.ideal ? 0.0 : params.error_rate;
  c.p_t0 = 0.5 + params.beta_ps.value();
  c.p_u0 = 0.5 + params.beta_pb.value();
  c.p_z0 = c.ideal ? 0.5 : 0.5 + params.beta_e.value();
  c.gamma_det = c.ideal ? 0.0 : params.gamma_det;
  c.gamma_err = c.ideal ? 0.0 : params.gamma_err;
  return c;
}

// Bob prepares, Alice measures and reports; fills everything except c.
RoundState sample_round(const RunConfig& c, long long N, Rng& rng,
                        bool breidbart = false, bool random_d = false) {
  RoundState rs;
  rs.t.resize(static_cast<std::size_t>(N));
  rs.u.resize(static_cast<std::size_t>(N));
  for (long long k = 0; k < N; ++k) {
    rs.t[k] = rng.bernoulli(c.p_t0) ? 0 : 1;
    rs.u[k] = rng.bernoulli(c.p_u0) ? 0 : 1;
  }
  for (long long k = 0; k < N; ++k)
    if (c.ideal || rng.bernoulli(c.p_det)) rs.lambda.push_back(k);
  const std::size_t n = rs.lambda.size();
  rs.aborted = !c.ideal && static_cast<double>(n) <
                               c.gamma_det * static_cast<double>(N);

  rs.z = rng.bernoulli(c.p_z0) ? 0 : 1;
  rs.y.resize(n);
  rs.x.resize(n);
  rs.r.resize(n);
  rs.s.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const long long k = rs.lambda[j];
    rs.y[j] = c.variant2 ? static_cast<std::uint8_t>(rs.z)
                         : static_cast<std::uint8_t>(rng.uniform_bit());
    rs.r[j] = rs.t[k];
    rs.s[j] = rs.u[k];
    if (breidbart) {
      // Intermediate-basis measurement: matches the prepared bit with
      // probability cos^2(pi/8) whichever basis Bob used.
      constexpr double kBreidbart = 0.85355339059327373;
      rs.x[j] = rng.bernoulli(kBreidbart)
                    ? rs.t[k]
                    : static_cast<std::uint8_t>(1 - rs.t[k]);
    } else if (rs.y[j] == rs.u[k]) {
      const bool flip = c.error_rate > 0.0 && rng.bernoulli(c.error_rate);
      rs.x[j] = flip ? static_cast<std::uint8_t>(1 - rs.t[k]) : rs.t[k];
    } else {
      rs.x[j] = static_cast<std::uint8_t>(rng.uniform_bit());
    }
  }
  rs.d.resize(n);
  if (!c.variant2)
    for (std::size_t j = 0; j < n; ++j)
      rs.d[j] = random_d ? static_cast<std::uint8_t>(rng.uniform_bit())
                         : static_cast<std::uint8_t>(rs.y[j] ^ rs.z);
  return rs;
}

std::vector<std::uint8_t> d_tilde_at(const RunConfig& c, const RoundState& rs,
                                     int point_bit) {
  std::vector<std::uint8_t> dt(rs.s.size());
  for (std::size_t j = 0; j < dt.size(); ++j)
    dt[j] = c.variant2
                ? static_cast<std::uint8_t>(point_bit ^ rs.c)
                : static_cast<std::uint8_t>(rs.d[j] ^ point_bit ^ rs.c);
  return dt;
}

void push_stage1_messages(Transcript& tr, const Geometry& geo,
                          const RunConfig& c, int round) {
  const Point& P = geo.stage_point;
  auto push = [&](std::string sender, std::string receiver, std::string kind,
                  Point recv_at, bool on_b = false) {
    tr.messages.push_back(Message{std::move(sender), std::move(receiver),
                                  std::move(kind), round, P, recv_at, on_b});
  };
  push("B", "A", "quantum_states", P);
  tr.last_quantum_seq = static_cast<long long>(tr.messages.size()) - 1;
  push("A", "B", "lambda_report", P);
  push("A", "B", "g_function", P);
  for (const Point& q : geo.presentation)
    push("A", "A_" + q.label, "outcomes_to_agent", q);
  if (!c.variant2) {
    push("A", "B", "d_string", P);
    for (const Point& q : geo.presentation)
      push("B", "B_" + q.label, "d_to_agent", q);
  }
  for (const Point& q : geo.presentation)
    push("B", "B_" + q.label, "rs_to_agent", q);
}

void push_commit_messages(Transcript& tr, const Geometry& geo, int round) {
  const Point& P = geo.stage_point;
  tr.messages.push_back(
      Message{"A", "B", "c_bit", round, P, P, true});
  if (tr.first_b_seq < 0)
    tr.first_b_seq = static_cast<long long>(tr.messages.size()) - 1;
  for (const Point& q : geo.presentation)
    tr.messages.push_back(
        Message{"B", "B_" + q.label, "c_to_agent", round, P, q, true});
}

// A presentation at Q_i alerts every agent whose point lies in the causal
// future of Q_i. The signal travels at light speed from the presentation.
void push_presentation_signals(Transcript& tr, const Geometry& geo,
                               const std::string& presented_label) {
  const Point& from = geo.point(presented_label);
  for (const Point& q : geo.presentation) {
    if (q.label == presented_label) continue;
    if (causally_precedes(from, q))
      tr.messages.push_back(Message{"B_" + presented_label, "B_" + q.label,
                                    "presented_signal", -1, from, q, true});
  }
}

// Decision at one presentation point, with the mechanical causal-past check
// on every message the validator reads.
PointDecision decide_at(const Transcript& tr, const RunConfig& c,
                        const Geometry& geo, const std::string& label,
                        const std::vector<std::vector<std::uint8_t>>& tokens) {
  PointDecision dec;
  dec.label = label;
  dec.token_presented = true;
  const Point& q = geo.point(label);

  // Reads: every message addressed to this agent plus the token itself.
  // Step-12 blocking comes from the received presentation signals.
  const std::string me = "B_" + label;
  bool prior_signal = false;
  for (const Message& msg : tr.messages) {
    if (msg.receiver != me) continue;
    if (!causally_precedes(msg.sent_at, q)) dec.causal_ok = false;
    if (c.multi && msg.kind == "presented_signal") prior_signal = true;
  }
  dec.blocked_by_prior_signal = prior_signal;

  bool all_rounds_ok = true;
  for (int l = 0; l < c.M; ++l) {
    const RoundState& rs = tr.rounds[static_cast<std::size_t>(l)];
    const int bit = label[static_cast<std::size_t>(l)] == '1' ? 1 : 0;
    const std::vector<std::uint8_t> dt = d_tilde_at(c, rs, bit);
    const std::vector<std::size_t> delta = compute_delta(rs.s, dt);
    dec.delta_sizes.push_back(static_cast<long long>(delta.size()));
    long long dist = 0;
    const auto& token = tokens[static_cast<std::size_t>(l)];
    for (std::size_t j : delta)
      dist += (token[j] != rs.r[j]) ? 1 : 0;
    dec.hamming.push_back(dist);
    const bool ok = static_cast<double>(dist) <=
                    c.gamma_err * static_cast<double>(delta.size());
    all_rounds_ok &= ok;
  }
  dec.accepted = all_rounds_ok && !prior_signal;
  return dec;
}

}  // namespace

Transcript run_honest(Scheme scheme, const bounds::SchemeParams& params,
                      const Geometry& geometry,
                      std::span<const std::uint8_t> b, std::uint64_t seed) {
  const RunConfig c = make_config(scheme, params);
  if (b.size() != static_cast<std::size_t>(c.M))
    throw std::invalid_argument("run_honest: b must have M bits");
  geometry.validate(c.M);

  Transcript tr;
  tr.scheme = scheme;
  tr.M = c.M;
  tr.N = params.N;
  tr.b.assign(b.begin(), b.end());

  Rng rng(seed);
  for (int l = 0; l < c.M; ++l) {
    RoundState rs = sample_round(c, params.N, rng);
    push_stage1_messages(tr, geometry, c, l);
    tr.aborted |= rs.aborted;
    tr.rounds.push_back(std::move(rs));
  }
  if (tr.aborted) return tr;

  std::string label(static_cast<std::size_t>(c.M), '0');
  for (int l = 0; l < c.M; ++l) {
    RoundState& rs = tr.rounds[static_cast<std::size_t>(l)];
    rs.c = b[static_cast<std::size_t>(l)] ^ rs.z;
    if (b[static_cast<std::size_t>(l)]) label[static_cast<std::size_t>(l)] = '1';
    push_commit_messages(tr, geometry, l);
  }

  const Point& qb = geometry.point(label);
  tr.messages.push_back(Message{"A", "A_" + label, "present_signal", -1,
                                geometry.stage_point, qb, true});
  tr.messages.push_back(
      Message{"A_" + label, "B_" + label, "token", -1, qb, qb, true});

  std::vector<std::vector<std::uint8_t>> tokens;
  for (const RoundState& rs : tr.rounds) tokens.push_back(rs.x);
  if (c.multi) push_presentation_signals(tr, geometry, label);
  PointDecision dec = decide_at(tr, c, geometry, label, tokens);
  tr.causal_check_passed = dec.causal_ok;
  tr.validated = dec.accepted;
  tr.decisions.push_back(std::move(dec));
  return tr;
}

bool flexibility_check(const Transcript& transcript) {
  if (transcript.first_b_seq < 0) return true;  // b never consumed
  return transcript.first_b_seq > transcript.last_quantum_seq;
}

Adversary adversary_from_string(const std::string& name) {
  if (name == "measure_once_replay") return Adversary::measure_once_replay;
  if (name == "random_second_token") return Adversary::random_second_token;
  if (name == "basis_guess") return Adversary::basis_guess;
  throw std::invalid_argument("unknown adversary: " + name);
}

std::string to_string(Adversary a) {
  switch (a) {
    case Adversary::measure_once_replay: return "measure_once_replay";
    case Adversary::random_second_token: return "random_second_token";
    case Adversary::basis_guess: return "basis_guess";
  }
  return "?";
}

ForgeryStats run_double_spend(Adversary adversary, Scheme scheme,
                              const bounds::SchemeParams& params,
                              const Geometry& geometry,
                              const std::pair<std::string, std::string>& target,
                              long long trials, std::uint64_t seed) {
  const RunConfig c = make_config(scheme, params);
  geometry.validate(c.M);
  if (target.first == target.second)
    throw std::invalid_argument("run_double_spend: target points must differ");
  geometry.point(target.first);
  geometry.point(target.second);

  ForgeryStats stats;
  stats.trials = trials;
  stats.delta_second_sizes.reserve(static_cast<std::size_t>(trials));

  for (long long trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(trial));

    Transcript tr;
    tr.scheme = scheme;
    tr.M = c.M;
    tr.N = params.N;

    const bool breidbart = adversary == Adversary::basis_guess;
    bool aborted = false;
    for (int l = 0; l < c.M; ++l) {
      RoundState rs = sample_round(c, params.N, rng, breidbart, breidbart);
      push_stage1_messages(tr, geometry, c, l);
      aborted |= rs.aborted;
      tr.rounds.push_back(std::move(rs));
    }
    if (aborted) {
      stats.delta_second_sizes.push_back(0);
      continue;
    }

    // Commitment: aims at the first target point (irrelevant for
    // basis_guess, where c is uniform).
    for (int l = 0; l < c.M; ++l) {
      RoundState& rs = tr.rounds[static_cast<std::size_t>(l)];
      const int vbit = target.first[static_cast<std::size_t>(l)] == '1' ? 1 : 0;
      rs.c = breidbart ? rng.uniform_bit() : (vbit ^ rs.z);
      push_commit_messages(tr, geometry, l);
    }

    // Tokens: the measured string at both points, except random_second_token
    // which presents fresh uniform bits at the second point.
    std::vector<std::vector<std::uint8_t>> token_first, token_second;
    for (const RoundState& rs : tr.rounds) {
      token_first.push_back(rs.x);
      if (adversary == Adversary::random_second_token) {
        std::vector<std::uint8_t> fresh(rs.x.size());
        for (auto& bit : fresh)
          bit = static_cast<std::uint8_t>(rng.uniform_bit());
        token_second.push_back(std::move(fresh));
      } else {
        token_second.push_back(rs.x);
      }
    }

    for (const std::string& label : {target.first, target.second}) {
      const Point& q = geometry.point(label);
      tr.messages.push_back(
          Message{"A_" + label, "B_" + label, "token", -1, q, q, true});
      if (c.multi) push_presentation_signals(tr, geometry, label);
    }

    const PointDecision dec_v =
        decide_at(tr, c, geometry, target.first, token_first);
    const PointDecision dec_w =
        decide_at(tr, c, geometry, target.second, token_second);

    stats.causal_check_passed &= dec_v.causal_ok && dec_w.causal_ok;
    stats.accepted_first += dec_v.accepted ? 1 : 0;
    stats.accepted_second += dec_w.accepted ? 1 : 0;
    stats.successes += (dec_v.accepted && dec_w.accepted) ? 1 : 0;
    long long delta_w_total = 0;
    for (long long ds : dec_w.delta_sizes) delta_w_total += ds;
    stats.delta_second_sizes.push_back(delta_w_total);
  }

  stats.frequency = trials > 0 ? static_cast<double>(stats.successes) /
                                     static_cast<double>(trials)
                               : 0.0;
  return stats;
}

std::string Transcript::to_jsonl() const {
  std::ostringstream out;
  for (const Message& m : messages) {
    nlohmann::json j;
    j["from"] = m.sender;
    j["to"] = m.receiver;
    j["kind"] = m.kind;
    if (m.round >= 0) j["round"] = m.round;
    j["send"] = {{"t", m.sent_at.t}, {"x", m.sent_at.x}};
    j["recv"] = {{"t", m.received_at.t}, {"x", m.received_at.x}};
    j["depends_on_b"] = m.depends_on_b;
    out << j.dump() << '\n';
  }
  return out.str();
}

}  // namespace smoney::protocol
