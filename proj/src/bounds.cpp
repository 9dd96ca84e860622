#include "smoney/bounds.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"

namespace smoney::bounds {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

ConstraintCheck strict_less(const std::string& name, double lhs, double rhs) {
  return ConstraintCheck{name, lhs < rhs, rhs - lhs};
}

void require_all(const std::vector<ConstraintCheck>& checks) {
  for (const auto& c : checks)
    if (!c.ok) throw PreconditionError(c);
}

// 1 - (1 - e^l)^M in log space, stable for l as small as -1e6.
double log_one_minus_pow(double log_eps, int M) {
  if (log_eps >= 0.0) return 0.0;
  if (log_eps < -700.0) {
    // linear regime: exact and Bernoulli bound coincide to double precision
    return std::log(static_cast<double>(M)) + log_eps;
  }
  const double eps = std::exp(log_eps);
  return std::log(-std::expm1(static_cast<double>(M) * std::log1p(-eps)));
}

}  // namespace

std::vector<ConstraintCheck> check_rob_constraints(const SchemeParams& p) {
  return {strict_less("0 < gamma_det", 0.0, p.gamma_det),
          strict_less("gamma_det < P_det", p.gamma_det, p.p_det)};
}

LogProb epsilon_rob(const SchemeParams& p) {
  require_all(check_rob_constraints(p));
  const double ratio = 1.0 - p.gamma_det / p.p_det;
  return qmath::log_prob(-0.5 * p.p_det * static_cast<double>(p.N) * ratio *
                         ratio);
}

std::vector<ConstraintCheck> check_cor_constraints(const SchemeParams& p,
                                                   const FreeVariables& v) {
  const double half_width = p.p_det * (1.0 - 2.0 * p.beta_pb.value()) / 2.0;
  return {strict_less("0 < gamma_err/2", 0.0, p.gamma_err / 2.0),
          strict_less("gamma_err/2 < E", p.gamma_err / 2.0, p.error_rate),
          strict_less("E < gamma_err", p.error_rate, p.gamma_err),
          strict_less("0 < nu_cor", 0.0, v.nu_cor),
          strict_less("nu_cor < P_det(1-2*beta_PB)/2", v.nu_cor, half_width)};
}

CorrectnessBound epsilon_cor(const SchemeParams& p, const FreeVariables& v) {
  require_all(check_cor_constraints(p, v));
  const double N = static_cast<double>(p.N);
  const double width = p.p_det * (1.0 - 2.0 * p.beta_pb.value());
  const double r1 = 1.0 - 2.0 * v.nu_cor / width;
  const double t1 = -(width * N / 4.0) * r1 * r1;
  const double r2 = p.gamma_err / p.error_rate - 1.0;
  const double t2 = -(p.error_rate * v.nu_cor * N / 3.0) * r2 * r2;
  // the two-term sum can exceed 1; a probability bound saturates there
  return CorrectnessBound{
      qmath::log_prob(t1), qmath::log_prob(t2),
      qmath::log_prob(std::min(0.0, qmath::log_sum_exp(t1, t2)))};
}

double epsilon_priv(Bias beta_e, int M) {
  if (M < 1) throw std::domain_error("epsilon_priv: M must be >= 1");
  if (M == 1) return beta_e.value();
  return std::exp2(-M) * std::expm1(M * std::log1p(2.0 * beta_e.value()));
}

std::vector<ConstraintCheck> check_unf_constraints(const SchemeParams& p,
                                                   const FreeVariables& v) {
  const double lambda = qmath::lambda_bound(p.theta, p.beta_pb);
  std::vector<ConstraintCheck> checks;
  checks.push_back(strict_less("0 < gamma_err", 0.0, p.gamma_err));
  checks.push_back(
      strict_less("gamma_err < lambda(theta,beta_PB)", p.gamma_err, lambda));
  checks.push_back(strict_less("0 < P_noqub", 0.0, p.p_noqub));
  checks.push_back(strict_less("P_noqub < nu_unf", p.p_noqub, v.nu_unf));
  checks.push_back(
      strict_less("nu_unf < 2*P_noqub", v.nu_unf, 2.0 * p.p_noqub));
  checks.push_back(strict_less("nu_unf < gamma_det(1 - gamma_err/lambda)",
                               v.nu_unf,
                               p.gamma_det * (1.0 - p.gamma_err / lambda)));
  // beta_PS must stay below the exponential margin; delta requires the
  // previous constraint, so only evaluate when it holds.
  if (checks.back().ok && p.gamma_det > v.nu_unf) {
    const double delta = p.gamma_det * p.gamma_err / (p.gamma_det - v.nu_unf);
    const double r = 1.0 - delta / lambda;
    const double cap = 0.5 * std::expm1(lambda / 2.0 * r * r);
    checks.push_back(strict_less("beta_PS < (exp(lambda/2 (1-delta/lambda)^2)-1)/2",
                                 p.beta_ps.value(), cap));
  } else {
    checks.push_back(ConstraintCheck{
        "beta_PS < (exp(lambda/2 (1-delta/lambda)^2)-1)/2", false, 0.0});
  }
  return checks;
}

UnforgeabilityBound epsilon_unf(const SchemeParams& p,
                                const FreeVariables& v) {
  UnforgeabilityBound out;
  out.constraints = check_unf_constraints(p, v);
  out.lambda = qmath::lambda_bound(p.theta, p.beta_pb);
  out.h = qmath::h_factor(p.beta_ps, p.beta_pb, p.theta);

  bool constraints_ok = true;
  for (const auto& c : out.constraints) constraints_ok &= c.ok;
  if (!constraints_ok) {
    out.guaranteed = false;
    out.no_guarantee_reason = "constraint violated:";
    for (const auto& c : out.constraints)
      if (!c.ok)
        out.no_guarantee_reason +=
            " [" + c.name + " margin " + std::to_string(c.margin) + "]";
    out.term_noqub = qmath::log_prob(0.0);
    out.term_forge = qmath::log_prob(0.0);
    out.total = qmath::log_prob(0.0);
    return out;
  }

  const double N = static_cast<double>(p.N);
  const double slack = p.gamma_det - v.nu_unf;
  out.delta = p.gamma_det * p.gamma_err / slack;
  const double r = 1.0 - out.delta / out.lambda;
  out.f = slack * (out.lambda / 2.0 * r * r - std::log1p(2.0 * p.beta_ps.value())) -
          (1.0 - slack) * std::log1p(out.h);

  const double rq = v.nu_unf / p.p_noqub - 1.0;
  out.term_noqub = qmath::log_prob(-(p.p_noqub * N / 3.0) * rq * rq);
  out.term_forge = qmath::log_prob(-N * out.f);

  if (out.f <= 0.0) {
    out.guaranteed = false;
    out.no_guarantee_reason = "f <= 0: bound vacuous, UNFORGEABILITY NOT GUARANTEED";
    out.total = qmath::log_prob(0.0);
    return out;
  }
  out.guaranteed = true;
  out.total = qmath::log_prob(std::min(
      0.0,
      qmath::log_sum_exp(out.term_noqub.log_value, out.term_forge.log_value)));
  return out;
}

MultiBound epsilon_multi(const SchemeParams& p, const FreeVariables& v,
                         long long spacelike_pairs) {
  if (spacelike_pairs < 0)
    throw std::domain_error("epsilon_multi: C must be >= 0");
  MultiBound out;
  out.spacelike_pairs = spacelike_pairs;
  const int M = p.M;
  if (M < 1) throw std::domain_error("epsilon_multi: M must be >= 1");

  const LogProb rob = epsilon_rob(p);
  out.rob_exact = qmath::log_prob(log_one_minus_pow(rob.log_value, M));
  out.rob_linear = qmath::log_prob(
      std::min(0.0, std::log(static_cast<double>(M)) + rob.log_value));

  const CorrectnessBound cor = epsilon_cor(p, v);
  out.cor_exact = qmath::log_prob(log_one_minus_pow(cor.total.log_value, M));
  out.cor_linear = qmath::log_prob(
      std::min(0.0, std::log(static_cast<double>(M)) + cor.total.log_value));

  out.priv = epsilon_priv(p.beta_e, M);

  const UnforgeabilityBound unf = epsilon_unf(p, v);
  if (unf.guaranteed && spacelike_pairs > 0)
    out.unf = qmath::log_prob(
        std::min(0.0, std::log(static_cast<double>(spacelike_pairs)) +
                          unf.total.log_value));
  else if (unf.guaranteed && spacelike_pairs == 0)
    out.unf = qmath::log_prob(kNegInf);  // no spacelike pair to double-spend at
  return out;
}

BoundReport evaluate_bounds(const SchemeParams& p, const FreeVariables& v,
                            std::optional<long long> spacelike_pairs) {
  BoundReport rep;
  rep.eps_rob = epsilon_rob(p);
  rep.cor = epsilon_cor(p, v);
  rep.priv = epsilon_priv(p.beta_e, p.M);
  rep.unf = epsilon_unf(p, v);
  if (spacelike_pairs) rep.multi = epsilon_multi(p, v, *spacelike_pairs);
  if (p.theta.rad() == 0.0) rep.boundary_inputs.push_back("theta = 0");
  if (p.theta.rad() >= qmath::kPi / 4.0)
    rep.boundary_inputs.push_back("theta = pi/4");
  if (p.beta_pb.value() == 0.0) rep.boundary_inputs.push_back("beta_PB = 0");
  if (p.beta_ps.value() == 0.0) rep.boundary_inputs.push_back("beta_PS = 0");
  if (p.beta_e.value() == 0.0) rep.boundary_inputs.push_back("beta_E = 0");
  return rep;
}

std::string BoundReport::to_json(int indent) const {
  nlohmann::json j;
  j["eps_rob"] = {{"log", eps_rob.log_value}, {"linear", eps_rob.linear()}};
  j["eps_cor"] = {{"log", cor.total.log_value},
                  {"linear", cor.total.linear()},
                  {"term_delta_log", cor.term_delta.log_value},
                  {"term_errors_log", cor.term_errors.log_value}};
  j["eps_priv"] = priv;
  nlohmann::json ju;
  ju["lambda"] = unf.lambda;
  ju["h"] = unf.h;
  ju["guaranteed"] = unf.guaranteed;
  if (unf.guaranteed) {
    ju["delta"] = unf.delta;
    ju["f"] = unf.f;
    ju["log"] = unf.total.log_value;
    ju["linear"] = unf.total.linear();
    ju["term_noqub_log"] = unf.term_noqub.log_value;
    ju["term_forge_log"] = unf.term_forge.log_value;
  } else {
    ju["reason"] = unf.no_guarantee_reason;
  }
  nlohmann::json constraints = nlohmann::json::array();
  for (const auto& c : unf.constraints)
    constraints.push_back(
        {{"name", c.name}, {"ok", c.ok}, {"margin", c.margin}});
  ju["constraints"] = constraints;
  j["eps_unf"] = ju;
  if (multi) {
    j["multi"] = {{"rob_exact_log", multi->rob_exact.log_value},
                  {"rob_linear_log", multi->rob_linear.log_value},
                  {"cor_exact_log", multi->cor_exact.log_value},
                  {"cor_linear_log", multi->cor_linear.log_value},
                  {"priv", multi->priv},
                  {"spacelike_pairs", multi->spacelike_pairs}};
    if (multi->unf) j["multi"]["unf_log"] = multi->unf->log_value;
  }
  if (!boundary_inputs.empty()) j["boundary_inputs"] = boundary_inputs;
  return j.dump(indent);
}

}  // namespace smoney::bounds
