#ifndef SMONEY_BOUNDS_HPP
#define SMONEY_BOUNDS_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smoney/qmath.hpp"

namespace smoney::bounds {

using qmath::Angle;
using qmath::Bias;
using qmath::LogProb;

struct SchemeParams {
  long long N = 1;          // transmitted states per round
  int M = 1;                // rounds / log2(presentation points)
  double p_det = 0.0;       // P_det
  double error_rate = 0.0;  // E
  double gamma_det = 0.0;
  double gamma_err = 0.0;
  Bias beta_pb{0.0};
  Bias beta_ps{0.0};
  Bias beta_e{0.0};
  Angle theta = Angle::radians(0.0);
  double p_noqub = 0.0;
  double mu = 0.0;
  double eta = 1.0;
};

struct FreeVariables {
  double nu_cor = 0.0;  // correctness slack
  double nu_unf = 0.0;  // unforgeability slack
};

struct ConstraintCheck {
  std::string name;
  bool ok = false;
  double margin = 0.0;  // positive when satisfied, amount by which it holds
};

class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const ConstraintCheck& violated)
      : std::runtime_error("precondition violated: " + violated.name),
        constraint(violated) {}
  ConstraintCheck constraint;
};

// Robustness: eps_rob = e^{-(P_det N / 2)(1 - gamma_det / P_det)^2},
// requires 0 < gamma_det < P_det.
std::vector<ConstraintCheck> check_rob_constraints(const SchemeParams& p);
LogProb epsilon_rob(const SchemeParams& p);

// Correctness: two-term bound. T1 covers |Delta_b| falling below nu_cor N,
// T2 covers the error count exceeding gamma_err |Delta_b|.
struct CorrectnessBound {
  LogProb term_delta;   // -(P_det(1-2b)N/4)(1 - 2nu/(P_det(1-2b)))^2
  LogProb term_errors;  // -(E nu N/3)(gamma_err/E - 1)^2
  LogProb total;        // log-sum of the two
};
std::vector<ConstraintCheck> check_cor_constraints(const SchemeParams& p,
                                                   const FreeVariables& v);
CorrectnessBound epsilon_cor(const SchemeParams& p, const FreeVariables& v);

// Privacy: beta_E for M = 1; (1/2^M)[(1+2 beta_E)^M - 1] in general.
double epsilon_priv(Bias beta_e, int M);

// Unforgeability (two presentation points).
struct UnforgeabilityBound {
  double lambda = 0.0;
  double delta = 0.0;
  double h = 0.0;
  double f = 0.0;
  LogProb term_noqub;  // -(P_noqub N/3)(nu_unf/P_noqub - 1)^2
  LogProb term_forge;  // -N f
  LogProb total;
  bool guaranteed = false;  // all constraints hold and f > 0
  std::string no_guarantee_reason;
  std::vector<ConstraintCheck> constraints;
};
std::vector<ConstraintCheck> check_unf_constraints(const SchemeParams& p,
                                                   const FreeVariables& v);
UnforgeabilityBound epsilon_unf(const SchemeParams& p, const FreeVariables& v);

// Multi-point scaling. Exact forms 1-(1-eps)^M alongside the linear
// M*eps / C*eps Bernoulli bounds, all in log space.
struct MultiBound {
  LogProb rob_exact, rob_linear;
  LogProb cor_exact, cor_linear;
  double priv = 0.0;
  std::optional<LogProb> unf;  // C * eps_unf; absent when not guaranteed
  long long spacelike_pairs = 0;
};
MultiBound epsilon_multi(const SchemeParams& p, const FreeVariables& v,
                         long long spacelike_pairs);

// Full single-configuration report (all four bounds), JSON-serialisable.
// Domain boundaries (theta = 0, beta = 0) are accepted for ideal-case
// evaluation but flagged, since the derivations assume open intervals.
struct BoundReport {
  LogProb eps_rob;
  CorrectnessBound cor;
  double priv = 0.0;
  UnforgeabilityBound unf;
  std::optional<MultiBound> multi;
  std::vector<std::string> boundary_inputs;
  std::string to_json(int indent = 2) const;
};
BoundReport evaluate_bounds(const SchemeParams& p, const FreeVariables& v,
                            std::optional<long long> spacelike_pairs = {});

// ---- feasibility sweep ----------------------------------------------------

struct SweepFixed {
  SchemeParams base;      // biases/theta/E ignored; the rest fixed
  double target = 1e-9;   // eps budget for rob, cor and unf each
  std::optional<double> nu_unf_override;  // default: minimal nu_unf with
                                          // first unf term = target/2
};

struct SweepRow {
  double theta_deg = 0.0;
  double error_rate = 0.0;
  double beta_max = 0.0;
  double gamma_err_opt = 0.0;
  double nu_cor_opt = 0.0;
  double nu_unf = 0.0;
  double cor1_exp = 0.0, cor2_exp = 0.0;
  double unf1_exp = 0.0, unf2_exp = 0.0;
  std::string note;  // "infeasible: ..." when beta_max = 0
};

// For each (theta, E) grid point, the largest beta = beta_PS = beta_PB for
// which the correctness terms and the second unforgeability term each stay
// within target/2 for some (nu_cor, gamma_err). Deterministic: bisection on
// beta over an inner coordinate grid refined until the result moves < 1%.
std::vector<SweepRow> sweep_beta_max(const SweepFixed& fixed,
                                     std::span<const Angle> theta_grid,
                                     std::span<const double> error_rates,
                                     int jobs = 1);

// Minimal nu_unf for which the first unforgeability term equals target/2.
double default_nu_unf(double p_noqub, double N, double target);

std::string sweep_csv(std::span<const SweepRow> rows);

}  // namespace smoney::bounds

#endif
