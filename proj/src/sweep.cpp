#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "smoney/bounds.hpp"

namespace smoney::bounds {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct SweepContext {
  double N = 0.0;
  double p_det = 0.0;
  double gamma_det = 0.0;
  double p_noqub = 0.0;
  double nu_unf = 0.0;
  double budget = 0.0;  // ln(2/target): every exponent must clear this
};

struct InnerEval {
  double score = kNegInf;  // min slack over the exponent conditions
  double gamma_err = 0.0, nu_cor = 0.0;
  double cor1 = 0.0, cor2 = 0.0, nf = 0.0;  // exponent magnitudes
  bool feasible() const { return score >= 0.0; }
};

// Exponent slacks for one (gamma_err, nu_cor) at fixed beta. Hard domain
// violations score -inf; otherwise the score is the worst slack, so the grid
// refinement can climb toward feasibility.
InnerEval eval_inner(const SweepContext& c, double lambda, double sin2t,
                     double beta, double error_rate, double gamma_err,
                     double nu_cor) {
  InnerEval ev;
  ev.gamma_err = gamma_err;
  ev.nu_cor = nu_cor;

  const double width = c.p_det * (1.0 - 2.0 * beta);
  if (!(width > 0.0 && nu_cor > 0.0 && nu_cor < width / 2.0)) return ev;
  if (!(gamma_err > error_rate && gamma_err < 2.0 * error_rate)) return ev;
  if (!(gamma_err < lambda)) return ev;
  if (!(c.nu_unf < c.gamma_det * (1.0 - gamma_err / lambda))) return ev;

  const double slack = c.gamma_det - c.nu_unf;
  const double delta = c.gamma_det * gamma_err / slack;
  const double rd = 1.0 - delta / lambda;
  const double lead = lambda / 2.0 * rd * rd;
  if (!(beta < 0.5 * std::expm1(lead))) return ev;

  const double b2 = 2.0 * beta * beta;
  const double h = 2.0 * beta * std::sqrt(0.5 + b2 + (0.5 - b2) * sin2t);
  const double f =
      slack * (lead - std::log1p(2.0 * beta)) - (1.0 - slack) * std::log1p(h);
  if (!(f > 0.0)) return ev;

  const double r1 = 1.0 - 2.0 * nu_cor / width;
  ev.cor1 = width * c.N / 4.0 * r1 * r1;
  const double r2 = gamma_err / error_rate - 1.0;
  ev.cor2 = error_rate * nu_cor * c.N / 3.0 * r2 * r2;
  ev.nf = c.N * f;
  ev.score = std::min({ev.cor1 - c.budget, ev.cor2 - c.budget,
                       ev.nf - c.budget});
  return ev;
}

// Best inner point for a given beta: coarse grid over the (gamma_err, nu_cor)
// box, re-centred and shrunk `levels` times around the best score.
InnerEval search_inner(const SweepContext& c, double lambda, double sin2t,
                       double beta, double error_rate, int levels) {
  const int kGrid = 24;
  double glo = error_rate;
  double ghi = std::min(2.0 * error_rate,
                        lambda * (1.0 - c.nu_unf / c.gamma_det));
  double nlo = 0.0;
  double nhi = c.p_det * (1.0 - 2.0 * beta) / 2.0;
  if (!(ghi > glo) || !(nhi > nlo)) return InnerEval{};

  const double glo0 = glo, ghi0 = ghi, nlo0 = nlo, nhi0 = nhi;
  InnerEval best;
  for (int level = 0; level < levels; ++level) {
    InnerEval level_best;
    for (int i = 0; i < kGrid; ++i) {
      const double g = glo + (i + 0.5) * (ghi - glo) / kGrid;
      for (int j = 0; j < kGrid; ++j) {
        const double nu = nlo + (j + 0.5) * (nhi - nlo) / kGrid;
        const InnerEval ev =
            eval_inner(c, lambda, sin2t, beta, error_rate, g, nu);
        if (ev.score > level_best.score) level_best = ev;
      }
    }
    if (level_best.score > best.score) best = level_best;
    if (level_best.score == kNegInf) break;
    const double gstep = (ghi - glo) / kGrid;
    const double nstep = (nhi - nlo) / kGrid;
    glo = std::max(glo0, level_best.gamma_err - 1.5 * gstep);
    ghi = std::min(ghi0, level_best.gamma_err + 1.5 * gstep);
    nlo = std::max(nlo0, level_best.nu_cor - 1.5 * nstep);
    nhi = std::min(nhi0, level_best.nu_cor + 1.5 * nstep);
  }
  return best;
}

SweepRow solve_point(const SweepContext& c, Angle theta, double error_rate,
                     int levels) {
  SweepRow row;
  row.theta_deg = theta.deg();
  row.error_rate = error_rate;
  row.nu_unf = c.nu_unf;
  const double sin2t = std::sin(2.0 * theta.rad());
  const double rq = c.nu_unf / c.p_noqub - 1.0;
  row.unf1_exp = -(c.p_noqub * c.N / 3.0) * rq * rq;

  if (!(c.nu_unf > c.p_noqub && c.nu_unf < 2.0 * c.p_noqub)) {
    row.note = "infeasible: nu_unf outside (P_noqub, 2 P_noqub)";
    return row;
  }

  auto lambda_at = [&](double beta) {
    return qmath::lambda_bound(theta, qmath::Bias(beta));
  };

  InnerEval at_zero = search_inner(c, lambda_at(0.0), sin2t, 0.0, error_rate,
                                   levels);
  if (!at_zero.feasible()) {
    row.note = "infeasible: no (gamma_err, nu_cor) satisfies the budget at beta=0";
    return row;
  }

  double lo = 0.0, hi = 0.25;
  InnerEval lo_eval = at_zero;
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const InnerEval ev =
        search_inner(c, lambda_at(mid), sin2t, mid, error_rate, levels);
    if (ev.feasible()) {
      lo = mid;
      lo_eval = ev;
    } else {
      hi = mid;
    }
    if (hi - lo < std::max(1e-15, 5e-4 * lo)) break;
  }

  row.beta_max = lo;
  row.gamma_err_opt = lo_eval.gamma_err;
  row.nu_cor_opt = lo_eval.nu_cor;
  row.cor1_exp = -lo_eval.cor1;
  row.cor2_exp = -lo_eval.cor2;
  row.unf2_exp = -lo_eval.nf;
  return row;
}

}  // namespace

double default_nu_unf(double p_noqub, double N, double target) {
  const double budget = std::log(2.0 / target);
  return p_noqub * (1.0 + std::sqrt(3.0 * budget / (p_noqub * N)));
}

std::vector<SweepRow> sweep_beta_max(const SweepFixed& fixed,
                                     std::span<const Angle> theta_grid,
                                     std::span<const double> error_rates,
                                     int jobs) {
  if (theta_grid.empty() || error_rates.empty())
    throw std::domain_error("sweep_beta_max: empty grid");
  if (!(fixed.target > 0.0 && fixed.target < 1.0))
    throw std::domain_error("sweep_beta_max: target outside (0, 1)");

  SweepContext c;
  c.N = static_cast<double>(fixed.base.N);
  c.p_det = fixed.base.p_det;
  c.gamma_det = fixed.base.gamma_det;
  c.p_noqub = fixed.base.p_noqub;
  c.budget = std::log(2.0 / fixed.target);
  c.nu_unf = fixed.nu_unf_override
                 ? *fixed.nu_unf_override
                 : default_nu_unf(c.p_noqub, c.N, fixed.target);

  struct Task {
    Angle theta;
    double error_rate;
  };
  std::vector<Task> tasks;
  for (const Angle& th : theta_grid)
    for (double e : error_rates) tasks.push_back(Task{th, e});

  std::vector<SweepRow> rows(tasks.size());
  auto solve_task = [&](std::size_t idx) {
    const Task& t = tasks[idx];
    // Refine the inner grid until beta_max moves by less than 1%.
    SweepRow prev = solve_point(c, t.theta, t.error_rate, 2);
    for (int levels = 3; levels <= 6; ++levels) {
      SweepRow next = solve_point(c, t.theta, t.error_rate, levels);
      const bool settled =
          std::abs(next.beta_max - prev.beta_max) <= 0.01 * next.beta_max;
      prev = next;
      if (settled) break;
    }
    rows[idx] = prev;
  };

  jobs = std::max(1, jobs);
  if (jobs == 1 || tasks.size() == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) solve_task(i);
  } else {
    std::vector<std::thread> workers;
    std::size_t stride = static_cast<std::size_t>(jobs);
    for (int j = 0; j < jobs; ++j)
      workers.emplace_back([&, j, stride]() {
        for (std::size_t i = static_cast<std::size_t>(j); i < tasks.size();
             i += stride)
          solve_task(i);
      });
    for (auto& w : workers) w.join();
  }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "theta_deg,E,beta_max,gamma_err_opt,nu_cor_opt,nu_unf,"
         "cor_term1_exp,cor_term2_exp,unf_term1_exp,unf_term2_exp,note\n";
  out.precision(12);
  for (const SweepRow& r : rows) {
    out << r.theta_deg << ',' << r.error_rate << ',' << r.beta_max << ','
        << r.gamma_err_opt << ',' << r.nu_cor_opt << ',' << r.nu_unf << ','
        << r.cor1_exp << ',' << r.cor2_exp << ',' << r.unf1_exp << ','
        << r.unf2_exp << ',' << r.note << '\n';
  }
  return out.str();
}

}  // namespace smoney::bounds
