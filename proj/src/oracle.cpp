#include "smoney/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace smoney::oracle {

namespace {

using EigenMat = Eigen::Matrix<Cmplx, Eigen::Dynamic, Eigen::Dynamic>;

long long hamming_budget(int N, double gamma_err) {
  if (gamma_err >= 1.0) return N;
  const double product = gamma_err * static_cast<double>(N);
  return static_cast<long long>(
      std::floor(product + std::max(1e-12, 8.0 * product * 1e-16)));
}

}  // namespace

std::vector<double> hermitian_eigenvalues(const DenseMatrix& m) {
  const int n = m.dim;
  EigenMat h(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      h(r, c) = 0.5 * (m.at(r, c) + std::conj(m.at(c, r)));
  Eigen::SelfAdjointEigenSolver<EigenMat> solver(h,
                                                 Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("hermitian_eigenvalues: eigensolver failed");
  std::vector<double> vals(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) vals[static_cast<std::size_t>(i)] =
      solver.eigenvalues()(i);
  return vals;
}

void PreparationSpec::validate() const {
  if (N < 1) throw std::domain_error("PreparationSpec: N < 1");
  if (N > kMaxDenseQubits)
    throw std::domain_error("PreparationSpec: N exceeds dense cap of 12");
  if (states.size() != static_cast<std::size_t>(N) ||
      p0.size() != static_cast<std::size_t>(N))
    throw std::domain_error("PreparationSpec: per-position arrays sized != N");
  for (int k = 0; k < N; ++k) {
    for (int u = 0; u < 2; ++u) {
      const auto& s0 = states[k][0][u];
      const auto& s1 = states[k][1][u];
      if (std::abs(s0.norm2() - 1.0) > 1e-12 ||
          std::abs(s1.norm2() - 1.0) > 1e-12)
        throw std::domain_error("PreparationSpec: state not normalised");
      if (std::abs(s0.inner(s1)) > 1e-12)
        throw std::domain_error("PreparationSpec: basis not orthogonal");
    }
    for (int t = 0; t < 2; ++t)
      for (int t2 = 0; t2 < 2; ++t2)
        if (std::abs(states[k][t][0].inner(states[k][t2][1])) >
            overlap_cap + 1e-12)
          throw std::domain_error("PreparationSpec: overlap above declared O");
    if (!(p0[k] >= 0.5 - beta_pb_cap - 1e-12 &&
          p0[k] <= 0.5 + beta_pb_cap + 1e-12))
      throw std::domain_error("PreparationSpec: p0 outside declared bias box");
  }
}

bool PreparationSpec::homogeneous() const {
  for (int k = 1; k < N; ++k) {
    if (p0[k] != p0[0]) return false;
    for (int t = 0; t < 2; ++t)
      for (int u = 0; u < 2; ++u) {
        if (std::abs(states[k][t][u].a0 - states[0][t][u].a0) > 1e-15 ||
            std::abs(states[k][t][u].a1 - states[0][t][u].a1) > 1e-15)
          return false;
      }
  }
  return true;
}

double PreparationSpec::realized_overlap() const {
  double best = 0.0;
  for (int k = 0; k < N; ++k)
    for (int t = 0; t < 2; ++t)
      for (int t2 = 0; t2 < 2; ++t2)
        best = std::max(best, std::abs(states[k][t][0].inner(states[k][t2][1])));
  return best;
}

double PreparationSpec::realized_bias() const {
  double best = 0.0;
  for (double p : p0) best = std::max(best, std::abs(p - 0.5));
  return best;
}

std::uint64_t PreparationSpec::hash() const {
  // FNV-1a over the defining doubles.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xFFULL;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<double>(N));
  mix(overlap_cap);
  mix(beta_pb_cap);
  for (int k = 0; k < N; ++k) {
    mix(p0[k]);
    for (int t = 0; t < 2; ++t)
      for (int u = 0; u < 2; ++u) {
        mix(states[k][t][u].a0.real());
        mix(states[k][t][u].a0.imag());
        mix(states[k][t][u].a1.real());
        mix(states[k][t][u].a1.imag());
      }
  }
  return h;
}

PreparationSpec PreparationSpec::ideal_bb84(int N) {
  PreparationSpec spec;
  spec.N = N;
  spec.states.resize(static_cast<std::size_t>(N));
  spec.p0.assign(static_cast<std::size_t>(N), 0.5);
  spec.overlap_cap = qmath::kInvSqrt2;
  spec.beta_pb_cap = 0.0;
  for (int k = 0; k < N; ++k)
    for (int t = 0; t < 2; ++t)
      for (int u = 0; u < 2; ++u)
        spec.states[k][t][u] = qmath::bb84_state(t, u);
  return spec;
}

PreparationSpec PreparationSpec::homogeneous_tilted(int N, Angle theta,
                                                    double xi0, double xi1,
                                                    double p0) {
  if (std::abs(xi0) > theta.rad() + 1e-15 ||
      std::abs(xi1) > theta.rad() + 1e-15)
    throw std::domain_error("homogeneous_tilted: tilt outside [-theta, theta]");
  PreparationSpec spec;
  spec.N = N;
  spec.states.resize(static_cast<std::size_t>(N));
  spec.p0.assign(static_cast<std::size_t>(N), p0);
  spec.overlap_cap = qmath::overlap_O(theta);
  spec.beta_pb_cap = std::abs(p0 - 0.5);
  for (int k = 0; k < N; ++k)
    for (int t = 0; t < 2; ++t) {
      spec.states[k][t][0] = qmath::tilted_state(t, 0, xi0);
      spec.states[k][t][1] = qmath::tilted_state(t, 1, xi1);
    }
  return spec;
}

DenseMatrix build_Dab(const PreparationSpec& spec,
                      std::span<const std::uint8_t> h,
                      std::span<const std::uint8_t> a,
                      std::span<const std::uint8_t> b, double gamma_err) {
  spec.validate();
  const int N = spec.N;
  if (h.size() != static_cast<std::size_t>(N) ||
      a.size() != static_cast<std::size_t>(N) ||
      b.size() != static_cast<std::size_t>(N))
    throw std::invalid_argument("build_Dab: string length != N");
  if (gamma_err < 0.0) throw std::domain_error("build_Dab: gamma_err < 0");

  const int dim = 1 << N;
  const long long budget = hamming_budget(N, gamma_err);
  DenseMatrix D(dim);

  // Per-position 2x2 projectors |phi_{r,s}><phi_{r,s}| cached up front.
  struct Proj { Cmplx m[2][2]; };
  std::vector<std::array<std::array<Proj, 2>, 2>> proj(
      static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k)
    for (int r = 0; r < 2; ++r)
      for (int s = 0; s < 2; ++s) {
        const QubitState& st = spec.states[k][r][s];
        proj[k][r][s].m[0][0] = st.a0 * std::conj(st.a0);
        proj[k][r][s].m[0][1] = st.a0 * std::conj(st.a1);
        proj[k][r][s].m[1][0] = st.a1 * std::conj(st.a0);
        proj[k][r][s].m[1][1] = st.a1 * std::conj(st.a1);
      }

  // Accumulates weight * tensor-product of the selected projectors directly
  // into D; position k occupies bit k of the row/column index.
  std::vector<const Proj*> sel(static_cast<std::size_t>(N));
  auto add_term = [&](double weight) {
    const auto recurse = [&](auto&& self, int k, int row, int col,
                             Cmplx partial) -> void {
      if (k < 0) {
        D.at(row, col) += partial;
        return;
      }
      const Proj& p = *sel[k];
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          self(self, k - 1, row | (i << k), col | (j << k),
               partial * p.m[i][j]);
    };
    recurse(recurse, N - 1, 0, 0, Cmplx{weight, 0.0});
  };

  for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(dim); ++s) {
    double ps = 1.0;
    for (int k = 0; k < N; ++k)
      ps *= ((s >> k) & 1u) ? 1.0 - spec.p0[k] : spec.p0[k];

    for (std::uint32_t r = 0; r < static_cast<std::uint32_t>(dim); ++r) {
      // Split distance: positions with s_k = h_k compare r against a,
      // the rest against b.
      long long dist = 0;
      for (int k = 0; k < N; ++k) {
        const int rk = (r >> k) & 1;
        const int sk = (s >> k) & 1;
        const int ref = (sk == h[k]) ? a[k] : b[k];
        dist += (rk != ref) ? 1 : 0;
      }
      if (dist > budget) continue;

      for (int k = 0; k < N; ++k) sel[k] = &proj[k][(r >> k) & 1][(s >> k) & 1];
      add_term(ps);
    }
  }
  return D;
}

double max_norm_closed(int N, double gamma_err, double overlap,
                       double beta_pb) {
  const double lambda = qmath::lambda_from_overlap(overlap, beta_pb);
  if (gamma_err < 0.0)
    throw std::domain_error("max_norm_closed: gamma_err < 0");
  return qmath::binomial_tail_weighted(N, gamma_err, 1.0 - lambda).linear();
}

double max_norm_chernoff(int N, double gamma_err, double overlap,
                         double beta_pb) {
  const double lambda = qmath::lambda_from_overlap(overlap, beta_pb);
  if (!(gamma_err > 0.0 && gamma_err < lambda))
    throw std::domain_error("max_norm_chernoff: need 0 < gamma_err < lambda");
  const double r = 1.0 - gamma_err / lambda;
  return std::exp(-static_cast<double>(N) * lambda / 2.0 * r * r);
}

namespace {

struct MaxTracker {
  double norm = -1.0;
  std::uint32_t a = 0, b = 0;
};

MaxTracker scan_pairs(const PreparationSpec& spec, double gamma_err,
                      std::span<const std::uint32_t> a_values,
                      std::span<const std::uint32_t> b_values, int jobs) {
  const int N = spec.N;
  std::vector<std::uint8_t> h(static_cast<std::size_t>(N), 0);

  struct Cell { double norm = -1.0; std::uint32_t a = 0, b = 0; };
  std::vector<Cell> cells(a_values.size() * b_values.size());

  auto run_cell = [&](std::size_t idx) {
    const std::uint32_t av = a_values[idx / b_values.size()];
    const std::uint32_t bv = b_values[idx % b_values.size()];
    std::vector<std::uint8_t> a(static_cast<std::size_t>(N));
    std::vector<std::uint8_t> b(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) {
      a[k] = (av >> k) & 1;
      b[k] = (bv >> k) & 1;
    }
    const DenseMatrix D = build_Dab(spec, h, a, b, gamma_err);
    const std::vector<double> eig = hermitian_eigenvalues(D);
    cells[idx] = Cell{eig.back(), av, bv};
  };

  jobs = std::max(1, jobs);
  if (jobs == 1 || cells.size() == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::vector<std::thread> workers;
    for (int j = 0; j < jobs; ++j)
      workers.emplace_back([&, j]() {
        for (std::size_t i = static_cast<std::size_t>(j); i < cells.size();
             i += static_cast<std::size_t>(jobs))
          run_cell(i);
      });
    for (auto& w : workers) w.join();
  }

  MaxTracker best;
  for (const Cell& c : cells)
    if (c.norm > best.norm) best = MaxTracker{c.norm, c.a, c.b};
  return best;
}

}  // namespace

OracleResult max_norm_exact(const PreparationSpec& spec, double gamma_err,
                            int jobs) {
  spec.validate();
  const int N = spec.N;

  OracleResult result;
  result.N = N;
  result.gamma_err = gamma_err;
  result.spec_hash = spec.hash();

  MaxTracker best;
  if (spec.homogeneous()) {
    // Spectrum depends on (a, b) only through alpha = a xor b, and for a
    // homogeneous spec only through the weight of alpha: one representative
    // per weight, a = 0.
    std::vector<std::uint32_t> a_values{0};
    std::vector<std::uint32_t> b_values;
    for (int w = 0; w <= N; ++w)
      b_values.push_back(static_cast<std::uint32_t>((1ULL << w) - 1));
    best = scan_pairs(spec, gamma_err, a_values, b_values, jobs);
  } else {
    if (N > kMaxPairEnumQubits)
      throw std::domain_error(
          "max_norm_exact: inhomogeneous spec needs full 4^N enumeration, "
          "capped at N <= 6");
    std::vector<std::uint32_t> values;
    for (std::uint32_t v = 0; v < (1u << N); ++v) values.push_back(v);
    best = scan_pairs(spec, gamma_err, values, values, jobs);
  }

  result.norm_exact = best.norm;
  result.argmax_a.resize(static_cast<std::size_t>(N));
  result.argmax_b.resize(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) {
    result.argmax_a[k] = (best.a >> k) & 1;
    result.argmax_b[k] = (best.b >> k) & 1;
  }

  result.norm_closed =
      max_norm_closed(N, gamma_err, spec.realized_overlap(),
                      spec.realized_bias());
  const double lambda_cap =
      qmath::lambda_from_overlap(spec.overlap_cap, spec.beta_pb_cap);
  if (gamma_err > 0.0 && gamma_err < lambda_cap)
    result.bound = max_norm_chernoff(N, gamma_err, spec.overlap_cap,
                                     spec.beta_pb_cap);
  else
    result.bound =
        max_norm_closed(N, gamma_err, spec.overlap_cap, spec.beta_pb_cap);
  return result;
}

std::string OracleResult::to_json(int indent) const {
  nlohmann::json j;
  j["spec_hash"] = spec_hash;
  j["N"] = N;
  j["gamma_err"] = gamma_err;
  j["norm_exact"] = norm_exact;
  j["norm_closed"] = norm_closed;
  j["bound"] = bound;
  std::string sa, sb;
  for (std::uint8_t v : argmax_a) sa += char('0' + v);
  for (std::uint8_t v : argmax_b) sb += char('0' + v);
  j["argmax_a"] = sa;
  j["argmax_b"] = sb;
  return j.dump(indent);
}

RhoEigenResult rho_eigen_check(Bias beta_ps, Bias beta_pb, Angle theta,
                               int xi_grid) {
  RhoEigenResult out;
  out.mu_plus_bound =
      0.5 * (1.0 + qmath::h_factor(beta_ps, beta_pb, theta));

  const double two_theta = 2.0 * theta.rad();
  // The proof places the maximum at xi = 2 theta, |P - 1/2| = beta_PB,
  // |R - 1/2| = beta_PS; corners plus an interior grid guard the search.
  std::vector<double> xis;
  xis.push_back(-two_theta);
  xis.push_back(two_theta);
  for (int i = 1; i < xi_grid; ++i)
    xis.push_back(-two_theta + 2.0 * two_theta * i / xi_grid);

  for (double pu : {0.5 - beta_pb.value(), 0.5, 0.5 + beta_pb.value()})
    for (double pt : {0.5 - beta_ps.value(), 0.5, 0.5 + beta_ps.value()})
      for (double xi : xis) {
        qmath::DensityMatrix2 rho;
        // Basis u = 0 ideal; basis u = 1 carries the full relative tilt xi.
        for (int t = 0; t < 2; ++t) {
          rho.add_pure(pu * (t == 0 ? pt : 1.0 - pt),
                       qmath::tilted_state(t, 0, 0.0));
          rho.add_pure((1.0 - pu) * (t == 0 ? pt : 1.0 - pt),
                       qmath::tilted_state(t, 1, xi));
        }
        const double mu_plus = rho.eigenvalues().second;
        if (mu_plus > out.mu_plus_exact) {
          out.mu_plus_exact = mu_plus;
          out.argmax_xi = xi;
        }
      }
  out.gap = out.mu_plus_bound - out.mu_plus_exact;
  return out;
}

}  // namespace smoney::oracle
