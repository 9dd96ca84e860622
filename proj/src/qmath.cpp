#include "smoney/qmath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace smoney::qmath {

namespace {
constexpr double kQuarterPi = kPi / 4.0;
}

double overlap_O(Angle theta) {
  const double t = theta.rad();
  if (t < 0.0 || t > kQuarterPi + 1e-15)
    throw std::domain_error("overlap_O: theta outside [0, pi/4]");
  return (std::cos(t) + std::sin(t)) * kInvSqrt2;
}

double lambda_from_overlap(double overlap, double beta_pb) {
  if (overlap < kInvSqrt2 - 1e-12 || overlap > 1.0 + 1e-12)
    throw std::domain_error("lambda_from_overlap: O outside [1/sqrt2, 1]");
  if (!(beta_pb >= 0.0 && beta_pb <= 0.5))
    throw std::domain_error("lambda_from_overlap: beta outside [0, 1/2]");
  const double radicand =
      1.0 - (1.0 - overlap * overlap) * (1.0 - 4.0 * beta_pb * beta_pb);
  return 0.5 * (1.0 - std::sqrt(std::max(0.0, radicand)));
}

double lambda_bound(Angle theta, Bias beta_pb) {
  return lambda_from_overlap(overlap_O(theta), beta_pb.value());
}

double h_factor(Bias beta_ps, Bias beta_pb, Angle theta) {
  const double b2 = 2.0 * beta_pb.value() * beta_pb.value();
  const double radicand = 0.5 + b2 + (0.5 - b2) * std::sin(2.0 * theta.rad());
  return 2.0 * beta_ps.value() * std::sqrt(radicand);
}

LogProb chernoff_tail(double mean, double epsilon, TailSide side) {
  if (!(mean > 0.0)) throw std::domain_error("chernoff_tail: mean must be > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::domain_error("chernoff_tail: epsilon outside (0, 1)");
  const double divisor = (side == TailSide::lower) ? 2.0 : 3.0;
  return log_prob(-mean * epsilon * epsilon / divisor);
}

double log_binomial(long long n, long long k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

LogProb binomial_tail_weighted(long long N, double gamma, double lam0) {
  if (N < 1) throw std::domain_error("binomial_tail_weighted: N must be >= 1");
  if (gamma < 0.0) throw std::domain_error("binomial_tail_weighted: gamma < 0");
  if (!(lam0 > 0.0 && lam0 <= 1.0))
    throw std::domain_error("binomial_tail_weighted: lam0 outside (0, 1]");

  // floor(gamma N) with a one-ulp guard: products like 0.3 * 1e8 land just
  // below the integer they represent.
  const double product = gamma * static_cast<double>(N);
  const long long cutoff = std::min<long long>(
      N, static_cast<long long>(
             std::floor(product + std::max(1e-12, 8.0 * product * 1e-16))));
  if (cutoff >= N || lam0 == 1.0) {
    // Full binomial sum; for lam0 = 1 only the n = 0 term is nonzero.
    return log_prob(cutoff >= N ? 0.0
                                : static_cast<double>(N) * std::log(lam0));
  }

  const double log_l0 = std::log(lam0);
  const double log_l1 = std::log1p(-lam0);
  // Incremental update of log C(N, n): avoids N lgamma calls in the loop.
  double log_term = static_cast<double>(N) * log_l0;  // n = 0
  double acc = log_term;
  for (long long n = 1; n <= cutoff; ++n) {
    log_term += std::log(static_cast<double>(N - n + 1) /
                         static_cast<double>(n)) +
                log_l1 - log_l0;
    acc = log_sum_exp(acc, log_term);
  }
  return log_prob(std::min(acc, 0.0));
}

QubitState QubitState::bloch(double bloch_angle) {
  return QubitState{Cmplx{std::cos(bloch_angle / 2.0), 0.0},
                    Cmplx{std::sin(bloch_angle / 2.0), 0.0}};
}

DensityMatrix2::DensityMatrix2(Cmplx m00, Cmplx m01, Cmplx m10, Cmplx m11) {
  m_[0][0] = m00;
  m_[0][1] = m01;
  m_[1][0] = m10;
  m_[1][1] = m11;
}

DensityMatrix2 DensityMatrix2::pure(const QubitState& psi) {
  DensityMatrix2 rho;
  rho.add_pure(1.0, psi);
  return rho;
}

void DensityMatrix2::add_pure(double weight, const QubitState& psi) {
  m_[0][0] += weight * std::norm(psi.a0);
  m_[0][1] += weight * psi.a0 * std::conj(psi.a1);
  m_[1][0] += weight * psi.a1 * std::conj(psi.a0);
  m_[1][1] += weight * std::norm(psi.a1);
}

double DensityMatrix2::hermiticity_defect() const {
  return std::abs(m_[0][1] - std::conj(m_[1][0])) +
         std::abs(m_[0][0].imag()) + std::abs(m_[1][1].imag());
}

std::pair<double, double> DensityMatrix2::eigenvalues() const {
  const double a = m_[0][0].real();
  const double d = m_[1][1].real();
  const double mean = 0.5 * (a + d);
  const double radius =
      std::sqrt(0.25 * (a - d) * (a - d) + std::norm(m_[0][1]));
  return {mean - radius, mean + radius};
}

void DensityMatrix2::validate(double tol) const {
  if (hermiticity_defect() > tol)
    throw std::domain_error("DensityMatrix2: not Hermitian");
  if (std::abs(trace_real() - 1.0) > tol)
    throw std::domain_error("DensityMatrix2: trace != 1");
  if (eigenvalues().first < -tol)
    throw std::domain_error("DensityMatrix2: negative eigenvalue");
}

QubitState bb84_state(int t, int u) { return tilted_state(t, u, 0.0); }

QubitState tilted_state(int t, int u, double bloch_tilt) {
  // Bloch polar angles: |0> at 0, |1> at pi, |+> at pi/2, |-> at 3pi/2.
  const double angle = t * kPi + u * (kPi / 2.0) + bloch_tilt;
  return QubitState::bloch(angle);
}

}  // namespace smoney::qmath
