#ifndef SMONEY_QMATH_HPP
#define SMONEY_QMATH_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace smoney::qmath {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInvSqrt2 = 0.70710678118654752440;

// Uncertainty angles for state preparation live in [0, pi/4]; theta = 0 is
// the ideal case and theta = pi/4 is the degenerate boundary (both bases
// coincide up to rotation). Callers that care can ask is_boundary().
class Angle {
 public:
  static Angle radians(double r) { return Angle(r); }
  static Angle degrees(double d) { return Angle(d * kPi / 180.0); }

  double rad() const { return radians_; }
  double deg() const { return radians_ * 180.0 / kPi; }

 private:
  explicit Angle(double r) : radians_(r) {
    if (!std::isfinite(r)) throw std::domain_error("Angle: non-finite value");
  }
  double radians_;
};

// Deviation from a uniform bit distribution, in [0, 1/2).  The value 1/2 is
// accepted only as an explicit degenerate boundary (deterministic bit).
class Bias {
 public:
  explicit Bias(double v) : value_(v) {
    if (!(v >= 0.0 && v <= 0.5))
      throw std::domain_error("Bias: value outside [0, 1/2]");
  }
  double value() const { return value_; }

 private:
  double value_;
};

// Probability carried in log space next to its (possibly underflowing)
// linear value.  Exponents like -1052 are only meaningful in log space.
struct LogProb {
  double log_value = 0.0;  // natural log; 0 corresponds to probability 1
  double linear() const { return std::exp(log_value); }
};

inline LogProb log_prob(double log_value) { return LogProb{log_value}; }

// log(e^a + e^b) without overflow.
inline double log_sum_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

// O(theta) = (cos theta + sin theta)/sqrt(2): upper bound on the overlap
// between states of the two preparation bases when each basis is within a
// Bloch-sphere angle theta of its ideal.
double overlap_O(Angle theta);

// lambda(theta, beta_PB) = (1 - sqrt(1 - [1 - O^2][1 - 4 beta^2]))/2.
double lambda_bound(Angle theta, Bias beta_pb);

// Same quantity parameterised directly by the overlap cap O in [1/sqrt2, 1].
double lambda_from_overlap(double overlap, double beta_pb);

// h(beta_PS, beta_PB, theta)
//   = 2 beta_PS sqrt(1/2 + 2 beta_PB^2 + (1/2 - 2 beta_PB^2) sin(2 theta)).
double h_factor(Bias beta_ps, Bias beta_pb, Angle theta);

enum class TailSide { lower, upper };

// Chernoff tails for a sum of independent Bernoullis with the given mean:
//   lower:  Pr[X <= (1-eps) mean] <= e^{-mean eps^2 / 2}
//   upper:  Pr[X >= (1+eps) mean] <= e^{-mean eps^2 / 3}
LogProb chernoff_tail(double mean, double epsilon, TailSide side);

// log C(n, k) via lgamma; exact enough up to n ~ 10^8.
double log_binomial(long long n, long long k);

// Sum_{n=0}^{floor(N gamma)} C(N, n) lam0^{N-n} (1-lam0)^n, evaluated in log
// space (log-sum-exp over the terms) so that N up to 10^8 is usable.
LogProb binomial_tail_weighted(long long N, double gamma, double lam0);

// --- qubit states and 2x2 density matrices --------------------------------

using Cmplx = std::complex<double>;

struct QubitState {
  Cmplx a0{1.0, 0.0};
  Cmplx a1{0.0, 0.0};

  // State with Bloch vector at polar angle `bloch_angle` in the z-x plane.
  static QubitState bloch(double bloch_angle);

  double norm2() const { return std::norm(a0) + std::norm(a1); }
  Cmplx inner(const QubitState& other) const {  // <this|other>
    return std::conj(a0) * other.a0 + std::conj(a1) * other.a1;
  }
  // Born probability of obtaining |other> when measuring this state.
  double overlap2(const QubitState& other) const {
    return std::norm(inner(other));
  }
};

class DensityMatrix2 {
 public:
  DensityMatrix2() = default;
  DensityMatrix2(Cmplx m00, Cmplx m01, Cmplx m10, Cmplx m11);

  static DensityMatrix2 pure(const QubitState& psi);
  // weight * |psi><psi| added in place.
  void add_pure(double weight, const QubitState& psi);

  Cmplx at(int r, int c) const { return m_[r][c]; }
  double trace_real() const { return m_[0][0].real() + m_[1][1].real(); }
  double hermiticity_defect() const;

  // Eigenvalues (ascending).  Analytic closed form for 2x2 Hermitian.
  std::pair<double, double> eigenvalues() const;

  void validate(double tol = 1e-12) const;

 private:
  Cmplx m_[2][2]{{Cmplx{0, 0}, Cmplx{0, 0}}, {Cmplx{0, 0}, Cmplx{0, 0}}};
};

// The four BB84 states phi_{t,u}: u selects the basis (0 computational,
// 1 Hadamard), t the state within the basis.
QubitState bb84_state(int t, int u);

// phi_{t,u} with the whole u-basis tilted by `tilt` on the Bloch sphere.
QubitState tilted_state(int t, int u, double bloch_tilt);

}  // namespace smoney::qmath

#endif
