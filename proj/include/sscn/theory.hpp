#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sscn/linalg.hpp"
#include "sscn/oracle.hpp"
#include "sscn/sketch.hpp"

namespace sscn {

// sup_t |d^3/dt^3 log(1 + e^{-t})| = 1/(6 sqrt 3).
inline const double kLogisticThirdBound = 1.0 / (6.0 * 1.7320508075688772);

double logistic_third_derivative(double t);

struct ConstantsReport {
  double M_global = 0.0;
  Vector M_coord;  // M_{e_j}
  Vector L_coord;  // coordinate gradient Lipschitz constants
  double L_global = 0.0;
  double mu = 0.0;
  double c_third = 0.0;
};

/// Logistic: M = (c/n) sum ||a_i||^3, M_j = (c/n) sum |a_ij|^3, L_j = (1/4n) sum a_ij^2 + lambda.
/// Log-sum-exp: the third derivative along u is the third central moment of
/// <a_i,u> under the softmax weights divided by sigma^2, bounded by width^3/4;
/// the variance is bounded by width^2/4. Quadratic: M = 0, L_j = A_jj.
/// `c_third` overrides the logistic loss constant when positive.
/// `mu` is lambda (logistic), lambda_min(A) (quadratic), or lambda_min of the
/// Hessian at `x_ref` (log-sum-exp, 0 when no point is given).
ConstantsReport estimate_constants(const Objective& f, double c_third = 0.0,
                                   const std::optional<Vector>& x_ref = std::nullopt);

/// Global matrix upper bound L >= hess f(x) used by SDNA.
Matrix smoothness_matrix(const Objective& f);

enum class ZetaMethod { exact_enumeration, monte_carlo };

struct ZetaReport {
  double zeta = 0.0;
  ZetaMethod method = ZetaMethod::exact_enumeration;
  Index trials = 0;         // support size for enumeration
  double std_error = 0.0;   // Monte Carlo only (delta method)
  Matrix expectation;       // E[S (S^T H S)^{-1} S^T]
};

std::string to_string(ZetaMethod m);

// True when the sampler's support is small enough to enumerate (<= 1e6 sets).
bool zeta_enumerable(const SamplerSpec& spec, Index d);

/// zeta = lambda_min(H^{1/2} E[S (S^T H S)^{-1} S^T] H^{1/2}). Enumerates the
/// support when possible unless `force_monte_carlo`; otherwise averages
/// `trials` draws split over fixed RNG streams.
ZetaReport compute_zeta(const Matrix& H, const SamplerSpec& spec, Index trials = 100000, std::uint64_t seed = 0,
                        bool force_monte_carlo = false, bool parallel = true);

struct BoundCheck {
  bool holds = true;
  double slack = 0.0;  // rhs - lhs
  double lhs = 0.0;
  double rhs = 0.0;
};

/// |f(x+Sh) - f(x) - <g,h> - 1/2 <Hh,h>| <= (M_S/6) ||h||^3, with f evaluated
/// from scratch. holds <=> lhs <= rhs + 1e-10 (1 + |f(x)|).
BoundCheck verify_cubic_bound(const Objective& f, const Vector& x, const SketchSample& sketch, const Vector& h,
                              double M_S);

/// (grad^T hess^{-1} grad)^{1/2} of the smooth part. Throws NumericalFailure
/// when the Hessian is not positive definite.
double newton_decrement(const Objective& f, const IterateState& s);

/// H_S(x) = hess_S f(x) + sqrt(M_S/2) ||grad_S f(x)||^{1/2} I. With psi = 0 a
/// cubic step at M_S decreases f by at least g^T H_S^{-1} g / 2, which is what
/// `guaranteed_decrease` returns.
Matrix shifted_subspace_hessian(const Matrix& H, const Vector& g, double M);
double guaranteed_decrease(const Matrix& H, const Vector& g, double M);

struct RateCheck {
  std::vector<double> bound_curve;  // index k; entry 0 is F(x0) - F*
  std::optional<std::size_t> violated_at;
};

/// Evaluates (d-tau)/tau * 4.5 L R^2/k + (d/tau)^2 * 9 M R^3/k^2
/// + gap0 / (1 + (tau k/d)^3 / 4) for k = 0..mean_gaps.size()-1 and reports
/// the first k where the mean gap exceeds it.
RateCheck check_global_rate(const std::vector<double>& mean_gaps, double L, double M, double R, Index tau, Index d,
                            double gap0);

/// Least-squares slope of log(values[k]) over k in [first, last]; returns the
/// per-step contraction exp(slope).
double fit_contraction(const std::vector<double>& values, std::size_t first, std::size_t last);

}  // namespace sscn
