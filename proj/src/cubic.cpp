#include "sscn/cubic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "sscn/error.hpp"

namespace sscn {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Minimizer of g h + H/2 h^2 + M/6 |h|^3 over the reals.
double cubic_step_1d(double g, double H, double M) {
  if (g == 0.0) return 0.0;
  if (H == 0.0 && M == 0.0) throw UnboundedModel("cubic model with H = M = 0 and nonzero gradient");
  return -2.0 * g / (H + std::sqrt(H * H + 2.0 * M * std::abs(g)));
}

double smooth_value_1d(double g, double H, double M, double h) {
  const double a = std::abs(h);
  return g * h + 0.5 * H * h * h + M / 6.0 * a * a * a;
}

// Ridge slices fold into the quadratic part: psi(x+h) = const + lambda x h + lambda/2 h^2.
void fold_ridge(const PsiSlice& psi, Vector& g, Matrix& H) {
  if (psi.kind != RegularizerKind::squared_l2) return;
  for (std::size_t k = 0; k < psi.base.size(); ++k) {
    const auto i = static_cast<Index>(k);
    g[i] += psi.lambda * psi.base[k];
    if (H.size() > 0) H(i, i) += psi.lambda;
  }
}

}  // namespace

double acceptance_slack(double F) { return 8.0 * kEps * (1.0 + std::abs(F)); }

Vector CubicModel::apply_hessian(const Vector& v) const {
  if (H.size() > 0) return H * v;
  if (!hvp) throw ContractViolation("CubicModel: neither H nor a Hessian operator is set");
  return hvp(v);
}

double model_value(const CubicModel& m, const Vector& h) {
  if (h.size() != m.tau()) throw ContractViolation("model_value: h has wrong length");
  const double r = h.norm();
  return m.g.dot(h) + 0.5 * h.dot(m.apply_hessian(h)) + m.M / 6.0 * r * r * r + m.psi.value(h);
}

Vector model_gradient(const CubicModel& m, const Vector& h) {
  if (!m.psi.smooth()) throw UnsupportedFeature("model_gradient: l1 slice is not differentiable");
  Vector grad = m.g + m.apply_hessian(h) + 0.5 * m.M * h.norm() * h;
  if (m.psi.kind == RegularizerKind::squared_l2) {
    for (std::size_t k = 0; k < m.psi.base.size(); ++k) {
      const auto i = static_cast<Index>(k);
      grad[i] += m.psi.lambda * (m.psi.base[k] + h[i]);
    }
  }
  return grad;
}

CubicSolution solve_1d(double g, double H, double M, const PsiSlice& psi) {
  if (H < 0.0 || M < 0.0) throw ContractViolation("solve_1d: H and M must be nonnegative");
  if (psi.kind != RegularizerKind::none && psi.base.size() != 1) {
    throw ContractViolation("solve_1d: psi slice must cover exactly one coordinate");
  }

  CubicSolution sol;
  sol.h = Vector::Zero(1);
  double h = 0.0;
  double residual = 0.0;

  switch (psi.kind) {
    case RegularizerKind::none:
      h = cubic_step_1d(g, H, M);
      residual = std::abs(g + H * h + 0.5 * M * std::abs(h) * h);
      break;
    case RegularizerKind::squared_l2: {
      const double ge = g + psi.lambda * psi.base[0];
      const double He = H + psi.lambda;
      h = cubic_step_1d(ge, He, M);
      residual = std::abs(ge + He * h + 0.5 * M * std::abs(h) * h);
      break;
    }
    case RegularizerKind::l1: {
      const double x = psi.base[0];
      const double lam = psi.lambda;
      auto total = [&](double t) { return smooth_value_1d(g, H, M, t) + lam * std::abs(x + t); };
      if (H == 0.0 && M == 0.0) {
        if (std::abs(g) > lam) throw UnboundedModel("cubic model with H = M = 0 and |g| > lambda");
        h = -x;
      } else {
        // Convex in h: the minimizer lies inside one sign branch (where it is
        // that branch's unconstrained minimizer) or at the kink h = -x.
        h = -x;
        double best = total(h);
        const double up = cubic_step_1d(g + lam, H, M);
        if (x + up >= 0.0 && total(up) < best) {
          h = up;
          best = total(up);
        }
        const double down = cubic_step_1d(g - lam, H, M);
        if (x + down <= 0.0 && total(down) < best) {
          h = down;
          best = total(down);
        }
      }
      // distance from 0 to the subdifferential at h
      const double smooth_grad = g + H * h + 0.5 * M * std::abs(h) * h;
      const double v = x + h;
      if (v > 0.0) {
        residual = std::abs(smooth_grad + lam);
      } else if (v < 0.0) {
        residual = std::abs(smooth_grad - lam);
      } else {
        residual = std::max(0.0, std::abs(smooth_grad) - lam);
      }
      break;
    }
  }

  sol.h[0] = h;
  const double base = psi.kind == RegularizerKind::none ? 0.0 : psi.value_at_zero();
  const double at_h = smooth_value_1d(g, H, M, h) + (psi.kind == RegularizerKind::none ? 0.0 : psi.coordinate_value(0, h));
  sol.model_decrease = std::max(0.0, base - at_h);
  sol.stationarity_residual = residual;
  return sol;
}

CubicSolution solve_block_exact(const CubicModel& m, double tol) {
  if (!m.psi.smooth()) throw UnsupportedFeature("solve_block_exact: l1 regularizer needs tau = 1");
  if (m.M < 0.0) throw ContractViolation("solve_block_exact: M must be nonnegative");
  if (m.H.rows() != m.tau() || m.H.cols() != m.tau()) throw ContractViolation("solve_block_exact: H has wrong shape");

  Vector g = m.g;
  Matrix H = m.H;
  fold_ridge(m.psi, g, H);
  const Index tau = g.size();

  CubicSolution sol;
  sol.h = Vector::Zero(tau);
  const double gnorm = g.norm();
  if (gnorm == 0.0) {
    sol.secular_radius = 0.0;
    return sol;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (H + H.transpose()));
  if (eig.info() != Eigen::Success) throw NumericalFailure("solve_block_exact: eigendecomposition failed");
  Vector lambda = eig.eigenvalues();
  const Matrix& Q = eig.eigenvectors();
  const double lmax = std::max(0.0, lambda.maxCoeff());
  if (lambda.minCoeff() < -1e-8 * std::max(1.0, lmax)) {
    throw NumericalFailure("solve_block_exact: Hessian is not positive semidefinite");
  }
  lambda = lambda.cwiseMax(0.0);
  const Vector c = Q.transpose() * g;

  Vector y(tau);
  if (m.M == 0.0) {
    const double cutoff = kEps * static_cast<double>(tau) * std::max(lmax, 1e-300);
    for (Index i = 0; i < tau; ++i) {
      if (lambda[i] > cutoff) {
        y[i] = -c[i] / lambda[i];
      } else if (std::abs(c[i]) <= 1e-12 * gnorm) {
        y[i] = 0.0;  // consistent singular direction: least-squares solution
      } else {
        throw UnboundedModel("cubic model with M = 0 and g outside range(H)");
      }
    }
    sol.h = Q * y;
    sol.secular_radius = sol.h.norm();
  } else {
    const double half_M = 0.5 * m.M;
    auto norm_at = [&](double r) { return (c.array() / (lambda.array() + half_M * r)).matrix().norm(); };

    double lo = gnorm / (lmax + std::sqrt(m.M * gnorm / 2.0));
    double hi = 2.0 * gnorm / std::sqrt(2.0 * m.M * gnorm);
    double r = lo;
    bool done = false;
    int it = 0;
    for (; it < 200; ++it) {
      const double s = norm_at(r);
      const double phi = s - r;
      if (std::abs(phi) <= tol * std::max(1.0, r)) {
        done = true;
        break;
      }
      if (phi > 0.0) {
        lo = r;
      } else {
        hi = r;
      }
      if (hi - lo <= 4.0 * kEps * std::max(1.0, hi)) {
        done = true;
        break;
      }
      const Eigen::ArrayXd denom = lambda.array() + half_M * r;
      const double dphi = -half_M * (c.array().square() / denom.cube()).sum() / s - 1.0;
      double next = r - phi / dphi;
      if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
      r = next;
    }
    if (!done) throw NumericalFailure("solve_block_exact: secular equation did not converge in 200 iterations");
    sol.inner_iterations = it;
    y = -(c.array() / (lambda.array() + half_M * r)).matrix();
    sol.h = Q * y;
    sol.secular_radius = r;
  }

  CubicModel smooth{m.g, m.H, m.M, m.psi, {}};
  sol.stationarity_residual = model_gradient(smooth, sol.h).norm();
  sol.model_decrease = std::max(0.0, m.psi.value_at_zero() - model_value(smooth, sol.h));
  return sol;
}

CubicSolution solve_block_iterative(const CubicModel& m, const HessianOperator& hvp, double tol, int max_inner) {
  if (!m.psi.smooth()) throw UnsupportedFeature("solve_block_iterative: l1 regularizer needs tau = 1");
  if (!(tol > 0.0)) throw ContractViolation("solve_block_iterative: tol must be positive");
  if (!hvp) throw ContractViolation("solve_block_iterative: Hessian operator required");

  const Index tau = m.tau();
  const double ridge = m.psi.kind == RegularizerKind::squared_l2 ? m.psi.lambda : 0.0;
  Vector g = m.g;
  if (ridge != 0.0) {
    for (std::size_t k = 0; k < m.psi.base.size(); ++k) g[static_cast<Index>(k)] += ridge * m.psi.base[k];
  }
  auto apply = [&](const Vector& v) -> Vector {
    Vector out = hvp(v);
    if (ridge != 0.0) out += ridge * v;
    return out;
  };
  const double half_M = 0.5 * m.M;

  CubicSolution sol;
  Vector h = Vector::Zero(tau);
  Vector Hh = Vector::Zero(tau);
  Vector grad = g;
  double gnorm = grad.norm();
  sol.converged = gnorm <= tol;
  Vector dir = -grad;
  int since_restart = 0;
  int it = 0;

  while (!sol.converged && it < max_inner) {
    double slope = grad.dot(dir);
    if (slope >= 0.0) {  // lost descent: restart along the gradient
      dir = -grad;
      slope = -gnorm * gnorm;
      since_restart = 0;
    }
    const Vector Hd = apply(dir);
    const double dHd = dir.dot(Hd);
    const double hd = h.dot(dir);
    const double dd = dir.squaredNorm();
    const double hh = h.squaredNorm();
    const double base_slope = (g + Hh).dot(dir);

    // phi'(a) for phi(a) = T(h + a d); increasing since T is convex
    auto dphi = [&](double a) {
      const double norm = std::sqrt(std::max(0.0, hh + 2.0 * a * hd + a * a * dd));
      return base_slope + a * dHd + half_M * norm * (hd + a * dd);
    };
    auto d2phi = [&](double a) {
      const double norm = std::sqrt(std::max(0.0, hh + 2.0 * a * hd + a * a * dd));
      const double lin = hd + a * dd;
      return dHd + half_M * (norm * dd + (norm > 0.0 ? lin * lin / norm : 0.0));
    };

    double lo = 0.0;
    const double curv0 = d2phi(0.0);
    double hi = curv0 > 0.0 ? -slope / curv0 : 1.0;
    if (!(hi > 0.0) || !std::isfinite(hi)) hi = 1.0;
    while (dphi(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e300) throw UnboundedModel("solve_block_iterative: model unbounded along search direction");
    }
    double a = hi;
    for (int ls = 0; ls < 100; ++ls) {
      const double v = dphi(a);
      if (v > 0.0) {
        hi = a;
      } else {
        lo = a;
      }
      if (std::abs(v) <= 1e-15 * std::max(1.0, std::abs(slope)) || hi - lo <= kEps * hi) break;
      const double c2 = d2phi(a);
      double next = c2 > 0.0 ? a - v / c2 : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      a = next;
    }

    h += a * dir;
    ++since_restart;
    if (since_restart >= tau) {
      Hh = apply(h);  // drop accumulated drift on restart
    } else {
      Hh += a * Hd;
    }
    Vector next_grad = g + Hh + half_M * h.norm() * h;
    const double next_norm = next_grad.norm();
    ++it;
    if (next_norm <= tol) {
      grad = std::move(next_grad);
      gnorm = next_norm;
      sol.converged = true;
      break;
    }
    double beta = std::max(0.0, next_grad.dot(next_grad - grad) / (gnorm * gnorm));
    if (since_restart >= tau) {
      beta = 0.0;
      since_restart = 0;
    }
    dir = -next_grad + beta * dir;
    grad = std::move(next_grad);
    gnorm = next_norm;
  }

  sol.h = std::move(h);
  sol.inner_iterations = it;
  sol.stationarity_residual = gnorm;
  CubicModel exact_eval{m.g, m.H, m.M, m.psi, hvp};
  sol.model_decrease = std::max(0.0, m.psi.value_at_zero() - model_value(exact_eval, sol.h));
  return sol;
}

SubproblemSolver resolve_solver(const SolveOptions& opts, Index tau) {
  if (opts.choice != SubproblemSolver::automatic) return opts.choice;
  if (tau == 1) return SubproblemSolver::one_d;
  if (tau <= opts.exact_max_tau) return SubproblemSolver::exact;
  return SubproblemSolver::iterative;
}

CubicSolution solve_cubic(const CubicModel& m, const SolveOptions& opts) {
  const Index tau = m.tau();
  SubproblemSolver which = resolve_solver(opts, tau);
  if (!m.psi.smooth() && tau > 1) throw UnsupportedFeature("l1 regularizer is only supported with tau = 1");
  if (!m.psi.smooth()) which = SubproblemSolver::one_d;
  switch (which) {
    case SubproblemSolver::one_d: {
      if (tau != 1) throw ConfigError("1-D subproblem solver requested with tau = " + std::to_string(tau));
      const double H = m.H.size() > 0 ? m.H(0, 0) : m.apply_hessian(Vector::Ones(1))[0];
      return solve_1d(m.g[0], std::max(0.0, H), m.M, m.psi);
    }
    case SubproblemSolver::exact: {
      if (m.H.size() == 0) {
        CubicModel dense = m;
        dense.H = Matrix(tau, tau);
        for (Index j = 0; j < tau; ++j) dense.H.col(j) = m.hvp(Vector::Unit(tau, j));
        return solve_block_exact(dense, opts.exact_tol);
      }
      return solve_block_exact(m, opts.exact_tol);
    }
    case SubproblemSolver::iterative: {
      const HessianOperator op = m.H.size() > 0 ? HessianOperator([&m](const Vector& v) -> Vector { return m.H * v; }) : m.hvp;
      return solve_block_iterative(m, op, opts.iterative_tol, opts.max_inner);
    }
    case SubproblemSolver::automatic:
      break;
  }
  throw ContractViolation("solve_cubic: unresolved solver");
}

CubicModel build_model(const Objective& f, const IterateState& s, const SketchSample& sketch, double M,
                       const SolveOptions& opts) {
  CubicModel m;
  m.M = M;
  m.psi = psi_slice(f.regularizer(), s.x, sketch);
  if (resolve_solver(opts, sketch.tau()) == SubproblemSolver::iterative && m.psi.smooth()) {
    m.g = f.subspace_gradient(s, sketch);
    m.hvp = f.subspace_hessian_operator(s, sketch);
  } else {
    SubspaceDerivatives der = f.subspace_derivatives(s, sketch);
    m.g = std::move(der.gradient);
    m.H = std::move(der.hessian);
  }
  return m;
}

AdaptResult adapt_regularizer(const Objective& f, const IterateState& s, const SketchSample& sketch, double M_est,
                              const SolveOptions& opts, IterateState& next, double M_floor) {
  if (!(M_est > 0.0) || !std::isfinite(M_est)) throw ContractViolation("adapt_regularizer: M_est must be positive");
  AdaptResult out;
  CubicModel model = build_model(f, s, sketch, std::max(M_est / 2.0, M_floor), opts);
  const double ceiling = std::ldexp(M_est, 60);
  const double F0 = s.F();
  const double slack = acceptance_slack(F0);

  while (true) {
    out.solution = solve_cubic(model, opts);
    ++out.solves;
    next = s;
    f.apply_update(next, sketch, out.solution.h);
    if (next.F() <= F0 - out.solution.model_decrease + slack) break;
    model.M *= 2.0;
    ++out.doublings;
    if (model.M > ceiling) {
      throw NumericalFailure("adapt_regularizer: M exceeded 2^60 * M_est; objective and model disagree");
    }
  }
  out.M = model.M;
  return out;
}

}  // namespace sscn
