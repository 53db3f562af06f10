#pragma once

#include <limits>

#include "sscn/linalg.hpp"
#include "sscn/oracle.hpp"
#include "sscn/regularizer.hpp"
#include "sscn/sketch.hpp"

namespace sscn {

/// T(h) = <g,h> + 1/2 <H h, h> + (M/6) ||h||^3 + sum_j psi_j(x_j + h_j).
///
/// H may be left empty when only a Hessian-vector operator is available
/// (the iterative solver path); `hvp` is then required.
struct CubicModel {
  Vector g;
  Matrix H;
  double M = 0.0;
  PsiSlice psi;
  HessianOperator hvp;

  Index tau() const { return g.size(); }
  Vector apply_hessian(const Vector& v) const;
};

struct CubicSolution {
  Vector h;
  double model_decrease = 0.0;  // T(0) - T(h) >= 0
  double stationarity_residual = 0.0;
  int inner_iterations = 0;
  bool converged = true;
  // Root r* of the secular equation (exact block solver only).
  double secular_radius = std::numeric_limits<double>::quiet_NaN();
};

double model_value(const CubicModel& m, const Vector& h);

// g + H h + (M/2)||h|| h (+ ridge slice). Not defined for an l1 slice.
Vector model_gradient(const CubicModel& m, const Vector& h);

/// Exact global minimizer of the one-dimensional model. psi is either an
/// empty slice (kind none) or a slice over one coordinate.
CubicSolution solve_1d(double g, double H, double M, const PsiSlice& psi = {});

/// Eigendecomposition of H followed by a safeguarded Newton solve of the
/// secular equation ||(Lambda + (M r/2) I)^{-1} Q^T g|| = r.
CubicSolution solve_block_exact(const CubicModel& m, double tol = 1e-12);

/// Polak-Ribiere+ nonlinear CG from h = 0 with an exact line search along
/// each direction. Uses only Hessian-vector products.
CubicSolution solve_block_iterative(const CubicModel& m, const HessianOperator& hvp, double tol,
                                    int max_inner);

enum class SubproblemSolver { automatic, one_d, exact, iterative };

struct SolveOptions {
  SubproblemSolver choice = SubproblemSolver::automatic;
  double exact_tol = 1e-12;
  double iterative_tol = 1e-4;
  int max_inner = 10000;
  Index exact_max_tau = 64;
};

// tau = 1 -> 1-D closed form; tau <= 64 -> exact; larger -> iterative.
SubproblemSolver resolve_solver(const SolveOptions& opts, Index tau);

CubicSolution solve_cubic(const CubicModel& m, const SolveOptions& opts);

/// Builds T_S(x, .) at M. Only forms the tau x tau Hessian when the resolved
/// solver needs it.
CubicModel build_model(const Objective& f, const IterateState& s, const SketchSample& sketch, double M,
                       const SolveOptions& opts = {});

struct AdaptResult {
  CubicSolution solution;
  double M = 0.0;       // accepted regularization constant
  int doublings = 0;
  int solves = 0;
};

/// M <- M_est/2, then doubles M until F(x + S h) <= F(x) + T(h) - T(0).
/// `next` receives the accepted state. `M_floor` bounds the halving.
AdaptResult adapt_regularizer(const Objective& f, const IterateState& s, const SketchSample& sketch,
                              double M_est, const SolveOptions& opts, IterateState& next,
                              double M_floor = 0.0);

// Slack used by acceptance tests comparing cached objective values.
double acceptance_slack(double F);

}  // namespace sscn
