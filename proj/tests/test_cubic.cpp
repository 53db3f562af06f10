#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "sscn/cubic.hpp"
#include "sscn/error.hpp"
#include "sscn/rng.hpp"
#include "sscn/synthetic.hpp"
#include "sscn/verify.hpp"

using namespace sscn;

namespace {

CubicModel model_1x1(double g, double H, double M) {
  CubicModel m;
  m.g = Vector::Constant(1, g);
  m.H = Matrix::Constant(1, 1, H);
  m.M = M;
  return m;
}

PsiSlice slice(RegularizerKind kind, double lambda, std::vector<double> base) {
  PsiSlice p;
  p.kind = kind;
  p.lambda = lambda;
  p.base = std::move(base);
  return p;
}

const double kGolden = -0.61803398874989485;  // (1 - sqrt 5)/2

}  // namespace

TEST(ModelValue, ZeroStepIsZero) {
  CubicModel m = model_1x1(3.0, 2.0, 1.0);
  EXPECT_EQ(model_value(m, Vector::Zero(1)), 0.0);
}

TEST(ModelValue, GoldenStepValue) {
  // mpmath: 1*h + h^2/2 + (2/6)|h|^3 at h = -0.618034
  CubicModel m = model_1x1(1.0, 1.0, 2.0);
  EXPECT_NEAR(model_value(m, Vector::Constant(1, -0.618034)), -0.3483616572915789, 1e-15);
}

TEST(ModelValue, MZeroIsQuadraticModel) {
  CubicModel m;
  m.g = Vector{{1.0, -2.0}};
  m.H = Matrix{{2.0, 0.5}, {0.5, 1.0}};
  m.M = 0.0;
  const Vector h{{0.3, 0.7}};
  EXPECT_DOUBLE_EQ(model_value(m, h), m.g.dot(h) + 0.5 * h.dot(m.H * h));
}

TEST(ModelValue, IncludesPsiSlice) {
  CubicModel m = model_1x1(0.0, 0.0, 0.0);
  m.psi = slice(RegularizerKind::squared_l2, 2.0, {2.0});
  // psi_j(x_j + h) = (lambda/2) * 9 at x_j = 2, h = 1
  EXPECT_DOUBLE_EQ(model_value(m, Vector::Constant(1, 1.0)), 9.0);
}

TEST(ModelGradient, AtZeroIsG) {
  CubicModel m;
  m.g = Vector{{1.0, -2.0, 3.0}};
  m.H = Matrix::Identity(3, 3);
  m.M = 4.0;
  EXPECT_EQ(model_gradient(m, Vector::Zero(3)), m.g);
}

TEST(ModelGradient, VanishesAtGoldenStep) {
  CubicModel m = model_1x1(1.0, 1.0, 2.0);
  EXPECT_LE(std::abs(model_gradient(m, Vector::Constant(1, -0.618034))[0]), 1e-5);
}

TEST(ModelGradient, RejectsL1Slice) {
  CubicModel m = model_1x1(1.0, 1.0, 1.0);
  m.psi = slice(RegularizerKind::l1, 1.0, {0.0});
  EXPECT_THROW(model_gradient(m, Vector::Zero(1)), UnsupportedFeature);
}

TEST(Solve1D, NewtonStepWhenMZero) { EXPECT_DOUBLE_EQ(solve_1d(1.0, 1.0, 0.0).h[0], -1.0); }

TEST(Solve1D, GoldenRatioCase) {
  const CubicSolution s = solve_1d(1.0, 1.0, 2.0);
  EXPECT_NEAR(s.h[0], kGolden, 1e-14);
  EXPECT_NEAR(s.model_decrease, 0.34836165729157904, 1e-14);
  EXPECT_LE(s.stationarity_residual, 1e-14);
}

TEST(Solve1D, ZeroGradientGivesZeroStep) {
  EXPECT_EQ(solve_1d(0.0, 3.0, 1.0).h[0], 0.0);
  EXPECT_EQ(solve_1d(0.0, 0.0, 0.0).h[0], 0.0);
  EXPECT_EQ(solve_1d(0.0, 1.0, 1.0, slice(RegularizerKind::l1, 0.5, {0.0})).h[0], 0.0);
}

TEST(Solve1D, UnboundedModelIsAnError) { EXPECT_THROW(solve_1d(1.0, 0.0, 0.0), UnboundedModel); }

TEST(Solve1D, RidgeFoldsIntoCurvature) {
  // squared_l2(lambda): same closed form with H + lambda and g + lambda x_j
  const CubicSolution s = solve_1d(0.5, 0.5, 2.0, slice(RegularizerKind::squared_l2, 0.5, {1.0}));
  EXPECT_NEAR(s.h[0], kGolden, 1e-14);
}

TEST(Solve1D, L1BranchEnumeration) {
  // mpmath brute force over both sign branches and the kink
  EXPECT_NEAR(solve_1d(3.0, 1.0, 2.0, slice(RegularizerKind::l1, 1.0, {0.5})).h[0], -1.0, 1e-14);
  EXPECT_NEAR(solve_1d(0.5, 1.0, 2.0, slice(RegularizerKind::l1, 1.0, {0.2})).h[0], -0.2, 1e-14);
  EXPECT_NEAR(solve_1d(-4.0, 0.5, 1.0, slice(RegularizerKind::l1, 1.0, {-0.3})).h[0], 2.0, 1e-14);
  EXPECT_EQ(solve_1d(0.2, 2.0, 1.0, slice(RegularizerKind::l1, 1.0, {0.0})).h[0], 0.0);
}

TEST(Solve1D, L1WithoutCurvature) {
  EXPECT_EQ(solve_1d(0.5, 0.0, 0.0, slice(RegularizerKind::l1, 1.0, {0.7})).h[0], -0.7);
  EXPECT_THROW(solve_1d(2.0, 0.0, 0.0, slice(RegularizerKind::l1, 1.0, {0.7})), UnboundedModel);
}

TEST(Solve1D, GlobalOptimalityProperty) {
  const PropertyResult r = check_solve_1d_optimality(1000, 5);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Solve1D, L1OptimalityAgainstGrid) {
  Rng rng = make_rng(8);
  for (int t = 0; t < 200; ++t) {
    const double g = uniform(rng, -5, 5), H = uniform(rng, 0, 5), M = uniform(rng, 0.1, 5);
    const double lam = uniform(rng, 0, 3), x = uniform(rng, -2, 2);
    const PsiSlice p = slice(RegularizerKind::l1, lam, {x});
    const double h = solve_1d(g, H, M, p).h[0];
    auto value = [&](double t) { return g * t + 0.5 * H * t * t + M / 6 * std::abs(t) * t * t + lam * std::abs(x + t); };
    double best = value(-x);
    for (int i = -20000; i <= 20000; ++i) best = std::min(best, value(0.001 * i));
    EXPECT_LE(value(h), best + 1e-9) << g << " " << H << " " << M << " " << lam << " " << x;
  }
}

TEST(SolveBlockExact, AgreesWith1D) {
  Rng rng = make_rng(3);
  for (int t = 0; t < 50; ++t) {
    const double g = uniform(rng, -10, 10), H = uniform(rng, 0, 10), M = uniform(rng, 0, 10);
    EXPECT_NEAR(solve_block_exact(model_1x1(g, H, M)).h[0], solve_1d(g, H, M).h[0], 1e-10);
  }
}

TEST(SolveBlockExact, ReducesTo1DAlongG) {
  CubicModel m;
  m.g = Vector{{1.0, 0.0}};
  m.H = Matrix::Identity(2, 2);
  m.M = 2.0;
  const CubicSolution s = solve_block_exact(m);
  EXPECT_NEAR(s.h[0], kGolden, 1e-10);
  EXPECT_NEAR(s.h[1], 0.0, 1e-14);
}

TEST(SolveBlockExact, NewtonStepWhenMZero) {
  CubicModel m;
  m.g = Vector{{1.0, 2.0}};
  m.H = Matrix{{1.0, 0.0}, {0.0, 2.0}};
  m.M = 0.0;
  const CubicSolution s = solve_block_exact(m);
  EXPECT_NEAR(s.h[0], -1.0, 1e-14);
  EXPECT_NEAR(s.h[1], -1.0, 1e-14);
}

TEST(SolveBlockExact, SingularConsistentAndInconsistent) {
  CubicModel m;
  m.H = Matrix{{1.0, 0.0}, {0.0, 0.0}};
  m.M = 0.0;
  m.g = Vector{{2.0, 0.0}};
  EXPECT_NEAR(solve_block_exact(m).h[0], -2.0, 1e-14);
  m.g = Vector{{2.0, 1.0}};
  EXPECT_THROW(solve_block_exact(m), UnboundedModel);
}

TEST(SolveBlockExact, ThreeByThreeReference) {
  // mpmath Newton polish of a BFGS solution
  CubicModel m;
  m.H = Matrix{{2.0, 0.5, 0.0}, {0.5, 1.0, 0.3}, {0.0, 0.3, 0.5}};
  m.g = Vector{{1.0, -2.0, 0.5}};
  m.M = 1.5;
  const CubicSolution s = solve_block_exact(m);
  EXPECT_NEAR(s.h[0], -0.52109334894151112, 1e-12);
  EXPECT_NEAR(s.h[1], 1.1816086107830773, 1e-12);
  EXPECT_NEAR(s.h[2], -0.55027786177230919, 1e-12);
  EXPECT_NEAR(model_value(m, s.h), -1.9254959835508688, 1e-13);
  EXPECT_NEAR(s.secular_radius, s.h.norm(), 1e-12);
}

TEST(SolveBlockExact, StationarityProperty) {
  const PropertyResult r = check_block_stationarity(100, 9);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(SolveBlockExact, RejectsL1) {
  CubicModel m = model_1x1(1.0, 1.0, 1.0);
  m.psi = slice(RegularizerKind::l1, 1.0, {0.0});
  EXPECT_THROW(solve_block_exact(m), UnsupportedFeature);
}

TEST(SolveBlockIterative, MatchesDirectSolveWhenMZero) {
  CubicModel m;
  m.H = Matrix{{4.0, 1.0, 0.0}, {1.0, 3.0, 0.5}, {0.0, 0.5, 2.0}};
  m.g = Vector{{1.0, -1.0, 2.0}};
  m.M = 0.0;
  const Matrix H = m.H;
  const double tol = 1e-4;
  const CubicSolution s = solve_block_iterative(m, [&H](const Vector& v) -> Vector { return H * v; }, tol, 1000);
  const Vector direct = -H.ldlt().solve(m.g);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(H);
  const double kappa = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
  EXPECT_TRUE(s.converged);
  EXPECT_LE((s.h - direct).norm(), tol * kappa);
}

TEST(SolveBlockIterative, MatchesExactSolverValue) {
  const PropertyResult r = check_iterative_vs_exact(100, 10);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(SolveBlockIterative, ZeroGradientZeroIterations) {
  CubicModel m;
  m.H = Matrix::Identity(4, 4);
  m.g = Vector::Zero(4);
  m.M = 1.0;
  const CubicSolution s = solve_block_iterative(m, [](const Vector& v) -> Vector { return v; }, 1e-4, 100);
  EXPECT_EQ(s.inner_iterations, 0);
  EXPECT_EQ(s.h, Vector::Zero(4));
  EXPECT_TRUE(s.converged);
}

TEST(SolveBlockIterative, BudgetExhaustionFlagged) {
  Rng rng = make_rng(4);
  CubicModel m;
  Matrix B(30, 30);
  for (Index i = 0; i < 30; ++i)
    for (Index j = 0; j < 30; ++j) B(i, j) = uniform(rng, -1, 1);
  m.H = B * B.transpose();
  m.g = Vector::Ones(30);
  m.M = 0.1;
  const Matrix H = m.H;
  const CubicSolution s = solve_block_iterative(m, [&H](const Vector& v) -> Vector { return H * v; }, 1e-12, 2);
  EXPECT_FALSE(s.converged);
  EXPECT_EQ(s.inner_iterations, 2);
  EXPECT_GE(s.model_decrease, 0.0);
}

TEST(SolveCubic, DispatchByWidth) {
  SolveOptions o;
  EXPECT_EQ(resolve_solver(o, 1), SubproblemSolver::one_d);
  EXPECT_EQ(resolve_solver(o, 2), SubproblemSolver::exact);
  EXPECT_EQ(resolve_solver(o, 64), SubproblemSolver::exact);
  EXPECT_EQ(resolve_solver(o, 65), SubproblemSolver::iterative);
  o.choice = SubproblemSolver::iterative;
  EXPECT_EQ(resolve_solver(o, 3), SubproblemSolver::iterative);
}

TEST(SolveCubic, ScalingCovariance) {
  const PropertyResult r = check_scaling_covariance(100, 6);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(SolveCubic, ModelDecreaseNonnegative) {
  Rng rng = make_rng(12);
  for (int t = 0; t < 100; ++t) {
    CubicModel m;
    const Index tau = 1 + t % 5;
    Matrix B(tau, tau);
    for (Index i = 0; i < tau; ++i)
      for (Index j = 0; j < tau; ++j) B(i, j) = uniform(rng, -1, 1);
    m.H = B * B.transpose();
    m.g = Vector::Random(tau);
    m.M = uniform(rng, 0.01, 5);
    EXPECT_GE(solve_cubic(m, {}).model_decrease, 0.0);
  }
}

TEST(AdaptRegularizer, QuadraticAcceptsFirstSolve) {
  const GeneratedQuadratic q = generate_quadratic(SyntheticSpec::quadratic(6, 5.0, 1));
  const IterateState s = q.objective->make_state(Vector::Ones(6));
  SketchSample sk{{1, 4}};
  for (double M_est : {1e-8, 1.0, 1e6}) {
    IterateState next;
    const AdaptResult r = adapt_regularizer(*q.objective, s, sk, M_est, {}, next);
    EXPECT_EQ(r.solves, 1);
    EXPECT_EQ(r.doublings, 0);
    // f is its own second-order model, so the decrease is the cubic model
    // decrease plus the (M/6)||h||^3 term
    const double cubic = r.M / 6.0 * std::pow(r.solution.h.norm(), 3);
    EXPECT_NEAR(s.F() - next.F(), r.solution.model_decrease + cubic, 1e-12 * (1 + std::abs(s.F())));
  }
}

TEST(AdaptRegularizer, LogisticAcceptsAtTrueCoordinateConstant) {
  const auto f = make_logistic(100, 20, 0.1, 0);
  const ConstantsReport c = estimate_constants(*f);
  Rng rng = make_rng(2);
  Sampler sampler(SamplerSpec::uniform(1), 20);
  for (int t = 0; t < 100; ++t) {
    Vector x(20);
    for (Index j = 0; j < 20; ++j) x[j] = uniform(rng, -2, 2);
    const IterateState s = f->make_state(x);
    const SketchSample sk = sampler.sample(rng);
    const double Mj = c.M_coord[sk.indices[0]];
    IterateState next;
    const AdaptResult r = adapt_regularizer(*f, s, sk, Mj, {}, next);
    EXPECT_LE(r.M, Mj * (1 + 1e-12));
    EXPECT_LE(next.F(), s.F() - r.solution.model_decrease + acceptance_slack(s.F()));
  }
}

TEST(AdaptRegularizer, TinyEstimateOnLogSumExp) {
  const auto g = generate_logsumexp(SyntheticSpec::logsumexp(8, 0.25, 3));
  const IterateState s = g.objective->make_state(g.x0);
  IterateState next;
  const AdaptResult r = adapt_regularizer(*g.objective, s, SketchSample{{0, 3, 5}}, 1e-12, {}, next);
  EXPECT_GT(r.doublings, 0);
  EXPECT_LT(r.doublings, 100);
  EXPECT_LE(next.F(), s.F() - r.solution.model_decrease + acceptance_slack(s.F()));
}

TEST(AdaptRegularizer, RejectsNonPositiveEstimate) {
  const GeneratedQuadratic q = generate_quadratic(SyntheticSpec::quadratic(3, 2.0, 1));
  const IterateState s = q.objective->make_state(Vector::Ones(3));
  IterateState next;
  EXPECT_THROW(adapt_regularizer(*q.objective, s, SketchSample{{0}}, 0.0, {}, next), ContractViolation);
}

TEST(AdaptRegularizer, ZeroStepEquality) {
  // F(x) + T_S(x, 0) = F(x): the model is zero at h = 0 with psi folded in
  CubicModel m = model_1x1(2.0, 1.0, 1.0);
  m.psi = slice(RegularizerKind::squared_l2, 0.3, {1.5});
  EXPECT_EQ(model_value(m, Vector::Zero(1)) - m.psi.value_at_zero(), 0.0);
}
