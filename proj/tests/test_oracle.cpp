#include <cmath>
#include <memory>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "sscn/error.hpp"
#include "sscn/oracle.hpp"
#include "sscn/rng.hpp"
#include "sscn/synthetic.hpp"
#include "sscn/verify.hpp"

using namespace sscn;

namespace {

std::shared_ptr<Dataset> dense_data(Matrix A, Vector b) {
  auto ds = std::make_shared<Dataset>();
  ds->A = DataMatrix(std::move(A));
  ds->b = std::move(b);
  return ds;
}

// n = 3, d = 2 fixtures shared with the mpmath reference script.
const Matrix kA3{{1.0, -0.5}, {0.3, 2.0}, {-1.2, 0.7}};
const Vector kX3{{0.4, -0.3}};

std::vector<std::shared_ptr<Objective>> all_oracles() {
  std::vector<std::shared_ptr<Objective>> out;
  out.push_back(generate_quadratic(SyntheticSpec::quadratic(8, 20.0, 1)).objective);
  out.push_back(make_logistic(40, 8, 0.1, 2));
  out.push_back(generate_logsumexp(SyntheticSpec::logsumexp(8, 0.5, 3)).objective);
  auto sparse = std::make_shared<Dataset>();
  std::vector<Eigen::Triplet<double>> trip;
  Rng rng = make_rng(4);
  for (Index i = 0; i < 60; ++i)
    for (Index j = 0; j < 8; ++j)
      if (uniform(rng, 0, 1) < 0.15) trip.emplace_back(i, j, uniform(rng, -1, 1));
  sparse->A = DataMatrix::from_triplets(60, 8, trip);
  sparse->b = Vector::Ones(60);
  for (Index i = 0; i < 60; i += 2) sparse->b[i] = -1.0;
  out.push_back(std::make_shared<LogisticObjective>(sparse, 0.05));
  return out;
}

}  // namespace

TEST(EvalValue, QuadraticHalfSquaredNorm) {
  QuadraticObjective q(Matrix::Identity(2, 2), Vector::Zero(2));
  EXPECT_DOUBLE_EQ(q.make_state(Vector{{3.0, 4.0}}).F(), 12.5);
}

TEST(EvalValue, LogisticZeroMargin) {
  LogisticObjective f(dense_data(Matrix::Zero(1, 2), Vector::Ones(1)), 0.0);
  EXPECT_NEAR(f.make_state(Vector{{5.0, -3.0}}).F(), std::log(2.0), 1e-15);
}

TEST(EvalValue, LogSumExpSymmetricTerms) {
  LogSumExpObjective f(dense_data(Matrix{{1.0}, {-1.0}}, Vector::Zero(2)), 1.0);
  EXPECT_NEAR(f.make_state(Vector::Zero(1)).F(), std::log(2.0), 1e-15);
}

TEST(EvalValue, LogSumExpStableFarOut) {
  // (<a,x> - b)/sigma = +-700 must not overflow
  LogSumExpObjective f(dense_data(Matrix{{1.0}, {-1.0}}, Vector::Zero(2)), 0.5);
  const IterateState s = f.make_state(Vector::Constant(1, 350.0));
  EXPECT_TRUE(std::isfinite(s.F()));
  EXPECT_NEAR(s.F(), 350.0, 1e-12);
}

TEST(EvalValue, MpmathReferenceSmallInstances) {
  LogisticObjective lg(dense_data(kA3, Vector{{1.0, -1.0, 1.0}}), 0.1);
  EXPECT_NEAR(lg.make_state(kX3).F(), 0.69039420835523522, 1e-15);
  LogSumExpObjective lse(dense_data(kA3, Vector{{0.2, -0.1, 0.4}}), 0.5);
  EXPECT_NEAR(lse.make_state(kX3).F(), 0.47668932941998937, 1e-15);
}

TEST(EvalValue, RegularizerAddsPsi) {
  QuadraticObjective q(Matrix::Identity(2, 2), Vector::Zero(2), RegularizerSpec::l1(0.5));
  const IterateState s = q.make_state(Vector{{1.0, -2.0}});
  EXPECT_DOUBLE_EQ(s.f_value, 2.5);
  EXPECT_DOUBLE_EQ(s.psi_value, 1.5);
  EXPECT_DOUBLE_EQ(s.F(), 4.0);
}

TEST(SubspaceGradient, QuadraticSecondCoordinate) {
  QuadraticObjective q(Matrix::Identity(2, 2), Vector::Zero(2));
  const Vector g = q.subspace_gradient(q.make_state(Vector::Ones(2)), SketchSample{{1}});
  ASSERT_EQ(g.size(), 1);
  EXPECT_DOUBLE_EQ(g[0], 1.0);
}

TEST(SubspaceGradient, LogisticSingleRow) {
  LogisticObjective f(dense_data(Matrix{{2.0, 0.0}}, Vector::Ones(1)), 0.0);
  const Vector g = f.subspace_gradient(f.make_state(Vector::Zero(2)), SketchSample{{0}});
  EXPECT_NEAR(g[0], -1.0, 1e-15);
}

TEST(SubspaceGradient, LogSumExpGeneratedOriginIsStationary) {
  const auto gen = generate_logsumexp(SyntheticSpec::logsumexp(20, 0.25, 7));
  const IterateState s = gen.objective->make_state(Vector::Zero(20));
  EXPECT_LE(gen.objective->subspace_gradient(s, SketchSample{{0, 5, 19}}).norm(), 1e-10);
}

TEST(SubspaceGradient, MpmathReference) {
  LogisticObjective lg(dense_data(kA3, Vector{{1.0, -1.0, 1.0}}), 0.1);
  const Vector g = lg.subspace_gradient(lg.make_state(kX3), SketchSample{{0, 1}});
  EXPECT_NEAR(g[0], 0.22265718022740342, 1e-15);
  EXPECT_NEAR(g[1], 0.13041986874327585, 1e-15);
  LogSumExpObjective lse(dense_data(kA3, Vector{{0.2, -0.1, 0.4}}), 0.5);
  const Vector gl = lse.subspace_gradient(lse.make_state(kX3), SketchSample{{0, 1}});
  EXPECT_NEAR(gl[0], 0.77796623627396695, 1e-14);
  EXPECT_NEAR(gl[1], 0.0029237566924306548, 1e-14);
}

TEST(SubspaceGradient, OutOfRangeAndDuplicateIndices) {
  QuadraticObjective q(Matrix::Identity(3, 3), Vector::Zero(3));
  const IterateState s = q.make_state(Vector::Ones(3));
  EXPECT_THROW(q.subspace_gradient(s, SketchSample{{3}}), ContractViolation);
  EXPECT_THROW(q.subspace_gradient(s, SketchSample{{-1}}), ContractViolation);
  EXPECT_THROW(q.subspace_gradient(s, SketchSample{{1, 1}}), ContractViolation);
  EXPECT_THROW(q.subspace_gradient(s, SketchSample{}), ContractViolation);
}

TEST(SubspaceHessian, QuadraticConstant) {
  QuadraticObjective q(Matrix{{1.0, 0.0}, {0.0, 2.0}}, Vector::Zero(2));
  const Matrix H = q.subspace_hessian(q.make_state(Vector::Ones(2)), SketchSample{{1}});
  EXPECT_DOUBLE_EQ(H(0, 0), 2.0);
}

TEST(SubspaceHessian, LogisticSingleRow) {
  LogisticObjective f(dense_data(Matrix{{2.0, 0.0}}, Vector::Ones(1)), 0.0);
  EXPECT_NEAR(f.subspace_hessian(f.make_state(Vector::Zero(2)), SketchSample{{0}})(0, 0), 1.0, 1e-15);
}

TEST(SubspaceHessian, MpmathReference) {
  LogisticObjective lg(dense_data(kA3, Vector{{1.0, -1.0, 1.0}}), 0.1);
  const Matrix H = lg.subspace_hessian(lg.make_state(kX3), SketchSample{{0, 1}});
  EXPECT_NEAR(H(0, 0), 0.29119833424213433, 1e-15);
  EXPECT_NEAR(H(0, 1), -0.053728247122774472, 1e-15);
  EXPECT_NEAR(H(1, 1), 0.47051553419179308, 1e-15);
  LogSumExpObjective lse(dense_data(kA3, Vector{{0.2, -0.1, 0.4}}), 0.5);
  const Matrix Hl = lse.subspace_hessian(lse.make_state(kX3), SketchSample{{0, 1}});
  EXPECT_NEAR(Hl(0, 0), 0.49981352199249638, 1e-14);
  EXPECT_NEAR(Hl(0, 1), -0.63761437055340668, 1e-14);
  EXPECT_NEAR(Hl(1, 1), 1.8728147157642918, 1e-14);
}

TEST(SubspaceHessian, ExactlySymmetric) {
  for (const auto& f : all_oracles()) {
    const IterateState s = f->make_state(Vector::Constant(f->dim(), 0.3));
    const Matrix H = f->subspace_hessian(s, SketchSample{{2, 5}});
    EXPECT_EQ(H(0, 1), H(1, 0)) << to_string(f->kind());
  }
}

TEST(OracleProperties, GradientFiniteDifferences) {
  Rng rng = make_rng(11);
  for (const auto& f : all_oracles()) {
    const Index d = f->dim();
    for (int t = 0; t < 50; ++t) {
      Vector x(d), u(d);
      for (Index j = 0; j < d; ++j) {
        x[j] = uniform(rng, -1, 1);
        u[j] = uniform(rng, -1, 1);
      }
      const IterateState s = f->make_state(x);
      const double eps = 1e-6;
      const double fd = (f->smooth_value(x + eps * u) - f->smooth_value(x - eps * u)) / (2 * eps);
      EXPECT_LE(std::abs(f->full_gradient(s).dot(u) - fd), 1e-5 * (1 + std::abs(s.f_value)));
    }
  }
}

TEST(OracleProperties, HessianSecondDifferences) {
  Rng rng = make_rng(12);
  for (const auto& f : all_oracles()) {
    const Index d = f->dim();
    Sampler sampler(SamplerSpec::uniform(3), d);
    for (int t = 0; t < 50; ++t) {
      Vector x(d);
      for (Index j = 0; j < d; ++j) x[j] = uniform(rng, -1, 1);
      const SketchSample sk = sampler.sample(rng);
      Vector h(3);
      for (Index k = 0; k < 3; ++k) h[k] = uniform(rng, -1, 1);
      Vector u = Vector::Zero(d);
      for (Index k = 0; k < 3; ++k) u[sk.indices[static_cast<std::size_t>(k)]] = h[k];
      const IterateState s = f->make_state(x);
      const double exact = h.dot(f->subspace_hessian(s, sk) * h);
      const double eps = 1e-4;
      const double fd =
          (f->smooth_value(x + eps * u) - 2 * f->smooth_value(x) + f->smooth_value(x - eps * u)) / (eps * eps);
      EXPECT_LE(std::abs(exact - fd), 1e-4 * std::max(1.0, std::abs(exact))) << to_string(f->kind());
    }
  }
}

TEST(OracleProperties, SubspaceConsistency) {
  for (const auto& f : all_oracles()) {
    const IterateState s = f->make_state(Vector::LinSpaced(f->dim(), -1, 1));
    const SketchSample sk{{0, 3, 7}};
    const Vector full = f->full_gradient(s);
    const Matrix H = f->full_hessian(s);
    const SubspaceDerivatives der = f->subspace_derivatives(s, sk);
    for (Index a = 0; a < 3; ++a) {
      EXPECT_NEAR(der.gradient[a], full[sk.indices[static_cast<std::size_t>(a)]], 1e-12);
      for (Index b = 0; b < 3; ++b) {
        EXPECT_NEAR(der.hessian(a, b), H(sk.indices[static_cast<std::size_t>(a)], sk.indices[static_cast<std::size_t>(b)]),
                    1e-12);
      }
    }
    // the matrix-free operator agrees with the assembled block
    const Vector v{{0.5, -1.0, 2.0}};
    EXPECT_LE((f->subspace_hessian_operator(s, sk)(v) - der.hessian * v).norm(), 1e-12);
  }
}

TEST(OracleProperties, ConvexityWitness) {
  Rng rng = make_rng(13);
  for (const auto& f : all_oracles()) {
    Sampler sampler(SamplerSpec::uniform(4), f->dim());
    for (int t = 0; t < 20; ++t) {
      Vector x(f->dim());
      for (Index j = 0; j < f->dim(); ++j) x[j] = uniform(rng, -3, 3);
      const Matrix H = f->subspace_hessian(f->make_state(x), sampler.sample(rng));
      EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(H).eigenvalues().minCoeff(), -1e-10);
    }
  }
}

TEST(ApplyUpdate, ZeroStepOnlyAdvancesCounters) {
  const auto f = make_logistic(30, 5, 0.1, 1);
  const IterateState s = f->make_state(Vector::Constant(5, 0.2));
  IterateState t = s;
  f->apply_update(t, SketchSample{{1, 3}}, Vector::Zero(2));
  EXPECT_EQ(t.x, s.x);
  EXPECT_EQ(t.residuals, s.residuals);
  EXPECT_EQ(t.F(), s.F());
  EXPECT_EQ(t.coords_processed, s.coords_processed + 2);
}

TEST(ApplyUpdate, QuadraticFullSketchToOrigin) {
  QuadraticObjective q(Matrix::Identity(3, 3), Vector::Zero(3));
  IterateState s = q.make_state(Vector{{1.0, -2.0, 3.0}});
  const Vector h = -s.x;
  q.apply_update(s, SketchSample{{0, 1, 2}}, h);
  EXPECT_EQ(s.x, Vector::Zero(3));
  EXPECT_EQ(s.F(), 0.0);
}

TEST(ApplyUpdate, ResidualsMatchRecomputation) {
  const Matrix A{{0.5, -1.0, 2.0}, {1.5, 0.25, -0.75}};
  LogisticObjective f(dense_data(A, Vector{{1.0, -1.0}}), 0.0);
  IterateState s = f.make_state(Vector{{0.1, 0.2, 0.3}});
  f.apply_update(s, SketchSample{{0, 2}}, Vector{{0.7, -1.1}});
  const Vector direct = A * Vector{{0.8, 0.2, -0.8}};
  EXPECT_LE((s.residuals - direct).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ApplyUpdate, ResidualIntegrityAfterManyUpdates) {
  Rng rng = make_rng(14);
  for (const auto& f : all_oracles()) {
    const Index d = f->dim();
    IterateState s = f->make_state(Vector::Zero(d));
    Sampler sampler(SamplerSpec::uniform(2), d);
    for (int t = 0; t < 1000; ++t) {
      const SketchSample sk = sampler.sample(rng);
      f->apply_update(s, sk, Vector{{uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5)}});
    }
    const IterateState fresh = f->make_state(s.x);
    EXPECT_LE((s.residuals - fresh.residuals).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(std::abs(s.F() - fresh.F()), 1e-9 * (1 + std::abs(fresh.F())));
    EXPECT_EQ(s.coords_processed, 2000);
  }
}

TEST(ApplyUpdate, BlendIsAffineInCaches) {
  const auto f = make_logistic(20, 4, 0.1, 5);
  const IterateState a = f->make_state(Vector{{1.0, 0.0, -1.0, 2.0}});
  const IterateState b = f->make_state(Vector{{-0.5, 0.5, 0.5, 0.0}});
  IterateState c;
  f->blend(c, a, 0.3, b, 0.7);
  const IterateState fresh = f->make_state(0.3 * a.x + 0.7 * b.x);
  EXPECT_LE((c.residuals - fresh.residuals).norm(), 1e-14);
  EXPECT_NEAR(c.F(), fresh.F(), 1e-14);
}

TEST(PsiSlice, Examples) {
  const Vector x{{2.0, -1.0}};
  const PsiSlice none = psi_slice(RegularizerSpec::none(), x, SketchSample{{0}});
  EXPECT_EQ(none.value(Vector::Constant(1, 5.0)), 0.0);
  const double lambda = 0.8;
  const PsiSlice l2 = psi_slice(RegularizerSpec::squared_l2(lambda), x, SketchSample{{0}});
  EXPECT_DOUBLE_EQ(l2.value(Vector::Constant(1, 1.0)), lambda / 2 * 9);
  const PsiSlice l1 = psi_slice(RegularizerSpec::l1(lambda), x, SketchSample{{1}});
  EXPECT_EQ(l1.value(Vector::Constant(1, 1.0)), 0.0);
}

TEST(PsiSlice, NonSeparableKindRejected) {
  EXPECT_THROW(parse_regularizer_kind("group_lasso"), UnsupportedFeature);
  EXPECT_EQ(parse_regularizer_kind("l1"), RegularizerKind::l1);
}

TEST(Kernels, ParallelPolicyMatchesSerialOracle) {
  const auto serial = make_logistic(3000, 6, 0.1, 9);
  auto parallel = make_logistic(3000, 6, 0.1, 9);
  parallel->set_kernel_policy(kernels::Policy::parallel);
  const Vector x = Vector::LinSpaced(6, -0.5, 0.5);
  const IterateState a = serial->make_state(x);
  const IterateState b = parallel->make_state(x);
  EXPECT_NEAR(a.F(), b.F(), 1e-12);
  const SketchSample sk{{1, 4}};
  EXPECT_LE((serial->subspace_gradient(a, sk) - parallel->subspace_gradient(b, sk)).norm(), 1e-12);
  EXPECT_LE((serial->subspace_hessian(a, sk) - parallel->subspace_hessian(b, sk)).norm(), 1e-12);
}
