#pragma once

#include <functional>
#include <memory>
#include <string_view>

#include "sscn/dataset.hpp"
#include "sscn/kernels.hpp"
#include "sscn/linalg.hpp"
#include "sscn/regularizer.hpp"
#include "sscn/sketch.hpp"

namespace sscn {

enum class ObjectiveKind { quadratic, logistic, log_sum_exp };

std::string_view to_string(ObjectiveKind kind);

/// Current point plus everything cached about it. `residuals` holds the
/// linear cache: <a_i, x> for linear models, A x for the quadratic. Every
/// cache is linear in x, which is what makes `Objective::blend` possible.
struct IterateState {
  Vector x;
  Vector residuals;
  double f_value = 0.0;    // smooth part f(x)
  double psi_value = 0.0;  // separable regularizer psi(x)
  double x_norm_sq = 0.0;  // tracked incrementally for ridge terms
  long iteration = 0;
  long coords_processed = 0;

  double F() const { return f_value + psi_value; }
};

using HessianOperator = std::function<Vector(const Vector&)>;

struct SubspaceDerivatives {
  Vector gradient;  // S^T grad f(x)
  Matrix hessian;   // S^T hess f(x) S
};

/// F = f + psi with a subspace (sketched) second-order oracle.
///
/// Objectives are immutable once built and may be shared between runs;
/// the kernel policy must be chosen before sharing.
class Objective {
 public:
  Objective(Index d, RegularizerSpec reg);
  virtual ~Objective() = default;

  virtual ObjectiveKind kind() const = 0;
  Index dim() const { return d_; }
  const RegularizerSpec& regularizer() const { return reg_; }

  void set_kernel_policy(kernels::Policy p) { policy_ = p; }
  kernels::Policy kernel_policy() const { return policy_; }

  IterateState make_state(const Vector& x) const;
  // Recompute every cached quantity of `s` from s.x.
  void refresh(IterateState& s) const;

  double value(const IterateState& s) const { return s.F(); }
  // f(x) from scratch, no caches (O(nd)); used by finite-difference checks.
  double smooth_value(const Vector& x) const;

  virtual Vector subspace_gradient(const IterateState& s, const SketchSample& sketch) const = 0;
  virtual Matrix subspace_hessian(const IterateState& s, const SketchSample& sketch) const = 0;
  virtual SubspaceDerivatives subspace_derivatives(const IterateState& s, const SketchSample& sketch) const;
  // h -> S^T hess f(x) S h without forming the tau x tau matrix.
  virtual HessianOperator subspace_hessian_operator(const IterateState& s, const SketchSample& sketch) const;

  virtual Vector full_gradient(const IterateState& s) const = 0;
  virtual Matrix full_hessian(const IterateState& s) const = 0;

  // x <- x + S h with an O(n tau) cache update; counters advance.
  void apply_update(IterateState& s, const SketchSample& sketch, const Vector& h) const;

  // out <- wa * a + wb * b (x and caches), with values recomputed.
  void blend(IterateState& out, const IterateState& a, double wa, const IterateState& b, double wb) const;

 protected:
  void check_sketch(const SketchSample& sketch) const;

  virtual Vector compute_cache(const Vector& x) const = 0;
  virtual void update_cache(Vector& cache, const SketchSample& sketch, const Vector& h) const = 0;
  virtual double smooth_from_cache(const Vector& x, double x_norm_sq, const Vector& cache) const = 0;

 private:
  Index d_;
  RegularizerSpec reg_;
  kernels::Policy policy_ = kernels::Policy::serial;
};

/// f(x) = 1/2 x^T A x - <b, x>, A symmetric PSD. Hessian constant (M = 0).
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(Matrix A, Vector b, RegularizerSpec reg = {});

  ObjectiveKind kind() const override { return ObjectiveKind::quadratic; }
  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }

  Vector subspace_gradient(const IterateState& s, const SketchSample& sketch) const override;
  Matrix subspace_hessian(const IterateState& s, const SketchSample& sketch) const override;
  Vector full_gradient(const IterateState& s) const override;
  Matrix full_hessian(const IterateState& s) const override;

 protected:
  Vector compute_cache(const Vector& x) const override;
  void update_cache(Vector& cache, const SketchSample& sketch, const Vector& h) const override;
  double smooth_from_cache(const Vector& x, double x_norm_sq, const Vector& cache) const override;

 private:
  Matrix A_;
  Vector b_;
};

/// Shared plumbing for f(x) = g(A x) models over a Dataset.
class LinearModelObjective : public Objective {
 public:
  LinearModelObjective(std::shared_ptr<const Dataset> data, RegularizerSpec reg);

  const Dataset& data() const { return *data_; }
  std::shared_ptr<const Dataset> data_ptr() const { return data_; }

  Vector subspace_gradient(const IterateState& s, const SketchSample& sketch) const override;
  Matrix subspace_hessian(const IterateState& s, const SketchSample& sketch) const override;
  SubspaceDerivatives subspace_derivatives(const IterateState& s, const SketchSample& sketch) const override;
  HessianOperator subspace_hessian_operator(const IterateState& s, const SketchSample& sketch) const override;

 protected:
  // Row weights for the current residuals: first derivative weights `d1`
  // (gradient = A^T d1 + ...) and curvature weights `d2`.
  struct RowWeights {
    Vector d1;
    Vector d2;
  };
  virtual RowWeights row_weights(const IterateState& s) const = 0;
  // Assemble from the gathered columns A(:,S) and weights.
  virtual Vector assemble_gradient(const IterateState& s, const SketchSample& sketch, const Matrix& cols,
                                   const RowWeights& w) const = 0;
  virtual Matrix assemble_hessian(const Matrix& cols, const RowWeights& w, const Vector& grad_part) const = 0;
  virtual Vector hessian_apply(const Matrix& cols, const RowWeights& w, const Vector& v) const = 0;

  Vector compute_cache(const Vector& x) const override;
  void update_cache(Vector& cache, const SketchSample& sketch, const Vector& h) const override;

  std::shared_ptr<const Dataset> data_;
};

/// f(x) = (1/n) sum_i log(1 + exp(-b_i <a_i, x>)) + (lambda/2) ||x||^2.
class LogisticObjective final : public LinearModelObjective {
 public:
  LogisticObjective(std::shared_ptr<const Dataset> data, double lambda, RegularizerSpec reg = {});

  ObjectiveKind kind() const override { return ObjectiveKind::logistic; }
  double lambda() const { return lambda_; }

  Vector full_gradient(const IterateState& s) const override;
  Matrix full_hessian(const IterateState& s) const override;

 protected:
  RowWeights row_weights(const IterateState& s) const override;
  Vector assemble_gradient(const IterateState& s, const SketchSample& sketch, const Matrix& cols,
                           const RowWeights& w) const override;
  Matrix assemble_hessian(const Matrix& cols, const RowWeights& w, const Vector& grad_part) const override;
  Vector hessian_apply(const Matrix& cols, const RowWeights& w, const Vector& v) const override;
  double smooth_from_cache(const Vector& x, double x_norm_sq, const Vector& cache) const override;

 private:
  double lambda_;
};

/// f(x) = sigma log sum_i exp((<a_i, x> - b_i) / sigma), evaluated with a
/// max shift so no exponential overflows.
class LogSumExpObjective final : public LinearModelObjective {
 public:
  LogSumExpObjective(std::shared_ptr<const Dataset> data, double sigma, RegularizerSpec reg = {});

  ObjectiveKind kind() const override { return ObjectiveKind::log_sum_exp; }
  double sigma() const { return sigma_; }

  Vector full_gradient(const IterateState& s) const override;
  Matrix full_hessian(const IterateState& s) const override;

  // Softmax weights w_i at the residuals r.
  Vector softmax_weights(const Vector& residuals) const;

 protected:
  RowWeights row_weights(const IterateState& s) const override;
  Vector assemble_gradient(const IterateState& s, const SketchSample& sketch, const Matrix& cols,
                           const RowWeights& w) const override;
  Matrix assemble_hessian(const Matrix& cols, const RowWeights& w, const Vector& grad_part) const override;
  Vector hessian_apply(const Matrix& cols, const RowWeights& w, const Vector& v) const override;
  double smooth_from_cache(const Vector& x, double x_norm_sq, const Vector& cache) const override;

 private:
  double sigma_;
};

// Numerically stable log(1 + exp(z)).
double softplus(double z);

}  // namespace sscn
