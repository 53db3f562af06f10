#include "sscn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sscn/error.hpp"

namespace sscn {

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::quadratic:
      return "quadratic";
    case ObjectiveKind::logistic:
      return "logistic";
    case ObjectiveKind::log_sum_exp:
      return "log_sum_exp";
  }
  return "?";
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

// ---------------------------------------------------------------------------
// Objective

Objective::Objective(Index d, RegularizerSpec reg) : d_(d), reg_(reg) {
  if (d < 1) throw ConfigError("objective dimension must be positive");
  if (reg.lambda < 0.0) throw ConfigError("regularizer.lambda must be nonnegative");
}

IterateState Objective::make_state(const Vector& x) const {
  if (x.size() != d_) throw ContractViolation("make_state: x has wrong dimension");
  IterateState s;
  s.x = x;
  refresh(s);
  return s;
}

void Objective::refresh(IterateState& s) const {
  s.residuals = compute_cache(s.x);
  s.x_norm_sq = s.x.squaredNorm();
  s.f_value = smooth_from_cache(s.x, s.x_norm_sq, s.residuals);
  s.psi_value = reg_.value(s.x);
}

double Objective::smooth_value(const Vector& x) const {
  return smooth_from_cache(x, x.squaredNorm(), compute_cache(x));
}

void Objective::check_sketch(const SketchSample& sketch) const {
  if (sketch.indices.empty()) throw ContractViolation("sketch must contain at least one index");
  std::vector<Index> sorted = sketch.indices;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 0 || sorted.back() >= d_) throw ContractViolation("sketch index out of range");
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ContractViolation("sketch indices must be distinct");
  }
}

SubspaceDerivatives Objective::subspace_derivatives(const IterateState& s, const SketchSample& sketch) const {
  return {subspace_gradient(s, sketch), subspace_hessian(s, sketch)};
}

HessianOperator Objective::subspace_hessian_operator(const IterateState& s, const SketchSample& sketch) const {
  Matrix H = subspace_hessian(s, sketch);
  return [H = std::move(H)](const Vector& v) -> Vector { return H * v; };
}

void Objective::apply_update(IterateState& s, const SketchSample& sketch, const Vector& h) const {
  check_sketch(sketch);
  if (h.size() != sketch.tau()) throw ContractViolation("apply_update: h has wrong length");
  double psi_delta = 0.0;
  double norm_delta = 0.0;
  for (Index k = 0; k < sketch.tau(); ++k) {
    const Index j = sketch.indices[static_cast<std::size_t>(k)];
    const double old = s.x[j];
    const double next = old + h[k];
    psi_delta += reg_.coordinate_value(next) - reg_.coordinate_value(old);
    norm_delta += next * next - old * old;
    s.x[j] = next;
  }
  update_cache(s.residuals, sketch, h);
  s.x_norm_sq += norm_delta;
  s.psi_value += psi_delta;
  s.f_value = smooth_from_cache(s.x, s.x_norm_sq, s.residuals);
  s.coords_processed += sketch.tau();
}

void Objective::blend(IterateState& out, const IterateState& a, double wa, const IterateState& b,
                      double wb) const {
  out.x = wa * a.x + wb * b.x;
  out.residuals = wa * a.residuals + wb * b.residuals;
  out.x_norm_sq = out.x.squaredNorm();
  out.f_value = smooth_from_cache(out.x, out.x_norm_sq, out.residuals);
  out.psi_value = reg_.value(out.x);
}

// ---------------------------------------------------------------------------
// Quadratic

QuadraticObjective::QuadraticObjective(Matrix A, Vector b, RegularizerSpec reg)
    : Objective(A.rows(), reg), A_(std::move(A)), b_(std::move(b)) {
  if (A_.rows() != A_.cols()) throw ConfigError("quadratic: A must be square");
  if (b_.size() != A_.rows()) throw ConfigError("quadratic: b has wrong length");
  if (!A_.isApprox(A_.transpose(), 1e-12)) throw ConfigError("quadratic: A must be symmetric");
}

Vector QuadraticObjective::compute_cache(const Vector& x) const { return A_ * x; }

void QuadraticObjective::update_cache(Vector& cache, const SketchSample& sketch, const Vector& h) const {
  for (Index k = 0; k < sketch.tau(); ++k) {
    const double hk = h[k];
    if (hk != 0.0) cache.noalias() += hk * A_.col(sketch.indices[static_cast<std::size_t>(k)]);
  }
}

double QuadraticObjective::smooth_from_cache(const Vector& x, double, const Vector& cache) const {
  return 0.5 * x.dot(cache) - b_.dot(x);
}

Vector QuadraticObjective::subspace_gradient(const IterateState& s, const SketchSample& sketch) const {
  check_sketch(sketch);
  Vector g(sketch.tau());
  for (Index k = 0; k < sketch.tau(); ++k) {
    const Index j = sketch.indices[static_cast<std::size_t>(k)];
    g[k] = s.residuals[j] - b_[j];
  }
  return g;
}

Matrix QuadraticObjective::subspace_hessian(const IterateState&, const SketchSample& sketch) const {
  check_sketch(sketch);
  return A_(sketch.indices, sketch.indices);
}

Vector QuadraticObjective::full_gradient(const IterateState& s) const { return s.residuals - b_; }

Matrix QuadraticObjective::full_hessian(const IterateState&) const { return A_; }

// ---------------------------------------------------------------------------
// Linear models

LinearModelObjective::LinearModelObjective(std::shared_ptr<const Dataset> data, RegularizerSpec reg)
    : Objective(data ? data->d() : 0, reg), data_(std::move(data)) {
  if (data_->n() < 1) throw ConfigError("dataset has no rows");
}

Vector LinearModelObjective::compute_cache(const Vector& x) const { return data_->A.times(x); }

void LinearModelObjective::update_cache(Vector& cache, const SketchSample& sketch, const Vector& h) const {
  const Matrix cols = data_->A.gather_columns(sketch.indices);
  kernels::add_product(kernel_policy(), cache, cols, h);
}

Vector LinearModelObjective::subspace_gradient(const IterateState& s, const SketchSample& sketch) const {
  check_sketch(sketch);
  const Matrix cols = data_->A.gather_columns(sketch.indices);
  return assemble_gradient(s, sketch, cols, row_weights(s));
}

Matrix LinearModelObjective::subspace_hessian(const IterateState& s, const SketchSample& sketch) const {
  return subspace_derivatives(s, sketch).hessian;
}

SubspaceDerivatives LinearModelObjective::subspace_derivatives(const IterateState& s,
                                                               const SketchSample& sketch) const {
  check_sketch(sketch);
  const Matrix cols = data_->A.gather_columns(sketch.indices);
  const RowWeights w = row_weights(s);
  const Vector grad_part = kernels::transpose_times(kernel_policy(), cols, w.d1);
  SubspaceDerivatives out;
  out.gradient = assemble_gradient(s, sketch, cols, w);
  out.hessian = assemble_hessian(cols, w, grad_part);
  return out;
}

HessianOperator LinearModelObjective::subspace_hessian_operator(const IterateState& s,
                                                                const SketchSample& sketch) const {
  check_sketch(sketch);
  auto cols = std::make_shared<const Matrix>(data_->A.gather_columns(sketch.indices));
  auto w = std::make_shared<const RowWeights>(row_weights(s));
  return [this, cols, w](const Vector& v) { return hessian_apply(*cols, *w, v); };
}

// ---------------------------------------------------------------------------
// Logistic

LogisticObjective::LogisticObjective(std::shared_ptr<const Dataset> data, double lambda, RegularizerSpec reg)
    : LinearModelObjective(std::move(data), reg), lambda_(lambda) {
  if (!(lambda_ >= 0.0)) throw ConfigError("logistic: lambda must be nonnegative");
  for (Index i = 0; i < data_->n(); ++i) {
    if (data_->b[i] != 1.0 && data_->b[i] != -1.0) throw ConfigError("logistic: labels must be in {-1,+1}");
  }
}

double LogisticObjective::smooth_from_cache(const Vector&, double x_norm_sq, const Vector& cache) const {
  const Index n = cache.size();
  Vector loss(n);
  const Vector& b = data_->b;
  const bool par = kernel_policy() == kernels::Policy::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (Index i = 0; i < n; ++i) loss[i] = softplus(-b[i] * cache[i]);
  return kernels::sum(kernel_policy(), kernels::as_span(loss)) / static_cast<double>(n) +
         0.5 * lambda_ * x_norm_sq;
}

LinearModelObjective::RowWeights LogisticObjective::row_weights(const IterateState& s) const {
  const Index n = s.residuals.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Vector& b = data_->b;
  RowWeights w{Vector(n), Vector(n)};
  const bool par = kernel_policy() == kernels::Policy::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (Index i = 0; i < n; ++i) {
    const double t = b[i] * s.residuals[i];
    // sigma(-t) and sigma(t) without overflow
    const double e = std::exp(-std::abs(t));
    const double small = e / (1.0 + e);
    const double large = 1.0 / (1.0 + e);
    const double sig_neg = t >= 0 ? small : large;
    w.d1[i] = -b[i] * sig_neg * inv_n;
    w.d2[i] = small * large * inv_n;
  }
  return w;
}

Vector LogisticObjective::assemble_gradient(const IterateState& s, const SketchSample& sketch,
                                            const Matrix& cols, const RowWeights& w) const {
  Vector g = kernels::transpose_times(kernel_policy(), cols, w.d1);
  if (lambda_ != 0.0) {
    for (Index k = 0; k < g.size(); ++k) g[k] += lambda_ * s.x[sketch.indices[static_cast<std::size_t>(k)]];
  }
  return g;
}

Matrix LogisticObjective::assemble_hessian(const Matrix& cols, const RowWeights& w, const Vector&) const {
  Matrix H = kernels::weighted_gram(kernel_policy(), cols, w.d2);
  H.diagonal().array() += lambda_;
  return H;
}

Vector LogisticObjective::hessian_apply(const Matrix& cols, const RowWeights& w, const Vector& v) const {
  const Vector u = w.d2.cwiseProduct(cols * v);
  return kernels::transpose_times(kernel_policy(), cols, u) + lambda_ * v;
}

Vector LogisticObjective::full_gradient(const IterateState& s) const {
  const RowWeights w = row_weights(s);
  return data_->A.transpose_times(w.d1) + lambda_ * s.x;
}

Matrix LogisticObjective::full_hessian(const IterateState& s) const {
  const RowWeights w = row_weights(s);
  const Matrix A = data_->A.to_dense();
  Matrix H = A.transpose() * w.d2.asDiagonal() * A;
  H.diagonal().array() += lambda_;
  return 0.5 * (H + H.transpose());
}

// ---------------------------------------------------------------------------
// Log-sum-exp

LogSumExpObjective::LogSumExpObjective(std::shared_ptr<const Dataset> data, double sigma, RegularizerSpec reg)
    : LinearModelObjective(std::move(data), reg), sigma_(sigma) {
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) throw ConfigError("log_sum_exp: sigma must be positive");
}

Vector LogSumExpObjective::softmax_weights(const Vector& residuals) const {
  const Index n = residuals.size();
  const Vector& b = data_->b;
  Vector z(n);
  const bool par = kernel_policy() == kernels::Policy::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (Index i = 0; i < n; ++i) z[i] = (residuals[i] - b[i]) / sigma_;
  const double m = kernels::max(kernel_policy(), kernels::as_span(z));
#pragma omp parallel for schedule(static) if (par)
  for (Index i = 0; i < n; ++i) z[i] = std::exp(z[i] - m);
  const double total = kernels::sum(kernel_policy(), kernels::as_span(z));
  return z / total;
}

double LogSumExpObjective::smooth_from_cache(const Vector&, double, const Vector& cache) const {
  const Index n = cache.size();
  const Vector& b = data_->b;
  Vector z(n);
  const bool par = kernel_policy() == kernels::Policy::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (Index i = 0; i < n; ++i) z[i] = (cache[i] - b[i]) / sigma_;
  const double m = kernels::max(kernel_policy(), kernels::as_span(z));
#pragma omp parallel for schedule(static) if (par)
  for (Index i = 0; i < n; ++i) z[i] = std::exp(z[i] - m);
  return sigma_ * (m + std::log(kernels::sum(kernel_policy(), kernels::as_span(z))));
}

LinearModelObjective::RowWeights LogSumExpObjective::row_weights(const IterateState& s) const {
  Vector w = softmax_weights(s.residuals);
  Vector curv = w / sigma_;
  return {std::move(w), std::move(curv)};
}

Vector LogSumExpObjective::assemble_gradient(const IterateState&, const SketchSample&, const Matrix& cols,
                                             const RowWeights& w) const {
  return kernels::transpose_times(kernel_policy(), cols, w.d1);
}

Matrix LogSumExpObjective::assemble_hessian(const Matrix& cols, const RowWeights& w,
                                            const Vector& grad_part) const {
  Matrix H = kernels::weighted_gram(kernel_policy(), cols, w.d2);
  H.noalias() -= (grad_part * grad_part.transpose()) / sigma_;
  return 0.5 * (H + H.transpose());
}

Vector LogSumExpObjective::hessian_apply(const Matrix& cols, const RowWeights& w, const Vector& v) const {
  const Vector Av = cols * v;
  const Vector g = kernels::transpose_times(kernel_policy(), cols, w.d1);
  const Vector u = w.d2.cwiseProduct(Av);
  return kernels::transpose_times(kernel_policy(), cols, u) - g * (g.dot(v) / sigma_);
}

Vector LogSumExpObjective::full_gradient(const IterateState& s) const {
  return data_->A.transpose_times(softmax_weights(s.residuals));
}

Matrix LogSumExpObjective::full_hessian(const IterateState& s) const {
  const Vector w = softmax_weights(s.residuals);
  const Matrix A = data_->A.to_dense();
  const Vector g = A.transpose() * w;
  Matrix H = (A.transpose() * w.asDiagonal() * A - g * g.transpose()) / sigma_;
  return 0.5 * (H + H.transpose());
}

}  // namespace sscn
