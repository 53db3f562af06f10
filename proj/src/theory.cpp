#include "sscn/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "sscn/error.hpp"

namespace sscn {
namespace {

constexpr Index kMaxTheoryDim = 2000;
constexpr int kStreams = 64;

double binomial(Index n, Index k) {
  double out = 1.0;
  for (Index i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return out;
}

Matrix symmetric_sqrt(const Matrix& H) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(H);
  if (eig.info() != Eigen::Success) throw NumericalFailure("eigendecomposition failed");
  if (eig.eigenvalues().minCoeff() <= 0.0) throw NumericalFailure("compute_zeta: H is not positive definite");
  return eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
}

// Adds weight * S (S^T H S)^{-1} S^T into acc.
void accumulate_projection(const Matrix& H, const std::vector<Index>& idx, double weight, Matrix& acc) {
  const Matrix sub = H(idx, idx);
  Eigen::LLT<Matrix> llt(sub);
  if (llt.info() != Eigen::Success) throw NumericalFailure("compute_zeta: singular S^T H S");
  const Matrix inv = llt.solve(Matrix::Identity(sub.rows(), sub.cols()));
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b)
      acc(idx[a], idx[b]) += weight * inv(static_cast<Index>(a), static_cast<Index>(b));
}

// w^T S (S^T H S)^{-1} S^T w.
double projected_quadratic(const Matrix& H, const std::vector<Index>& idx, const Vector& w) {
  const Matrix sub = H(idx, idx);
  const Vector ws = w(idx);
  Eigen::LLT<Matrix> llt(sub);
  if (llt.info() != Eigen::Success) throw NumericalFailure("compute_zeta: singular S^T H S");
  return ws.dot(llt.solve(ws));
}

double min_eig(const Matrix& M, Vector* vec = nullptr) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (M + M.transpose()));
  if (eig.info() != Eigen::Success) throw NumericalFailure("eigendecomposition failed");
  if (vec) *vec = eig.eigenvectors().col(0);
  return eig.eigenvalues()[0];
}

}  // namespace

double logistic_third_derivative(double t) {
  // phi(t) = log(1 + e^{-t}); with s = sigma(t), phi'' = s(1-s) and phi''' = s(1-s)(1-2s).
  const double e = std::exp(-std::abs(t));
  const double s_small = e / (1.0 + e);
  const double s_large = 1.0 / (1.0 + e);
  const double s = t >= 0 ? s_large : s_small;
  return s * (1.0 - s) * (1.0 - 2.0 * s);
}

ConstantsReport estimate_constants(const Objective& f, double c_third, const std::optional<Vector>& x_ref) {
  const Index d = f.dim();
  ConstantsReport r;
  r.M_coord = Vector::Zero(d);
  r.L_coord = Vector::Zero(d);

  if (f.kind() == ObjectiveKind::quadratic) {
    const auto& q = static_cast<const QuadraticObjective&>(f);
    r.L_coord = q.A().diagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(q.A(), Eigen::EigenvaluesOnly);
    r.L_global = eig.eigenvalues().maxCoeff();
    r.mu = std::max(0.0, eig.eigenvalues().minCoeff());
    return r;
  }

  const auto& lin = static_cast<const LinearModelObjective&>(f);
  const Dataset& ds = lin.data();
  const Index n = ds.n();
  const double inv_n = 1.0 / static_cast<double>(n);

  if (f.kind() == ObjectiveKind::logistic) {
    const auto& lg = static_cast<const LogisticObjective&>(f);
    const double c = c_third > 0.0 ? c_third : kLogisticThirdBound;
    r.c_third = c;
    Vector row_sq = Vector::Zero(n);
    Vector col_cube = Vector::Zero(d);
    Vector col_sq = Vector::Zero(d);
    ds.A.for_each_nonzero([&](Index i, Index j, double v) {
      row_sq[i] += v * v;
      col_sq[j] += v * v;
      col_cube[j] += std::abs(v) * v * v;
    });
    double sum_cube = 0.0;
    for (Index i = 0; i < n; ++i) sum_cube += row_sq[i] * std::sqrt(row_sq[i]);
    r.M_global = c * inv_n * sum_cube;
    r.M_coord = c * inv_n * col_cube;
    r.L_coord = 0.25 * inv_n * col_sq.array() + lg.lambda();
    const Matrix gram = ds.A.gram();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    r.L_global = 0.25 * inv_n * eig.eigenvalues().maxCoeff() + lg.lambda();
    r.mu = lg.lambda();
    return r;
  }

  // log-sum-exp
  const auto& lse = static_cast<const LogSumExpObjective&>(f);
  const double sigma = lse.sigma();
  const Matrix A = ds.A.to_dense();
  const Vector lo = A.colwise().minCoeff().transpose();
  const Vector hi = A.colwise().maxCoeff().transpose();
  const Vector width = hi - lo;
  r.M_coord = width.array().cube() / (4.0 * sigma * sigma);
  r.L_coord = width.array().square() / (4.0 * sigma);
  // Width of {<a_i,u>} over unit u is at most 2 max_i ||a_i - c|| for any center c.
  const Vector center = 0.5 * (lo + hi);
  const double radius = (A.rowwise() - center.transpose()).rowwise().norm().maxCoeff();
  const double D = 2.0 * radius;
  r.M_global = std::max(D * D * D / (4.0 * sigma * sigma), r.M_coord.maxCoeff());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A.transpose() * A, Eigen::EigenvaluesOnly);
  r.L_global = std::min(eig.eigenvalues().maxCoeff() / sigma, D * D / (4.0 * sigma));
  if (x_ref) {
    const IterateState s = f.make_state(*x_ref);
    r.mu = std::max(0.0, min_eig(f.full_hessian(s)));
  }
  return r;
}

Matrix smoothness_matrix(const Objective& f) {
  if (f.kind() == ObjectiveKind::quadratic) return static_cast<const QuadraticObjective&>(f).A();
  const auto& lin = static_cast<const LinearModelObjective&>(f);
  const Matrix gram = lin.data().A.gram();
  if (f.kind() == ObjectiveKind::logistic) {
    const auto& lg = static_cast<const LogisticObjective&>(f);
    Matrix L = gram / (4.0 * static_cast<double>(lin.data().n()));
    L.diagonal().array() += lg.lambda();
    return L;
  }
  return gram / static_cast<const LogSumExpObjective&>(f).sigma();
}

std::string to_string(ZetaMethod m) {
  return m == ZetaMethod::exact_enumeration ? "exact_enumeration" : "monte_carlo";
}

bool zeta_enumerable(const SamplerSpec& spec, Index d) {
  switch (spec.kind) {
    case SamplerKind::full:
    case SamplerKind::single_weighted:
      return true;
    case SamplerKind::uniform_subset:
      return binomial(d, spec.tau) <= 1e6;
  }
  return false;
}

ZetaReport compute_zeta(const Matrix& H, const SamplerSpec& spec, Index trials, std::uint64_t seed,
                        bool force_monte_carlo, bool parallel) {
  const Index d = H.rows();
  if (H.cols() != d) throw ContractViolation("compute_zeta: H must be square");
  if (d > kMaxTheoryDim) throw ConfigError("compute_zeta: dimension above 2000 is not supported");
  validate_sampler(spec, d);
  const Matrix Hs = symmetric_sqrt(0.5 * (H + H.transpose()));

  ZetaReport out;
  out.expectation = Matrix::Zero(d, d);

  if (!force_monte_carlo && zeta_enumerable(spec, d)) {
    out.method = ZetaMethod::exact_enumeration;
    if (spec.kind == SamplerKind::full) {
      std::vector<Index> all(static_cast<std::size_t>(d));
      std::iota(all.begin(), all.end(), Index{0});
      accumulate_projection(H, all, 1.0, out.expectation);
      out.trials = 1;
    } else if (spec.kind == SamplerKind::single_weighted) {
      for (Index j = 0; j < d; ++j) {
        const double p = spec.probabilities[static_cast<std::size_t>(j)];
        if (p > 0.0) accumulate_projection(H, {j}, p, out.expectation);
      }
      out.trials = d;
    } else {
      const Index tau = spec.tau;
      const double weight = 1.0 / binomial(d, tau);
      std::vector<Index> idx(static_cast<std::size_t>(tau));
      std::iota(idx.begin(), idx.end(), Index{0});
      Index count = 0;
      while (true) {
        accumulate_projection(H, idx, weight, out.expectation);
        ++count;
        // next combination in lexicographic order
        Index i = tau - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == d - tau + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (Index k = i + 1; k < tau; ++k) idx[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k - 1)] + 1;
      }
      out.trials = count;
    }
    out.zeta = min_eig(Hs * out.expectation * Hs);
    return out;
  }

  if (trials < 1) throw ConfigError("compute_zeta: trials must be positive");
  out.method = ZetaMethod::monte_carlo;
  out.trials = trials;
  // Fixed streams, each with a fixed share of trials: thread-count independent.
  std::vector<Matrix> partial(kStreams, Matrix::Zero(d, d));
  auto share = [&](int s) { return trials / kStreams + (s < trials % kStreams ? 1 : 0); };
#pragma omp parallel for schedule(static) if (parallel)
  for (int s = 0; s < kStreams; ++s) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(s));
    Sampler sampler(spec, d);
    SketchSample sk;
    for (Index t = 0; t < share(s); ++t) {
      sampler.sample_into(rng, sk);
      accumulate_projection(H, sk.indices, 1.0, partial[static_cast<std::size_t>(s)]);
    }
  }
  for (const Matrix& p : partial) out.expectation += p;
  out.expectation /= static_cast<double>(trials);

  Vector v;
  out.zeta = min_eig(Hs * out.expectation * Hs, &v);

  // Delta method: zeta_hat ~ mean_t of w^T P_t w with w = H^{1/2} v.
  const Vector w = Hs * v;
  std::vector<double> sum(kStreams, 0.0), sum_sq(kStreams, 0.0);
#pragma omp parallel for schedule(static) if (parallel)
  for (int s = 0; s < kStreams; ++s) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(s));
    Sampler sampler(spec, d);
    SketchSample sk;
    for (Index t = 0; t < share(s); ++t) {
      sampler.sample_into(rng, sk);
      const double q = projected_quadratic(H, sk.indices, w);
      sum[static_cast<std::size_t>(s)] += q;
      sum_sq[static_cast<std::size_t>(s)] += q * q;
    }
  }
  const double n = static_cast<double>(trials);
  const double mean = std::accumulate(sum.begin(), sum.end(), 0.0) / n;
  const double second = std::accumulate(sum_sq.begin(), sum_sq.end(), 0.0) / n;
  const double var = std::max(0.0, second - mean * mean) * (trials > 1 ? n / (n - 1.0) : 1.0);
  out.std_error = std::sqrt(var / n);
  return out;
}

BoundCheck verify_cubic_bound(const Objective& f, const Vector& x, const SketchSample& sketch, const Vector& h,
                              double M_S) {
  const IterateState s = f.make_state(x);
  const SubspaceDerivatives der = f.subspace_derivatives(s, sketch);
  Vector x_next = x;
  for (Index k = 0; k < sketch.tau(); ++k) x_next[sketch.indices[static_cast<std::size_t>(k)]] += h[k];
  const double fx = f.smooth_value(x);
  const double fn = f.smooth_value(x_next);
  BoundCheck out;
  out.lhs = std::abs(fn - fx - der.gradient.dot(h) - 0.5 * h.dot(der.hessian * h));
  const double r = h.norm();
  out.rhs = M_S / 6.0 * r * r * r;
  out.slack = out.rhs - out.lhs;
  out.holds = out.lhs <= out.rhs + 1e-10 * (1.0 + std::abs(fx));
  return out;
}

double newton_decrement(const Objective& f, const IterateState& s) {
  if (f.dim() > kMaxTheoryDim) throw ConfigError("newton_decrement: dimension above 2000 is not supported");
  const Vector g = f.full_gradient(s);
  Eigen::LLT<Matrix> llt(f.full_hessian(s));
  if (llt.info() != Eigen::Success) throw NumericalFailure("newton_decrement: Hessian is not positive definite");
  return std::sqrt(std::max(0.0, g.dot(llt.solve(g))));
}

Matrix shifted_subspace_hessian(const Matrix& H, const Vector& g, double M) {
  Matrix out = H;
  out.diagonal().array() += std::sqrt(M / 2.0) * std::sqrt(g.norm());
  return out;
}

double guaranteed_decrease(const Matrix& H, const Vector& g, double M) {
  Eigen::LLT<Matrix> llt(shifted_subspace_hessian(H, g, M));
  if (llt.info() != Eigen::Success) throw NumericalFailure("guaranteed_decrease: H_S is not positive definite");
  return 0.5 * g.dot(llt.solve(g));
}

RateCheck check_global_rate(const std::vector<double>& mean_gaps, double L, double M, double R, Index tau, Index d,
                            double gap0) {
  RateCheck out;
  out.bound_curve.resize(mean_gaps.size());
  const double ratio = static_cast<double>(d) / static_cast<double>(tau);
  for (std::size_t k = 0; k < mean_gaps.size(); ++k) {
    if (k == 0) {
      out.bound_curve[0] = gap0;
    } else {
      const double kk = static_cast<double>(k);
      const double q = kk / ratio;
      out.bound_curve[k] = (ratio - 1.0) * 4.5 * L * R * R / kk + ratio * ratio * 9.0 * M * R * R * R / (kk * kk) +
                           gap0 / (1.0 + 0.25 * q * q * q);
    }
    if (!out.violated_at && mean_gaps[k] > out.bound_curve[k]) out.violated_at = k;
  }
  return out;
}

double fit_contraction(const std::vector<double>& values, std::size_t first, std::size_t last) {
  if (last >= values.size() || last <= first) throw ContractViolation("fit_contraction: bad window");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double m = 0;
  for (std::size_t k = first; k <= last; ++k) {
    if (!(values[k] > 0.0)) throw ContractViolation("fit_contraction: values must be positive");
    const double x = static_cast<double>(k);
    const double y = std::log(values[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    m += 1;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return std::exp(slope);
}

}  // namespace sscn
