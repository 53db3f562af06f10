#include "sscn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <json.hpp>

#include "sscn/error.hpp"
#include "sscn/rng.hpp"

namespace sscn {

std::string to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::logsumexp:
      return "logsumexp";
    case SyntheticKind::quadratic:
      return "quadratic";
    case SyntheticKind::logistic:
      return "logistic";
  }
  return "?";
}

void validate(const SyntheticSpec& spec) {
  if (spec.d < 1) throw ConfigError("synthetic.d must be >= 1");
  switch (spec.kind) {
    case SyntheticKind::logsumexp:
      if (!(spec.sigma > 0.0)) throw ConfigError("synthetic.sigma must be positive");
      break;
    case SyntheticKind::quadratic:
      if (!(spec.condition_number >= 1.0)) throw ConfigError("synthetic.condition_number must be >= 1");
      break;
    case SyntheticKind::logistic:
      if (spec.n < 1) throw ConfigError("synthetic.n must be >= 1");
      break;
  }
}

GeneratedLogSumExp generate_logsumexp(const SyntheticSpec& spec) {
  validate(spec);
  if (spec.kind != SyntheticKind::logsumexp) throw ConfigError("generate_logsumexp: wrong spec kind");
  const Index d = spec.d;
  const Index n = 6 * d;
  Rng rng = make_rng(spec.seed);

  Matrix A(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) A(i, j) = uniform(rng, -1.0, 1.0);
  Vector b(n);
  for (Index i = 0; i < n; ++i) b[i] = uniform(rng, -1.0, 1.0);

  // At x = 0 every residual is -b_i, so the softmax weights do not depend on A.
  Vector z = -b / spec.sigma;
  z.array() -= z.maxCoeff();
  Vector w = z.array().exp().matrix();
  w /= w.sum();
  const Vector grad0 = A.transpose() * w;
  A.rowwise() -= grad0.transpose();

  auto data = std::make_shared<Dataset>();
  data->A = DataMatrix(std::move(A));
  data->b = std::move(b);

  GeneratedLogSumExp out;
  out.objective = std::make_shared<LogSumExpObjective>(std::move(data), spec.sigma);
  out.x0 = Vector::Ones(d);
  return out;
}

GeneratedQuadratic generate_quadratic(const SyntheticSpec& spec) {
  validate(spec);
  if (spec.kind != SyntheticKind::quadratic) throw ConfigError("generate_quadratic: wrong spec kind");
  const Index d = spec.d;
  Rng rng = make_rng(spec.seed);
  std::normal_distribution<double> normal;

  Matrix A;
  if (spec.condition_number == 1.0) {
    A = Matrix::Identity(d, d);
  } else {
    Matrix G(d, d);
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) G(i, j) = normal(rng);
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ();
    // sign fix makes Q Haar distributed
    const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < d; ++j)
      if (R(j, j) < 0) Q.col(j) *= -1.0;

    Vector spectrum(d);
    const double log_kappa = std::log(spec.condition_number);
    for (Index j = 0; j < d; ++j) spectrum[j] = std::exp(uniform(rng, 0.0, log_kappa));
    spectrum[0] = 1.0;
    if (d > 1) spectrum[d - 1] = spec.condition_number;
    A = Q * spectrum.asDiagonal() * Q.transpose();
    A = 0.5 * (A + A.transpose());
  }
  Vector b(d);
  for (Index j = 0; j < d; ++j) b[j] = uniform(rng, -1.0, 1.0);

  GeneratedQuadratic out;
  out.x_star = A.llt().solve(b);
  out.f_star = -0.5 * b.dot(out.x_star);
  out.objective = std::make_shared<QuadraticObjective>(std::move(A), std::move(b));
  return out;
}

Dataset generate_logistic_data(const SyntheticSpec& spec) {
  validate(spec);
  if (spec.kind != SyntheticKind::logistic) throw ConfigError("generate_logistic_data: wrong spec kind");
  const Index n = spec.n;
  const Index d = spec.d;
  Rng rng = make_rng(spec.seed);
  std::normal_distribution<double> normal;

  Matrix A(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) A(i, j) = uniform(rng, -1.0, 1.0);
  Vector planted(d);
  for (Index j = 0; j < d; ++j) planted[j] = normal(rng);
  Vector b(n);
  std::bernoulli_distribution flip(0.1);
  for (Index i = 0; i < n; ++i) {
    const double margin = A.row(i).dot(planted);
    double label = margin >= 0.0 ? 1.0 : -1.0;
    if (flip(rng)) label = -label;
    b[i] = label;
  }
  Dataset ds;
  ds.A = DataMatrix(std::move(A));
  ds.b = std::move(b);
  return ds;
}

void write_sidecar(std::ostream& out, const SyntheticSpec& spec) {
  nlohmann::json j;
  j["kind"] = to_string(spec.kind);
  j["n"] = spec.n;
  j["d"] = spec.d;
  j["seed"] = spec.seed;
  if (spec.kind == SyntheticKind::logsumexp) j["sigma"] = spec.sigma;
  if (spec.kind == SyntheticKind::quadratic) j["condition_number"] = spec.condition_number;
  j["rng"] = std::string(kRngFamily);
  out << j.dump(2) << '\n';
}

}  // namespace sscn
