#include <algorithm>
#include <limits>

#include "sscn/kernels.hpp"

namespace sscn::kernels::serial {

double sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double max(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  return m;
}

Vector transpose_times(const Matrix& cols, const Vector& u) {
  const Index n = cols.rows();
  Vector out(cols.cols());
  for (Index j = 0; j < cols.cols(); ++j) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += cols(i, j) * u[i];
    out[j] = s;
  }
  return out;
}

Matrix weighted_gram(const Matrix& cols, const Vector& w) {
  const Index n = cols.rows();
  const Index tau = cols.cols();
  Matrix out(tau, tau);
  for (Index j = 0; j < tau; ++j) {
    for (Index k = 0; k <= j; ++k) {
      double s = 0.0;
      for (Index i = 0; i < n; ++i) s += cols(i, j) * w[i] * cols(i, k);
      out(j, k) = s;
      out(k, j) = s;
    }
  }
  return out;
}

void add_product(Vector& r, const Matrix& cols, const Vector& h) {
  for (Index j = 0; j < cols.cols(); ++j) {
    const double hj = h[j];
    if (hj == 0.0) continue;
    for (Index i = 0; i < cols.rows(); ++i) r[i] += cols(i, j) * hj;
  }
}

}  // namespace sscn::kernels::serial
