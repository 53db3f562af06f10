#include <algorithm>
#include <limits>
#include <vector>

#include "sscn/kernels.hpp"

namespace sscn::kernels::omp {
namespace {

Index block_count(Index n) { return (n + kRowBlock - 1) / kRowBlock; }

}  // namespace

double sum(std::span<const double> v) {
  const auto n = static_cast<Index>(v.size());
  const Index nb = block_count(n);
  std::vector<double> partial(static_cast<std::size_t>(nb), 0.0);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < nb; ++b) {
    const Index end = std::min(n, (b + 1) * kRowBlock);
    double s = 0.0;
    for (Index i = b * kRowBlock; i < end; ++i) s += v[static_cast<std::size_t>(i)];
    partial[static_cast<std::size_t>(b)] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

double max(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  const auto n = static_cast<Index>(v.size());
#pragma omp parallel for reduction(max : m) schedule(static)
  for (Index i = 0; i < n; ++i) m = std::max(m, v[static_cast<std::size_t>(i)]);
  return m;
}

Vector transpose_times(const Matrix& cols, const Vector& u) {
  const Index n = cols.rows();
  const Index tau = cols.cols();
  const Index nb = block_count(n);
  Matrix partial = Matrix::Zero(tau, nb);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < nb; ++b) {
    const Index begin = b * kRowBlock;
    const Index len = std::min(n, begin + kRowBlock) - begin;
    partial.col(b).noalias() = cols.middleRows(begin, len).transpose() * u.segment(begin, len);
  }
  Vector out = Vector::Zero(tau);
  for (Index b = 0; b < nb; ++b) out += partial.col(b);
  return out;
}

Matrix weighted_gram(const Matrix& cols, const Vector& w) {
  const Index n = cols.rows();
  const Index tau = cols.cols();
  const Index nb = block_count(n);
  std::vector<Matrix> partial(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < nb; ++b) {
    const Index begin = b * kRowBlock;
    const Index len = std::min(n, begin + kRowBlock) - begin;
    const auto block = cols.middleRows(begin, len);
    Matrix weighted = w.segment(begin, len).asDiagonal() * block;
    partial[static_cast<std::size_t>(b)].noalias() = block.transpose() * weighted;
  }
  Matrix out = Matrix::Zero(tau, tau);
  for (const Matrix& p : partial) out += p;
  // symmetrize exactly; block products are symmetric only up to rounding
  return 0.5 * (out + out.transpose());
}

void add_product(Vector& r, const Matrix& cols, const Vector& h) {
  const Index n = cols.rows();
  const Index nb = block_count(n);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < nb; ++b) {
    const Index begin = b * kRowBlock;
    const Index len = std::min(n, begin + kRowBlock) - begin;
    r.segment(begin, len).noalias() += cols.middleRows(begin, len) * h;
  }
}

}  // namespace sscn::kernels::omp
