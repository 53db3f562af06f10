#pragma once

// Row-loop kernels behind the linear-model oracles. Each kernel exists twice:
// a plain serial reference and an OpenMP version. The OpenMP reductions sum
// fixed-size row blocks and then combine the block partials in order, so their
// output is independent of the thread count (but may differ from the serial
// reference in the last bits).

#include <span>

#include "sscn/linalg.hpp"

namespace sscn::kernels {

enum class Policy { serial, parallel };

inline constexpr Index kRowBlock = 1024;

namespace serial {
double sum(std::span<const double> v);
double max(std::span<const double> v);
Vector transpose_times(const Matrix& cols, const Vector& u);  // cols^T u
Matrix weighted_gram(const Matrix& cols, const Vector& w);    // cols^T diag(w) cols
void add_product(Vector& r, const Matrix& cols, const Vector& h);  // r += cols h
}  // namespace serial

namespace omp {
double sum(std::span<const double> v);
double max(std::span<const double> v);
Vector transpose_times(const Matrix& cols, const Vector& u);
Matrix weighted_gram(const Matrix& cols, const Vector& w);
void add_product(Vector& r, const Matrix& cols, const Vector& h);
}  // namespace omp

inline double sum(Policy p, std::span<const double> v) {
  return p == Policy::parallel ? omp::sum(v) : serial::sum(v);
}
inline double max(Policy p, std::span<const double> v) {
  return p == Policy::parallel ? omp::max(v) : serial::max(v);
}
inline Vector transpose_times(Policy p, const Matrix& cols, const Vector& u) {
  return p == Policy::parallel ? omp::transpose_times(cols, u) : serial::transpose_times(cols, u);
}
inline Matrix weighted_gram(Policy p, const Matrix& cols, const Vector& w) {
  return p == Policy::parallel ? omp::weighted_gram(cols, w) : serial::weighted_gram(cols, w);
}
inline void add_product(Policy p, Vector& r, const Matrix& cols, const Vector& h) {
  if (p == Policy::parallel) {
    omp::add_product(r, cols, h);
  } else {
    serial::add_product(r, cols, h);
  }
}

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace sscn::kernels
