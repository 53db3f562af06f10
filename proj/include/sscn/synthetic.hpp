#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>

#include "sscn/dataset.hpp"
#include "sscn/oracle.hpp"

namespace sscn {

enum class SyntheticKind { logsumexp, quadratic, logistic };

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::logistic;
  Index n = 0;                   // logistic only; log-sum-exp always uses n = 6d
  Index d = 1;
  double sigma = 0.0;            // logsumexp
  double condition_number = 1.0; // quadratic
  std::uint64_t seed = 0;

  static SyntheticSpec logsumexp(Index d, double sigma, std::uint64_t seed) {
    return {SyntheticKind::logsumexp, 6 * d, d, sigma, 1.0, seed};
  }
  static SyntheticSpec quadratic(Index d, double condition_number, std::uint64_t seed) {
    return {SyntheticKind::quadratic, d, d, 0.0, condition_number, seed};
  }
  static SyntheticSpec logistic(Index n, Index d, std::uint64_t seed) {
    return {SyntheticKind::logistic, n, d, 0.0, 1.0, seed};
  }
};

void validate(const SyntheticSpec& spec);
std::string to_string(SyntheticKind kind);

struct GeneratedLogSumExp {
  std::shared_ptr<LogSumExpObjective> objective;
  Vector x0;  // all ones
};

/// a~_i, b uniform on [-1,1]; a_i = a~_i - grad f~(0), which puts the
/// minimizer at the origin. n = 6d.
GeneratedLogSumExp generate_logsumexp(const SyntheticSpec& spec);

struct GeneratedQuadratic {
  std::shared_ptr<QuadraticObjective> objective;
  Vector x_star;  // A^{-1} b
  double f_star = 0.0;
};

/// A = Q diag(lambda) Q^T with Haar-random Q and a log-uniform spectrum whose
/// extremes are exactly 1 and `condition_number`.
GeneratedQuadratic generate_quadratic(const SyntheticSpec& spec);

/// Uniform [-1,1] features with labels from a planted linear classifier plus
/// 10% label noise.
Dataset generate_logistic_data(const SyntheticSpec& spec);

// JSON sidecar recording the generator spec; written next to a LIBSVM export.
void write_sidecar(std::ostream& out, const SyntheticSpec& spec);

}  // namespace sscn
