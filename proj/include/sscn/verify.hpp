#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sscn/oracle.hpp"
#include "sscn/sketch.hpp"
#include "sscn/theory.hpp"

namespace sscn {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Synthetic logistic regression used throughout the checks.
std::shared_ptr<LogisticObjective> make_logistic(Index n, Index d, double lambda, std::uint64_t seed);

/// verify_cubic_bound on random (x, S, h) with ||h|| <= h_max. tau = 1 uses
/// M_coord[j], larger tau uses M_global.
PropertyResult check_cubic_bound(const Objective& f, const ConstantsReport& c, Index tau, int trials,
                                 std::uint64_t seed, double h_max = 10.0);
PropertyResult check_constant_ordering(const ConstantsReport& c);

// solve_1d against golden-section and a 0.01 grid on [-100, 100].
PropertyResult check_solve_1d_optimality(int cases, std::uint64_t seed);
PropertyResult check_solve_1d_example();  // g=1, H=1, M=2
// Exact block solver: model stationarity and secular residual, 2 <= tau <= 10.
PropertyResult check_block_stationarity(int cases, std::uint64_t seed);
// Iterative (tol 1e-4) vs exact model values.
PropertyResult check_iterative_vs_exact(int cases, std::uint64_t seed);
// g, H, M scaled by alpha leaves h unchanged.
PropertyResult check_scaling_covariance(int cases, std::uint64_t seed);

// Entrywise |mean - (tau/d) I| <= 3 standard errors.
PropertyResult check_projection_law(const SamplerSpec& spec, Index d, Index trials, std::uint64_t seed);

struct ContractionReport {
  double zeta = 0.0;
  double rho = 0.0;            // fitted per-iteration contraction of mean(F - F*)
  double predicted = 0.0;      // 1 - zeta
  double relative_error = 0.0; // |rho - (1 - zeta)| / (1 - zeta)
  std::size_t fit_first = 0;
  std::size_t fit_last = 0;
  long iterations = 0;
  long descent_violations = 0;
  std::vector<double> mean_gap;
};

/// SSCN with M = 0 on a quadratic (sketch-and-project) over many seeds. The
/// gap is computed as (1/2)||x - x*||_A^2 so it keeps relative precision.
ContractionReport measure_sketch_and_project_rate(const QuadraticObjective& q, const Vector& x_star, Index tau,
                                                  int seeds, long iterations);
PropertyResult check_sketch_and_project_rate(const ContractionReport& r, double tolerance = 0.15);

/// Suites behind `sscn verify`: bounds, solvers, projection, rates.
struct VerifyInputs {
  std::shared_ptr<const Objective> objective;  // overrides the default instance
  std::optional<Vector> x_star;                // for quadratic rate checks
  std::optional<SamplerSpec> sampler;
};

bool is_suite(std::string_view name);
std::vector<PropertyResult> run_suite(std::string_view suite, const VerifyInputs& inputs = {});

}  // namespace sscn
