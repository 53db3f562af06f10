#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sscn/cubic.hpp"
#include "sscn/linalg.hpp"
#include "sscn/oracle.hpp"
#include "sscn/sketch.hpp"
#include "sscn/theory.hpp"

namespace sscn {

enum class Algorithm { sscn, cd, acd, sdna };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);  // ConfigError naming the input

/// How the step constant is chosen: M for sscn, L for cd.
///  coordinate_table: M_{e_j} / L_j for tau = 1, the global constant for tau > 1
///  global:           a fixed `value` (M_mode fixed_global(M))
///  adaptive:         halve at the start of each iteration, double until accepted;
///                    `value` is the initial estimate
enum class StepMode { coordinate_table, global, adaptive };

struct StepRule {
  StepMode mode = StepMode::coordinate_table;
  double value = 0.0;

  static StepRule table() { return {}; }
  static StepRule fixed_global(double v) { return {StepMode::global, v}; }
  static StepRule adaptive(double initial) { return {StepMode::adaptive, initial}; }
};

std::string to_string(const StepRule& rule);

struct RunConfig {
  Algorithm algorithm = Algorithm::sscn;
  SamplerSpec sampler = SamplerSpec::uniform(1);
  StepRule step;
  long max_iterations = 1000;
  // Stop once F - F* <= target_gap; without F* the same number bounds
  // ||grad f(x)||, tested at trace points.
  std::optional<double> target_gap;
  double time_limit_seconds = std::numeric_limits<double>::infinity();
  long trace_every = 1;
  std::uint64_t seed = 0;
  SolveOptions solve;
  bool record_history = false;  // F after every iteration into RunResult::f_history
  bool record_iterates = false; // x after every iteration (desk scale only)
};

// Throws ConfigError for inconsistent settings.
void validate(const RunConfig& cfg, Index d);

/// Instance-level data shared by runs on the same objective.
struct RunContext {
  std::optional<double> f_star;
  std::optional<ConstantsReport> constants;
  std::optional<Matrix> smoothness;  // SDNA's L
};

struct TraceRecord {
  long k = 0;
  double epochs = 0.0;
  double F = 0.0;
  std::optional<double> gap;
  std::optional<double> grad_norm;
  std::optional<double> M_used;  // M for sscn, L for cd
  double elapsed_s = 0.0;
};

enum class Termination { gap_reached, max_iter, time_limit, error };

std::string_view to_string(Termination t);

struct RunStats {
  long iterations = 0;
  long descent_violations = 0;   // F(x+) > F(x) + 1e-12
  double max_increase = 0.0;
  long doublings = 0;
  long solves = 0;
  long accepted_first_try = 0;   // iterations whose first trial passed
};

struct RunResult {
  IterateState final_state;
  std::vector<TraceRecord> trace;
  Termination termination = Termination::max_iter;
  std::string error;
  RunStats stats;
  std::vector<double> f_history;       // F(x^0), F(x^1), ... when requested
  std::vector<Vector> iterates;        // x^0, x^1, ... when requested
};

RunResult sscn_run(const Objective& f, const RunConfig& cfg, const Vector& x0, const RunContext& ctx = {});
RunResult cd_run(const Objective& f, const RunConfig& cfg, const Vector& x0, const RunContext& ctx = {});
// Non-uniform accelerated CD (probabilities proportional to sqrt(L_j)).
RunResult acd_run(const Objective& f, const RunConfig& cfg, const Vector& x0, const RunContext& ctx = {});
RunResult sdna_run(const Objective& f, const RunConfig& cfg, const Vector& x0, const RunContext& ctx = {});

// Dispatches on cfg.algorithm.
RunResult run(const Objective& f, const RunConfig& cfg, const Vector& x0, const RunContext& ctx = {});

struct ReferenceSolution {
  Vector x_star;
  double f_star = 0.0;
  double grad_norm = 0.0;
  long iterations = 0;
};

/// High-accuracy minimizer: closed form for unregularized quadratics,
/// otherwise full-sketch adaptive SSCN with the exact subproblem solver until
/// ||grad|| <= 1e-12 or F stops decreasing. l1 regularizers fall back to
/// single-coordinate SSCN sweeps.
ReferenceSolution reference_solve(const Objective& f, const Vector& x0);

}  // namespace sscn
