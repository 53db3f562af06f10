#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sscn/linalg.hpp"
#include "sscn/rng.hpp"

namespace sscn {

/// One draw of the random subspace: the columns `indices` of the identity.
/// Indices are distinct and sorted ascending, so S^T S = I and ||S h|| = ||h||.
///
/// Non-coordinate sketches (general column-orthonormal S) would live behind
/// this same type; the cubic solvers then need the change of variables
/// u = (S^T S)^{1/2} h, which is the identity here.
struct SketchSample {
  std::vector<Index> indices;

  Index tau() const { return static_cast<Index>(indices.size()); }
};

enum class SamplerKind { uniform_subset, single_weighted, full };

struct SamplerSpec {
  SamplerKind kind = SamplerKind::uniform_subset;
  Index tau = 1;                      // uniform_subset only
  std::vector<double> probabilities;  // single_weighted only, length d

  static SamplerSpec uniform(Index tau) { return {SamplerKind::uniform_subset, tau, {}}; }
  static SamplerSpec full() { return {SamplerKind::full, 0, {}}; }
  static SamplerSpec weighted(std::vector<double> p) {
    return {SamplerKind::single_weighted, 1, std::move(p)};
  }
};

// Expected/fixed width of a draw in dimension d.
Index sampler_width(const SamplerSpec& spec, Index d);

// True when E[P^S] = (tau/d) I holds, i.e. the global-rate theory applies.
bool satisfies_uniformity(const SamplerSpec& spec, Index d);

// Throws ConfigError when the spec cannot be used in dimension d.
void validate_sampler(const SamplerSpec& spec, Index d);

/// Stateful sampler for one run. Holds scratch storage for the partial
/// Fisher-Yates shuffle; draws are a pure function of the RNG stream.
class Sampler {
 public:
  Sampler(SamplerSpec spec, Index d);

  SketchSample sample(Rng& rng);
  void sample_into(Rng& rng, SketchSample& out);

  const SamplerSpec& spec() const { return spec_; }
  Index dim() const { return d_; }

 private:
  SamplerSpec spec_;
  Index d_;
  std::vector<Index> scratch_;
  std::discrete_distribution<Index> weighted_;
};

struct ProjectionEstimate {
  Matrix mean;    // Monte Carlo average of P^S
  Matrix std_error;  // entrywise standard error of the mean
  Index trials = 0;
};

/// Monte Carlo estimate of E[P^S]. Trials are split into a fixed number of
/// independent RNG streams, so the result does not depend on the thread count.
ProjectionEstimate empirical_projection(const SamplerSpec& spec, Index d, Index trials,
                                        std::uint64_t seed, bool parallel = true);

}  // namespace sscn
