#include "sscn/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sscn/error.hpp"

namespace sscn {

Index sampler_width(const SamplerSpec& spec, Index d) {
  switch (spec.kind) {
    case SamplerKind::uniform_subset:
      return spec.tau;
    case SamplerKind::single_weighted:
      return 1;
    case SamplerKind::full:
      return d;
  }
  return 0;
}

void validate_sampler(const SamplerSpec& spec, Index d) {
  if (d < 1) throw ConfigError("sampler: dimension must be positive");
  switch (spec.kind) {
    case SamplerKind::uniform_subset:
      if (spec.tau < 1 || spec.tau > d) {
        throw ConfigError("sampler.tau: must satisfy 1 <= tau <= d (tau=" +
                          std::to_string(spec.tau) + ", d=" + std::to_string(d) + ")");
      }
      break;
    case SamplerKind::single_weighted: {
      if (static_cast<Index>(spec.probabilities.size()) != d) {
        throw ConfigError("sampler.p: expected " + std::to_string(d) + " probabilities");
      }
      double total = 0.0;
      for (double p : spec.probabilities) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("sampler.p: negative or non-finite entry");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9) throw ConfigError("sampler.p: probabilities must sum to 1");
      break;
    }
    case SamplerKind::full:
      break;
  }
}

bool satisfies_uniformity(const SamplerSpec& spec, Index d) {
  switch (spec.kind) {
    case SamplerKind::uniform_subset:
    case SamplerKind::full:
      return true;
    case SamplerKind::single_weighted: {
      const double target = 1.0 / static_cast<double>(d);
      return std::all_of(spec.probabilities.begin(), spec.probabilities.end(),
                         [&](double p) { return std::abs(p - target) <= 1e-12; });
    }
  }
  return false;
}

Sampler::Sampler(SamplerSpec spec, Index d) : spec_(std::move(spec)), d_(d) {
  validate_sampler(spec_, d_);
  if (spec_.kind == SamplerKind::uniform_subset) scratch_.resize(static_cast<std::size_t>(d_));
  if (spec_.kind == SamplerKind::single_weighted) {
    weighted_ = std::discrete_distribution<Index>(spec_.probabilities.begin(), spec_.probabilities.end());
  }
}

SketchSample Sampler::sample(Rng& rng) {
  SketchSample s;
  sample_into(rng, s);
  return s;
}

void Sampler::sample_into(Rng& rng, SketchSample& out) {
  switch (spec_.kind) {
    case SamplerKind::full:
      out.indices.resize(static_cast<std::size_t>(d_));
      std::iota(out.indices.begin(), out.indices.end(), Index{0});
      return;
    case SamplerKind::single_weighted:
      out.indices.assign(1, weighted_(rng));
      return;
    case SamplerKind::uniform_subset: {
      // partial Fisher-Yates: the first tau slots end up a uniform tau-subset
      std::iota(scratch_.begin(), scratch_.end(), Index{0});
      const auto tau = static_cast<std::size_t>(spec_.tau);
      for (std::size_t i = 0; i < tau; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, scratch_.size() - 1);
        std::swap(scratch_[i], scratch_[pick(rng)]);
      }
      out.indices.assign(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(tau));
      std::sort(out.indices.begin(), out.indices.end());
      return;
    }
  }
}

ProjectionEstimate empirical_projection(const SamplerSpec& spec, Index d, Index trials,
                                        std::uint64_t seed, bool parallel) {
  if (trials < 1) throw ConfigError("empirical_projection: trials must be >= 1");
  validate_sampler(spec, d);

  // P^S for a coordinate sketch is the 0/1 diagonal indicator of S, so only
  // the diagonal needs accumulating; off-diagonal entries are identically 0.
  constexpr Index kStreams = 64;
  std::vector<Vector> counts(kStreams, Vector::Zero(d));

#pragma omp parallel for schedule(static) if (parallel)
  for (Index stream = 0; stream < kStreams; ++stream) {
    const Index begin = trials * stream / kStreams;
    const Index end = trials * (stream + 1) / kStreams;
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(stream));
    Sampler sampler(spec, d);
    SketchSample s;
    Vector& c = counts[static_cast<std::size_t>(stream)];
    for (Index t = begin; t < end; ++t) {
      sampler.sample_into(rng, s);
      for (Index j : s.indices) c[j] += 1.0;
    }
  }

  Vector total = Vector::Zero(d);
  for (const Vector& c : counts) total += c;

  ProjectionEstimate est;
  est.trials = trials;
  est.mean = Matrix::Zero(d, d);
  est.std_error = Matrix::Zero(d, d);
  const double n = static_cast<double>(trials);
  for (Index j = 0; j < d; ++j) {
    const double p = total[j] / n;
    est.mean(j, j) = p;
    // Bernoulli indicator: sample variance p(1-p) * n/(n-1)
    const double var = trials > 1 ? p * (1.0 - p) * n / (n - 1.0) : 0.0;
    est.std_error(j, j) = std::sqrt(var / n);
  }
  return est;
}

}  // namespace sscn
