#include "sscn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/QR>

#include "sscn/cubic.hpp"
#include "sscn/error.hpp"
#include "sscn/rng.hpp"
#include "sscn/solver.hpp"
#include "sscn/synthetic.hpp"

namespace sscn {
namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

Vector random_uniform(Rng& rng, Index n, double lo, double hi) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

// Random SPD tau x tau matrix with spectrum in [lo, hi].
Matrix random_spd(Rng& rng, Index tau, double lo, double hi) {
  std::normal_distribution<double> normal;
  Matrix G(tau, tau);
  for (Index i = 0; i < tau; ++i)
    for (Index j = 0; j < tau; ++j) G(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  const Matrix Q = qr.householderQ();
  const Vector spectrum = random_uniform(rng, tau, lo, hi);
  Matrix H = Q * spectrum.asDiagonal() * Q.transpose();
  return 0.5 * (H + H.transpose());
}

double model_1d(double g, double H, double M, double h) {
  return g * h + 0.5 * H * h * h + M / 6.0 * std::abs(h) * h * h;
}

double golden_min(double g, double H, double M, double lo, double hi) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = model_1d(g, H, M, c), fd = model_1d(g, H, M, d);
  for (int i = 0; i < 200 && b - a > 1e-12; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = model_1d(g, H, M, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = model_1d(g, H, M, d);
    }
  }
  return std::min({fc, fd, model_1d(g, H, M, 0.5 * (a + b))});
}

}  // namespace

std::shared_ptr<LogisticObjective> make_logistic(Index n, Index d, double lambda, std::uint64_t seed) {
  auto ds = std::make_shared<Dataset>(generate_logistic_data(SyntheticSpec::logistic(n, d, seed)));
  return std::make_shared<LogisticObjective>(ds, lambda);
}

PropertyResult check_cubic_bound(const Objective& f, const ConstantsReport& c, Index tau, int trials,
                                 std::uint64_t seed, double h_max) {
  PropertyResult out{"cubic_upper_bound_tau" + std::to_string(tau), true, ""};
  const Index d = f.dim();
  Sampler sampler(SamplerSpec::uniform(tau), d);
  Rng rng = make_rng(seed);
  int violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const Vector x = random_uniform(rng, d, -2.0, 2.0);
    const SketchSample sk = sampler.sample(rng);
    Vector h = random_uniform(rng, tau, -1.0, 1.0);
    const double norm = h.norm();
    if (norm > 0.0) h *= uniform(rng, 0.0, h_max) / norm;
    const double M_S = tau == 1 ? c.M_coord[sk.indices[0]] : c.M_global;
    const BoundCheck b = verify_cubic_bound(f, x, sk, h, M_S);
    if (!b.holds) ++violations;
    worst = std::min(worst, b.slack);
  }
  out.passed = violations == 0;
  out.detail = std::to_string(trials) + " trials, " + std::to_string(violations) + " violations, min slack " + fmt(worst);
  return out;
}

PropertyResult check_constant_ordering(const ConstantsReport& c) {
  const double mx = c.M_coord.size() > 0 ? c.M_coord.maxCoeff() : 0.0;
  return {"constant_ordering", c.M_global >= mx, "M_global " + fmt(c.M_global) + " >= max_j M_j " + fmt(mx)};
}

PropertyResult check_solve_1d_optimality(int cases, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  int failures = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < cases; ++t) {
    const double g = uniform(rng, -10.0, 10.0);
    const double H = uniform(rng, 0.0, 10.0);
    const double M = uniform(rng, 0.0, 10.0);
    if (H == 0.0 && M == 0.0) continue;
    const double h = solve_1d(g, H, M).h[0];
    const double value = model_1d(g, H, M, h);
    double best = golden_min(g, H, M, -100.0, 100.0);
    for (int i = -10000; i <= 10000; ++i) best = std::min(best, model_1d(g, H, M, 0.01 * i));
    worst = std::max(worst, value - best);
    if (value > best + 1e-6) ++failures;
  }
  return {"solve_1d_global_optimality", failures == 0,
          std::to_string(cases) + " cases, " + std::to_string(failures) + " failures, max excess " + fmt(worst)};
}

PropertyResult check_solve_1d_example() {
  const double h = solve_1d(1.0, 1.0, 2.0).h[0];
  const bool ok = std::abs(h - (-0.618034)) <= 1e-5;
  return {"solve_1d_example", ok, "h = " + fmt(h) + " (expected -0.618034)"};
}

PropertyResult check_block_stationarity(int cases, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  int failures = 0;
  double worst_grad = 0.0, worst_secular = 0.0;
  for (int t = 0; t < cases; ++t) {
    const Index tau = 2 + static_cast<Index>(t % 9);
    CubicModel m;
    m.H = random_spd(rng, tau, 0.0, 10.0);
    m.g = random_uniform(rng, tau, -10.0, 10.0);
    m.M = uniform(rng, 0.01, 10.0);
    const CubicSolution sol = solve_block_exact(m);
    const double grad = model_gradient(m, sol.h).norm();
    const double secular = std::abs(sol.secular_radius - sol.h.norm());
    worst_grad = std::max(worst_grad, grad);
    worst_secular = std::max(worst_secular, secular / std::max(1.0, sol.h.norm()));
    if (grad > 1e-8 || secular > 1e-8 * std::max(1.0, sol.h.norm())) ++failures;
  }
  return {"block_exact_stationarity", failures == 0,
          std::to_string(cases) + " cases, max |grad| " + fmt(worst_grad) + ", max secular residual " +
              fmt(worst_secular)};
}

PropertyResult check_iterative_vs_exact(int cases, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  int failures = 0;
  double worst = 0.0;
  for (int t = 0; t < cases; ++t) {
    const Index tau = 2 + static_cast<Index>(t % 9);
    CubicModel m;
    m.H = random_spd(rng, tau, 0.1, 10.0);
    m.g = random_uniform(rng, tau, -10.0, 10.0);
    m.M = uniform(rng, 0.01, 10.0);
    const CubicSolution exact = solve_block_exact(m);
    const Matrix H = m.H;
    const CubicSolution iter = solve_block_iterative(m, [&H](const Vector& v) -> Vector { return H * v; }, 1e-4, 10000);
    const double diff = std::abs(model_value(m, iter.h) - model_value(m, exact.h));
    worst = std::max(worst, diff);
    if (diff > 1e-6 || !iter.converged) ++failures;
  }
  return {"iterative_matches_exact", failures == 0,
          std::to_string(cases) + " cases, max model gap " + fmt(worst)};
}

PropertyResult check_scaling_covariance(int cases, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  int failures = 0;
  double worst = 0.0;
  for (int t = 0; t < cases; ++t) {
    const Index tau = 1 + static_cast<Index>(t % 6);
    CubicModel m;
    m.H = random_spd(rng, tau, 0.0, 10.0);
    m.g = random_uniform(rng, tau, -10.0, 10.0);
    m.M = uniform(rng, 0.01, 10.0);
    const double alpha = std::exp(uniform(rng, -3.0, 3.0));
    CubicModel scaled = m;
    scaled.g *= alpha;
    scaled.H *= alpha;
    scaled.M *= alpha;
    SolveOptions opts;
    const Vector h1 = solve_cubic(m, opts).h;
    const Vector h2 = solve_cubic(scaled, opts).h;
    const double diff = (h1 - h2).norm() / std::max(1.0, h1.norm());
    worst = std::max(worst, diff);
    if (diff > 1e-10) ++failures;
  }
  return {"scaling_covariance", failures == 0, std::to_string(cases) + " cases, max |dh| " + fmt(worst)};
}

PropertyResult check_projection_law(const SamplerSpec& spec, Index d, Index trials, std::uint64_t seed) {
  const ProjectionEstimate est = empirical_projection(spec, d, trials, seed);
  const double target = static_cast<double>(sampler_width(spec, d)) / static_cast<double>(d);
  int failures = 0;
  double worst = 0.0;
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      const double expected = i == j ? target : 0.0;
      const double err = std::abs(est.mean(i, j) - expected);
      const double se = est.std_error(i, j);
      const double z = se > 0.0 ? err / se : (err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
      worst = std::max(worst, z);
      if (z > 3.0) ++failures;
    }
  }
  std::string name = "projection_law_d" + std::to_string(d) + "_tau" + std::to_string(sampler_width(spec, d));
  return {name, failures == 0,
          std::to_string(trials) + " draws, max |error|/stderr " + fmt(worst) + " (expected diag " + fmt(target) + ")"};
}

ContractionReport measure_sketch_and_project_rate(const QuadraticObjective& q, const Vector& x_star, Index tau,
                                                  int seeds, long iterations) {
  ContractionReport rep;
  const Index d = q.dim();
  const SamplerSpec spec = SamplerSpec::uniform(tau);
  rep.zeta = compute_zeta(q.A(), spec).zeta;
  rep.predicted = 1.0 - rep.zeta;

  RunConfig cfg;
  cfg.algorithm = Algorithm::sscn;
  cfg.sampler = spec;
  cfg.step = StepRule::fixed_global(0.0);
  cfg.max_iterations = iterations;
  cfg.trace_every = iterations;
  cfg.record_iterates = true;

  const std::size_t K = static_cast<std::size_t>(iterations) + 1;
  std::vector<std::vector<double>> gaps(static_cast<std::size_t>(seeds));
  std::vector<long> iters(static_cast<std::size_t>(seeds)), viol(static_cast<std::size_t>(seeds));
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < seeds; ++s) {
    RunConfig c = cfg;
    c.seed = static_cast<std::uint64_t>(s);
    const RunResult r = sscn_run(q, c, Vector::Zero(d));
    auto& g = gaps[static_cast<std::size_t>(s)];
    g.resize(K, 0.0);
    for (std::size_t k = 0; k < r.iterates.size() && k < K; ++k) {
      const Vector e = r.iterates[k] - x_star;
      g[k] = 0.5 * e.dot(q.A() * e);
    }
    iters[static_cast<std::size_t>(s)] = r.stats.iterations;
    viol[static_cast<std::size_t>(s)] = r.stats.descent_violations;
  }
  rep.mean_gap.assign(K, 0.0);
  for (int s = 0; s < seeds; ++s) {
    for (std::size_t k = 0; k < K; ++k) rep.mean_gap[k] += gaps[static_cast<std::size_t>(s)][k] / seeds;
    rep.iterations += iters[static_cast<std::size_t>(s)];
    rep.descent_violations += viol[static_cast<std::size_t>(s)];
  }
  // Skip the initial transient and stop before the gap reaches round-off.
  const double floor = 1e-20 * rep.mean_gap[0];
  rep.fit_first = K / 10;
  rep.fit_last = rep.fit_first;
  for (std::size_t k = rep.fit_first; k < K && rep.mean_gap[k] > floor; ++k) rep.fit_last = k;
  if (rep.fit_last > rep.fit_first + 1) {
    rep.rho = fit_contraction(rep.mean_gap, rep.fit_first, rep.fit_last);
  } else {
    rep.rho = std::numeric_limits<double>::quiet_NaN();
  }
  rep.relative_error = std::abs(rep.rho - rep.predicted) / rep.predicted;
  return rep;
}

PropertyResult check_sketch_and_project_rate(const ContractionReport& r, double tolerance) {
  const bool ok = std::isfinite(r.rho) && r.relative_error <= tolerance;
  return {"sketch_and_project_rate", ok,
          "fitted rho " + fmt(r.rho) + " vs 1-zeta " + fmt(r.predicted) + " (rel. error " + fmt(r.relative_error) +
              ", zeta " + fmt(r.zeta) + ", (1-rho)/zeta " + fmt((1.0 - r.rho) / r.zeta) + ", fit window k=" +
              std::to_string(r.fit_first) + ".." + std::to_string(r.fit_last) + ")"};
}

bool is_suite(std::string_view name) {
  return name == "bounds" || name == "solvers" || name == "projection" || name == "rates";
}

std::vector<PropertyResult> run_suite(std::string_view suite, const VerifyInputs& in) {
  std::vector<PropertyResult> out;
  if (suite == "bounds") {
    if (in.objective && in.objective->kind() != ObjectiveKind::quadratic) {
      const ConstantsReport c = estimate_constants(*in.objective);
      out.push_back(check_constant_ordering(c));
      out.push_back(check_cubic_bound(*in.objective, c, 1, 1000, 1));
      if (in.objective->dim() >= 3) out.push_back(check_cubic_bound(*in.objective, c, 3, 200, 2));
    } else {
      const auto f = make_logistic(100, 20, 0.1, 0);
      const ConstantsReport c = estimate_constants(*f);
      out.push_back(check_constant_ordering(c));
      out.push_back(check_cubic_bound(*f, c, 1, 1000, 1));
      out.push_back(check_cubic_bound(*f, c, 3, 200, 2));
      const auto lse = generate_logsumexp(SyntheticSpec::logsumexp(10, 0.5, 0)).objective;
      const ConstantsReport cl = estimate_constants(*lse);
      PropertyResult r = check_cubic_bound(*lse, cl, 1, 1000, 3, 2.0);
      r.name = "logsumexp_" + r.name;
      out.push_back(r);
      r = check_constant_ordering(cl);
      r.name = "logsumexp_" + r.name;
      out.push_back(r);
    }
  } else if (suite == "solvers") {
    out.push_back(check_solve_1d_example());
    out.push_back(check_solve_1d_optimality(1000, 11));
    out.push_back(check_block_stationarity(100, 12));
    out.push_back(check_iterative_vs_exact(100, 13));
    out.push_back(check_scaling_covariance(100, 14));
  } else if (suite == "projection") {
    if (in.sampler && in.objective) {
      out.push_back(check_projection_law(*in.sampler, in.objective->dim(), 100000, 21));
    } else {
      out.push_back(check_projection_law(SamplerSpec::uniform(2), 4, 100000, 21));
      out.push_back(check_projection_law(SamplerSpec::uniform(3), 10, 100000, 22));
    }
  } else if (suite == "rates") {
    const Index tau = in.sampler && in.sampler->kind == SamplerKind::uniform_subset ? in.sampler->tau : 1;
    if (in.objective && in.objective->kind() == ObjectiveKind::quadratic && in.x_star) {
      const auto& q = static_cast<const QuadraticObjective&>(*in.objective);
      out.push_back(check_sketch_and_project_rate(measure_sketch_and_project_rate(q, *in.x_star, tau, 200, 2000)));
    } else {
      const GeneratedQuadratic g = generate_quadratic(SyntheticSpec::quadratic(10, 10.0, 0));
      out.push_back(
          check_sketch_and_project_rate(measure_sketch_and_project_rate(*g.objective, g.x_star, tau, 200, 2000)));
    }
  } else {
    throw ConfigError("unknown verify suite '" + std::string(suite) + "'");
  }
  return out;
}

}  // namespace sscn
