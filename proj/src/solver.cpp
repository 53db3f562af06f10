#include "sscn/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "sscn/error.hpp"
#include "sscn/rng.hpp"

namespace sscn {
namespace {

constexpr double kDescentTol = 1e-12;

using Clock = std::chrono::steady_clock;

// Norm of the minimum-norm element of the subdifferential of F = f + psi.
double stationarity_norm(const Objective& f, const IterateState& s) {
  Vector g = f.full_gradient(s);
  const RegularizerSpec& reg = f.regularizer();
  if (reg.kind == RegularizerKind::squared_l2) {
    g += reg.lambda * s.x;
  } else if (reg.kind == RegularizerKind::l1) {
    for (Index j = 0; j < g.size(); ++j) {
      if (s.x[j] > 0.0) {
        g[j] += reg.lambda;
      } else if (s.x[j] < 0.0) {
        g[j] -= reg.lambda;
      } else {
        g[j] = std::max(0.0, std::abs(g[j]) - reg.lambda);
      }
    }
  }
  return g.norm();
}

ConstantsReport constants_for(const Objective& f, const RunContext& ctx) {
  return ctx.constants ? *ctx.constants : estimate_constants(f);
}

/// Shared bookkeeping: trace rows, stopping rules, descent accounting.
class Recorder {
 public:
  Recorder(const Objective& f, const RunConfig& cfg, const RunContext& ctx, RunResult& out, bool monotone)
      : f_(f), cfg_(cfg), ctx_(ctx), out_(out), monotone_(monotone), start_(Clock::now()) {}

  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  void initial(const IterateState& s) {
    if (cfg_.record_history) out_.f_history.push_back(s.F());
    if (cfg_.record_iterates) out_.iterates.push_back(s.x);
    row(s, std::nullopt, true);
  }

  // Records iteration k (already applied). Returns true when the run must stop.
  bool step(const IterateState& prev, const IterateState& s, std::optional<double> step_constant) {
    ++out_.stats.iterations;
    const double increase = s.F() - prev.F();
    if (monotone_ && increase > kDescentTol) {
      ++out_.stats.descent_violations;
      out_.stats.max_increase = std::max(out_.stats.max_increase, increase);
    }
    if (cfg_.record_history) out_.f_history.push_back(s.F());
    if (cfg_.record_iterates) out_.iterates.push_back(s.x);

    const long k = s.iteration;
    bool stop = false;
    if (ctx_.f_star && cfg_.target_gap && s.F() - *ctx_.f_star <= *cfg_.target_gap) {
      out_.termination = Termination::gap_reached;
      stop = true;
    } else if (k >= cfg_.max_iterations) {
      out_.termination = Termination::max_iter;
      stop = true;
    } else if (elapsed() >= cfg_.time_limit_seconds) {
      out_.termination = Termination::time_limit;
      stop = true;
    }
    const bool trace_point = stop || k % cfg_.trace_every == 0;
    if (trace_point) {
      const double gnorm = row(s, step_constant, true);
      if (!stop && !ctx_.f_star && cfg_.target_gap && gnorm <= *cfg_.target_gap) {
        out_.termination = Termination::gap_reached;
        stop = true;
      }
    }
    return stop;
  }

  void fail(const IterateState& s, const std::exception& e) {
    out_.termination = Termination::error;
    out_.error = e.what();
    row(s, std::nullopt, true);
  }

 private:
  double row(const IterateState& s, std::optional<double> step_constant, bool with_grad) {
    TraceRecord r;
    r.k = s.iteration;
    r.epochs = static_cast<double>(s.coords_processed) / static_cast<double>(f_.dim());
    r.F = s.F();
    if (ctx_.f_star) r.gap = s.F() - *ctx_.f_star;
    double gnorm = 0.0;
    if (with_grad) {
      gnorm = stationarity_norm(f_, s);
      r.grad_norm = gnorm;
    }
    r.M_used = step_constant;
    r.elapsed_s = elapsed();
    if (!out_.trace.empty() && out_.trace.back().k == r.k) {
      out_.trace.back() = r;
    } else {
      out_.trace.push_back(r);
    }
    return gnorm;
  }

  const Objective& f_;
  const RunConfig& cfg_;
  const RunContext& ctx_;
  RunResult& out_;
  bool monotone_;
  Clock::time_point start_;
};

bool initially_done(const RunConfig& cfg, const RunContext& ctx, const IterateState& s, RunResult& out) {
  if (cfg.max_iterations <= 0) {
    out.termination = Termination::max_iter;
    return true;
  }
  if (ctx.f_star && cfg.target_gap && s.F() - *ctx.f_star <= *cfg.target_gap) {
    out.termination = Termination::gap_reached;
    return true;
  }
  return false;
}

double table_constant(const Vector& table, double global, const SketchSample& sk) {
  return sk.tau() == 1 ? table[sk.indices[0]] : global;
}

// Minimizer over h of <g,h> + (L/2)||h||^2 + sum_j psi_j(x_j + h_j).
Vector prox_step(const Vector& g, double L, const PsiSlice& psi) {
  Vector h(g.size());
  for (Index k = 0; k < g.size(); ++k) {
    switch (psi.kind) {
      case RegularizerKind::none:
        h[k] = -g[k] / L;
        break;
      case RegularizerKind::squared_l2: {
        const double x = psi.base[static_cast<std::size_t>(k)];
        h[k] = -(g[k] + psi.lambda * x) / (L + psi.lambda);
        break;
      }
      case RegularizerKind::l1: {
        const double x = psi.base[static_cast<std::size_t>(k)];
        const double v = x - g[k] / L;
        const double t = psi.lambda / L;
        const double shrunk = v > t ? v - t : (v < -t ? v + t : 0.0);
        h[k] = shrunk - x;
        break;
      }
    }
  }
  return h;
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::sscn:
      return "sscn";
    case Algorithm::cd:
      return "cd";
    case Algorithm::acd:
      return "acd";
    case Algorithm::sdna:
      return "sdna";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "sscn") return Algorithm::sscn;
  if (name == "cd") return Algorithm::cd;
  if (name == "acd") return Algorithm::acd;
  if (name == "sdna") return Algorithm::sdna;
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

std::string to_string(const StepRule& rule) {
  switch (rule.mode) {
    case StepMode::coordinate_table:
      return "table";
    case StepMode::global:
      return "fixed_global(" + std::to_string(rule.value) + ")";
    case StepMode::adaptive:
      return "adaptive(" + std::to_string(rule.value) + ")";
  }
  return "?";
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::gap_reached:
      return "gap_reached";
    case Termination::max_iter:
      return "max_iter";
    case Termination::time_limit:
      return "time_limit";
    case Termination::error:
      return "error";
  }
  return "?";
}

void validate(const RunConfig& cfg, Index d) {
  validate_sampler(cfg.sampler, d);
  if (cfg.max_iterations < 0) throw ConfigError("max_iterations must be nonnegative");
  if (cfg.trace_every < 1) throw ConfigError("trace_every must be at least 1");
  if (!(cfg.time_limit_seconds > 0.0)) throw ConfigError("time_limit_seconds must be positive");
  if (cfg.target_gap && !(*cfg.target_gap >= 0.0)) throw ConfigError("target_gap must be nonnegative");
  if (cfg.step.mode == StepMode::adaptive && !(cfg.step.value > 0.0)) {
    throw ConfigError("m_mode adaptive needs a positive initial value");
  }
  if (cfg.step.mode == StepMode::global && !(cfg.step.value >= 0.0)) {
    throw ConfigError("m_mode fixed_global needs a nonnegative value");
  }
  if (cfg.algorithm == Algorithm::acd) {
    if (sampler_width(cfg.sampler, d) != 1 || cfg.sampler.kind == SamplerKind::full) {
      if (d != 1) throw UnsupportedFeature("acd supports single-coordinate sketches only (tau = 1)");
    }
  }
}

// ---------------------------------------------------------------------------

RunResult sscn_run(const Objective& f, const RunConfig& cfg, const Vector& x0, const RunContext& ctx) {
  validate(cfg, f.dim());
  if (f.regularizer().kind == RegularizerKind::l1 && sampler_width(cfg.sampler, f.dim()) > 1) {
    throw UnsupportedFeature("l1 regularizer is only supported with tau = 1");
  }
  RunResult out;
  IterateState s = f.make_state(x0);
  Recorder rec(f, cfg, ctx, out, true);
  rec.initial(s);
  if (initially_done(cfg, ctx, s, out)) {
    out.final_state = s;
    return out;
  }

  const bool quadratic = f.kind() == ObjectiveKind::quadratic;
  ConstantsReport constants;
  if (cfg.step.mode == StepMode::coordinate_table) constants = constants_for(f, ctx);
  double M_est = cfg.step.value;
  const double M_floor = cfg.step.mode == StepMode::adaptive ? cfg.step.value * 1e-12 : 0.0;

  Sampler sampler(cfg.sampler, f.dim());
  Rng rng = make_rng(cfg.seed);
  SketchSample sk;
  IterateState next;
  try {
    while (true) {
      sampler.sample_into(rng, sk);
      double M_used = 0.0;
      if (cfg.step.mode == StepMode::adaptive) {
        AdaptResult r = adapt_regularizer(f, s, sk, M_est, cfg.solve, next, M_floor);
        out.stats.doublings += r.doublings;
        out.stats.solves += r.solves;
        if (r.doublings == 0) ++out.stats.accepted_first_try;
        M_used = r.M;
        M_est = r.M;
      } else {
        M_used = cfg.step.mode == StepMode::global
                     ? cfg.step.value
                     : (quadratic ? 0.0 : table_constant(constants.M_coord, constants.M_global, sk));
        const CubicModel m = build_model(f, s, sk, M_used, cfg.solve);
        const CubicSolution sol = solve_cubic(m, cfg.solve);
        ++out.stats.solves;
        ++out.stats.accepted_first_try;
        next = s;
        f.apply_update(next, sk, sol.h);
      }
      next.iteration = s.iteration + 1;
      std::swap(s, next);
      if (rec.step(next, s, M_used)) break;
    }
  } catch (const NumericalFailure& e) {
    rec.fail(s, e);
  }
  out.final_state = std::move(s);
  return out;
}

RunResult cd_run(const Objective& f, const RunConfig& cfg, const Vector& x0, const RunContext& ctx) {
  validate(cfg, f.dim());
  RunResult out;
  IterateState s = f.make_state(x0);
  Recorder rec(f, cfg, ctx, out, true);
  rec.initial(s);
  if (initially_done(cfg, ctx, s, out)) {
    out.final_state = s;
    return out;
  }

  ConstantsReport constants;
  if (cfg.step.mode == StepMode::coordinate_table) constants = constants_for(f, ctx);
  double L_est = cfg.step.value;
  const double L_floor = cfg.step.mode == StepMode::adaptive ? cfg.step.value * 1e-12 : 0.0;

  Sampler sampler(cfg.sampler, f.dim());
  Rng rng = make_rng(cfg.seed);
  SketchSample sk;
  IterateState next;
  try {
    while (true) {
      sampler.sample_into(rng, sk);
      double L = 0.0;
      switch (cfg.step.mode) {
        case StepMode::coordinate_table:
          L = table_constant(constants.L_coord, constants.L_global, sk);
          break;
        case StepMode::global:
          L = cfg.step.value;
          break;
        case StepMode::adaptive:
          L = std::max(L_est / 2.0, L_floor);
          break;
      }
      if (!(L > 0.0)) throw NumericalFailure("cd: step constant L must be positive");
      const Vector g = f.subspace_gradient(s, sk);
      const PsiSlice psi = psi_slice(f.regularizer(), s.x, sk);
      const double F0 = s.F();
      const double slack = acceptance_slack(F0);
      const double ceiling = std::ldexp(std::max(L, 1e-300), 60);
      int doublings = 0;
      // Doubling only: a fixed or table constant is never shrunk.
      while (true) {
        const Vector h = prox_step(g, L, psi);
        const double model = g.dot(h) + 0.5 * L * h.squaredNorm() + psi.value(h) - psi.value_at_zero();
        next = s;
        f.apply_update(next, sk, h);
        ++out.stats.solves;
        if (next.F() <= F0 + model + slack) break;
        L *= 2.0;
        ++doublings;
        if (L > ceiling) throw NumericalFailure("cd: L exceeded 2^60 times its starting value");
      }
      out.stats.doublings += doublings;
      if (doublings == 0) ++out.stats.accepted_first_try;
      if (cfg.step.mode == StepMode::adaptive) L_est = L;
      next.iteration = s.iteration + 1;
      std::swap(s, next);
      if (rec.step(next, s, L)) break;
    }
  } catch (const NumericalFailure& e) {
    rec.fail(s, e);
  }
  out.final_state = std::move(s);
  return out;
}

RunResult acd_run(const Objective& f, const RunConfig& cfg, const Vector& x0, const RunContext& ctx) {
  validate(cfg, f.dim());
  const RegularizerSpec& reg = f.regularizer();
  if (reg.kind == RegularizerKind::l1) throw UnsupportedFeature("acd does not support the l1 regularizer");
  const double ridge = reg.kind == RegularizerKind::squared_l2 ? reg.lambda : 0.0;
  const ConstantsReport constants = constants_for(f, ctx);
  const double mu = constants.mu + ridge;
  if (!(mu > 0.0)) throw ConfigError("acd requires a strongly convex objective (lambda > 0)");

  const Index d = f.dim();
  Vector L = constants.L_coord.array() + ridge;
  if (cfg.step.mode == StepMode::global) L.setConstant(cfg.step.value);
  if (!(L.minCoeff() > 0.0)) throw ConfigError("acd requires positive coordinate constants");

  // Probabilities proportional to sqrt(L_j).
  const Vector root = L.cwiseSqrt();
  const double S = root.sum();
  std::vector<double> p(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) p[static_cast<std::size_t>(j)] = root[j] / S;
  const double tau = 2.0 / (1.0 + std::sqrt(4.0 * S * S / mu + 1.0));
  const double eta = 1.0 / (tau * S * S);
  const double shrink = 1.0 / (1.0 + eta * mu);

  RunResult out;
  IterateState y = f.make_state(x0);
  IterateState z = y;
  IterateState x = y;
  Recorder rec(f, cfg, ctx, out, false);
  rec.initial(y);
  if (initially_done(cfg, ctx, y, out)) {
    out.final_state = y;
    return out;
  }

  Sampler sampler(SamplerSpec::weighted(p), d);
  Rng rng = make_rng(cfg.seed);
  SketchSample sk;
  IterateState prev;
  try {
    while (true) {
      sampler.sample_into(rng, sk);
      const Index i = sk.indices[0];
      f.blend(x, z, tau, y, 1.0 - tau);
      Vector g = f.subspace_gradient(x, sk);
      g[0] += ridge * x.x[i];
      prev = y;
      y = x;
      y.coords_processed = prev.coords_processed;
      f.apply_update(y, sk, Vector::Constant(1, -g[0] / L[i]));
      IterateState z_next;
      f.blend(z_next, z, shrink, x, eta * mu * shrink);
      f.apply_update(z_next, sk, Vector::Constant(1, -eta / p[static_cast<std::size_t>(i)] * shrink * g[0]));
      z = std::move(z_next);
      y.iteration = prev.iteration + 1;
      if (rec.step(prev, y, L[i])) break;
    }
  } catch (const NumericalFailure& e) {
    rec.fail(y, e);
  }
  out.final_state = std::move(y);
  return out;
}

RunResult sdna_run(const Objective& f, const RunConfig& cfg, const Vector& x0, const RunContext& ctx) {
  validate(cfg, f.dim());
  const RegularizerSpec& reg = f.regularizer();
  if (reg.kind == RegularizerKind::l1) throw UnsupportedFeature("sdna does not support the l1 regularizer");
  const double ridge = reg.kind == RegularizerKind::squared_l2 ? reg.lambda : 0.0;
  Matrix Lmat = ctx.smoothness ? *ctx.smoothness : smoothness_matrix(f);
  if (Lmat.rows() != f.dim() || Lmat.cols() != f.dim()) throw ConfigError("sdna: smoothness matrix has wrong shape");
  if (ridge != 0.0) Lmat.diagonal().array() += ridge;

  RunResult out;
  IterateState s = f.make_state(x0);
  Recorder rec(f, cfg, ctx, out, true);
  rec.initial(s);
  if (initially_done(cfg, ctx, s, out)) {
    out.final_state = s;
    return out;
  }

  Sampler sampler(cfg.sampler, f.dim());
  Rng rng = make_rng(cfg.seed);
  SketchSample sk;
  IterateState next;
  try {
    while (true) {
      sampler.sample_into(rng, sk);
      Vector g = f.subspace_gradient(s, sk);
      for (Index k = 0; k < g.size(); ++k) g[k] += ridge * s.x[sk.indices[static_cast<std::size_t>(k)]];
      Eigen::LLT<Matrix> llt(Lmat(sk.indices, sk.indices));
      if (llt.info() != Eigen::Success) throw NumericalFailure("sdna: S^T L S is singular");
      const Vector h = -llt.solve(g);
      ++out.stats.solves;
      ++out.stats.accepted_first_try;
      next = s;
      f.apply_update(next, sk, h);
      next.iteration = s.iteration + 1;
      std::swap(s, next);
      if (rec.step(next, s, std::nullopt)) break;
    }
  } catch (const NumericalFailure& e) {
    rec.fail(s, e);
  }
  out.final_state = std::move(s);
  return out;
}

RunResult run(const Objective& f, const RunConfig& cfg, const Vector& x0, const RunContext& ctx) {
  switch (cfg.algorithm) {
    case Algorithm::sscn:
      return sscn_run(f, cfg, x0, ctx);
    case Algorithm::cd:
      return cd_run(f, cfg, x0, ctx);
    case Algorithm::acd:
      return acd_run(f, cfg, x0, ctx);
    case Algorithm::sdna:
      return sdna_run(f, cfg, x0, ctx);
  }
  throw ContractViolation("run: unknown algorithm");
}

// ---------------------------------------------------------------------------

ReferenceSolution reference_solve(const Objective& f, const Vector& x0) {
  const Index d = f.dim();
  ReferenceSolution ref;

  if (f.kind() == ObjectiveKind::quadratic && f.regularizer().kind != RegularizerKind::l1) {
    const auto& q = static_cast<const QuadraticObjective&>(f);
    Matrix A = q.A();
    if (f.regularizer().kind == RegularizerKind::squared_l2) A.diagonal().array() += f.regularizer().lambda;
    Eigen::LDLT<Matrix> ldlt(A);
    Vector x = ldlt.solve(q.b());
    // one refinement step
    x += ldlt.solve(q.b() - A * x);
    IterateState s = f.make_state(x);
    ref.x_star = s.x;
    ref.f_star = s.F();
    ref.grad_norm = stationarity_norm(f, s);
    return ref;
  }

  RunConfig cfg;
  cfg.algorithm = Algorithm::sscn;
  cfg.step = StepRule::adaptive(1.0);
  cfg.solve.choice = SubproblemSolver::exact;
  cfg.trace_every = 1L << 40;
  cfg.seed = 0;
  const bool l1 = f.regularizer().kind == RegularizerKind::l1;
  cfg.sampler = l1 ? SamplerSpec::uniform(1) : SamplerSpec::full();
  if (l1) cfg.solve.choice = SubproblemSolver::one_d;
  if (!l1 && d > 2000) throw ConfigError("reference_solve: dimension above 2000 is not supported");
  const long chunk = l1 ? 20 * d : 1;
  const int max_rounds = l1 ? 5000 : 500;

  IterateState s = f.make_state(x0);
  double M = 1.0;
  int stalls = 0;
  for (int round = 0; round < max_rounds; ++round) {
    cfg.max_iterations = chunk;
    cfg.step = StepRule::adaptive(M);
    cfg.seed = static_cast<std::uint64_t>(round);
    const double before = s.F();
    RunResult r = sscn_run(f, cfg, s.x);
    if (r.termination == Termination::error) throw NumericalFailure("reference_solve: " + r.error);
    ref.iterations += r.stats.iterations;
    if (!r.trace.empty() && r.trace.back().M_used) M = *r.trace.back().M_used;
    if (r.final_state.F() <= before) s = f.make_state(r.final_state.x);
    const double gnorm = stationarity_norm(f, s);
    if (gnorm <= 1e-12) break;
    if (before - s.F() <= 1e-16 * (1.0 + std::abs(before))) {
      if (++stalls >= 5) break;
    } else {
      stalls = 0;
    }
  }
  ref.x_star = s.x;
  ref.f_star = s.F();
  ref.grad_norm = stationarity_norm(f, s);
  return ref;
}

}  // namespace sscn
