#include "sscn/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "sscn/config.hpp"
#include "sscn/error.hpp"
#include "sscn/rng.hpp"
#include "sscn/solver.hpp"
#include "sscn/theory.hpp"
#include "sscn/trace_io.hpp"
#include "sscn/verify.hpp"

#ifndef SSCN_VERSION
#define SSCN_VERSION "0.1.0"
#endif

namespace sscn {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

json constants_json(const ConstantsReport& c) {
  return {{"M_global", c.M_global}, {"M_coord", to_json(c.M_coord)}, {"L_coord", to_json(c.L_coord)},
          {"L_global", c.L_global}, {"mu", c.mu},                     {"c_third", c.c_third}};
}

json sampler_json(const SamplerSpec& s) {
  switch (s.kind) {
    case SamplerKind::uniform_subset:
      return {{"kind", "uniform_subset"}, {"tau", s.tau}};
    case SamplerKind::full:
      return {{"kind", "full"}};
    case SamplerKind::single_weighted:
      return {{"kind", "single_weighted"}, {"p", s.probabilities}};
  }
  return {};
}

struct Reference {
  double f_star = 0.0;
  Vector x_star;
  double grad_norm = 0.0;
  long iterations = 0;
  std::string source;
};

fs::path reference_path(const ExperimentConfig& cfg) { return fs::path(cfg.output_dir) / "reference.json"; }

std::optional<Reference> load_reference(const ExperimentConfig& cfg) {
  std::ifstream in(reference_path(cfg));
  if (!in) return std::nullopt;
  try {
    const json j = json::parse(in);
    if (j.at("fingerprint").get<std::string>() != cfg.fingerprint) return std::nullopt;
    Reference r;
    r.f_star = j.at("f_star").get<double>();
    r.x_star = from_json(j.at("x_star"));
    r.grad_norm = j.at("grad_norm").get<double>();
    r.iterations = j.at("iterations").get<long>();
    r.source = "cached";
    return r;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

Reference compute_reference(const ExperimentConfig& cfg, const Instance& inst) {
  Reference r;
  if (inst.f_star && inst.x_star) {
    r.f_star = *inst.f_star;
    r.x_star = *inst.x_star;
    r.source = "closed_form";
    return r;
  }
  const ReferenceSolution sol = reference_solve(*inst.objective, inst.x0);
  r.f_star = sol.f_star;
  r.x_star = sol.x_star;
  r.grad_norm = sol.grad_norm;
  r.iterations = sol.iterations;
  r.source = "full_sketch_sscn";
  (void)cfg;
  return r;
}

void save_reference(const ExperimentConfig& cfg, const Reference& r) {
  fs::create_directories(cfg.output_dir);
  json j = {{"fingerprint", cfg.fingerprint}, {"f_star", r.f_star},       {"x_star", to_json(r.x_star)},
            {"grad_norm", r.grad_norm},       {"iterations", r.iterations}, {"source", r.source}};
  std::ofstream out(reference_path(cfg));
  if (!out) throw ConfigError("output_dir '" + cfg.output_dir + "' is not writable");
  out << j.dump(2) << '\n';
}

Reference obtain_reference(const ExperimentConfig& cfg, const Instance& inst) {
  if (auto cached = load_reference(cfg)) return *cached;
  Reference r = compute_reference(cfg, inst);
  save_reference(cfg, r);
  return r;
}

SamplerSpec resolve_sampler(const AlgorithmEntry& e, const ConstantsReport& c) {
  if (!e.lipschitz_probabilities) return e.run.sampler;
  const double total = c.L_coord.sum();
  if (!(total > 0.0)) throw ConfigError("sampler p = \"lipschitz\" needs positive coordinate constants");
  std::vector<double> p(static_cast<std::size_t>(c.L_coord.size()));
  for (Index j = 0; j < c.L_coord.size(); ++j) p[static_cast<std::size_t>(j)] = c.L_coord[j] / total;
  return SamplerSpec::weighted(std::move(p));
}

std::string run_id(std::size_t idx, const std::string& name, std::uint64_t seed) {
  return std::to_string(idx) + "_" + name + "_seed" + std::to_string(seed);
}

}  // namespace

std::string version_string() { return std::string("sscn ") + SSCN_VERSION; }

int cmd_run(const std::string& config_path, const std::optional<std::string>& output_dir, std::ostream& out,
            std::ostream& err) {
  ExperimentConfig cfg;
  Instance inst;
  ConstantsReport constants;
  std::vector<RunConfig> runs;
  try {
    cfg = load_config(config_path);
    if (output_dir) cfg.output_dir = *output_dir;
    inst = build_instance(cfg);
    for (const auto& w : inst.warnings) err << "warning: " << w << '\n';
    constants = estimate_constants(*inst.objective);
    for (std::size_t i = 0; i < cfg.algorithms.size(); ++i) {
      RunConfig rc = cfg.algorithms[i].run;
      rc.sampler = resolve_sampler(cfg.algorithms[i], constants);
      try {
        validate(rc, inst.objective->dim());
      } catch (const std::exception& e) {
        throw ConfigError("algorithms[" + std::to_string(i) + "]: " + e.what());
      }
      runs.push_back(rc);
    }
    fs::create_directories(cfg.output_dir);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UnsupportedFeature& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "dataset parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    err << "config error: output_dir: " << e.what() << '\n';
    return kExitConfig;
  }

  std::optional<Reference> ref;
  json meta;
  try {
    if (cfg.reference) ref = obtain_reference(cfg, inst);
    const Objective& f = *inst.objective;
    meta["version"] = version_string();
    meta["rng_family"] = std::string(kRngFamily);
    meta["config"] = fs::absolute(config_path).string();
    meta["objective"] = std::string(to_string(f.kind()));
    meta["dimension"] = f.dim();
    meta["constants"] = constants_json(constants);
    meta["inner_solver"] = {{"iterative", "nonlinear CG, Polak-Ribiere+, restart every tau steps, start h = 0, "
                                          "exact line search on the model"},
                            {"exact", "eigendecomposition + safeguarded Newton on the secular equation"}};
    meta["grad_norm"] = "norm of the minimum-norm subgradient of F = f + psi";
    if (ref) {
      meta["reference"] = {{"f_star", ref->f_star}, {"grad_norm", ref->grad_norm}, {"source", ref->source},
                           {"iterations", ref->iterations}};
    }
    if (cfg.zeta) {
      if (!ref) throw ConfigError("zeta needs the reference solution (set reference: true)");
      const IterateState at_star = f.make_state(ref->x_star);
      Matrix H = f.full_hessian(at_star);
      if (f.regularizer().kind == RegularizerKind::squared_l2) H.diagonal().array() += f.regularizer().lambda;
      json zs = json::array();
      for (std::size_t i = 0; i < runs.size(); ++i) {
        const ZetaReport z = compute_zeta(H, runs[i].sampler, cfg.zeta_trials, 0);
        zs.push_back({{"algorithm", cfg.algorithms[i].name},
                      {"sampler", sampler_json(runs[i].sampler)},
                      {"zeta", z.zeta},
                      {"method", to_string(z.method)},
                      {"trials", z.trials},
                      {"std_error", z.std_error}});
      }
      meta["zeta"] = zs;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalFailure& e) {
    err << "numerical failure in reference solve: " << e.what() << '\n';
    return kExitFailure;
  }

  RunContext ctx;
  ctx.constants = constants;
  if (ref) ctx.f_star = ref->f_star;

  struct Job {
    std::size_t algo;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < runs.size(); ++a)
    for (std::uint64_t s : cfg.seeds) jobs.push_back({a, s});

  struct Outcome {
    std::string id;
    std::string status;  // ok | numerical | config
    std::string message;
    RunResult result;
  };
  std::vector<Outcome> outcomes(jobs.size());

#pragma omp parallel for schedule(dynamic) num_threads(cfg.parallel)
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& job = jobs[i];
    Outcome& o = outcomes[i];
    o.id = run_id(job.algo, cfg.algorithms[job.algo].name, job.seed);
    try {
      RunConfig rc = runs[job.algo];
      rc.seed = job.seed;
      o.result = run(*inst.objective, rc, inst.x0, ctx);
      write_trace_csv((fs::path(cfg.output_dir) / (o.id + ".csv")).string(), o.result.trace);
      if (o.result.termination == Termination::error) {
        o.status = "numerical";
        o.message = o.result.error;
      } else {
        o.status = "ok";
      }
    } catch (const NumericalFailure& e) {
      o.status = "numerical";
      o.message = e.what();
    } catch (const ConfigError& e) {
      o.status = "config";
      o.message = e.what();
    } catch (const UnsupportedFeature& e) {
      o.status = "config";
      o.message = e.what();
    } catch (const std::exception& e) {
      o.status = "numerical";
      o.message = e.what();
    }
  }

  int code = kExitOk;
  json summaries = json::array();
  for (const Outcome& o : outcomes) {
    json s = {{"run", o.id}, {"status", o.status}};
    if (o.status != "config") {
      s["csv"] = o.id + ".csv";
      s["termination"] = std::string(to_string(o.result.termination));
      s["iterations"] = o.result.stats.iterations;
      s["final_F"] = o.result.final_state.F();
      s["descent_violations"] = o.result.stats.descent_violations;
      s["doublings"] = o.result.stats.doublings;
    }
    if (!o.message.empty()) s["message"] = o.message;
    summaries.push_back(s);
    if (o.status == "config") {
      err << "config error in run " << o.id << ": " << o.message << '\n';
      code = kExitConfig;
    } else if (o.status == "numerical") {
      err << "numerical failure in run " << o.id << ": " << o.message << '\n';
      if (code == kExitOk) code = kExitFailure;
    } else {
      out << o.id << ": " << to_string(o.result.termination) << " after " << o.result.stats.iterations
          << " iterations, F = " << format_double(o.result.final_state.F()) << '\n';
    }
  }
  meta["runs"] = summaries;
  std::ofstream mf(fs::path(cfg.output_dir) / "metadata.json");
  mf << meta.dump(2) << '\n';
  return code;
}

int cmd_verify(const std::string& suite, const std::optional<std::string>& config_path, std::ostream& out,
               std::ostream& err) {
  if (!is_suite(suite)) {
    err << "config error: unknown suite '" << suite << "' (expected bounds, solvers, projection, rates)\n";
    return kExitConfig;
  }
  VerifyInputs inputs;
  if (config_path) {
    try {
      const ExperimentConfig cfg = load_config(*config_path);
      Instance inst = build_instance(cfg);
      inputs.objective = inst.objective;
      inputs.x_star = inst.x_star;
      if (!cfg.algorithms.empty() && !cfg.algorithms.front().lipschitz_probabilities) {
        inputs.sampler = cfg.algorithms.front().run.sampler;
        validate_sampler(*inputs.sampler, inst.objective->dim());
      }
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << '\n';
      return kExitConfig;
    } catch (const ParseError& e) {
      err << "dataset parse error: " << e.what() << '\n';
      return kExitConfig;
    }
  }
  std::vector<PropertyResult> results;
  try {
    results = run_suite(suite, inputs);
  } catch (const std::exception& e) {
    err << "FAIL " << suite << ": " << e.what() << '\n';
    return kExitFailure;
  }
  const PropertyResult* first_fail = nullptr;
  for (const PropertyResult& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    if (!r.passed && !first_fail) first_fail = &r;
  }
  if (first_fail) {
    err << "first failing property: " << first_fail->name << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_reference(const std::string& config_path, std::ostream& out, std::ostream& err) {
  try {
    const ExperimentConfig cfg = load_config(config_path);
    const Instance inst = build_instance(cfg);
    const Reference r = compute_reference(cfg, inst);
    save_reference(cfg, r);
    out << "F* = " << format_double(r.f_star) << " (" << r.source << ", grad norm " << format_double(r.grad_norm)
        << ") -> " << reference_path(cfg).string() << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "dataset parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace sscn
