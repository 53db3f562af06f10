#include "sscn/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sscn/error.hpp"

namespace sscn {
namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
  }
}

template <class T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + where + "." + key + "' is missing or has the wrong type");
  }
}

template <class T>
T get_or(const json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  return get<T>(obj, key, where);
}

std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

SyntheticSpec parse_synthetic(const json& j, const std::string& where) {
  check_keys(j, where, {"kind", "n", "d", "sigma", "condition_number", "seed"});
  SyntheticSpec spec;
  const auto kind = get<std::string>(j, "kind", where);
  spec.d = get<Index>(j, "d", where);
  spec.seed = get_or<std::uint64_t>(j, "seed", where, 0);
  if (kind == "logistic") {
    spec.kind = SyntheticKind::logistic;
    spec.n = get<Index>(j, "n", where);
  } else if (kind == "logsumexp" || kind == "log_sum_exp") {
    spec.kind = SyntheticKind::logsumexp;
    spec.n = 6 * spec.d;
    if (j.contains("n") && get<Index>(j, "n", where) != spec.n) {
      throw ConfigError("key '" + where + ".n' must equal 6*d for logsumexp");
    }
    spec.sigma = get<double>(j, "sigma", where);  // required, no default
  } else if (kind == "quadratic") {
    spec.kind = SyntheticKind::quadratic;
    spec.n = spec.d;
    spec.condition_number = get_or<double>(j, "condition_number", where, 1.0);
  } else {
    throw ConfigError("key '" + where + ".kind' has unknown value '" + kind + "'");
  }
  try {
    validate(spec);
  } catch (const ConfigError& e) {
    throw ConfigError("'" + where + "': " + e.what());
  }
  return spec;
}

SamplerSpec parse_sampler(const json& j, const std::string& where, bool& lipschitz) {
  check_keys(j, where, {"kind", "tau", "p"});
  const auto kind = get<std::string>(j, "kind", where);
  if (kind == "uniform_subset") return SamplerSpec::uniform(get_or<Index>(j, "tau", where, 1));
  if (kind == "full") return SamplerSpec::full();
  if (kind == "single_weighted") {
    if (!j.contains("p")) throw ConfigError("key '" + where + ".p' is missing");
    if (j.at("p").is_string()) {
      if (j.at("p").get<std::string>() != "lipschitz") {
        throw ConfigError("key '" + where + ".p' must be an array or \"lipschitz\"");
      }
      lipschitz = true;
      return SamplerSpec::weighted({});
    }
    return SamplerSpec::weighted(get<std::vector<double>>(j, "p", where));
  }
  throw ConfigError("key '" + where + ".kind' has unknown value '" + kind + "'");
}

StepRule parse_step(const json& j, const std::string& where) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "table" || s == "fixed") return StepRule::table();
    throw ConfigError("key '" + where + "' has unknown value '" + s + "'");
  }
  check_keys(j, where, {"fixed_global", "adaptive"});
  if (j.size() != 1) throw ConfigError("key '" + where + "' must have exactly one of fixed_global, adaptive");
  if (j.contains("fixed_global")) return StepRule::fixed_global(get<double>(j, "fixed_global", where));
  return StepRule::adaptive(get<double>(j, "adaptive", where));
}

SolveOptions parse_solver(const json& j, const std::string& where) {
  check_keys(j, where, {"kind", "tol", "max_inner", "exact_max_tau"});
  SolveOptions opts;
  const auto kind = get_or<std::string>(j, "kind", where, "auto");
  if (kind == "auto") {
    opts.choice = SubproblemSolver::automatic;
  } else if (kind == "1d") {
    opts.choice = SubproblemSolver::one_d;
  } else if (kind == "exact") {
    opts.choice = SubproblemSolver::exact;
  } else if (kind == "iterative") {
    opts.choice = SubproblemSolver::iterative;
  } else {
    throw ConfigError("key '" + where + ".kind' has unknown value '" + kind + "'");
  }
  opts.iterative_tol = get_or<double>(j, "tol", where, opts.iterative_tol);
  opts.max_inner = get_or<int>(j, "max_inner", where, opts.max_inner);
  opts.exact_max_tau = get_or<Index>(j, "exact_max_tau", where, opts.exact_max_tau);
  if (!(opts.iterative_tol > 0.0)) throw ConfigError("key '" + where + ".tol' must be positive");
  if (opts.max_inner < 1) throw ConfigError("key '" + where + ".max_inner' must be positive");
  return opts;
}

AlgorithmEntry parse_algorithm_entry(const json& j, const std::string& where) {
  check_keys(j, where,
             {"name", "sampler", "m_mode", "max_iterations", "target_gap", "time_limit_seconds", "trace_every",
              "solver"});
  AlgorithmEntry e;
  e.name = get<std::string>(j, "name", where);
  try {
    e.run.algorithm = parse_algorithm(e.name);
  } catch (const ConfigError& err) {
    throw ConfigError("key '" + where + ".name': " + err.what());
  }
  if (j.contains("sampler")) e.run.sampler = parse_sampler(j.at("sampler"), join(where, "sampler"), e.lipschitz_probabilities);
  if (j.contains("m_mode")) e.run.step = parse_step(j.at("m_mode"), join(where, "m_mode"));
  e.run.max_iterations = get_or<long>(j, "max_iterations", where, e.run.max_iterations);
  if (j.contains("target_gap")) e.run.target_gap = get<double>(j, "target_gap", where);
  e.run.time_limit_seconds = get_or<double>(j, "time_limit_seconds", where, e.run.time_limit_seconds);
  e.run.trace_every = get_or<long>(j, "trace_every", where, e.run.trace_every);
  if (j.contains("solver")) e.run.solve = parse_solver(j.at("solver"), join(where, "solver"));
  return e;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, "",
             {"dataset", "objective", "algorithms", "seeds", "output_dir", "normalize", "parallel", "kernels", "zeta",
              "zeta_trials", "reference"});
  ExperimentConfig cfg;

  if (!root.contains("dataset")) throw ConfigError("key 'dataset' is missing");
  const json& ds = root.at("dataset");
  check_keys(ds, "dataset", {"libsvm", "synthetic"});
  if (ds.size() != 1) throw ConfigError("key 'dataset' must have exactly one of libsvm, synthetic");
  if (ds.contains("libsvm")) {
    std::filesystem::path p(get<std::string>(ds, "libsvm", "dataset"));
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    cfg.dataset.libsvm_path = p.lexically_normal().string();
  } else {
    cfg.dataset.synthetic = parse_synthetic(ds.at("synthetic"), "dataset.synthetic");
  }

  if (!root.contains("objective")) throw ConfigError("key 'objective' is missing");
  const json& obj = root.at("objective");
  check_keys(obj, "objective", {"kind", "lambda", "sigma", "regularizer"});
  const auto kind = get<std::string>(obj, "kind", "objective");
  if (kind == "logistic") {
    cfg.objective.kind = ObjectiveKind::logistic;
  } else if (kind == "quadratic") {
    cfg.objective.kind = ObjectiveKind::quadratic;
  } else if (kind == "log_sum_exp" || kind == "logsumexp") {
    cfg.objective.kind = ObjectiveKind::log_sum_exp;
  } else {
    throw ConfigError("key 'objective.kind' has unknown value '" + kind + "'");
  }
  cfg.objective.lambda = get_or<double>(obj, "lambda", "objective", 0.0);
  if (cfg.objective.lambda < 0.0) throw ConfigError("key 'objective.lambda' must be nonnegative");
  if (obj.contains("sigma")) cfg.objective.sigma = get<double>(obj, "sigma", "objective");
  if (obj.contains("regularizer")) {
    const json& r = obj.at("regularizer");
    check_keys(r, "objective.regularizer", {"kind", "lambda"});
    try {
      cfg.objective.regularizer.kind = parse_regularizer_kind(get<std::string>(r, "kind", "objective.regularizer"));
    } catch (const UnsupportedFeature& e) {
      throw ConfigError(std::string("key 'objective.regularizer.kind': ") + e.what());
    }
    cfg.objective.regularizer.lambda = get_or<double>(r, "lambda", "objective.regularizer", 0.0);
    if (cfg.objective.regularizer.lambda < 0.0) {
      throw ConfigError("key 'objective.regularizer.lambda' must be nonnegative");
    }
  }

  if (cfg.dataset.synthetic) {
    const SyntheticKind sk = cfg.dataset.synthetic->kind;
    const bool match = (sk == SyntheticKind::logistic && cfg.objective.kind == ObjectiveKind::logistic) ||
                       (sk == SyntheticKind::quadratic && cfg.objective.kind == ObjectiveKind::quadratic) ||
                       (sk == SyntheticKind::logsumexp && cfg.objective.kind == ObjectiveKind::log_sum_exp);
    if (!match) throw ConfigError("key 'objective.kind' does not match dataset.synthetic.kind");
    if (sk == SyntheticKind::logsumexp && cfg.objective.sigma &&
        *cfg.objective.sigma != cfg.dataset.synthetic->sigma) {
      throw ConfigError("key 'objective.sigma' disagrees with dataset.synthetic.sigma");
    }
  } else {
    if (cfg.objective.kind == ObjectiveKind::quadratic) {
      throw ConfigError("key 'objective.kind': quadratic objectives need a synthetic dataset");
    }
    if (cfg.objective.kind == ObjectiveKind::log_sum_exp && !cfg.objective.sigma) {
      throw ConfigError("key 'objective.sigma' is required for log_sum_exp");
    }
  }
  if (cfg.objective.sigma && !(*cfg.objective.sigma > 0.0)) throw ConfigError("key 'objective.sigma' must be positive");

  if (!root.contains("algorithms") || !root.at("algorithms").is_array() || root.at("algorithms").empty()) {
    throw ConfigError("key 'algorithms' must be a nonempty array");
  }
  for (std::size_t i = 0; i < root.at("algorithms").size(); ++i) {
    cfg.algorithms.push_back(parse_algorithm_entry(root.at("algorithms")[i], "algorithms[" + std::to_string(i) + "]"));
  }

  cfg.seeds = get_or<std::vector<std::uint64_t>>(root, "seeds", "", {0});
  if (cfg.seeds.empty()) throw ConfigError("key 'seeds' must be nonempty");
  cfg.output_dir = get_or<std::string>(root, "output_dir", "", cfg.output_dir);
  if (std::filesystem::path(cfg.output_dir).is_relative()) {
    cfg.output_dir = (std::filesystem::path(base_dir) / cfg.output_dir).lexically_normal().string();
  }
  cfg.normalize = get_or<bool>(root, "normalize", "", false);
  cfg.parallel = get_or<int>(root, "parallel", "", 1);
  if (cfg.parallel < 1) throw ConfigError("key 'parallel' must be at least 1");
  const auto kern = get_or<std::string>(root, "kernels", "", "serial");
  if (kern == "serial") {
    cfg.kernels = kernels::Policy::serial;
  } else if (kern == "parallel") {
    cfg.kernels = kernels::Policy::parallel;
  } else {
    throw ConfigError("key 'kernels' has unknown value '" + kern + "'");
  }
  cfg.zeta = get_or<bool>(root, "zeta", "", false);
  cfg.zeta_trials = get_or<Index>(root, "zeta_trials", "", cfg.zeta_trials);
  cfg.reference = get_or<bool>(root, "reference", "", true);

  json fp = {{"dataset", ds}, {"objective", obj}, {"normalize", cfg.normalize}};
  if (cfg.dataset.libsvm_path) fp["dataset"]["libsvm"] = *cfg.dataset.libsvm_path;
  cfg.fingerprint = fp.dump();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(buf.str(), dir.empty() ? "." : dir.string());
}

Instance build_instance(const ExperimentConfig& cfg) {
  Instance inst;
  const ObjectiveSpec& o = cfg.objective;
  if (cfg.dataset.synthetic) {
    const SyntheticSpec& spec = *cfg.dataset.synthetic;
    switch (spec.kind) {
      case SyntheticKind::quadratic: {
        GeneratedQuadratic q = generate_quadratic(spec);
        if (o.regularizer.kind == RegularizerKind::none) {
          inst.f_star = q.f_star;
          inst.x_star = q.x_star;
        }
        inst.objective = std::make_shared<QuadraticObjective>(q.objective->A(), q.objective->b(), o.regularizer);
        inst.x0 = Vector::Zero(spec.d);
        break;
      }
      case SyntheticKind::logsumexp: {
        GeneratedLogSumExp g = generate_logsumexp(spec);
        inst.objective = std::make_shared<LogSumExpObjective>(g.objective->data_ptr(), spec.sigma, o.regularizer);
        inst.x0 = g.x0;
        break;
      }
      case SyntheticKind::logistic: {
        auto ds = std::make_shared<Dataset>(generate_logistic_data(spec));
        if (cfg.normalize) *ds = normalize_columns(*ds);
        inst.warnings = ds->warnings;
        inst.objective = std::make_shared<LogisticObjective>(ds, o.lambda, o.regularizer);
        inst.x0 = Vector::Zero(ds->d());
        break;
      }
    }
  } else {
    const LabelMode mode = o.kind == ObjectiveKind::logistic ? LabelMode::binary : LabelMode::real;
    auto ds = std::make_shared<Dataset>(load_libsvm(*cfg.dataset.libsvm_path, mode));
    if (cfg.normalize) *ds = normalize_columns(*ds);
    inst.warnings = ds->warnings;
    if (o.kind == ObjectiveKind::logistic) {
      inst.objective = std::make_shared<LogisticObjective>(ds, o.lambda, o.regularizer);
    } else {
      inst.objective = std::make_shared<LogSumExpObjective>(ds, *o.sigma, o.regularizer);
    }
    inst.x0 = Vector::Zero(ds->d());
  }
  inst.objective->set_kernel_policy(cfg.kernels);
  return inst;
}

}  // namespace sscn
