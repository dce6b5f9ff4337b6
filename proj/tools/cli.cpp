#include "cli.hpp"

#include "qendy/approx.hpp"
#include "qendy/baselines.hpp"
#include "qendy/error.hpp"
#include "qendy/fit.hpp"
#include "qendy/io.hpp"
#include "qendy/quadmodel.hpp"
#include "qendy/reduction.hpp"
#include "qendy/systems.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace qendy::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

/// Error raised while running a command; carries the stage for the message.
struct StageError : std::runtime_error {
  StageError(std::string stage, const std::string& what) : std::runtime_error(what), stage(std::move(stage)) {}
  std::string stage;
};

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

// ---------------------------------------------------------------------------
// Configuration: one JSON object per run, flags override individual keys.

class Config {
 public:
  Config(std::string command, std::set<std::string> allowed) : command_(std::move(command)), allowed_(std::move(allowed)) {}

  void load(const std::string& path) {
    Json j = io::read_json(path);
    if (!j.is_object()) throw ConfigError("config file must contain a JSON object");
    for (const auto& [key, value] : j.items()) set(key, value);
  }

  void set(const std::string& key, Json value) {
    if (!allowed_.count(key)) {
      throw ConfigError("unknown key '" + key + "' for command '" + command_ + "'");
    }
    values_[key] = std::move(value);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError("'" + key + "' must be a string");
    return v->get<std::string>();
  }
  double num(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError("'" + key + "' must be a number");
    return v->get<double>();
  }
  std::size_t count(const std::string& key, std::size_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    if (!v->is_number_integer() || v->get<long long>() < 0) {
      throw ConfigError("'" + key + "' must be a non-negative integer");
    }
    return v->get<std::size_t>();
  }
  bool flag(const std::string& key, bool fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError("'" + key + "' must be true or false");
    return v->get<bool>();
  }
  std::optional<double> opt_num(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return num(key, 0.0);
  }
  std::optional<Vector> vec(const std::string& key) const {
    auto v = get(key);
    if (!v) return std::nullopt;
    try {
      return io::vector_from_json(*v, key);
    } catch (const InputError& e) {
      throw ConfigError(e.what());
    }
  }
  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    if (!v->is_array()) throw ConfigError("'" + key + "' must be a list of integers");
    std::vector<std::size_t> out;
    for (const Json& e : *v) {
      if (!e.is_number_integer() || e.get<long long>() <= 0) throw ConfigError("'" + key + "' must hold positive integers");
      out.push_back(e.get<std::size_t>());
    }
    return out;
  }
  std::map<std::string, double> params() const {
    std::map<std::string, double> out;
    auto v = get("params");
    if (!v) return out;
    if (!v->is_object()) throw ConfigError("'params' must be an object of numbers");
    for (const auto& [key, value] : v->items()) {
      if (!value.is_number()) throw ConfigError("parameter '" + key + "' must be a number");
      out[key] = value.get<double>();
    }
    return out;
  }
  const Json* raw(const std::string& key) const {
    auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }

 private:
  std::optional<Json> get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::string command_;
  std::set<std::string> allowed_;
  std::map<std::string, Json> values_;
};

/// Command-line overrides collected by CLI11 before the config is validated.
struct Overrides {
  std::string config;
  std::map<std::string, std::string> strings;
  std::map<std::string, double> numbers;
  std::map<std::string, long long> integers;
  std::map<std::string, std::vector<double>> lists;
  std::set<std::string> switches;
  std::vector<std::string> params;  // name=value
};

void add_string(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(flag, [&ov, key](const std::string& v) { ov.strings[key] = v; }, help);
}
void add_number(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_option_function<double>(flag, [&ov, key](double v) { ov.numbers[key] = v; }, help);
}
void add_integer(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_option_function<long long>(flag, [&ov, key](long long v) { ov.integers[key] = v; }, help);
}
void add_list(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_option_function<std::vector<double>>(flag, [&ov, key](const std::vector<double>& v) { ov.lists[key] = v; },
                                                help)
      ->delimiter(',');
}
void add_params(CLI::App* app, Overrides& ov) {
  app->add_option("--param", ov.params, "system parameter name=value (repeatable)");
}
void add_switch(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_flag_callback(flag, [&ov, key]() { ov.switches.insert(key); }, help);
}

Config build_config(const std::string& command, const std::set<std::string>& allowed, const Overrides& ov) {
  Config cfg(command, allowed);
  if (!ov.config.empty()) cfg.load(ov.config);
  for (const auto& [k, v] : ov.strings) cfg.set(k, v);
  for (const auto& [k, v] : ov.numbers) cfg.set(k, v);
  for (const auto& [k, v] : ov.integers) cfg.set(k, v);
  for (const auto& [k, v] : ov.lists) {
    // Integral lists (sample sizes) are stored as integers so count checks apply.
    const bool integral = std::all_of(v.begin(), v.end(), [](double d) { return std::floor(d) == d && std::abs(d) < 1e15; });
    Json arr = Json::array();
    for (double d : v) integral && k == "m_list" ? arr.push_back(static_cast<long long>(d)) : arr.push_back(d);
    cfg.set(k, arr);
  }
  for (const auto& k : ov.switches) cfg.set(k, true);
  if (!ov.params.empty()) {
    Json p = cfg.raw("params") ? *cfg.raw("params") : Json::object();
    for (const std::string& kv : ov.params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects name=value, got '" + kv + "'");
      try {
        std::size_t used = 0;
        const std::string text = kv.substr(eq + 1);
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        p[kv.substr(0, eq)] = v;
      } catch (const std::logic_error&) {
        throw ConfigError("--param value for '" + kv.substr(0, eq) + "' is not a number");
      }
    }
    cfg.set("params", p);
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Shared helpers.

Dictionary resolve_dictionary(const Config& cfg, const std::string& system) {
  const std::string source = cfg.str("dictionary", system);
  if (source.empty()) throw ConfigError("no dictionary given (set 'dictionary' or 'system')");
  if (fs::path(source).extension() == ".json" || fs::exists(source)) {
    return io::dictionary_from_json(io::read_json(source));
  }
  return systems::dictionary_by_name(source);
}

Box resolve_box(const Config& cfg, std::size_t dim) {
  const Json* b = cfg.raw("box");
  if (!b) return symmetric_box(dim, 1.0);
  if (b->is_number()) return symmetric_box(dim, b->get<double>());
  if (!b->is_array() || b->size() != dim) throw ConfigError("'box' must be a half-width or one [lo, hi] pair per axis");
  Box box;
  for (const Json& iv : *b) {
    if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number()) {
      throw ConfigError("'box' entries must be [lo, hi] pairs");
    }
    box.push_back(Interval{iv[0].get<double>(), iv[1].get<double>()});
  }
  return box;
}

struct SystemDefaults {
  std::string sampling = "uniform";
  std::size_t m = 100;
  std::vector<double> x0;
  double t_end = 10.0;
};

SystemDefaults defaults_for(const std::string& system, std::size_t dim) {
  SystemDefaults d;
  d.x0.assign(dim, 0.0);
  if (system == "rational") {
    d = {"trajectory", 11, {1.0}, 5.0};
  } else if (system == "thomas") {
    d = {"trajectory", 1000, {1.0, -1.0, 0.0}, 100.0};
  } else if (system == "pendulum") {
    d = {"uniform", 100, {1.0, 0.0}, 10.0};
  } else if (system == "mean_field") {
    d = {"trajectory", 2001, {0.1, 0.0, 1.0}, 100.0};
  } else if (system == "rotation") {
    d = {"trajectory", 201, {1.0, 0.0}, 2.0 * 3.141592653589793};
  }
  return d;
}

Vector initial_state(const Config& cfg, const SystemDefaults& def, std::size_t dim) {
  Vector x0 = cfg.vec("x0").value_or(Eigen::Map<const Vector>(def.x0.data(), static_cast<Eigen::Index>(def.x0.size())));
  if (static_cast<std::size_t>(x0.size()) != dim) {
    throw ConfigError("'x0' has " + std::to_string(x0.size()) + " entries, the system has dimension " + std::to_string(dim));
  }
  return x0;
}

fs::path out_dir(const Config& cfg) { return fs::path(cfg.str("out", "out")); }

std::string fmt(double v) { return io::format_double(v); }

std::string row_string(const Matrix& m, Eigen::Index row) {
  std::ostringstream ss;
  ss << "[";
  for (Eigen::Index c = 0; c < m.cols(); ++c) ss << (c ? ", " : "") << fmt(m(row, c));
  ss << "]";
  return ss.str();
}

// ---------------------------------------------------------------------------
// generate

const std::set<std::string> kGenerateKeys{"system", "params", "sampling", "m", "seed", "box", "x0", "t_end",
                                          "substeps", "derivatives", "out"};

int cmd_generate(const Config& cfg, std::ostream& out) {
  const std::string name = cfg.str("system", "");
  if (name.empty()) throw StageError("config", "'system' is required");
  const VectorField f = stage("config", [&] { return systems::by_name(name, cfg.params()); });
  const SystemDefaults def = defaults_for(name, f.dim);
  const std::string sampling = cfg.str("sampling", def.sampling);
  const std::size_t m = cfg.count("m", def.m);
  const std::string deriv = cfg.str("derivatives", "exact");
  if (deriv != "exact" && deriv != "finite-difference") {
    throw StageError("config", "'derivatives' must be \"exact\" or \"finite-difference\"");
  }
  const fs::path dir = out_dir(cfg);

  TrainingSet ts;
  if (sampling == "uniform") {
    if (deriv != "exact") throw StageError("config", "uniform sampling supports exact derivatives only");
    const Box box = stage("config", [&] { return resolve_box(cfg, f.dim); });
    const std::uint64_t seed = cfg.count("seed", 0);
    ts = stage("sampling", [&] { return exact_derivatives(f, sample_uniform(box, m, seed)); });
  } else if (sampling == "trajectory") {
    const Vector x0 = stage("config", [&] { return initial_state(cfg, def, f.dim); });
    const double t_end = cfg.num("t_end", def.t_end);
    const std::size_t substeps = cfg.count("substeps", 10);
    const Trajectory tr = stage("integration", [&] { return sample_trajectory(f, x0, t_end, m, substeps); });
    stage("output", [&] { io::write_trajectory(dir / "trajectory.csv", tr); return 0; });
    ts = stage("derivatives", [&] { return deriv == "exact" ? exact_derivatives(f, tr.states) : finite_diff_derivatives(tr); });
  } else {
    throw StageError("config", "'sampling' must be \"uniform\" or \"trajectory\"");
  }
  stage("output", [&] { io::write_training_set(dir / "training.csv", ts); return 0; });
  out << "generate: system=" << name << " sampling=" << sampling << " m=" << ts.size()
      << " provenance=" << to_string(ts.provenance) << " -> " << (dir / "training.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit

const std::set<std::string> kFitKeys{"training", "system", "dictionary", "method", "lambda", "force_c_zero",
                                     "threshold", "pinv_cutoff", "provenance", "out"};

int cmd_fit(const Config& cfg, std::ostream& out) {
  const std::string method = cfg.str("method", "qendy");
  if (method != "qendy" && method != "sindy" && method != "gedmd") {
    throw StageError("config", "'method' must be qendy, sindy or gedmd");
  }
  const std::string training = cfg.str("training", "");
  if (training.empty()) throw StageError("config", "'training' (training CSV path) is required");
  const Dictionary dict = stage("dictionary", [&] { return resolve_dictionary(cfg, cfg.str("system", "")); });
  const Provenance prov = stage("config", [&] { return provenance_from_string(cfg.str("provenance", "external")); });
  const TrainingSet ts = stage("input", [&] { return io::read_training_set(training, prov); });
  const fs::path path = out_dir(cfg) / "model.json";

  if (method == "qendy") {
    FitOptions opts;
    opts.lambda = cfg.num("lambda", 0.0);
    opts.force_c_zero = cfg.flag("force_c_zero", false);
    opts.pinv_cutoff = cfg.opt_num("pinv_cutoff");
    const QuadraticModel model = stage("fit", [&] { return fit(dict, ts, opts); });
    const DataMatrices dm = stage("fit", [&] { return build_data_matrices(dict, ts); });
    const Loss l = loss(model, dm, opts.lambda);
    const SparsityReport sr = sparsity_report(model);
    const HurwitzReport hr = stage("diagnostics", [&] { return hurwitz_margin(model); });
    stage("output", [&] { io::write_json(path, io::model_to_json(model)); return 0; });
    out << "fit: method=qendy N=" << dict.size() << " m=" << ts.size() << " lambda=" << fmt(opts.lambda)
        << " force_c_zero=" << (opts.force_c_zero ? "true" : "false") << "\n";
    out << "loss: " << fmt(l.residual) << " (regularized " << fmt(l.regularized) << ", ||Zdot||_F^2 "
        << fmt(dm.zdot.squaredNorm()) << ")\n";
    out << "sparsity (|entry| > " << fmt(sr.threshold) << "): A=" << sr.a_nonzeros << " B=" << sr.b_nonzeros
        << " C=" << sr.c_nonzeros << " max|C|=" << fmt(sr.max_abs_c) << " ||A||_F=" << fmt(sr.a_frobenius) << "\n";
    out << "hurwitz: stable=" << (hr.stable ? "true" : "false") << " max_real_part=" << fmt(hr.max_real_part) << "\n";
    for (Eigen::Index i = 0; i < model.b().rows(); ++i) out << "B row " << i + 1 << ": " << row_string(model.b(), i) << "\n";
  } else if (method == "sindy") {
    SindyOptions opts;
    opts.threshold = cfg.opt_num("threshold");
    opts.pinv_cutoff = cfg.opt_num("pinv_cutoff");
    const SindyModel model = stage("fit", [&] { return sindy_fit(dict, ts, opts); });
    stage("output", [&] { io::write_json(path, io::sindy_to_json(model)); return 0; });
    out << "fit: method=sindy N=" << dict.size() << " m=" << ts.size() << " residual=" << fmt(sindy_residual(model, ts)) << "\n";
    for (Eigen::Index i = 0; i < model.xi.rows(); ++i) out << "Xi row " << i + 1 << ": " << row_string(model.xi, i) << "\n";
  } else {
    GedmdOptions opts;
    opts.pinv_cutoff = cfg.opt_num("pinv_cutoff");
    const GedmdModel model = stage("fit", [&] { return gedmd_fit(dict, ts, opts); });
    stage("output", [&] { io::write_json(path, io::gedmd_to_json(model)); return 0; });
    out << "fit: method=gedmd N=" << dict.size() << " m=" << ts.size() << "\n";
    for (Eigen::Index i = 0; i < model.theta.rows(); ++i) out << "Theta row " << i + 1 << ": " << row_string(model.theta, i) << "\n";
    for (const KoopmanEigenfunction& ef : koopman_eigenfunctions(model)) {
      out << "eigenvalue " << fmt(ef.eigenvalue.real()) << (ef.eigenvalue.imag() < 0 ? "-" : "+")
          << fmt(std::abs(ef.eigenvalue.imag())) << "i\n";
    }
  }
  out << "model -> " << path.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

const std::set<std::string> kSimulateKeys{"model", "system", "params", "x0", "t_end", "dt", "reference", "re_embed", "out"};

struct ModelRun {
  Matrix states;  // rows up to the last finite state
  std::optional<std::size_t> failed_step;
  std::size_t dim = 0;
};

ModelRun run_model(const Json& j, const Vector& x0, double t_end, double dt, bool re_embed) {
  const std::string kind = j.value("kind", "");
  ModelRun run;
  if (kind == "qendy") {
    const QuadraticModel model = io::model_from_json(j);
    SimulateOptions opts;
    opts.re_embed = re_embed;
    Simulation sim = simulate_partial(model, x0, t_end, dt, opts);
    run.states = std::move(sim.x.states);
    run.failed_step = sim.failed_step;
    run.dim = model.dictionary().state_dim();
    return run;
  }
  std::function<Vector(const Vector&)> rhs;
  if (kind == "sindy") {
    auto model = std::make_shared<SindyModel>(io::sindy_from_json(j));
    rhs = [model](const Vector& x) { return sindy_rhs(*model, x); };
    run.dim = model->dict.state_dim();
  } else if (kind == "gedmd") {
    auto model = std::make_shared<GedmdModel>(io::gedmd_from_json(j));
    rhs = [model](const Vector& x) { return gedmd_rhs(*model, x); };
    run.dim = model->dict.state_dim();
  } else {
    throw InputError("model.kind must be qendy, sindy or gedmd");
  }
  // Domain errors in the basis count as a blowup of the model run.
  auto safe = [&rhs](const Vector& x) -> Vector {
    try {
      return rhs(x);
    } catch (const DomainError&) {
      return Vector::Constant(x.size(), std::numeric_limits<double>::quiet_NaN());
    }
  };
  IntegrationResult r = rk4_integrate_partial(safe, x0, t_end, dt);
  run.states = std::move(r.trajectory.states);
  run.failed_step = r.failed_step;
  return run;
}

int cmd_simulate(const Config& cfg, std::ostream& out) {
  const std::string model_path = cfg.str("model", "");
  if (model_path.empty()) throw StageError("config", "'model' (model JSON path) is required");
  const Json mj = stage("input", [&] { return io::read_json(model_path); });
  const std::string system = cfg.str("system", "");
  const bool reference = cfg.flag("reference", !system.empty());
  std::optional<VectorField> truth;
  if (reference) {
    if (system.empty()) throw StageError("config", "'reference' needs 'system'");
    truth = stage("config", [&] { return systems::by_name(system, cfg.params()); });
  }
  const std::size_t dim = stage("input", [&] { return io::dictionary_from_json(mj.at("dictionary")).state_dim(); });
  const SystemDefaults def = defaults_for(system, dim);
  const Vector x0 = stage("config", [&] { return initial_state(cfg, def, dim); });
  const double t_end = cfg.num("t_end", 10.0);
  const double dt = cfg.num("dt", 1e-3);
  if (!(dt > 0.0) || !(t_end >= dt)) throw StageError("config", "need dt > 0 and t_end >= dt");
  const auto steps = static_cast<Eigen::Index>(std::llround(t_end / dt));

  const ModelRun run = stage("simulation", [&] { return run_model(mj, x0, t_end, dt, cfg.flag("re_embed", false)); });
  Matrix ref;
  if (truth) {
    ref = stage("reference", [&] { return rk4_integrate(*truth, x0, t_end, dt).states; });
  }

  const auto n = static_cast<Eigen::Index>(dim);
  const Eigen::Index valid = run.states.rows();
  std::vector<std::string> header{"t"};
  for (Eigen::Index i = 1; i <= n; ++i) header.push_back("x" + std::to_string(i) + "_model");
  if (truth) {
    for (Eigen::Index i = 1; i <= n; ++i) header.push_back("x" + std::to_string(i) + "_true");
  }
  header.push_back("model_valid");
  Matrix rows(steps + 1, static_cast<Eigen::Index>(header.size()));
  rows.setConstant(std::numeric_limits<double>::quiet_NaN());
  double sup = 0.0, sq = 0.0;
  for (Eigen::Index k = 0; k <= steps; ++k) {
    rows(k, 0) = static_cast<double>(k) * dt;
    const bool ok = k < valid;
    if (ok) rows.block(k, 1, 1, n) = run.states.row(k);
    if (truth) {
      rows.block(k, 1 + n, 1, n) = ref.row(k);
      if (ok) {
        const double e = (run.states.row(k) - ref.row(k)).cwiseAbs().maxCoeff();
        sup = std::max(sup, e);
        sq += (run.states.row(k) - ref.row(k)).squaredNorm();
      }
    }
    rows(k, rows.cols() - 1) = ok ? 1.0 : 0.0;
  }
  const fs::path dir = out_dir(cfg);
  Json summary{{"t_end", t_end},
               {"dt", dt},
               {"steps", steps},
               {"blowup", run.failed_step.has_value()},
               {"valid_until", static_cast<double>(valid - 1) * dt}};
  if (run.failed_step) summary["failed_step"] = *run.failed_step;
  if (truth) {
    summary["sup_error"] = sup;
    summary["rms_error"] = std::sqrt(sq / static_cast<double>(std::max<Eigen::Index>(valid, 1)));
  }
  stage("output", [&] {
    io::write_csv(dir / "simulation.csv", header, rows);
    io::write_json(dir / "simulation_summary.json", summary);
    return 0;
  });
  out << "simulate: steps=" << steps << " valid_until=" << fmt(static_cast<double>(valid - 1) * dt);
  if (run.failed_step) out << " BLOWUP at step " << *run.failed_step;
  if (truth) out << " sup_error=" << fmt(sup);
  out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// convergence

const std::set<std::string> kConvergenceKeys{"system", "params", "dictionary", "box", "m_list", "runs", "seed",
                                             "quadrature_order", "relative", "threads", "out"};

int cmd_convergence(const Config& cfg, std::ostream& out) {
  const std::string system = cfg.str("system", "pendulum");
  const VectorField f = stage("config", [&] { return systems::by_name(system, cfg.params()); });
  const Dictionary dict = stage("dictionary", [&] { return resolve_dictionary(cfg, system); });
  const Box box = stage("config", [&] { return resolve_box(cfg, f.dim); });
  ConvergenceOptions opts;
  opts.m_list = cfg.counts("m_list", opts.m_list);
  opts.runs = cfg.count("runs", opts.runs);
  opts.seed = cfg.count("seed", 0);
  opts.quadrature_order = cfg.count("quadrature_order", opts.quadrature_order);
  opts.relative = cfg.flag("relative", false);
  opts.threads = std::min(cfg.count("threads", thread_limit()), thread_limit());
  const ConvergenceResult res = stage("study", [&] { return convergence_study(dict, f, box, opts); });

  const auto n = static_cast<Eigen::Index>(dict.size());
  std::vector<std::string> header{"m", "run", "e_R"};
  for (Eigen::Index l = 1; l <= n; ++l) header.push_back("e_s" + std::to_string(l));
  Matrix runs(static_cast<Eigen::Index>(res.rows.size()), 3 + n);
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    runs(r, 0) = static_cast<double>(res.rows[i].m);
    runs(r, 1) = static_cast<double>(res.rows[i].run);
    runs(r, 2) = res.rows[i].e_r;
    runs.block(r, 3, 1, n) = res.rows[i].e_s.transpose();
  }
  Matrix agg(static_cast<Eigen::Index>(res.summary.size()), 3);
  for (std::size_t i = 0; i < res.summary.size(); ++i) {
    agg.row(static_cast<Eigen::Index>(i)) << static_cast<double>(res.summary[i].m), res.summary[i].e_r_mean,
        res.summary[i].e_s_mean;
  }
  const fs::path dir = out_dir(cfg);
  stage("output", [&] {
    io::write_csv(dir / "convergence_runs.csv", header, runs);
    io::write_csv(dir / "convergence.csv", {"m", "e_R_mean", "e_s_mean"}, agg);
    return 0;
  });
  for (const ConvergenceSummary& s : res.summary) {
    out << "m=" << s.m << " e_R=" << fmt(s.e_r_mean) << " e_s=" << fmt(s.e_s_mean) << "\n";
  }
  out << "slope e_R: " << (res.slope_r ? fmt(*res.slope_r) : std::string("n/a")) << "\n";
  out << "slope e_s: " << (res.slope_s ? fmt(*res.slope_s) : std::string("n/a")) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// reduce

const std::set<std::string> kReduceKeys{"data", "k", "train_fraction", "dt", "substeps", "lambda", "seed",
                                        "ambient_dim", "samples", "noise", "out"};

int cmd_reduce(const Config& cfg, std::ostream& out) {
  const std::string data_path = cfg.str("data", "");
  Matrix data;
  PipelineOptions opts;
  if (data_path.empty()) {
    SyntheticLiftOptions so;
    so.ambient_dim = cfg.count("ambient_dim", so.ambient_dim);
    so.samples = cfg.count("samples", so.samples);
    so.dt = cfg.num("dt", so.dt);
    so.noise = cfg.num("noise", so.noise);
    so.seed = cfg.count("seed", 0);
    data = stage("synthetic data", [&] { return synthetic_limit_cycle(so).data; });
    opts.dt = so.dt;
  } else {
    data = stage("input", [&] { return io::read_matrix_csv(data_path); });
    opts.dt = cfg.num("dt", 1.0);
  }
  opts.k = cfg.count("k", 3);
  opts.train_fraction = cfg.num("train_fraction", 0.8);
  opts.substeps = cfg.count("substeps", opts.substeps);
  opts.fit.lambda = cfg.num("lambda", 0.0);
  const PipelineResult res = stage("pipeline", [&] { return reduced_identification_pipeline(data, opts); });

  const auto k = static_cast<Eigen::Index>(opts.k);
  const Eigen::Index m = res.reduced.rows();
  std::vector<std::string> header{"t"};
  for (Eigen::Index i = 1; i <= k; ++i) header.push_back("y" + std::to_string(i));
  for (Eigen::Index i = 1; i <= k; ++i) header.push_back("y" + std::to_string(i) + "_forecast");
  header.push_back("train");
  Matrix rows(m, 2 + 2 * k);
  rows.setConstant(std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index r = 0; r < m; ++r) {
    rows(r, 0) = static_cast<double>(r) * opts.dt;
    rows.block(r, 1, 1, k) = res.reduced.row(r);
    if (r < res.forecast.rows()) rows.block(r, 1 + k, 1, k) = res.forecast.row(r);
    rows(r, 1 + 2 * k) = r < static_cast<Eigen::Index>(res.train_count) ? 1.0 : 0.0;
  }
  const double gap = res.basis.spectrum.size() > k && res.basis.spectrum[k] > 0.0
                         ? res.basis.spectrum[k - 1] / res.basis.spectrum[k]
                         : std::numeric_limits<double>::infinity();
  Json report{{"k", opts.k},
              {"samples", m},
              {"train_count", res.train_count},
              {"dt", opts.dt},
              {"train_relative_rms", res.train_relative_rms},
              {"test_relative_rms", std::isfinite(res.test_relative_rms) ? Json(res.test_relative_rms) : Json(nullptr)},
              {"spectral_gap", std::isfinite(gap) ? Json(gap) : Json(nullptr)},
              {"explained_variance_ratio", io::vector_to_json(res.basis.explained_variance_ratio())},
              {"blowup", res.failed_step.has_value()}};
  const fs::path dir = out_dir(cfg);
  stage("output", [&] {
    io::write_json(dir / "pca.json", io::pca_to_json(res.basis));
    io::write_json(dir / "model.json", io::model_to_json(res.model));
    io::write_csv(dir / "forecast.csv", header, rows);
    io::write_json(dir / "report.json", report);
    return 0;
  });
  out << "reduce: m=" << m << " D=" << data.cols() << " k=" << opts.k << " train=" << res.train_count << "\n";
  out << "spectral gap sigma_k/sigma_k+1: " << (std::isfinite(gap) ? fmt(gap) : std::string("inf")) << "\n";
  out << "relative RMS: train=" << fmt(res.train_relative_rms) << " held-out=" << fmt(res.test_relative_rms) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// report

const std::set<std::string> kReportKeys{"model", "threshold", "out"};

void write_long(const fs::path& path, const std::vector<std::pair<std::string, Matrix>>& blocks) {
  std::ostringstream ss;
  ss << "matrix,row,col,value\n";
  for (const auto& [name, m] : blocks) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) ss << name << "," << r + 1 << "," << c + 1 << "," << fmt(m(r, c)) << "\n";
    }
  }
  io::write_text(path, ss.str());
}

int cmd_report(const Config& cfg, std::ostream& out) {
  const std::string model_path = cfg.str("model", "");
  if (model_path.empty()) throw StageError("config", "'model' (model JSON path) is required");
  const Json mj = stage("input", [&] { return io::read_json(model_path); });
  const std::string kind = mj.value("kind", "");
  const fs::path dir = out_dir(cfg);
  std::vector<std::complex<double>> eigenvalues;
  if (kind == "qendy") {
    const QuadraticModel model = stage("input", [&] { return io::model_from_json(mj); });
    const SparsityReport sr = sparsity_report(model, cfg.num("threshold", 1e-6));
    const HurwitzReport hr = stage("diagnostics", [&] { return hurwitz_margin(model); });
    eigenvalues = hr.eigenvalues;
    stage("output", [&] {
      write_long(dir / "coefficients.csv", {{"A", model.a()}, {"B", model.b()}, {"C", Matrix(model.c())}, {"G", model.g()}});
      std::ostringstream ss;
      ss << "row,a_nonzeros,b_nonzeros\n";
      for (std::size_t i = 0; i < sr.a_row_nonzeros.size(); ++i) {
        ss << i + 1 << "," << sr.a_row_nonzeros[i] << "," << sr.b_row_nonzeros[i] << "\n";
      }
      io::write_text(dir / "sparsity.csv", ss.str());
      return 0;
    });
    out << "report: qendy A=" << sr.a_nonzeros << " B=" << sr.b_nonzeros << " C=" << sr.c_nonzeros
        << " nonzeros (threshold " << fmt(sr.threshold) << "), hurwitz stable=" << (hr.stable ? "true" : "false") << "\n";
  } else if (kind == "sindy") {
    const SindyModel model = stage("input", [&] { return io::sindy_from_json(mj); });
    stage("output", [&] { write_long(dir / "coefficients.csv", {{"Xi", model.xi}}); return 0; });
    out << "report: sindy Xi " << model.xi.rows() << "x" << model.xi.cols() << "\n";
  } else if (kind == "gedmd") {
    const GedmdModel model = stage("input", [&] { return io::gedmd_from_json(mj); });
    for (const KoopmanEigenfunction& ef : stage("diagnostics", [&] { return koopman_eigenfunctions(model); })) {
      eigenvalues.push_back(ef.eigenvalue);
    }
    stage("output", [&] { write_long(dir / "coefficients.csv", {{"Theta", model.theta}}); return 0; });
    out << "report: gedmd Theta " << model.theta.rows() << "x" << model.theta.cols() << "\n";
  } else {
    throw StageError("input", "model.kind must be qendy, sindy or gedmd");
  }
  if (!eigenvalues.empty()) {
    std::ostringstream ss;
    ss << "re,im\n";
    for (const auto& ev : eigenvalues) ss << fmt(ev.real()) << "," << fmt(ev.imag()) << "\n";
    stage("output", [&] { io::write_text(dir / "eigenvalues.csv", ss.str()); return 0; });
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quadratic embeddings of nonlinear dynamics: data generation, fitting, simulation and studies"};
  app.require_subcommand(1);
  Overrides ov;

  auto common = [&ov](CLI::App* sub) {
    sub->add_option("--config", ov.config, "JSON config file")->check(CLI::ExistingFile);
    add_string(sub, ov, "--out", "out", "output directory");
  };

  CLI::App* gen = app.add_subcommand("generate", "sample training data from a built-in system");
  common(gen);
  add_params(gen, ov);
  add_string(gen, ov, "--system", "system", "system name");
  add_integer(gen, ov, "--m", "m", "number of samples");
  add_integer(gen, ov, "--seed", "seed", "random seed");
  add_number(gen, ov, "--t-end", "t_end", "trajectory horizon");
  add_string(gen, ov, "--sampling", "sampling", "uniform | trajectory");
  add_string(gen, ov, "--derivatives", "derivatives", "exact | finite-difference");
  add_list(gen, ov, "--x0", "x0", "initial state, comma separated");

  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a qendy, sindy or gedmd model");
  common(fit_cmd);
  add_string(fit_cmd, ov, "--training", "training", "training CSV (x1..xn,dx1..dxn)");
  add_string(fit_cmd, ov, "--system", "system", "system whose built-in dictionary to use");
  add_string(fit_cmd, ov, "--dictionary", "dictionary", "dictionary name or JSON file");
  add_string(fit_cmd, ov, "--method", "method", "qendy | sindy | gedmd");
  add_number(fit_cmd, ov, "--lambda", "lambda", "regularization of A");
  add_switch(fit_cmd, ov, "--force-c-zero", "force_c_zero", "constrain C = 0");
  add_number(fit_cmd, ov, "--threshold", "threshold", "SINDy hard threshold (one pass)");
  add_string(fit_cmd, ov, "--provenance", "provenance", "exact | finite-difference | external");

  CLI::App* sim = app.add_subcommand("simulate", "simulate a fitted model, optionally against the true system");
  common(sim);
  add_string(sim, ov, "--model", "model", "model JSON");
  add_params(sim, ov);
  add_string(sim, ov, "--system", "system", "reference system name");
  add_number(sim, ov, "--dt", "dt", "RK4 step");
  add_number(sim, ov, "--t-end", "t_end", "horizon");
  add_list(sim, ov, "--x0", "x0", "initial state, comma separated");

  CLI::App* conv = app.add_subcommand("convergence", "Monte Carlo convergence of the Gram system");
  common(conv);
  add_params(conv, ov);
  add_string(conv, ov, "--system", "system", "system name");
  add_string(conv, ov, "--dictionary", "dictionary", "dictionary name or JSON file");
  add_integer(conv, ov, "--seed", "seed", "base seed");
  add_integer(conv, ov, "--runs", "runs", "runs per sample size");
  add_list(conv, ov, "--m", "m_list", "sample sizes, comma separated");

  CLI::App* red = app.add_subcommand("reduce", "PCA-reduced identification pipeline");
  common(red);
  add_string(red, ov, "--data", "data", "headerless m x D CSV (synthetic data if omitted)");
  add_integer(red, ov, "--k", "k", "number of principal components");
  add_number(red, ov, "--dt", "dt", "snapshot interval");
  add_integer(red, ov, "--seed", "seed", "seed of the synthetic data");
  add_number(red, ov, "--lambda", "lambda", "regularization of A");

  CLI::App* rep = app.add_subcommand("report", "tidy CSV tables of a fitted model");
  common(rep);
  add_string(rep, ov, "--model", "model", "model JSON");
  add_number(rep, ov, "--threshold", "threshold", "sparsity threshold");

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (gen->parsed()) return cmd_generate(stage("config", [&] { return build_config("generate", kGenerateKeys, ov); }), out);
    if (fit_cmd->parsed()) return cmd_fit(stage("config", [&] { return build_config("fit", kFitKeys, ov); }), out);
    if (sim->parsed()) return cmd_simulate(stage("config", [&] { return build_config("simulate", kSimulateKeys, ov); }), out);
    if (conv->parsed()) {
      return cmd_convergence(stage("config", [&] { return build_config("convergence", kConvergenceKeys, ov); }), out);
    }
    if (red->parsed()) return cmd_reduce(stage("config", [&] { return build_config("reduce", kReduceKeys, ov); }), out);
    if (rep->parsed()) return cmd_report(stage("config", [&] { return build_config("report", kReportKeys, ov); }), out);
  } catch (const StageError& e) {
    err << "error [" << e.stage << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace qendy::cli
