#pragma once

#include "inewton/diagnostics.hpp"
#include "inewton/engine.hpp"
#include "inewton/gauss_newton.hpp"
#include "inewton/io.hpp"
#include "inewton/least_squares.hpp"
#include "inewton/problem.hpp"
#include "inewton/run.hpp"
#include "inewton/stepsize.hpp"
#include "inewton/theory.hpp"

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace inewton::experiment {

using io::AnyProblem;
using io::Json;
namespace fs = std::filesystem;

/// Process exit codes of the command line front end.
enum ExitCode : int {
  exit_ok = 0,
  exit_violation = 1,
  exit_usage = 2,
  exit_numerical = 3,
};

/// Keys accepted at the top level of an experiment config.
inline const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys = {
      "problem",     "problem_path",  "solver",         "rule",
      "gamma",       "eta",           "tau",            "nu_hat",
      "kappa_hat",   "initial_alpha", "initial_alpha_policy",
      "growth_slope", "start",        "max_cycles",     "grad_tolerance",
      "trace_mode",  "ridge",         "sweep",          "full_storage_cycles",
      "c",           "C",             "m",              "M",
      "nu"};
  return keys;
}

inline void check_keys(const Json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  require(j.is_object(), where + " must be a JSON object");
  for (const auto& item : j.items()) {
    require(allowed.count(item.key()) > 0,
            where + ": unknown field '" + item.key() + "'");
  }
}

template <class T>
T get_or(const Json& j, const std::string& key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ArgumentError("field '" + key + "': " + e.what());
  }
}

/// Builds a problem from a generator spec such as
///   {"family": "zero_residual", "seed": 1, "n": 3, "m": 5,
///    "condition_target": 10, "nonquadratic": true}.
inline AnyProblem generate_problem(const Json& spec) {
  check_keys(spec,
             {"family", "seed", "n", "m", "condition_target", "nonquadratic",
              "epsilon", "zero_residual", "beta"},
             "problem");
  const std::string family = get_or<std::string>(spec, "family", "");
  const auto seed = get_or<std::uint64_t>(spec, "seed", 0);
  const auto n = get_or<std::size_t>(spec, "n", 2);
  const auto m = get_or<std::size_t>(spec, "m", 4);
  const double target = get_or<double>(spec, "condition_target", 10.0);
  if (family == "quadratic_sum") return make_quadratic_sum(seed, n, m, target);
  if (family == "zero_residual") {
    return make_zero_residual_problem(
        seed, n, m, get_or<bool>(spec, "nonquadratic", false), target);
  }
  if (family == "example1") {
    return make_example1(get_or<double>(spec, "epsilon", 1.0));
  }
  if (family == "nlls") {
    return make_nlls(seed, n, m, get_or<bool>(spec, "zero_residual", true),
                     get_or<double>(spec, "beta", 0.0));
  }
  throw ArgumentError(
      "problem.family must be one of quadratic_sum, zero_residual, example1, "
      "nlls (got '" + family + "')");
}

/// Resolves the problem of a config: an inline generator spec or a JSON file.
/// seed_override replaces problem.seed when set.
inline AnyProblem load_config_problem(const Json& cfg,
                                      std::optional<std::uint64_t> seed_override) {
  const bool has_spec = cfg.contains("problem");
  const bool has_path = cfg.contains("problem_path");
  require(has_spec != has_path,
          "config needs exactly one of 'problem' and 'problem_path'");
  if (has_path) return io::load_problem(cfg.at("problem_path").get<std::string>());
  Json spec = cfg.at("problem");
  if (seed_override) spec["seed"] = *seed_override;
  return generate_problem(spec);
}

inline std::optional<theory::ProblemConstants> problem_constants(
    const AnyProblem& p) {
  if (const auto* fs = std::get_if<Problem>(&p)) {
    return theory::ProblemConstants{fs->c(), fs->C(), fs->size(),
                                    fs->gradient_growth_M()};
  }
  return std::nullopt;
}

inline InitialAlphaPolicy parse_policy(const std::string& s) {
  if (s == "fixed") return InitialAlphaPolicy::fixed;
  if (s == "warm_start") return InitialAlphaPolicy::warm_start;
  if (s == "linear") return InitialAlphaPolicy::linear;
  throw ArgumentError("initial_alpha_policy must be fixed, warm_start or linear");
}

inline TraceMode parse_trace_mode(const std::string& s) {
  if (s == "minimal") return TraceMode::minimal;
  if (s == "standard") return TraceMode::standard;
  if (s == "full") return TraceMode::full;
  throw ArgumentError("trace_mode must be minimal, standard or full");
}

/// Stepsize rule from the config fields rule, gamma, eta, tau, nu_hat,
/// kappa_hat, initial_alpha. A linear-growth rule without kappa_hat takes
/// kappa from the theory module at phi = 2(1 - eta)Q.
inline StepsizeRule parse_rule(const Json& cfg, const AnyProblem& problem) {
  const std::string name = get_or<std::string>(cfg, "rule", "unit");
  StepsizeRule rule;
  if (name == "unit") {
    rule = UnitStep{};
  } else if (name == "constant") {
    rule = ConstantNormalized{get_or<double>(cfg, "gamma", 0.01)};
  } else if (name == "bisection") {
    VariableBisection b;
    b.eta = get_or<double>(cfg, "eta", b.eta);
    b.tau = get_or<double>(cfg, "tau", b.tau);
    b.initial_alpha = get_or<double>(cfg, "initial_alpha", b.initial_alpha);
    b.policy = parse_policy(
        get_or<std::string>(cfg, "initial_alpha_policy", "warm_start"));
    b.growth_slope = get_or<double>(cfg, "growth_slope", 0.0);
    rule = b;
  } else if (name == "linear_growth") {
    LinearGrowth g;
    g.eta_hat = get_or<double>(cfg, "eta", g.eta_hat);
    g.nu_hat = get_or<double>(cfg, "nu_hat", g.nu_hat);
    if (cfg.contains("kappa_hat") && !cfg.at("kappa_hat").is_null()) {
      g.kappa_hat = cfg.at("kappa_hat").get<double>();
    } else {
      const auto consts = problem_constants(problem);
      require(consts && consts->M,
              "linear_growth without kappa_hat needs a problem with a "
              "gradient growth constant M");
      require(g.eta_hat > 0.0 && g.eta_hat < 1.0,
              "linear growth: need 0 < eta < 1");
      const auto kappa =
          theory::kappa(theory::phi(g.eta_hat, consts->Q()), *consts);
      require(kappa.has_value(),
              "eta is outside the domain where kappa is defined; raise eta or "
              "give kappa_hat explicitly");
      g.kappa_hat = *kappa;
    }
    rule = g;
  } else {
    throw ArgumentError(
        "rule must be unit, constant, bisection or linear_growth (got '" +
        name + "')");
  }
  validate_rule(rule);
  return rule;
}

inline RunConfig parse_run_config(const Json& cfg) {
  RunConfig rc;
  rc.max_cycles = get_or<std::size_t>(cfg, "max_cycles", rc.max_cycles);
  rc.grad_tolerance = get_or<double>(cfg, "grad_tolerance", rc.grad_tolerance);
  rc.trace_mode =
      parse_trace_mode(get_or<std::string>(cfg, "trace_mode", "standard"));
  rc.full_storage_cycles =
      get_or<std::size_t>(cfg, "full_storage_cycles", rc.full_storage_cycles);
  require(rc.grad_tolerance > 0.0, "grad_tolerance must be > 0");
  return rc;
}

inline std::size_t problem_dimension(const AnyProblem& p) {
  return std::visit([](const auto& q) { return q.dimension(); }, p);
}

inline Vector parse_start(const Json& cfg, std::size_t n) {
  if (!cfg.contains("start") || cfg.at("start").is_null()) {
    return Vector::Zero(static_cast<Eigen::Index>(n));
  }
  const Json& s = cfg.at("start");
  if (s.is_number()) {
    return Vector::Constant(static_cast<Eigen::Index>(n), s.get<double>());
  }
  Vector x = io::vector_from_json(s);
  require_dimension(x, n, "start");
  return x;
}

/// A fully resolved experiment: problem, solver, rule, start and loop config.
struct Experiment {
  AnyProblem problem;
  std::string solver = "in";
  StepsizeRule rule;
  Vector start;
  RunConfig run;
  std::optional<double> ridge;
};

inline Experiment resolve(const Json& cfg,
                          std::optional<std::uint64_t> seed_override = {}) {
  check_keys(cfg, config_keys(), "config");
  Experiment e{load_config_problem(cfg, seed_override), "in", UnitStep{},
               Vector(), RunConfig{}, std::nullopt};
  e.solver = get_or<std::string>(cfg, "solver", "in");
  require(e.solver == "in" || e.solver == "ekfs",
          "solver must be 'in' or 'ekfs'");
  if (e.solver == "in") {
    require(std::holds_alternative<Problem>(e.problem),
            "solver 'in' needs a finite_sum problem");
  } else {
    require(std::holds_alternative<LeastSquaresProblem>(e.problem),
            "solver 'ekfs' needs a least_squares problem (family nlls)");
  }
  e.rule = parse_rule(cfg, e.problem);
  e.start = parse_start(cfg, problem_dimension(e.problem));
  e.run = parse_run_config(cfg);
  if (cfg.contains("ridge") && !cfg.at("ridge").is_null()) {
    e.ridge = cfg.at("ridge").get<double>();
  }
  return e;
}

inline RunResult execute(const Experiment& e) {
  if (e.solver == "in") {
    IncrementalNewton engine(std::get<Problem>(e.problem));
    return run(engine, e.rule, e.start, e.run);
  }
  return run_ekfs(std::get<LeastSquaresProblem>(e.problem), e.rule, e.start,
                  e.run, e.ridge);
}

inline std::optional<diag::RateFit> try_fit(const std::vector<double>& series) {
  if (series.size() < diag::RateFitOptions{}.min_length) return std::nullopt;
  return diag::fit_rate(series);
}

inline Json rule_to_json(const StepsizeRule& rule) {
  return std::visit(
      [](const auto& r) -> Json {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, UnitStep>) {
          return {{"rule", "unit"}};
        } else if constexpr (std::is_same_v<T, ConstantNormalized>) {
          return {{"rule", "constant"}, {"gamma", r.gamma}};
        } else if constexpr (std::is_same_v<T, VariableBisection>) {
          return {{"rule", "bisection"},
                  {"eta", r.eta},
                  {"tau", r.tau},
                  {"initial_alpha", r.initial_alpha}};
        } else {
          return {{"rule", "linear_growth"},
                  {"eta", r.eta_hat},
                  {"nu_hat", r.nu_hat},
                  {"kappa_hat", r.kappa_hat}};
        }
      },
      rule);
}

inline Json result_to_json(const Experiment& e, const RunResult& r) {
  const auto grad_fit = try_fit(r.grad_norm_history);
  const auto dist_fit = try_fit(r.distance_history);
  Json j = {{"solver", e.solver},
            {"stepsize", rule_to_json(e.rule)},
            {"termination", to_string(r.termination)},
            {"message", r.message},
            {"cycles_used", r.cycles_used},
            {"final_grad_norm", r.final_grad_norm},
            {"final_x", io::vector_to_json(r.final_x)},
            {"observed_diameter", r.observed_diameter}};
  j["grad_rate"] = grad_fit ? io::to_json(*grad_fit) : Json(nullptr);
  j["dist_rate"] = dist_fit ? io::to_json(*dist_fit) : Json(nullptr);
  return j;
}

/// Files written by a single run.
struct RunArtifacts {
  RunResult result;
  Json summary;
  int exit_code = exit_ok;
};

inline RunArtifacts run_to_directory(const Experiment& e, const fs::path& dir) {
  fs::create_directories(dir);
  RunArtifacts out;
  out.result = execute(e);
  io::save_problem((dir / "problem.json").string(), e.problem);
  io::write_text_file((dir / "trace.csv").string(),
                      io::trace_csv(out.result.traces,
                                    problem_dimension(e.problem)));
  out.summary = result_to_json(e, out.result);
  io::write_json_file((dir / "result.json").string(), out.summary);
  if (out.result.termination == Termination::numerical_error) {
    out.exit_code = exit_numerical;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

inline int cmd_gen(const Json& cfg, const fs::path& out,
                   std::optional<std::uint64_t> seed) {
  check_keys(cfg, config_keys(), "config");
  const AnyProblem p = load_config_problem(cfg, seed);
  fs::create_directories(out);
  io::save_problem((out / "problem.json").string(), p);
  return exit_ok;
}

inline int cmd_run(const Json& cfg, const fs::path& out,
                   std::optional<std::uint64_t> seed) {
  const Experiment e = resolve(cfg, seed);
  return run_to_directory(e, out).exit_code;
}

/// Fixed column order of summary.csv.
inline const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> cols = {
      "run_id",      "solver",  "rule",      "gamma",          "eta",
      "tau",         "nu_hat",  "kappa_hat", "seed",           "cycles",
      "termination", "final_grad_norm",      "rho_hat",        "r_squared",
      "classification"};
  return cols;
}

/// Expands the "sweep" object of a config into one config per grid point.
/// Keys are visited in lexicographic order, the last key varying fastest.
/// The key "seed" sets problem.seed.
inline std::vector<Json> expand_grid(const Json& cfg) {
  require(cfg.contains("sweep"), "sweep config needs a 'sweep' object");
  const Json& grid = cfg.at("sweep");
  require(grid.is_object() && !grid.empty(), "'sweep' must be a nonempty object");
  Json base = cfg;
  base.erase("sweep");
  std::vector<Json> configs = {base};
  for (const auto& item : grid.items()) {
    require(item.value().is_array() && !item.value().empty(),
            "sweep." + item.key() + " must be a nonempty array");
    require(item.key() == "seed" || config_keys().count(item.key()) > 0,
            "sweep: unknown field '" + item.key() + "'");
    std::vector<Json> next;
    for (const auto& c : configs) {
      for (const auto& v : item.value()) {
        Json d = c;
        if (item.key() == "seed") {
          require(d.contains("problem"), "sweep over seed needs 'problem'");
          d["problem"]["seed"] = v;
        } else {
          d[item.key()] = v;
        }
        next.push_back(std::move(d));
      }
    }
    configs = std::move(next);
  }
  return configs;
}

inline std::size_t jobs_from_env(std::optional<std::size_t> flag) {
  if (flag) return std::max<std::size_t>(1, *flag);
  if (const char* env = std::getenv("INEWT_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw ArgumentError("INEWT_JOBS must be a positive integer");
  }
  return 1;
}

inline std::string summary_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return io::format_double(v.get<double>());
  return v.dump();
}

inline int cmd_sweep(const Json& cfg, const fs::path& out,
                     std::optional<std::uint64_t> seed, std::size_t jobs) {
  check_keys(cfg, config_keys(), "config");
  std::vector<Json> configs = expand_grid(cfg);
  if (seed) {
    for (auto& c : configs) {
      if (c.contains("problem") && !cfg.at("sweep").contains("seed")) {
        c["problem"]["seed"] = *seed;
      }
    }
  }
  // Resolve everything up front so a bad grid point fails before any work.
  std::vector<Experiment> experiments;
  experiments.reserve(configs.size());
  for (const auto& c : configs) experiments.push_back(resolve(c));

  fs::create_directories(out);
  std::vector<std::vector<std::string>> rows(configs.size());
  std::vector<int> codes(configs.size(), exit_ok);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::string first_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        char id[16];
        std::snprintf(id, sizeof id, "run_%03zu", i);
        const fs::path dir = out / id;
        fs::create_directories(dir);
        io::write_json_file((dir / "config.json").string(), configs[i]);
        const RunArtifacts a = run_to_directory(experiments[i], dir);
        codes[i] = a.exit_code;
        const Json& c = configs[i];
        const Json& s = a.summary;
        const Json rate = s.at("grad_rate");
        const Json stepsize = s.at("stepsize");
        auto field = [&](const char* key) {
          return stepsize.contains(key) ? summary_cell(stepsize.at(key))
                                        : std::string();
        };
        rows[i] = {id,
                   experiments[i].solver,
                   stepsize.at("rule").get<std::string>(),
                   field("gamma"),
                   field("eta"),
                   field("tau"),
                   field("nu_hat"),
                   field("kappa_hat"),
                   c.contains("problem") && c.at("problem").contains("seed")
                       ? summary_cell(c.at("problem").at("seed"))
                       : std::string(),
                   std::to_string(a.result.cycles_used),
                   to_string(a.result.termination),
                   io::format_double(a.result.final_grad_norm),
                   rate.is_null() ? "" : summary_cell(rate.at("rho_hat")),
                   rate.is_null() ? "" : summary_cell(rate.at("r_squared")),
                   rate.is_null() ? "inconclusive"
                                  : rate.at("classification").get<std::string>()};
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty()) first_error = e.what();
        codes[i] = exit_numerical;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n_threads = std::min(jobs, configs.size());
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (!first_error.empty()) throw std::runtime_error(first_error);

  std::ostringstream csv;
  const auto& cols = summary_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) csv << (i ? "," : "") << cols[i];
  csv << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) csv << (i ? "," : "") << row[i];
    csv << "\n";
  }
  const fs::path tmp = out / "summary.csv.tmp";
  io::write_text_file(tmp.string(), csv.str());
  fs::rename(tmp, out / "summary.csv");
  for (int code : codes) {
    if (code != exit_ok) return code;
  }
  return exit_ok;
}

/// Theory report for constants given directly (c, C, m, M) or taken from the
/// config's problem, at the config's eta and nu.
inline Json cmd_theory(const Json& cfg, std::optional<std::uint64_t> seed) {
  check_keys(cfg, config_keys(), "config");
  theory::ProblemConstants consts;
  if (cfg.contains("problem") || cfg.contains("problem_path")) {
    const auto from_problem =
        problem_constants(load_config_problem(cfg, seed));
    require(from_problem.has_value(),
            "theory needs a finite_sum problem or explicit constants");
    consts = *from_problem;
  }
  consts.c = get_or<double>(cfg, "c", consts.c);
  consts.C = get_or<double>(cfg, "C", consts.C);
  consts.m = get_or<std::size_t>(cfg, "m", consts.m);
  if (cfg.contains("M") && !cfg.at("M").is_null()) {
    consts.M = cfg.at("M").get<double>();
  }
  require(consts.M.has_value(),
          "theory needs the gradient growth constant M");
  const double eta = get_or<double>(cfg, "eta", 0.9);
  const double nu = get_or<double>(cfg, "nu", 0.5);
  return io::to_json(theory::report(consts, eta, nu));
}

/// Recomputes the cycles of a trace CSV on its problem. Each cycle restarts
/// from the recorded x_1^k with the recorded alpha^k; the accumulated
/// curvature is carried forward, so the replay reproduces the original run.
template <class Engine>
std::vector<CycleTrace> replay(const Engine& engine,
                               const std::vector<io::TraceRow>& rows,
                               const Matrix& H0, double& worst_gap) {
  std::vector<CycleTrace> traces;
  Matrix H = H0;
  HessianErrorAccumulators accums{Matrix::Zero(H0.rows(), H0.cols()),
                                  Matrix::Zero(H0.rows(), H0.cols())};
  CycleOptions options;
  options.mode = TraceMode::full;
  worst_gap = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    require(row.k == r + 1, "trace rows must be consecutive cycles from k=1");
    require_dimension(row.start, engine.dimension(), "trace coordinates");
    CycleOutcome outcome =
        engine.run_cycle(row.start, H, row.k, row.alpha, options);
    accums.S1 = outcome.H_end;
    accums.S2 += engine.start_curvature_sum(row.start);
    outcome.trace.ehat_norm = hessian_error(accums, row.k).norm;
    outcome.trace.alpha_star = row.alpha_star;
    outcome.trace.trial_count = row.trial_count;
    if (r + 1 < rows.size()) {
      const Vector& next = rows[r + 1].start;
      worst_gap = std::max(worst_gap, (outcome.trace.end - next).norm() /
                                          (1.0 + next.norm()));
    }
    H = outcome.H_end;
    traces.push_back(std::move(outcome.trace));
  }
  return traces;
}

struct VerifyOptions {
  std::optional<double> eta;
  std::optional<double> ridge;
};

/// Replays a trace on its problem and runs every applicable bound check.
/// The report carries an extra bound "trace_replay" comparing the replayed
/// cycle endpoints with the recorded next starts.
inline diag::VerifyReport verify_trace(const AnyProblem& problem,
                                       const std::vector<io::TraceRow>& rows,
                                       const VerifyOptions& options) {
  require(!rows.empty(), "trace has no cycles");
  diag::VerifySettings settings;
  settings.eta = options.eta;
  const double first = rows.front().grad_norm;
  const double last = rows.back().grad_norm;
  settings.convergent = last <= 1e-3 * first;
  double gap = 0.0;
  std::vector<CycleTrace> traces;
  if (const auto* p = std::get_if<Problem>(&problem)) {
    IncrementalNewton engine(*p);
    traces = replay(engine, rows, engine.initial_curvature(rows[0].start), gap);
    settings.consts = *problem_constants(problem);
  } else {
    const auto& ls = std::get<LeastSquaresProblem>(problem);
    IncrementalGaussNewton engine(ls, options.ridge);
    traces = replay(engine, rows, engine.initial_curvature(rows[0].start), gap);
    settings.exact_hessian = false;
    settings.C_gn = ls.C_gn();
    settings.ridge = engine.ridge_for(rows[0].start);
    settings.consts.m = ls.size();
  }
  diag::VerifyReport report = diag::verify_all(traces, settings);
  diag::BoundReport replay_report;
  replay_report.bound_name = "trace_replay";
  replay_report.tolerance = 1e-12;
  replay_report.cycles_checked = rows.size() > 0 ? rows.size() - 1 : 0;
  replay_report.worst_margin = -gap;
  replay_report.violated = gap > replay_report.tolerance;
  report.bounds.insert(report.bounds.begin(), std::move(replay_report));
  return report;
}

inline int cmd_verify(const std::string& trace_path,
                      const std::string& problem_path,
                      const VerifyOptions& options, Json& report_out) {
  std::ifstream in(trace_path);
  require(static_cast<bool>(in), "cannot open " + trace_path);
  const auto rows = io::read_trace_csv(in);
  const AnyProblem problem = io::load_problem(problem_path);
  const auto report = verify_trace(problem, rows, options);
  report_out = io::to_json(report);
  return report.any_violated() ? exit_violation : exit_ok;
}

}  // namespace inewton::experiment
