#include "inewton/experiment.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace ex = inewton::experiment;

namespace {

ex::Json load_config(const std::string& path) {
  if (path.empty()) return ex::Json::object();
  return inewton::io::read_json_file(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incremental Newton experiments: generate problems, run solvers, "
               "sweep parameters, verify convergence bounds"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  app.add_option("--config", config_path, "experiment config JSON");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "overrides problem.seed");
  app.add_option("--jobs", jobs, "parallel runs for sweep (env INEWT_JOBS)");

  auto* gen = app.add_subcommand("gen", "generate a problem JSON");
  auto* run = app.add_subcommand("run", "run a solver, write trace CSV and result JSON");
  auto* sweep = app.add_subcommand("sweep", "run a parameter grid, write summary.csv");
  auto* theory = app.add_subcommand("theory", "print the theory report JSON");
  auto* verify = app.add_subcommand("verify", "check every bound on a trace");

  double c = 0.0, C = 0.0, M = 0.0, eta = 0.0, nu = 0.0;
  std::size_t m = 0;
  theory->add_option("--c", c, "lower Hessian bound");
  theory->add_option("--C", C, "upper Hessian bound");
  theory->add_option("--m", m, "number of components");
  theory->add_option("--M", M, "gradient growth constant");
  theory->add_option("--eta", eta, "stepsize control parameter");
  theory->add_option("--nu", nu, "rate parameter in (0, 1)");

  std::string trace_path;
  std::string problem_path;
  std::optional<double> verify_eta;
  std::optional<double> ridge;
  verify->add_option("--trace", trace_path, "trace CSV")->required();
  verify->add_option("--problem", problem_path, "problem JSON")->required();
  verify->add_option("--eta", verify_eta, "eta of the variable rule used");
  verify->add_option("--ridge", ridge, "initial ridge of an EKF-S run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ex::exit_ok : ex::exit_usage;
  }

  try {
    if (gen->parsed()) {
      return ex::cmd_gen(load_config(config_path), out_dir, seed);
    }
    if (run->parsed()) {
      const int code = ex::cmd_run(load_config(config_path), out_dir, seed);
      if (code == ex::exit_numerical) {
        std::cerr << "numerical failure; partial artifacts in " << out_dir << "\n";
      }
      return code;
    }
    if (sweep->parsed()) {
      return ex::cmd_sweep(load_config(config_path), out_dir, seed,
                           ex::jobs_from_env(jobs));
    }
    if (theory->parsed()) {
      ex::Json cfg = load_config(config_path);
      for (const auto& [opt, value] :
           {std::pair{"--c", &c}, std::pair{"--C", &C}, std::pair{"--M", &M},
            std::pair{"--eta", &eta}, std::pair{"--nu", &nu}}) {
        if (theory->count(opt) > 0) cfg[std::string(opt).substr(2)] = *value;
      }
      if (theory->count("--m") > 0) cfg["m"] = m;
      std::cout << ex::cmd_theory(cfg, seed).dump(2) << "\n";
      return ex::exit_ok;
    }
    ex::Json report;
    const int code = ex::cmd_verify(trace_path, problem_path,
                                    {verify_eta, ridge}, report);
    std::cout << report.dump(2) << "\n";
    return code;
  } catch (const inewton::ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::exit_usage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::exit_usage;
  } catch (const inewton::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return ex::exit_numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::exit_numerical;
  }
}
