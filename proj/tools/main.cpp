// Command-line front-end for the separability likelihood ratio test:
// fit the separable LEAR null or the unstructured alternative, run the
// adjusted test, run Monte Carlo test-size studies, or inspect a dataset. All output is a single JSON report.

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "report.hpp"
#include "seplrt/lrt.hpp"
#include "seplrt/simulate.hpp"

namespace {

using seplrt::report::json;

struct CommonArgs {
  std::string data_path;
  std::string out_path;
  bool intercept = true;
  double alpha = 0.05;
  std::string adjustment = "all";
  seplrt::FitOptions fit;
};

seplrt::AdjustmentSet adjustment_set(const std::string& name) {
  if (name == "all") return {true, true, true};
  if (name == "none") return {true, false, false};
  if (name == "k1") return {false, true, false};
  if (name == "k2") return {false, false, true};
  throw CLI::ValidationError("--adjustment must be one of none, k1, k2, all");
}

void add_fit_flags(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--max-iter", args.fit.max_iter, "Maximum optimizer iterations")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--rel-tol", args.fit.rel_tol, "Relative log-likelihood change tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--grad-tol", args.fit.grad_tol, "Gradient norm tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--fd-step", args.fit.fd_step, "Finite-difference step (transformed scale)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--analytic-gradient", args.fit.analytic_gradient,
                "Use the chain-rule gradient for the null fit instead of central differences");
}

void add_data_flags(CLI::App* cmd, CommonArgs& args, bool required = true) {
  auto* opt = cmd->add_option("--data", args.data_path, "Input CSV file");
  if (required) opt->required();
  cmd->add_flag("--intercept,!--no-intercept", args.intercept,
                "Include an intercept column in the design (default on)");
}

void emit(const json& report, const std::string& out_path, bool to_stderr = false) {
  const std::string text = report.dump(2) + "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << text;
  } else if (to_stderr) {
    std::cerr << text;
  } else {
    std::cout << text;
  }
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}


// key=value study configuration; explicit command-line flags win over file
// entries. Lines starting with '#' and blank lines are ignored.
void apply_sim_config_file(const std::string& path, const CLI::App& cmd, seplrt::SimConfig& sim,
                           std::string& scenario) {
  std::ifstream in(path);
  if (!in) throw seplrt::DataError("file_not_found", "cannot open config file '" + path + "'");
  auto flag_given = [&](const std::string& name) { return cmd.count(name) > 0; };
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw seplrt::DataError("malformed_row", "config line " + std::to_string(line_no) +
                                                   " is not key=value: '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    try {
      if (key == "n" && !flag_given("--n")) sim.n_subjects = std::stoi(value);
      else if (key == "tmax" && !flag_given("--tmax")) sim.t_max = std::stoi(value);
      else if (key == "smax" && !flag_given("--smax")) sim.s_max = std::stoi(value);
      else if (key == "rho_t" && !flag_given("--rho-t")) sim.rho_t = std::stod(value);
      else if (key == "rho_s" && !flag_given("--rho-s")) sim.rho_s = std::stod(value);
      else if (key == "delta_frac" && !flag_given("--delta-frac")) sim.delta_frac = std::stod(value);
      else if (key == "sigma2" && !flag_given("--sigma2")) sim.sigma2 = std::stod(value);
      else if (key == "scenario" && !flag_given("--scenario")) scenario = value;
      else if (key == "reps" && !flag_given("--reps")) sim.reps = std::stoi(value);
      else if (key == "alpha" && !flag_given("--alpha")) sim.alpha = std::stod(value);
      else if (key == "seed" && !flag_given("--seed")) sim.seed = std::stoull(value);
      else if (key == "time_spacing" && !flag_given("--time-spacing")) sim.time_spacing = std::stod(value);
      else if (key == "space_spacing" && !flag_given("--space-spacing")) sim.space_spacing = std::stod(value);
      else if (key == "policy" && !flag_given("--policy")) sim.imbalance = value;
      else if (key == "threads" && !flag_given("--threads")) sim.threads = std::stoi(value);
      else if (key == "max_iter" && !flag_given("--max-iter")) sim.fit.max_iter = std::stoi(value);
      else if (key == "rel_tol" && !flag_given("--rel-tol")) sim.fit.rel_tol = std::stod(value);
      else if (key == "grad_tol" && !flag_given("--grad-tol")) sim.fit.grad_tol = std::stod(value);
      else if (key == "n" || key == "tmax" || key == "smax" || key == "rho_t" || key == "rho_s" ||
               key == "delta_frac" || key == "sigma2" || key == "scenario" || key == "reps" ||
               key == "alpha" || key == "seed" || key == "time_spacing" ||
               key == "space_spacing" || key == "policy" || key == "threads" ||
               key == "max_iter" || key == "rel_tol" || key == "grad_tol") {
        // a flag overrides this entry
      } else {
        throw seplrt::DataError("unknown_key", "config line " + std::to_string(line_no) +
                                                   ": unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw seplrt::DataError("non_numeric_cell", "config line " + std::to_string(line_no) +
                                                      ": bad value for '" + key + "'");
    }
  }
}

int exit_code_for(const seplrt::Error& e) {
  const std::string& kind = e.kind();
  if (kind == "fit_not_converged" || kind == "study_aborted" || kind == "all_starts_inadmissible")
    return 2;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Separability likelihood ratio test for unbalanced multivariate repeated measures"};
  app.require_subcommand(1);

  CommonArgs args;
  app.add_option("--out", args.out_path, "Write the JSON report to a file instead of stdout");

  auto* cmd_fit_null = app.add_subcommand("fit-null", "Fit the separable Kronecker LEAR model");
  add_data_flags(cmd_fit_null, args);
  add_fit_flags(cmd_fit_null, args);

  auto* cmd_fit_alt =
      app.add_subcommand("fit-alt", "Fit the unstructured maximal-grid covariance model");
  add_data_flags(cmd_fit_alt, args);
  add_fit_flags(cmd_fit_alt, args);

  auto* cmd_test = app.add_subcommand("test", "Run the adjusted likelihood ratio test");
  add_data_flags(cmd_test, args);
  add_fit_flags(cmd_test, args);
  cmd_test->add_option("--alpha", args.alpha, "Significance level")->check(CLI::Range(1e-12, 1.0));
  cmd_test->add_option("--adjustment", args.adjustment,
                       "Critical-value adjustment: none, k1, k2, or all");

  // info: dataset digest, or degrees of freedom and adjustments from counts
  auto* cmd_info = app.add_subcommand("info", "Dataset digest and test constants without fitting");
  long info_n = 0, info_max_ts = 0;
  add_data_flags(cmd_info, args, /*required=*/false);
  cmd_info->add_option("--n", info_n, "Subject count (when no --data is given)");
  cmd_info->add_option("--max-ts", info_max_ts, "max_i(t_i * s_i) (when no --data is given)");

  auto* cmd_sim = app.add_subcommand("simulate", "Monte Carlo test-size study");
  seplrt::SimConfig sim;
  std::string sim_config_path;
  cmd_sim->add_option("--config", sim_config_path,
                      "Read study options from a key=value file (flags take precedence)");
  std::string preset, scenario = "null";
  bool rep_log = false;
  cmd_sim->add_option("--preset", preset, "Named configuration (table1)")
      ->check(CLI::IsMember({"table1"}));
  cmd_sim->add_option("--n", sim.n_subjects, "Subjects per replicate")->check(CLI::PositiveNumber);
  cmd_sim->add_option("--tmax", sim.t_max, "Maximal temporal grid size")->check(CLI::PositiveNumber);
  cmd_sim->add_option("--smax", sim.s_max, "Maximal spatial grid size")->check(CLI::PositiveNumber);
  cmd_sim->add_option("--rho-t", sim.rho_t, "Temporal correlation at one unit");
  cmd_sim->add_option("--rho-s", sim.rho_s, "Spatial correlation at one unit");
  cmd_sim->add_option("--delta-frac", sim.delta_frac, "Decay speed as a fraction of the range");
  cmd_sim->add_option("--sigma2", sim.sigma2, "Variance")->check(CLI::PositiveNumber);
  cmd_sim->add_option("--scenario", scenario, "Mean model: null or two_group");
  cmd_sim->add_option("--reps", sim.reps, "Replicates")->check(CLI::PositiveNumber);
  cmd_sim->add_option("--alpha", sim.alpha, "Significance level");
  cmd_sim->add_option("--seed", sim.seed, "Random seed");
  cmd_sim->add_option("--time-spacing", sim.time_spacing, "Temporal lattice spacing");
  cmd_sim->add_option("--space-spacing", sim.space_spacing, "Spatial lattice spacing");
  cmd_sim->add_option("--policy", sim.imbalance,
                      "Imbalance policy: scan_profile, time_dropout, uniform_prefix, balanced");
  cmd_sim->add_option("--threads", sim.threads, "Worker threads (0: SEPLRT_THREADS or all cores)");
  cmd_sim->add_flag("--rep-log", rep_log, "Include the per-replicate log in the report");
  cmd_sim->add_option("--max-iter", sim.fit.max_iter, "Maximum optimizer iterations per fit");
  cmd_sim->add_option("--rel-tol", sim.fit.rel_tol, "Relative log-likelihood change tolerance");
  cmd_sim->add_option("--grad-tol", sim.fit.grad_tol, "Gradient norm tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit(seplrt::report::error_block("usage", e.get_name() + std::string(": ") + e.what()), "",
         true);
    return 1;
  }
  const auto t0 = std::chrono::steady_clock::now();

  try {
    seplrt::CsvOptions csv;
    csv.intercept = args.intercept;

    if (cmd_fit_null->parsed()) {
      const seplrt::Dataset ds = seplrt::load_csv(args.data_path, csv);
      const seplrt::NullFitResult fit = seplrt::fit_null(ds, args.fit);
      json report = seplrt::report::skeleton("fit-null");
      report["input"] = seplrt::report::input_digest(ds, args.data_path);
      report["null_fit"] = seplrt::report::fit_block(fit);
      std::vector<std::string> warnings = ds.warnings;
      warnings.insert(warnings.end(), fit.warnings.begin(), fit.warnings.end());
      seplrt::report::finish(report, warnings, seconds_since(t0));
      emit(report, args.out_path);
      return fit.converged ? 0 : 2;
    }

    if (cmd_fit_alt->parsed()) {
      const seplrt::Dataset ds = seplrt::load_csv(args.data_path, csv);
      const seplrt::AltFitResult fit = seplrt::fit_alt(ds, args.fit);
      json report = seplrt::report::skeleton("fit-alt");
      report["input"] = seplrt::report::input_digest(ds, args.data_path);
      report["alt_fit"] = seplrt::report::fit_block(fit);
      std::vector<std::string> warnings = ds.warnings;
      warnings.insert(warnings.end(), fit.warnings.begin(), fit.warnings.end());
      seplrt::report::finish(report, warnings, seconds_since(t0));
      emit(report, args.out_path);
      return fit.converged ? 0 : 2;
    }

    if (cmd_test->parsed()) {
      const seplrt::Dataset ds = seplrt::load_csv(args.data_path, csv);
      seplrt::NullFitResult null_fit;
      seplrt::AltFitResult alt_fit;
      const seplrt::LrtResult lrt = seplrt::run_test(
          ds, args.alpha, adjustment_set(args.adjustment), args.fit, &null_fit, &alt_fit);
      json report = seplrt::report::skeleton("test");
      report["input"] = seplrt::report::input_digest(ds, args.data_path);
      report["null_fit"] = seplrt::report::fit_block(null_fit);
      report["alt_fit"] = seplrt::report::fit_block(alt_fit);
      report["test"] = seplrt::report::test_block(lrt);
      std::vector<std::string> warnings = ds.warnings;
      warnings.insert(warnings.end(), lrt.warnings.begin(), lrt.warnings.end());
      seplrt::report::finish(report, warnings, seconds_since(t0));
      emit(report, args.out_path);
      return 0;
    }

    if (cmd_info->parsed()) {
      json report = seplrt::report::skeleton("info");
      std::vector<std::string> warnings;
      long n = info_n, max_ts = info_max_ts;
      if (!args.data_path.empty()) {
        const seplrt::Dataset ds = seplrt::load_csv(args.data_path, csv);
        report["input"] = seplrt::report::input_digest(ds, args.data_path);
        warnings = ds.warnings;
        n = ds.n_subjects();
        max_ts = ds.max_ts();
      } else if (n <= 0 || max_ts <= 0) {
        throw CLI::ValidationError("info requires --data, or both --n and --max-ts");
      }
      json constants;
      constants["n_subjects"] = n;
      constants["max_ts"] = max_ts;
      try {
        constants["nu"] = seplrt::dof_lear(max_ts);
      } catch (const seplrt::Error& e) {
        constants["nu"] = nullptr;
        warnings.push_back(e.what());
      }
      try {
        constants["k1"] = seplrt::k1_adjust(n, max_ts);
        constants["k2"] = seplrt::k2_adjust(n, max_ts);
      } catch (const seplrt::Error& e) {
        constants["k1"] = nullptr;
        constants["k2"] = nullptr;
        warnings.push_back(e.what());
      }
      report["constants"] = constants;
      seplrt::report::finish(report, warnings, seconds_since(t0));
      emit(report, args.out_path);
      return 0;
    }

    if (cmd_sim->parsed()) {
      if (!sim_config_path.empty())
        apply_sim_config_file(sim_config_path, *cmd_sim, sim, scenario);
      if (scenario == "two_group") {
        sim.scenario = seplrt::Scenario::two_group;
        if (sim.beta.size() != 2) sim.beta = {3.5, 3.5};
      } else if (scenario == "null") {
        sim.scenario = seplrt::Scenario::null_mean;
      } else {
        throw CLI::ValidationError("--scenario must be null or two_group");
      }
      sim.keep_rep_log = true;
      const seplrt::SimResult result = seplrt::run_study(sim);
      json report = seplrt::report::skeleton("simulate");
      report["seed"] = sim.seed;
      report["simulation"] = seplrt::report::simulation_block(sim, result, rep_log);
      seplrt::report::finish(report, {}, seconds_since(t0));
      emit(report, args.out_path);
      return 0;
    }
  } catch (const CLI::Error& e) {
    emit(seplrt::report::error_block("usage", e.what()), "", true);
    return 1;
  } catch (const seplrt::Error& e) {
    emit(seplrt::report::error_block(e.kind(), e.what()), "", true);
    return exit_code_for(e);
  } catch (const std::exception& e) {
    emit(seplrt::report::error_block("internal", e.what()), "", true);
    return 1;
  }
  return 1;
}
