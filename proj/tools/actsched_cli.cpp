// actsched: generate instances, solve them offline, run the online scheduler,
// verify run logs and run parameter sweeps.
//
// Exit codes: 0 ok, 2 invalid input, 3 invariant violation, 4 oracle failure.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "actsched/actsched.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitOracle = 4;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("ACTSCHED_SEED")) {
    try {
      return actsched::csv::parse_uint(env);
    } catch (const actsched::InvalidInput&) {
      std::cerr << "warning: ignoring ACTSCHED_SEED='" << env << "'\n";
    }
  }
  return actsched::kDefaultSeed;
}

// Output files may name directories that do not exist yet.
void make_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

void print_messages(const std::vector<std::string>& messages) {
  for (const auto& m : messages) std::cerr << "  " << m << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  using namespace actsched;
  CLI::App app{"Online machine activation: generator, offline oracle, scheduler and sweeps"};
  app.require_subcommand(1);

  // gen
  GeneratorConfig gen;
  gen.seed = default_seed();
  std::string gen_model = "uniform";
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a random instance");
  gen_cmd->add_option("--m", gen.m, "Number of machines")->required();
  gen_cmd->add_option("--n", gen.n, "Number of jobs")->required();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--model", gen_model, "uniform | restricted_assignment | power_law");
  gen_cmd->add_option("--cost-low", gen.cost_range.first, "Smallest startup cost");
  gen_cmd->add_option("--cost-high", gen.cost_range.second, "Largest startup cost");
  gen_cmd->add_option("--L", gen.makespan_budget, "Makespan budget");
  gen_cmd->add_option("--out", gen_out, "Output file (stdout if omitted)");

  // oracle
  std::string oracle_in;
  std::size_t oracle_budget = kDefaultNodeBudget;
  auto* oracle_cmd = app.add_subcommand("oracle", "Solve an instance offline");
  oracle_cmd->add_option("--in", oracle_in, "Instance file")->required();
  oracle_cmd->add_option("--node-budget", oracle_budget, "Branch-and-bound node budget");

  // run
  std::string run_in, run_alpha = "oracle", run_logdir;
  RunConfig run;
  run.seed = default_seed();
  auto* run_cmd = app.add_subcommand("run", "Run the online scheduler on an instance");
  run_cmd->add_option("--in", run_in, "Instance file")->required();
  run_cmd->add_option("--alpha", run_alpha, "oracle | double | <positive number>");
  run_cmd->add_option("--guess", run.initial_guess, "Initial guess for --alpha double");
  run_cmd->add_option("--seed", run.seed, "Rounding seed");
  run_cmd->add_option("--a", run.fractional.a, "Exponent base for fully active machines");
  run_cmd->add_option("--C", run.bound_constant, "Phase bound constant for --alpha double");
  run_cmd->add_flag("--recover-all", run.recover_all, "Re-cover all earlier jobs after doubling");
  run_cmd->add_option("--logdir", run_logdir, "Directory for CSV logs");

  // verify
  std::string verify_dir;
  auto* verify_cmd = app.add_subcommand("verify", "Re-check a run from its logs");
  verify_cmd->add_option("--logdir", verify_dir, "Log directory")->required();

  // sweep
  std::string sweep_config, sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep from a JSON config");
  sweep_cmd->add_option("--config", sweep_config, "Sweep configuration")->required();
  sweep_cmd->add_option("--out", sweep_out, "Per-run CSV output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*gen_cmd) {
      gen.ptime_model = parse_ptime_model(gen_model);
      const Instance instance = generate(gen);
      if (gen_out.empty()) {
        std::cout << to_json_string(instance) << '\n';
      } else {
        make_parent(gen_out);
        save_instance(instance, gen_out);
      }
      return kExitOk;
    }

    if (*oracle_cmd) {
      const Instance instance = load_instance(oracle_in);
      const OracleResult r = optimal(instance, oracle_budget);
      nlohmann::json out = {{"B", r.optimal_cost},
                            {"witness_makespan", r.witness_makespan},
                            {"nodes_explored", r.nodes_explored},
                            {"exact", r.exact},
                            {"witness", r.witness}};
      std::cout << out.dump() << '\n';
      return r.exact ? kExitOk : kExitOracle;
    }

    if (*run_cmd) {
      const Instance instance = load_instance(run_in);
      run.alpha_mode = parse_alpha(run_alpha, run.alpha);
      run.label = std::filesystem::path(run_in).stem().string();
      const RunResult result = run_experiment(instance, run);
      if (!run_logdir.empty()) write_run_logs(run_logdir, instance, result);
      const auto& row = result.row;
      nlohmann::json out = {{"B", row.B},
                            {"alpha", row.alpha},
                            {"phases", row.phases},
                            {"frac_cost", row.frac_cost},
                            {"frac_cost_orig", row.frac_cost_orig},
                            {"int_cost", row.int_cost},
                            {"int_makespan", row.int_makespan},
                            {"cost_ratio", row.cost_ratio},
                            {"makespan_ratio", row.makespan_ratio},
                            {"steps", row.steps},
                            {"clamp_count", row.clamp_count},
                            {"fallback_count", row.fallback_count},
                            {"invariant_violations", row.invariant_violations},
                            {"potential_step_exceedances", row.potential_step_exceedances}};
      if (std::isnan(row.B)) out["B"] = nullptr;
      if (std::isnan(row.cost_ratio)) out["cost_ratio"] = nullptr;
      std::cout << out.dump() << '\n';
      if (row.invariant_violations > 0) {
        std::cerr << "invariant violations: " << row.invariant_violations << '\n';
        print_messages(result.invariants.messages);
        return kExitInvariant;
      }
      return kExitOk;
    }

    if (*verify_cmd) {
      const VerifyReport report = verify_logs(verify_dir);
      std::cout << "checked " << report.jobs_checked << " jobs, " << report.steps_checked << " steps; "
                << report.violations << " violations, " << report.potential_step_exceedances
                << " steps above 2/n\n";
      if (!report.ok()) {
        print_messages(report.messages);
        return kExitInvariant;
      }
      return kExitOk;
    }

    if (*sweep_cmd) {
      const SweepConfig config = load_sweep_config(sweep_config);
      const auto rows = run_sweep(config);
      make_parent(sweep_out);
      write_report(sweep_out, rows);
      std::filesystem::path aggregate = sweep_out;
      aggregate.replace_filename(aggregate.stem().string() + "_aggregate.csv");
      write_aggregate(aggregate, rows);
      std::size_t violations = 0;
      for (const auto& r : rows) violations += r.invariant_violations;
      std::cout << rows.size() << " runs written to " << sweep_out << "; summary in " << aggregate.string() << '\n';
      if (violations > 0) {
        std::cerr << "invariant violations across sweep: " << violations << '\n';
        return kExitInvariant;
      }
      return kExitOk;
    }
  } catch (const OracleError& e) {
    std::cerr << "oracle error: " << e.what() << '\n';
    return kExitOracle;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const GuessTooSmall& e) {
    std::cerr << "guess too small: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
