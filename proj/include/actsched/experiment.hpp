#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "actsched/csv.hpp"
#include "actsched/doubling.hpp"
#include "actsched/error.hpp"
#include "actsched/fractional.hpp"
#include "actsched/instance.hpp"
#include "actsched/instance_io.hpp"
#include "actsched/invariants.hpp"
#include "actsched/oracle.hpp"
#include "actsched/rounding.hpp"

namespace actsched {

inline constexpr std::uint64_t kDefaultSeed = 20240601;

enum class AlphaMode { kOracle, kFixed, kDoubling };

struct RunConfig {
  AlphaMode alpha_mode = AlphaMode::kOracle;
  // Used by kFixed.
  double alpha = 0.0;
  // Used by kDoubling; 0 selects default_initial_guess().
  double initial_guess = 0.0;
  std::uint64_t seed = kDefaultSeed;
  FractionalOptions fractional;
  double bound_constant = kDefaultBoundConstant;
  bool recover_all = false;
  InvariantChecks checks;
  std::size_t oracle_node_budget = kDefaultNodeBudget;
  // In kFixed and kDoubling modes, still solve the instance offline so the
  // report can state cost ratios. Left NaN when the oracle gives up.
  bool reference_oracle = true;
  std::string label;
};

struct ReportRow {
  std::string instance;
  std::uint64_t seed = 0;
  double B = std::nan("");
  double L = 0.0;
  double alpha = 0.0;               // guess used by the final phase
  double frac_cost = 0.0;           // scaled units, final phase
  double frac_cost_orig = 0.0;      // instance cost units, final phase
  double frac_makespan = 0.0;       // time units, final phase
  double int_cost = 0.0;
  double int_makespan = 0.0;        // time units
  double cost_ratio = std::nan("");
  double makespan_ratio = 0.0;
  std::size_t clamp_count = 0;
  std::size_t fallback_count = 0;
  std::size_t low_mass_count = 0;
  std::size_t invariant_violations = 0;
  std::size_t potential_step_exceedances = 0;
  std::size_t phases = 0;
  std::size_t steps = 0;
};

inline const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> columns = {
      "instance",       "seed",           "B",
      "L",              "alpha",          "frac_cost",
      "frac_cost_orig", "frac_makespan",  "int_cost",
      "int_makespan",   "cost_ratio",     "makespan_ratio",
      "clamp_count",    "fallback_count", "low_mass_count",
      "invariant_violations", "potential_step_exceedances", "phases",
      "steps"};
  return columns;
}

inline std::vector<std::string> report_fields(const ReportRow& r) {
  using csv::format;
  return {r.instance,          format(r.seed),          format(r.B),
          format(r.L),         format(r.alpha),         format(r.frac_cost),
          format(r.frac_cost_orig), format(r.frac_makespan), format(r.int_cost),
          format(r.int_makespan),   format(r.cost_ratio),    format(r.makespan_ratio),
          format(std::uint64_t{r.clamp_count}),    format(std::uint64_t{r.fallback_count}),
          format(std::uint64_t{r.low_mass_count}), format(std::uint64_t{r.invariant_violations}),
          format(std::uint64_t{r.potential_step_exceedances}), format(std::uint64_t{r.phases}),
          format(std::uint64_t{r.steps})};
}

struct RunResult {
  ReportRow row;
  ScheduleResult schedule;
  InvariantReport invariants;
  std::optional<OracleResult> oracle;
};

// Exact offline optimum, or nullopt when the node budget runs out.
inline std::optional<OracleResult> try_exact_oracle(const Instance& instance, std::size_t node_budget) {
  try {
    auto result = optimal(instance, node_budget);
    if (result.exact) return result;
  } catch (const InstanceTooLarge&) {
  }
  return std::nullopt;
}

// Runs one pipeline (fractional, activation, assignment for every job) and
// assembles the report row. `known_oracle` skips re-solving the instance.
inline RunResult run_experiment(const Instance& instance, const RunConfig& config,
                                const OracleResult* known_oracle = nullptr) {
  validate(instance);
  std::optional<OracleResult> oracle;
  if (known_oracle) {
    oracle = *known_oracle;
  } else if (config.alpha_mode == AlphaMode::kOracle) {
    oracle = optimal(instance, config.oracle_node_budget);
    if (!oracle->exact) throw InstanceTooLarge("oracle node budget exhausted; cost is not proven optimal");
  } else if (config.reference_oracle) {
    oracle = try_exact_oracle(instance, config.oracle_node_budget);
  }

  InvariantMonitor monitor(config.checks);
  const PhaseHooks hooks = monitor.hooks();
  std::optional<ScheduleResult> schedule;
  switch (config.alpha_mode) {
    case AlphaMode::kOracle:
      if (!oracle || !oracle->exact) throw OracleError("oracle mode needs an exact offline optimum");
      if (!(oracle->optimal_cost > 0.0)) throw InvalidInput("offline optimum is zero; nothing to scale by");
      schedule.emplace(run_fixed(instance, oracle->optimal_cost, config.seed, config.fractional, hooks));
      break;
    case AlphaMode::kFixed:
      schedule.emplace(run_fixed(instance, config.alpha, config.seed, config.fractional, hooks));
      break;
    case AlphaMode::kDoubling: {
      DoublingOptions options;
      options.bound_constant = config.bound_constant;
      options.fractional = config.fractional;
      options.recover_all = config.recover_all;
      const double guess = config.initial_guess > 0.0 ? config.initial_guess : default_initial_guess(instance);
      schedule.emplace(run_with_doubling(instance, guess, config.seed, options, hooks));
      break;
    }
  }

  RunResult result{{}, std::move(*schedule), monitor.report(), oracle};
  ReportRow& row = result.row;
  const auto& s = result.schedule;
  const double L = instance.makespan_budget;
  row.instance = config.label;
  row.seed = config.seed;
  row.L = L;
  if (oracle && oracle->exact) row.B = oracle->optimal_cost;
  row.alpha = s.phase_log.empty() ? 0.0 : s.phase_log.back().guess;
  if (!s.phases.empty()) {
    const auto& last = s.phases.back();
    row.frac_cost = last.fractional_cost();
    row.frac_cost_orig = last.fractional_cost_original();
    row.frac_makespan = last.fractional_makespan() * L;
  }
  for (const auto& phase : s.phases) {
    row.clamp_count += phase.clamps().total();
    row.steps += phase.steps_taken();
  }
  row.int_cost = s.rounding.int_cost();
  row.int_makespan = s.rounding.int_makespan() * L;
  row.cost_ratio = row.int_cost / row.B;
  row.makespan_ratio = row.int_makespan / L;
  row.fallback_count = s.rounding.counters().fallback;
  row.low_mass_count = s.rounding.counters().low_mass;
  row.invariant_violations = result.invariants.total();
  row.potential_step_exceedances = result.invariants.potential_step_exceedances;
  row.phases = s.phase_log.size();
  return result;
}

// ---------------------------------------------------------------------------
// Log files

namespace logfile {
inline constexpr const char* kInstance = "instance.json";
inline constexpr const char* kSteps = "steps.csv";
inline constexpr const char* kAssignments = "assignments.csv";
inline constexpr const char* kPhases = "phases.csv";
inline constexpr const char* kFractionalY = "fractional_y.csv";
inline constexpr const char* kFractionalMachines = "fractional_machines.csv";
inline constexpr const char* kReport = "report.csv";
}  // namespace logfile

namespace detail {

inline std::string join_indices(const std::vector<MachineIndex>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ';';
    out += std::to_string(v[k]);
  }
  return out;
}

inline std::vector<MachineIndex> parse_indices(const std::string& text) {
  std::vector<MachineIndex> out;
  if (text.empty()) return out;
  for (const auto& field : csv::split(text, ';')) out.push_back(csv::parse_uint(field));
  return out;
}

inline std::string status_name(JobStatus status) {
  switch (status) {
    case JobStatus::kComplete: return "complete";
    case JobStatus::kAbandoned: return "abandoned";
    case JobStatus::kInProgress: return "in_progress";
    case JobStatus::kPending: return "pending";
  }
  return "pending";
}

}  // namespace detail

inline void write_report(const std::filesystem::path& path, const std::vector<ReportRow>& rows) {
  csv::Writer out(path);
  out.row(report_columns());
  for (const auto& row : rows) out.row(report_fields(row));
}

// Writes every log of a run into `dir` (created if needed). Output is a
// deterministic function of the instance and the run.
inline void write_run_logs(const std::filesystem::path& dir, const Instance& instance, const RunResult& run) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  using csv::format;
  save_instance(instance, dir / logfile::kInstance);
  const auto& s = run.schedule;

  {
    csv::Writer out(dir / logfile::kSteps);
    out.row({"job", "step_idx", "type", "delta_phi", "delta_coverage", "machines_touched", "phase",
             "machines_fully_activated"});
    for (std::size_t p = 0; p < s.phases.size(); ++p) {
      for (const auto& rec : s.phases[p].step_log()) {
        out.row({format(std::uint64_t{rec.job}), format(std::uint64_t{rec.step_index}),
                 std::string(1, static_cast<char>(rec.outcome.type)), format(rec.outcome.delta_potential),
                 format(rec.outcome.delta_coverage), detail::join_indices(rec.outcome.machines_touched),
                 format(std::uint64_t{p}), detail::join_indices(rec.outcome.machines_fully_activated)});
      }
    }
  }
  {
    csv::Writer out(dir / logfile::kAssignments);
    out.row({"job", "machine", "p_ij", "newly_activated_cost", "cum_cost", "int_makespan"});
    for (const auto& a : s.rounding.log()) {
      out.row({format(std::uint64_t{a.job}), format(std::uint64_t{a.machine}), format(a.ptime),
               format(a.newly_activated_cost), format(a.cum_cost), format(a.int_makespan)});
    }
  }
  {
    csv::Writer out(dir / logfile::kPhases);
    out.row({"phase", "guess", "jobs_processed", "frac_cost", "int_cost_delta"});
    for (const auto& p : s.phase_log) {
      out.row({format(std::uint64_t{p.phase}), format(p.guess), format(std::uint64_t{p.jobs_processed}),
               format(p.frac_cost), format(p.int_cost_delta)});
    }
  }
  {
    csv::Writer out(dir / logfile::kFractionalY);
    out.row({"phase", "job", "machine", "y", "p", "status"});
    for (std::size_t p = 0; p < s.phases.size(); ++p) {
      const auto& e = s.phases[p];
      for (JobIndex j : e.job_sequence()) {
        const auto row = e.y_row(j);
        for (MachineIndex i = 0; i < e.machine_count(); ++i) {
          if (row[i] == 0.0) continue;
          out.row({format(std::uint64_t{p}), format(std::uint64_t{j}), format(std::uint64_t{i}), format(row[i]),
                   format(e.ptime(i, j)), detail::status_name(e.status(j))});
        }
      }
    }
  }
  {
    csv::Writer out(dir / logfile::kFractionalMachines);
    out.row({"phase", "machine", "scaled_cost", "discarded", "x", "fully_active", "load", "n", "a"});
    for (std::size_t p = 0; p < s.phases.size(); ++p) {
      const auto& e = s.phases[p];
      for (MachineIndex i = 0; i < e.machine_count(); ++i) {
        out.row({format(std::uint64_t{p}), format(std::uint64_t{i}), format(e.scaled_cost(i)),
                 e.discarded(i) ? "1" : "0", format(e.x(i)), e.fully_active(i) ? "1" : "0", format(e.load(i)),
                 format(std::uint64_t{e.n()}), format(e.a())});
      }
    }
  }
  write_report(dir / logfile::kReport, {run.row});
}

struct VerifyReport {
  std::size_t violations = 0;
  std::size_t potential_step_exceedances = 0;
  std::size_t jobs_checked = 0;
  std::size_t steps_checked = 0;
  std::vector<std::string> messages;

  bool ok() const noexcept { return violations == 0; }
};

// Re-checks a run from its logs alone: loads against the y log, the relaxed
// LP constraints, per-step potential increases and the integer schedule.
inline VerifyReport verify_logs(const std::filesystem::path& dir) {
  VerifyReport report;
  auto flag = [&](std::string message) {
    ++report.violations;
    if (report.messages.size() < 50) report.messages.push_back(std::move(message));
  };
  const Instance instance = load_instance(dir / logfile::kInstance);
  const std::size_t m = instance.machine_count();
  const std::size_t n = instance.job_count();
  const double L = instance.makespan_budget;

  struct MachineState {
    double scaled_cost = 0.0;
    bool discarded = false;
    double x = 0.0;
    bool fully_active = false;
    double load = 0.0;
  };
  const auto machines = csv::read(dir / logfile::kFractionalMachines);
  std::vector<std::vector<MachineState>> phases;
  std::vector<double> phase_n;
  double a = kDefaultExponentBase;
  {
    const auto c_phase = machines.column("phase"), c_machine = machines.column("machine"),
               c_cost = machines.column("scaled_cost"), c_disc = machines.column("discarded"),
               c_x = machines.column("x"), c_full = machines.column("fully_active"), c_load = machines.column("load"),
               c_n = machines.column("n"), c_a = machines.column("a");
    for (const auto& row : machines.rows) {
      const auto p = csv::parse_uint(row[c_phase]);
      const auto i = csv::parse_uint(row[c_machine]);
      if (i >= m) throw InvalidInput("machine index out of range in fractional log");
      if (p >= phases.size()) {
        phases.resize(p + 1, std::vector<MachineState>(m));
        phase_n.resize(p + 1, 1.0);
      }
      phases[p][i] = {csv::parse_double(row[c_cost]), row[c_disc] == "1", csv::parse_double(row[c_x]),
                      row[c_full] == "1", csv::parse_double(row[c_load])};
      phase_n[p] = static_cast<double>(csv::parse_uint(row[c_n]));
      a = csv::parse_double(row[c_a]);
    }
  }

  // y log: recompute loads and coverage per phase.
  const auto ylog = csv::read(dir / logfile::kFractionalY);
  std::vector<std::vector<double>> loads(phases.size(), std::vector<double>(m, 0.0));
  std::vector<std::vector<double>> coverage(phases.size(), std::vector<double>(n, 0.0));
  std::vector<std::vector<char>> complete(phases.size(), std::vector<char>(n, 0));
  {
    const auto c_phase = ylog.column("phase"), c_job = ylog.column("job"), c_machine = ylog.column("machine"),
               c_y = ylog.column("y"), c_p = ylog.column("p"), c_status = ylog.column("status");
    for (const auto& row : ylog.rows) {
      const auto p = csv::parse_uint(row[c_phase]);
      const auto j = csv::parse_uint(row[c_job]);
      const auto i = csv::parse_uint(row[c_machine]);
      if (p >= phases.size() || j >= n || i >= m) throw InvalidInput("index out of range in y log");
      const double y = csv::parse_double(row[c_y]);
      const double ptime = csv::parse_double(row[c_p]);
      if (std::abs(ptime - instance.ptime(i, j) / L) > kTolerance * std::max(1.0, ptime)) {
        flag("y log processing time for job " + std::to_string(j) + " differs from the instance");
      }
      loads[p][i] += ptime * y;
      coverage[p][j] += y;
      if (row[c_status] == "complete") complete[p][j] = 1;
      const auto& st = phases[p][i];
      if (y > 2.0 * st.x + kTolerance || y > 1.0 + kTolerance) {
        flag("y[" + std::to_string(i) + "," + std::to_string(j) + "] exceeds min(2x, 1)");
      }
      if (st.discarded && y > 0.0) flag("discarded machine " + std::to_string(i) + " received y");
    }
  }
  std::vector<std::size_t> covered_in(n, 0);
  for (std::size_t p = 0; p < phases.size(); ++p) {
    for (MachineIndex i = 0; i < m; ++i) {
      const auto& st = phases[p][i];
      if (std::abs(loads[p][i] - st.load) > kTolerance * std::max(1.0, std::abs(st.load))) {
        flag("phase " + std::to_string(p) + " machine " + std::to_string(i) + " load " + csv::format(st.load) +
             " does not match recomputed " + csv::format(loads[p][i]));
      }
      if (st.fully_active != (st.x == 1.0)) flag("fully-active flag disagrees with x on machine " + std::to_string(i));
      if (!st.discarded && !st.fully_active && st.load > 6.0 * st.x + kTolerance) {
        flag("packing violated on partially active machine " + std::to_string(i));
      }
    }
    for (JobIndex j = 0; j < n; ++j) {
      if (!complete[p][j]) continue;
      ++report.jobs_checked;
      ++covered_in[j];
      if (coverage[p][j] < 1.0 - kTolerance || coverage[p][j] > 1.0 + kTolerance) {
        flag("job " + std::to_string(j) + " coverage " + csv::format(coverage[p][j]) + " in phase " +
             std::to_string(p));
      }
    }
  }

  // Step log: progress and potential increases.
  const auto steps = csv::read(dir / logfile::kSteps);
  {
    const auto c_phase = steps.column("phase"), c_dphi = steps.column("delta_phi"),
               c_dcov = steps.column("delta_coverage"), c_full = steps.column("machines_fully_activated"),
               c_job = steps.column("job");
    const double jump = std::pow(a, 5.0) - 1.0;
    for (const auto& row : steps.rows) {
      ++report.steps_checked;
      const auto p = csv::parse_uint(row[c_phase]);
      if (p >= phases.size()) throw InvalidInput("phase out of range in step log");
      const double dphi = csv::parse_double(row[c_dphi]);
      const double two_over_n = 2.0 / phase_n[p];
      double bound = two_over_n;
      for (MachineIndex i : detail::parse_indices(row[c_full])) bound += phases[p][i].scaled_cost * jump;
      if (dphi > two_over_n + kTolerance) ++report.potential_step_exceedances;
      if (dphi > bound + kTolerance) flag("step on job " + row[c_job] + " raised the potential by " + row[c_dphi]);
      if (!(csv::parse_double(row[c_dcov]) > 0.0)) flag("step on job " + row[c_job] + " made no progress");
    }
  }

  // Integer schedule.
  const auto assignments = csv::read(dir / logfile::kAssignments);
  std::vector<double> int_load(m, 0.0);
  std::vector<char> active(m, 0);
  std::vector<std::size_t> assigned(n, 0);
  double cum_cost = 0.0;
  {
    const auto c_job = assignments.column("job"), c_machine = assignments.column("machine"),
               c_p = assignments.column("p_ij"), c_new = assignments.column("newly_activated_cost"),
               c_cum = assignments.column("cum_cost"), c_mk = assignments.column("int_makespan");
    for (const auto& row : assignments.rows) {
      const auto j = csv::parse_uint(row[c_job]);
      const auto i = csv::parse_uint(row[c_machine]);
      if (j >= n || i >= m) throw InvalidInput("index out of range in assignment log");
      ++assigned[j];
      if (csv::parse_double(row[c_p]) != instance.ptime(i, j)) flag("assignment log p_ij differs for job " + row[c_job]);
      int_load[i] += instance.ptime(i, j);
      if (!active[i]) {
        // The chosen machine must be active; cost already charged this job
        // covers it.
        active[i] = 1;
      }
      cum_cost += csv::parse_double(row[c_new]);
      const double logged_cum = csv::parse_double(row[c_cum]);
      if (std::abs(cum_cost - logged_cum) > kTolerance * std::max(1.0, logged_cum)) {
        flag("cumulative cost mismatch at job " + row[c_job]);
      }
      const double makespan = *std::max_element(int_load.begin(), int_load.end());
      if (std::abs(makespan - csv::parse_double(row[c_mk])) > kTolerance * std::max(1.0, makespan)) {
        flag("integer makespan mismatch at job " + row[c_job]);
      }
    }
  }
  double active_cost = 0.0;
  for (MachineIndex i = 0; i < m; ++i) {
    if (active[i]) active_cost += instance.cost(i);
  }
  if (active_cost > cum_cost * (1.0 + kTolerance) + kTolerance) {
    flag("machines receiving jobs cost more than the activations charged");
  }
  for (JobIndex j = 0; j < n; ++j) {
    if (assigned[j] != 1) flag("job " + std::to_string(j) + " assigned " + std::to_string(assigned[j]) + " times");
    if (covered_in[j] != 1) {
      flag("job " + std::to_string(j) + " fractionally covered in " + std::to_string(covered_in[j]) + " phases");
    }
  }

  // Report row against the logs.
  const auto report_table = csv::read(dir / logfile::kReport);
  if (report_table.rows.size() != 1) {
    flag("report.csv must hold exactly one row");
  } else {
    const auto& row = report_table.rows.front();
    const double int_cost = csv::parse_double(row[report_table.column("int_cost")]);
    if (std::abs(int_cost - cum_cost) > kTolerance * std::max(1.0, cum_cost)) flag("report int_cost disagrees with log");
    const double int_makespan = csv::parse_double(row[report_table.column("int_makespan")]);
    const double makespan = int_load.empty() ? 0.0 : *std::max_element(int_load.begin(), int_load.end());
    if (std::abs(int_makespan - makespan) > kTolerance * std::max(1.0, makespan)) {
      flag("report int_makespan disagrees with log");
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepConfig {
  GeneratorConfig generator;
  std::size_t instances = 1;
  std::uint64_t instance_seed = 1;
  std::vector<std::uint64_t> seeds;
  RunConfig run;
};

inline AlphaMode parse_alpha(const std::string& text, double& value) {
  if (text == "oracle") return AlphaMode::kOracle;
  if (text == "double" || text == "doubling") return AlphaMode::kDoubling;
  try {
    std::size_t used = 0;
    value = std::stod(text, &used);
    if (used != text.size() || !(value > 0.0)) throw InvalidInput("");
  } catch (const std::exception&) {
    throw InvalidInput("alpha must be 'oracle', 'double' or a positive number, got '" + text + "'");
  }
  return AlphaMode::kFixed;
}

// JSON sweep configuration. Keys (all optional except m and n): m, n, model,
// instances, instance_seed, seeds (count or list), alpha ("oracle", "double"
// or a number), a, C, cost_low, cost_high, L, recover_all, guess (doubling start; 0 picks the default).
inline SweepConfig sweep_config_from_json(const nlohmann::json& doc, const std::string& where = "sweep") {
  using detail::require_as;
  if (!doc.is_object()) throw FormatError(where, "expected a JSON object");
  SweepConfig config;
  try {
  config.generator.m = require_as<std::size_t>(doc, "m", where);
  config.generator.n = require_as<std::size_t>(doc, "n", where);
  config.generator.ptime_model = parse_ptime_model(doc.value("model", std::string("uniform")));
  config.generator.cost_range = {doc.value("cost_low", 1.0), doc.value("cost_high", 10.0)};
  config.generator.makespan_budget = doc.value("L", 10.0);
  config.instances = doc.value("instances", std::size_t{1});
  config.instance_seed = doc.value("instance_seed", std::uint64_t{1});
  if (auto it = doc.find("seeds"); it == doc.end()) {
    config.seeds = {kDefaultSeed};
  } else if (it->is_array()) {
    config.seeds = it->get<std::vector<std::uint64_t>>();
  } else {
    const auto count = it->get<std::size_t>();
    for (std::size_t k = 0; k < count; ++k) config.seeds.push_back(k);
  }
  if (doc.contains("alpha")) {
    const auto& alpha = doc["alpha"];
    if (alpha.is_number()) {
      config.run.alpha_mode = AlphaMode::kFixed;
      config.run.alpha = alpha.get<double>();
    } else {
      config.run.alpha_mode = parse_alpha(alpha.get<std::string>(), config.run.alpha);
    }
  }
  config.run.fractional.a = doc.value("a", kDefaultExponentBase);
  config.run.bound_constant = doc.value("C", kDefaultBoundConstant);
  config.run.recover_all = doc.value("recover_all", false);
  config.run.initial_guess = doc.value("guess", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(where, e.what());
  }
  validate(config.generator);
  if (config.instances == 0 || config.seeds.empty()) throw InvalidInput(where + ": empty sweep");
  return config;
}

inline SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string(), e.what());
  }
  return sweep_config_from_json(doc, path.string());
}

// Runs every (instance, seed) pair in order. Instances are generated from
// instance_seed + k; the oracle is solved once per instance.
inline std::vector<ReportRow> run_sweep(const SweepConfig& config) {
  std::vector<ReportRow> rows;
  rows.reserve(config.instances * config.seeds.size());
  for (std::size_t k = 0; k < config.instances; ++k) {
    GeneratorConfig gen = config.generator;
    gen.seed = config.instance_seed + k;
    const Instance instance = generate(gen);
    std::optional<OracleResult> oracle;
    if (config.run.alpha_mode == AlphaMode::kOracle) {
      oracle = optimal(instance, config.run.oracle_node_budget);
      if (!oracle->exact) throw InstanceTooLarge("oracle node budget exhausted on instance " + std::to_string(gen.seed));
    } else if (config.run.reference_oracle) {
      oracle = try_exact_oracle(instance, config.run.oracle_node_budget);
    }
    for (std::uint64_t seed : config.seeds) {
      RunConfig run = config.run;
      run.seed = seed;
      run.reference_oracle = false;
      run.label = "gen" + std::to_string(gen.seed);
      auto result = run_experiment(instance, run, oracle ? &*oracle : nullptr);
      rows.push_back(std::move(result.row));
    }
  }
  return rows;
}

struct Summary {
  double mean = 0.0;
  double max = 0.0;
  double p95 = 0.0;
};

// Nearest-rank percentile; NaN entries are ignored.
inline Summary summarize(std::vector<double> values) {
  std::erase_if(values, [](double v) { return std::isnan(v); });
  Summary s;
  if (values.empty()) return {std::nan(""), std::nan(""), std::nan("")};
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  s.max = values.back();
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(values.size())));
  s.p95 = values[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

inline void write_aggregate(const std::filesystem::path& path, const std::vector<ReportRow>& rows) {
  csv::Writer out(path);
  out.row({"metric", "runs", "mean", "max", "p95"});
  auto emit = [&](const char* name, auto getter) {
    std::vector<double> values;
    values.reserve(rows.size());
    for (const auto& r : rows) values.push_back(static_cast<double>(getter(r)));
    const Summary s = summarize(values);
    out.row({name, csv::format(std::uint64_t{rows.size()}), csv::format(s.mean), csv::format(s.max),
             csv::format(s.p95)});
  };
  emit("cost_ratio", [](const ReportRow& r) { return r.cost_ratio; });
  emit("makespan_ratio", [](const ReportRow& r) { return r.makespan_ratio; });
  emit("frac_cost", [](const ReportRow& r) { return r.frac_cost; });
  emit("frac_makespan", [](const ReportRow& r) { return r.frac_makespan; });
  emit("int_cost", [](const ReportRow& r) { return r.int_cost; });
  emit("int_makespan", [](const ReportRow& r) { return r.int_makespan; });
  emit("clamp_count", [](const ReportRow& r) { return r.clamp_count; });
  emit("fallback_count", [](const ReportRow& r) { return r.fallback_count; });
  emit("invariant_violations", [](const ReportRow& r) { return r.invariant_violations; });
  emit("potential_step_exceedances", [](const ReportRow& r) { return r.potential_step_exceedances; });
}

}  // namespace actsched
