#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "actsched/doubling.hpp"
#include "actsched/fractional.hpp"
#include "actsched/rounding.hpp"

namespace actsched {

struct InvariantChecks {
  bool feasibility = true;   // coverage, y <= 2x, packing on partially active machines
  bool potential = true;     // initial potential, per-step increase
  bool consistency = true;   // incremental loads and potential, fully-active flags
  bool monotonicity = true;  // x never decreases
  bool rounding = true;      // assignment to active machines, q normalisation, z <= 1
};

// Largest potential increase a single step can cause. Raising x on the
// prefix and pivot contributes at most 2/n. A machine that becomes fully
// active switches its potential from c x to c a^(l - 1); its load is at most
// 6 at that moment (packing held while it was partially active), so the
// switch adds at most c (a^5 - 1) on top.
inline double step_potential_bound(const FractionalEngine& engine, const StepOutcome& step) {
  double bound = 2.0 / static_cast<double>(engine.n());
  const double jump = std::pow(engine.a(), 5.0) - 1.0;
  for (MachineIndex i : step.machines_fully_activated) bound += engine.scaled_cost(i) * jump;
  return bound;
}

struct InvariantReport {
  std::size_t feasibility = 0;
  std::size_t potential = 0;
  std::size_t consistency = 0;
  std::size_t monotonicity = 0;
  std::size_t rounding = 0;
  // Steps whose potential increase exceeded 2/n. Reported, not counted as a
  // violation: every such step is explained by a machine becoming fully
  // active (see step_potential_bound).
  std::size_t potential_step_exceedances = 0;
  // Largest observed increase divided by 2/n.
  double max_step_ratio = 0.0;
  double max_initial_potential_ratio = 0.0;  // potential / m after pre-processing
  std::size_t steps_checked = 0;
  std::size_t jobs_checked = 0;
  std::vector<std::string> messages;

  std::size_t total() const noexcept { return feasibility + potential + consistency + monotonicity + rounding; }
};

// Re-checks the fractional and rounding invariants after every job.
class InvariantMonitor {
 public:
  explicit InvariantMonitor(InvariantChecks checks = {}) : checks_(checks) {}

  const InvariantReport& report() const noexcept { return report_; }

  PhaseHooks hooks() {
    PhaseHooks h;
    h.on_phase_start = [this](const FractionalEngine& e) { on_phase_start(e); };
    h.on_job_covered = [this](const FractionalEngine& e, JobIndex j, std::span<const double> x_before,
                              std::span<const StepOutcome> steps) { on_job_covered(e, j, x_before, steps); };
    h.on_job_abandoned = [this](const FractionalEngine& e, JobIndex j, std::span<const StepOutcome> steps) {
      check_steps(e, j, steps);
    };
    h.on_assignment = [this](const RoundingEngine& r, const JobSnapshot& s, const AssignmentRecord& a) {
      on_assignment(r, s, a);
    };
    return h;
  }

  void on_phase_start(const FractionalEngine& e) {
    const double m = static_cast<double>(e.machine_count());
    report_.max_initial_potential_ratio = std::max(report_.max_initial_potential_ratio, e.potential() / m);
    if (checks_.potential && e.potential() > m + kTolerance) {
      flag(report_.potential, "potential " + str(e.potential()) + " exceeds m after pre-processing");
    }
    if (checks_.consistency) {
      for (MachineIndex i = 0; i < e.machine_count(); ++i) {
        if (e.discarded(i)) continue;
        if (e.x(i) < 1.0 / m - kTolerance || e.x(i) > 1.0) {
          flag(report_.consistency, "x of machine " + std::to_string(i) + " outside [1/m, 1] after pre-processing");
        }
      }
      check_flags_and_potential(e);
    }
  }

  // Also called for the steps of a job dropped at a phase boundary.
  void check_steps(const FractionalEngine& e, JobIndex j, std::span<const StepOutcome> steps) {
    const double two_over_n = 2.0 / static_cast<double>(e.n());
    for (const auto& step : steps) {
      ++report_.steps_checked;
      report_.max_step_ratio = std::max(report_.max_step_ratio, step.delta_potential / two_over_n);
      if (step.delta_potential > two_over_n + kTolerance) ++report_.potential_step_exceedances;
      if (checks_.potential && step.delta_potential > step_potential_bound(e, step) + kTolerance) {
        flag(report_.potential, "step on job " + std::to_string(j) + " raised the potential by " +
                                    str(step.delta_potential));
      }
      if (checks_.feasibility && !(step.delta_coverage > 0.0)) {
        flag(report_.feasibility, "step on job " + std::to_string(j) + " made no progress");
      }
    }
  }

  void on_job_covered(const FractionalEngine& e, JobIndex j, std::span<const double> x_before,
                      std::span<const StepOutcome> steps) {
    ++report_.jobs_checked;
    const std::size_t m = e.machine_count();
    if (checks_.feasibility) {
      const double cov = e.coverage(j);
      if (cov < 1.0 - kTolerance || cov > 1.0 + kTolerance) {
        flag(report_.feasibility, "job " + std::to_string(j) + " coverage " + str(cov));
      }
      for (JobIndex k : e.job_sequence()) {
        const auto row = e.y_row(k);
        for (MachineIndex i = 0; i < m; ++i) {
          if (row[i] > 2.0 * e.x(i) + kTolerance || row[i] > 1.0 + kTolerance) {
            flag(report_.feasibility, "y[" + std::to_string(i) + "," + std::to_string(k) + "]=" + str(row[i]) +
                                          " exceeds min(2x, 1)");
          }
        }
      }
      for (MachineIndex i = 0; i < m; ++i) {
        if (!e.discarded(i) && !e.fully_active(i) && e.load(i) > 6.0 * e.x(i) + kTolerance) {
          flag(report_.feasibility, "packing violated on partially active machine " + std::to_string(i));
        }
      }
    }
    check_steps(e, j, steps);
    if (checks_.consistency) {
      for (MachineIndex i = 0; i < m; ++i) {
        const double recomputed = e.recomputed_load(i);
        if (std::abs(recomputed - e.load(i)) > kTolerance * std::max(1.0, std::abs(recomputed))) {
          flag(report_.consistency, "load of machine " + std::to_string(i) + " drifted from its recomputation");
        }
      }
      check_flags_and_potential(e);
    }
    if (checks_.monotonicity) {
      for (MachineIndex i = 0; i < m; ++i) {
        if (e.x(i) < x_before[i]) flag(report_.monotonicity, "x of machine " + std::to_string(i) + " decreased");
      }
    }
  }

  void on_assignment(const RoundingEngine& r, const JobSnapshot& s, const AssignmentRecord& a) {
    if (!checks_.rounding) return;
    if (!r.active(a.machine)) {
      flag(report_.rounding, "job " + std::to_string(a.job) + " assigned to an inactive machine");
    }
    if (!a.fallback) {
      double total = 0.0;
      for (double q : r.assignment_probabilities(s)) total += q;
      if (std::abs(total - 1.0) > kTolerance) flag(report_.rounding, "q does not sum to 1 for job " + std::to_string(a.job));
    }
    if (r.counters().z_bound_violations != z_violations_seen_) {
      z_violations_seen_ = r.counters().z_bound_violations;
      flag(report_.rounding, "z above 1 in the small-x branch for job " + std::to_string(a.job));
    }
  }

 private:
  void check_flags_and_potential(const FractionalEngine& e) {
    for (MachineIndex i = 0; i < e.machine_count(); ++i) {
      if (e.fully_active(i) != (e.x(i) == 1.0)) {
        flag(report_.consistency, "fully-active flag of machine " + std::to_string(i) + " disagrees with x");
      }
    }
    const double recomputed = e.recompute_potential();
    if (std::abs(recomputed - e.potential()) > kTolerance * std::max(1.0, std::abs(recomputed))) {
      flag(report_.consistency, "incremental potential drifted from its recomputation");
    }
  }

  void flag(std::size_t& counter, std::string message) {
    ++counter;
    if (report_.messages.size() < kMaxMessages) report_.messages.push_back(std::move(message));
  }

  static std::string str(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
  }

  static constexpr std::size_t kMaxMessages = 20;
  InvariantChecks checks_;
  InvariantReport report_;
  std::size_t z_violations_seen_ = 0;
};

}  // namespace actsched
