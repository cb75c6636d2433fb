#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "actsched/error.hpp"
#include "actsched/fractional.hpp"
#include "actsched/instance.hpp"
#include "actsched/rounding.hpp"

namespace actsched {

inline constexpr double kDefaultBoundConstant = 50.0;

struct DoublingOptions {
  // Threshold multiplier C of the per-phase bound C m (1 + ln m).
  double bound_constant = kDefaultBoundConstant;
  FractionalOptions fractional;
  // On a new phase, re-cover every job completed so far instead of only the
  // job that triggered the doubling.
  bool recover_all = false;
};

struct PhaseRecord {
  std::size_t phase = 0;
  double guess = 0.0;
  std::size_t jobs_processed = 0;
  double frac_cost = 0.0;
  double int_cost_delta = 0.0;
};

// Optional observers, called synchronously from the online loop.
struct PhaseHooks {
  std::function<void(const FractionalEngine&)> on_phase_start;
  // After job j is covered in the current phase. `x_before` is x when the
  // job arrived; `steps` are the job's steps in order.
  std::function<void(const FractionalEngine&, JobIndex j, std::span<const double> x_before,
                     std::span<const StepOutcome> steps)>
      on_job_covered;
  // Job j crossed the phase bound and was dropped; `steps` ran before that.
  std::function<void(const FractionalEngine&, JobIndex j, std::span<const StepOutcome> steps)> on_job_abandoned;
  std::function<void(const RoundingEngine&, const JobSnapshot&, const AssignmentRecord&)> on_assignment;
};

struct ScheduleResult {
  // Fractional state of every phase that got past pre-processing.
  std::vector<FractionalEngine> phases;
  std::vector<PhaseRecord> phase_log;
  RoundingEngine rounding;
};

// Cheapest machine that can take a job within the budget, minimised over
// jobs. A lower bound on the offline optimum.
inline double default_initial_guess(const Instance& instance) {
  double guess = std::numeric_limits<double>::infinity();
  for (JobIndex j = 0; j < instance.job_count(); ++j) {
    for (MachineIndex i = 0; i < instance.machine_count(); ++i) {
      if (instance.ptime(i, j) <= instance.makespan_budget) guess = std::min(guess, instance.cost(i));
    }
  }
  if (!std::isfinite(guess)) {
    for (const auto& machine : instance.machines) guess = std::min(guess, machine.startup_cost);
  }
  return guess;
}

inline double phase_cost_bound(std::size_t m, double bound_constant) {
  const double md = static_cast<double>(m);
  return bound_constant * md * (1.0 + std::log(md));
}

namespace detail {

inline ScheduleResult run_phases(const Instance& instance, double initial_guess, std::uint64_t seed,
                                 const DoublingOptions& options, const PhaseHooks& hooks, bool doubling) {
  if (!(initial_guess > 0.0) || !std::isfinite(initial_guess)) {
    throw InvalidInput("guess of the offline optimum must be a positive finite number");
  }
  validate(instance);
  ScheduleResult result{{}, {}, RoundingEngine(instance, seed)};
  RoundingEngine& rounding = result.rounding;
  const std::size_t n = instance.job_count();
  const double bound = doubling ? phase_cost_bound(instance.machine_count(), options.bound_constant)
                                : std::numeric_limits<double>::infinity();
  const double total_cost = instance.total_cost();

  if (doubling && n == 0) {
    result.phase_log.push_back({0, initial_guess, 0, 0.0, 0.0});
    return result;
  }

  double guess = initial_guess;
  JobIndex next = 0;
  std::vector<JobIndex> completed;
  std::vector<StepOutcome> steps;
  for (std::size_t phase = 0;; ++phase) {
    if (phase > 0 && guess > total_cost) {
      std::ostringstream msg;
      msg << "guess " << guess << " exceeds the total machine cost " << total_cost
          << "; bound constant C=" << options.bound_constant << " is too small for this instance";
      throw DoublingAborted(msg.str());
    }
    const double cost_at_start = rounding.int_cost();
    PhaseRecord record{phase, guess, 0, 0.0, 0.0};

    std::optional<FractionalEngine> maybe_engine;
    try {
      maybe_engine.emplace(FractionalEngine::preprocess(instance, guess, options.fractional));
    } catch (const GuessTooSmall&) {
      if (!doubling) throw;
      result.phase_log.push_back(record);
      guess *= 2.0;
      continue;
    }
    FractionalEngine& engine = *maybe_engine;
    if (hooks.on_phase_start) hooks.on_phase_start(engine);

    // Covers job j in this phase; false if the phase bound was crossed.
    auto cover = [&](JobIndex j) {
      const std::vector<double> x_before(engine.x().begin(), engine.x().end());
      steps.clear();
      engine.begin_job(j);
      while (!engine.covered(j)) {
        if (engine.steps_this_job() >= options.fractional.max_steps_per_job) throw engine.step_cap_error(j);
        steps.push_back(engine.execute_step(j));
        if (engine.potential() > bound) {
          engine.abandon_job(j);
          if (hooks.on_job_abandoned) hooks.on_job_abandoned(engine, j, steps);
          return false;
        }
      }
      engine.complete_job(j);
      if (engine.fractional_cost() > bound) {
        engine.abandon_job(j);
        if (hooks.on_job_abandoned) hooks.on_job_abandoned(engine, j, steps);
        return false;
      }
      if (hooks.on_job_covered) hooks.on_job_covered(engine, j, x_before, steps);
      return true;
    };

    bool triggered = false;
    if (options.recover_all) {
      for (JobIndex j : completed) {
        if (!cover(j)) {
          triggered = true;
          break;
        }
        ++record.jobs_processed;
      }
    }
    while (!triggered && next < n) {
      if (!cover(next)) {
        triggered = true;
        break;
      }
      const JobSnapshot snap = snapshot(engine, next);
      const AssignmentRecord assigned = rounding.round(snap);
      if (hooks.on_assignment) hooks.on_assignment(rounding, snap, assigned);
      completed.push_back(next);
      ++record.jobs_processed;
      ++next;
    }

    if (triggered && options.recover_all) {
      for (JobIndex j : engine.job_sequence()) engine.abandon_job(j);
      record.jobs_processed = 0;
    }
    record.frac_cost = engine.fractional_cost();
    record.int_cost_delta = rounding.int_cost() - cost_at_start;
    result.phase_log.push_back(record);
    result.phases.push_back(std::move(engine));
    if (!triggered) break;
    guess *= 2.0;
  }
  return result;
}

}  // namespace detail

// One phase with a fixed estimate alpha of the offline optimum: fractional
// step, activation step and assignment step for every job in arrival order.
// Throws GuessTooSmall if pre-processing discards every machine.
inline ScheduleResult run_fixed(const Instance& instance, double alpha, std::uint64_t seed,
                                const FractionalOptions& options = {}, const PhaseHooks& hooks = {}) {
  DoublingOptions wrapped;
  wrapped.fractional = options;
  return detail::run_phases(instance, alpha, seed, wrapped, hooks, false);
}

// Guess-and-double wrapper. A phase ends when pre-processing discards every
// machine, when the potential exceeds C m (1 + ln m) during a job, or when
// the fractional cost exceeds it after a job; the guess then doubles and a
// fresh fractional state starts with the job in flight. Integer activations
// and assignments persist across phases.
inline ScheduleResult run_with_doubling(const Instance& instance, double initial_guess, std::uint64_t seed,
                                        const DoublingOptions& options = {}, const PhaseHooks& hooks = {}) {
  return detail::run_phases(instance, initial_guess, seed, options, hooks, true);
}

}  // namespace actsched
