#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "actsched/error.hpp"
#include "actsched/instance.hpp"

namespace actsched {

// Absolute tolerance for every fractional invariant.
inline constexpr double kTolerance = 1e-9;

// Exponential base of the load term in virtual costs and the potential.
// Must lie strictly inside (1, 13/12).
inline constexpr double kDefaultExponentBase = 1.05;

enum class StepType : char { kA = 'A', kB = 'B' };

struct StepOutcome {
  StepType type = StepType::kA;
  // Machines whose x or y changed, in virtual-cost order; the Type B pivot
  // comes last.
  std::vector<MachineIndex> machines_touched;
  // Touched machines that reached x = 1 in this step.
  std::vector<MachineIndex> machines_fully_activated;
  double delta_potential = 0.0;
  double delta_coverage = 0.0;
};

struct StepRecord {
  JobIndex job = 0;
  std::size_t step_index = 0;
  StepOutcome outcome;
};

struct FractionalOptions {
  double a = kDefaultExponentBase;
  std::size_t max_steps_per_job = 10'000'000;
  bool record_steps = true;
};

// Machines in non-decreasing virtual cost for one job (ties by id), split
// into the maximal prefix with total x strictly below 1 and the pivot that
// follows it.
struct MachineOrder {
  std::vector<MachineIndex> order;
  std::size_t prefix_size = 0;
  std::optional<MachineIndex> pivot;

  std::span<const MachineIndex> prefix() const { return {order.data(), prefix_size}; }
};

// How often a y increment was truncated, by the bound that truncated it.
struct ClampCounters {
  std::size_t fraction_bound = 0;  // y_ij <= 2 x_i
  std::size_t unit_bound = 0;      // y_ij <= 1
  std::size_t coverage = 0;        // sum_i y_ij <= 1

  std::size_t total() const noexcept { return fraction_bound + unit_bound + coverage; }
};

enum class JobStatus : char { kPending, kInProgress, kComplete, kAbandoned };

// Increase in y_ij made feasible by raising x_i from x_before by delta_x.
inline double effective_capacity(double x_before, double delta_x, double p) {
  if (delta_x <= 0.0) return 0.0;
  return std::min(2.0 * x_before, 6.0 * delta_x / p);
}

// Ranking key of a machine for a job: c p, times a^(load - 1) once the
// machine is fully active.
inline double virtual_cost(double c, double p, double load, double a, bool fully_active) {
  return fully_active ? c * std::pow(a, load - 1.0) * p : c * p;
}

inline double machine_potential(double c, double x, double load, double a, bool fully_active) {
  return fully_active ? c * std::pow(a, load - 1.0) : c * x;
}

// Length of the longest prefix of `x_in_order` whose sum stays strictly
// below 1.
inline std::size_t prefix_length(std::span<const double> x_in_order) {
  double sum = 0.0;
  std::size_t k = 0;
  while (k < x_in_order.size() && sum + x_in_order[k] < 1.0) sum += x_in_order[k++];
  return k;
}

// Online fractional solution of the relaxed scheduling LP. Processing times
// are measured in units of the makespan budget and startup costs are scaled
// so the offline optimum costs between m and 2m.
class FractionalEngine {
 public:
  // Scales costs by m / alpha, discards machines costing more than m, and
  // initialises x. Throws GuessTooSmall when every machine is discarded.
  static FractionalEngine preprocess(const Instance& instance, double alpha,
                                     FractionalOptions options = {}) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
      throw InvalidInput("alpha must be a positive finite number");
    }
    if (!(options.a > 1.0)) throw InvalidInput("exponent base a must exceed 1");
    FractionalEngine engine(instance, alpha, options);
    const double m = static_cast<double>(engine.m_);
    const double scale = m / alpha;
    std::size_t kept = 0;
    for (MachineIndex i = 0; i < engine.m_; ++i) {
      // Thresholds tested in original units; c * (m / alpha) can land a
      // hair above m when c == alpha.
      const double c = instance.cost(i) * scale;
      if (instance.cost(i) > alpha) {
        engine.discarded_[i] = 1;
        engine.scaled_cost_[i] = c;
        continue;
      }
      ++kept;
      if (instance.cost(i) * m <= alpha) {
        engine.scaled_cost_[i] = 1.0;
        engine.x_[i] = 1.0;
        engine.fully_active_[i] = 1;
      } else {
        engine.scaled_cost_[i] = std::min(c, m);
        engine.x_[i] = 1.0 / m;
      }
    }
    if (kept == 0) {
      std::ostringstream msg;
      msg << "guess " << alpha << " too small: every machine costs more than m after scaling";
      throw GuessTooSmall(msg.str());
    }
    engine.potential_ = engine.recompute_potential();
    engine.initial_potential_ = engine.potential_;
    return engine;
  }

  const Instance& instance() const noexcept { return *instance_; }
  std::size_t machine_count() const noexcept { return m_; }
  std::size_t n() const noexcept { return n_; }
  double a() const noexcept { return options_.a; }
  double alpha() const noexcept { return alpha_; }
  const FractionalOptions& options() const noexcept { return options_; }

  double scaled_cost(MachineIndex i) const { return scaled_cost_[i]; }
  bool discarded(MachineIndex i) const { return discarded_[i] != 0; }
  bool fully_active(MachineIndex i) const { return fully_active_[i] != 0; }
  double x(MachineIndex i) const { return x_[i]; }
  std::span<const double> x() const { return x_; }
  double load(MachineIndex i) const { return load_[i]; }
  std::span<const double> loads() const { return load_; }

  // Processing time in units of the makespan budget.
  double ptime(MachineIndex i, JobIndex j) const {
    return instance_->ptime(i, j) / instance_->makespan_budget;
  }

  double y(MachineIndex i, JobIndex j) const { return y_[j].empty() ? 0.0 : y_[j][i]; }
  // Row of y for job j; empty if the job was never started.
  std::span<const double> y_row(JobIndex j) const { return y_[j]; }

  JobStatus status(JobIndex j) const { return status_[j]; }
  // Jobs in the order they were started in this state.
  const std::vector<JobIndex>& job_sequence() const noexcept { return sequence_; }
  // x at the end of job j's fractional update; empty unless j completed.
  std::span<const double> x_snapshot(JobIndex j) const { return x_snapshot_[j]; }

  const std::vector<StepRecord>& step_log() const noexcept { return step_log_; }
  const ClampCounters& clamps() const noexcept { return clamps_; }
  std::size_t steps_taken() const noexcept { return steps_total_; }
  double max_step_delta_potential() const noexcept { return max_step_delta_potential_; }
  double initial_potential() const noexcept { return initial_potential_; }

  double virtual_cost(MachineIndex i, JobIndex j) const {
    return actsched::virtual_cost(scaled_cost_[i], ptime(i, j), load_[i], options_.a, fully_active_[i] != 0);
  }

  MachineOrder order_and_split(JobIndex j) const {
    MachineOrder result;
    std::vector<std::pair<double, MachineIndex>> keyed;
    keyed.reserve(m_);
    for (MachineIndex i = 0; i < m_; ++i) {
      if (!discarded_[i]) keyed.emplace_back(virtual_cost(i, j), i);
    }
    std::sort(keyed.begin(), keyed.end());
    result.order.reserve(keyed.size());
    for (const auto& entry : keyed) result.order.push_back(entry.second);

    std::vector<double> x_in_order;
    x_in_order.reserve(result.order.size());
    for (MachineIndex i : result.order) x_in_order.push_back(x_[i]);
    result.prefix_size = prefix_length(x_in_order);
    if (result.prefix_size < result.order.size()) result.pivot = result.order[result.prefix_size];
    return result;
  }

  double machine_potential(MachineIndex i) const {
    if (discarded_[i]) return 0.0;
    return actsched::machine_potential(scaled_cost_[i], x_[i], load_[i], options_.a, fully_active_[i] != 0);
  }

  double potential() const noexcept { return potential_; }

  double recompute_potential() const {
    double total = 0.0;
    for (MachineIndex i = 0; i < m_; ++i) total += machine_potential(i);
    return total;
  }

  // Sum of scaled c_i x_i over kept machines.
  double fractional_cost() const {
    double total = 0.0;
    for (MachineIndex i = 0; i < m_; ++i) {
      if (!discarded_[i]) total += scaled_cost_[i] * x_[i];
    }
    return total;
  }

  // Sum of c_i x_i in the instance's own cost units.
  double fractional_cost_original() const {
    double total = 0.0;
    for (MachineIndex i = 0; i < m_; ++i) {
      if (!discarded_[i]) total += instance_->cost(i) * x_[i];
    }
    return total;
  }

  // Maximum load, in units of the makespan budget.
  double fractional_makespan() const {
    double best = 0.0;
    for (double l : load_) best = std::max(best, l);
    return best;
  }

  double recomputed_load(MachineIndex i) const {
    double total = 0.0;
    for (JobIndex j = 0; j < y_.size(); ++j) {
      if (!y_[j].empty()) total += ptime(i, j) * y_[j][i];
    }
    return total;
  }

  double coverage(JobIndex j) const {
    double total = 0.0;
    for (double v : y_[j]) total += v;
    return total;
  }

  bool covered(JobIndex j) const { return coverage(j) >= 1.0 - kTolerance; }

  void begin_job(JobIndex j) {
    check_job(j);
    if (status_[j] != JobStatus::kPending) {
      throw Error("job " + std::to_string(j) + " was already started in this state");
    }
    status_[j] = JobStatus::kInProgress;
    y_[j].assign(m_, 0.0);
    sequence_.push_back(j);
    steps_this_job_ = 0;
  }

  // One Type A or Type B update for job j.
  StepOutcome execute_step(JobIndex j) {
    check_job(j);
    if (status_[j] != JobStatus::kInProgress) {
      throw Error("job " + std::to_string(j) + " is not in progress");
    }
    auto& yj = y_[j];
    const double coverage_before = coverage(j);
    const double nd = static_cast<double>(n_);
    const MachineOrder split = order_and_split(j);
    const bool type_b = split.pivot && fully_active_[*split.pivot];

    struct Update {
      MachineIndex machine;
      double new_x;
      double dy;
    };
    std::vector<Update> updates;
    updates.reserve(split.prefix_size + 1);

    auto raise = [&](MachineIndex i) {
      const double x_old = x_[i];
      const double x_new = std::min(x_old * (1.0 + 1.0 / (scaled_cost_[i] * nd)), 1.0);
      const double dy = effective_capacity(x_old, x_new - x_old, ptime(i, j));
      updates.push_back({i, x_new, clamp_increment(yj[i], dy, std::min(2.0 * x_new, 1.0))});
    };
    for (MachineIndex i : split.prefix()) raise(i);
    if (type_b) {
      const MachineIndex k = *split.pivot;
      const double dy = 6.0 / (virtual_cost(k, j) * nd);
      updates.push_back({k, 1.0, clamp_increment(yj[k], dy, 1.0)});
    } else if (split.pivot) {
      raise(*split.pivot);
    }

    double total = 0.0;
    for (const auto& u : updates) total += u.dy;
    const double remaining = std::max(0.0, 1.0 - coverage_before);
    if (total > remaining) {
      const double shrink = remaining / total;
      for (auto& u : updates) u.dy *= shrink;
      ++clamps_.coverage;
    }

    StepOutcome outcome;
    outcome.type = type_b ? StepType::kB : StepType::kA;
    outcome.machines_touched.reserve(updates.size());
    for (const auto& u : updates) {
      const MachineIndex i = u.machine;
      const double before = machine_potential(i);
      const bool was_full = fully_active_[i] != 0;
      x_[i] = u.new_x;
      fully_active_[i] = x_[i] == 1.0 ? 1 : 0;
      if (!was_full && fully_active_[i]) outcome.machines_fully_activated.push_back(i);
      yj[i] += u.dy;
      load_[i] += ptime(i, j) * u.dy;
      outcome.delta_potential += machine_potential(i) - before;
      outcome.delta_coverage += u.dy;
      outcome.machines_touched.push_back(i);
    }
    if (!(outcome.delta_coverage > 0.0)) {
      std::ostringstream msg;
      msg << "stalled step on job " << j << " (coverage " << coverage_before << ")";
      throw StalledStep(msg.str());
    }

    potential_ += outcome.delta_potential;
    max_step_delta_potential_ = std::max(max_step_delta_potential_, outcome.delta_potential);
    if (options_.record_steps) step_log_.push_back({j, steps_this_job_, outcome});
    ++steps_this_job_;
    ++steps_total_;
    return outcome;
  }

  void complete_job(JobIndex j) {
    check_job(j);
    status_[j] = JobStatus::kComplete;
    x_snapshot_[j] = x_;
  }

  // Marks a started job as not counted in this state (its y stays in the
  // loads).
  void abandon_job(JobIndex j) {
    check_job(j);
    if (status_[j] != JobStatus::kPending) status_[j] = JobStatus::kAbandoned;
    x_snapshot_[j].clear();
  }

  // Runs steps until job j is covered.
  std::vector<StepOutcome> process_job(JobIndex j) {
    begin_job(j);
    std::vector<StepOutcome> outcomes;
    while (!covered(j)) {
      if (steps_this_job_ >= options_.max_steps_per_job) throw step_cap_error(j);
      outcomes.push_back(execute_step(j));
    }
    complete_job(j);
    return outcomes;
  }

  std::size_t steps_this_job() const noexcept { return steps_this_job_; }

  StepCapExceeded step_cap_error(JobIndex j) const {
    std::ostringstream msg;
    msg << "job " << j << " exceeded " << options_.max_steps_per_job
        << " steps; coverage=" << coverage(j) << " x=[";
    for (MachineIndex i = 0; i < m_; ++i) msg << (i ? "," : "") << x_[i];
    msg << "] load=[";
    for (MachineIndex i = 0; i < m_; ++i) msg << (i ? "," : "") << load_[i];
    msg << "]";
    return StepCapExceeded(msg.str());
  }

 private:
  FractionalEngine(const Instance& instance, double alpha, FractionalOptions options)
      : instance_(&instance),
        options_(options),
        alpha_(alpha),
        m_(instance.machine_count()),
        n_(std::max<std::size_t>(instance.n_declared, 1)),
        scaled_cost_(m_, 0.0),
        discarded_(m_, 0),
        x_(m_, 0.0),
        fully_active_(m_, 0),
        load_(m_, 0.0),
        y_(instance.job_count()),
        status_(instance.job_count(), JobStatus::kPending),
        x_snapshot_(instance.job_count()) {}

  void check_job(JobIndex j) const {
    if (j >= instance_->job_count()) throw Error("job index " + std::to_string(j) + " out of range");
  }

  double clamp_increment(double current, double dy, double cap) {
    if (current + dy <= cap) return dy;
    if (cap >= 1.0) {
      ++clamps_.unit_bound;
    } else {
      ++clamps_.fraction_bound;
    }
    return std::max(0.0, cap - current);
  }

  const Instance* instance_;
  FractionalOptions options_;
  double alpha_;
  std::size_t m_;
  std::size_t n_;

  std::vector<double> scaled_cost_;
  std::vector<char> discarded_;
  std::vector<double> x_;
  std::vector<char> fully_active_;
  std::vector<double> load_;
  std::vector<std::vector<double>> y_;
  std::vector<JobStatus> status_;
  std::vector<std::vector<double>> x_snapshot_;
  std::vector<JobIndex> sequence_;

  double potential_ = 0.0;
  double initial_potential_ = 0.0;
  double max_step_delta_potential_ = -std::numeric_limits<double>::infinity();
  ClampCounters clamps_;
  std::vector<StepRecord> step_log_;
  std::size_t steps_this_job_ = 0;
  std::size_t steps_total_ = 0;
};

}  // namespace actsched
