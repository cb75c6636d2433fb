#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "actsched/error.hpp"
#include "actsched/fractional.hpp"
#include "actsched/instance.hpp"
#include "actsched/random.hpp"

namespace actsched {

// What the rounding needs from the fractional solution once job j's update
// has finished: x_i(j), y_ij and which machines the phase kept.
struct JobSnapshot {
  JobIndex job = 0;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<char> eligible;
};

inline JobSnapshot snapshot(const FractionalEngine& engine, JobIndex j) {
  JobSnapshot s;
  s.job = j;
  const auto x = engine.x_snapshot(j);
  if (x.empty()) throw Error("job " + std::to_string(j) + " has no completed fractional update");
  s.x.assign(x.begin(), x.end());
  const auto y = engine.y_row(j);
  s.y.assign(y.begin(), y.end());
  s.eligible.resize(engine.machine_count());
  for (MachineIndex i = 0; i < engine.machine_count(); ++i) s.eligible[i] = !engine.discarded(i);
  return s;
}

// Activation rule: machine i opens once its threshold r_i is at most
// 5 x_i(j) ln(mn).
inline bool crosses_threshold(double r, double x, double log_mn) { return r <= 5.0 * x * log_mn; }

struct AssignmentRecord {
  JobIndex job = 0;
  MachineIndex machine = 0;
  double ptime = 0.0;  // original units
  double newly_activated_cost = 0.0;
  double cum_cost = 0.0;
  double int_makespan = 0.0;  // original units
  double active_z_mass = 0.0;
  bool fallback = false;
};

struct RoundingCounters {
  // Jobs whose active machines carried no z mass; handled by force-activation.
  std::size_t fallback = 0;
  // Jobs whose active z mass was below 1 (the sampler may exceed z_ij).
  std::size_t low_mass = 0;
  // First-branch z values above 1, which the fractional constraints forbid.
  std::size_t z_bound_violations = 0;
};

// Online randomized rounding of the fractional solution into an integer
// schedule. Thresholds and assignment draws come from two streams derived
// from the master seed.
class RoundingEngine {
 public:
  RoundingEngine(const Instance& instance, std::uint64_t seed)
      : instance_(&instance),
        seed_(seed),
        thresholds_(draw_thresholds(instance.machine_count(), seed)),
        sampler_(make_stream(seed, Stream::kAssignment)),
        active_(instance.machine_count(), 0),
        int_load_(instance.machine_count(), 0.0),
        assignment_(instance.job_count()),
        x_snapshot_(instance.job_count()) {
    const double mn = static_cast<double>(instance.machine_count()) *
                      static_cast<double>(std::max<std::size_t>(instance.n_declared, 1));
    log_mn_ = std::log(mn);
  }

  static std::vector<double> draw_thresholds(std::size_t m, std::uint64_t seed) {
    Rng rng = make_stream(seed, Stream::kThresholds);
    std::vector<double> r(m);
    for (auto& v : r) v = uniform01(rng);
    return r;
  }

  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<double>& thresholds() const noexcept { return thresholds_; }
  double log_mn() const noexcept { return log_mn_; }
  // Below this x_i(j), z_ij = y_ij / (2 x_i(j)); at or above it, z_ij = y_ij.
  double z_threshold() const noexcept {
    return log_mn_ > 0.0 ? 1.0 / (5.0 * log_mn_) : std::numeric_limits<double>::infinity();
  }

  bool active(MachineIndex i) const { return active_[i] != 0; }
  std::size_t active_count() const {
    std::size_t count = 0;
    for (char a : active_) count += a != 0;
    return count;
  }
  double int_cost() const noexcept { return int_cost_; }
  // Loads in units of the makespan budget.
  double int_load(MachineIndex i) const { return int_load_[i]; }
  double int_makespan() const {
    double best = 0.0;
    for (double l : int_load_) best = std::max(best, l);
    return best;
  }
  std::optional<MachineIndex> assignment(JobIndex j) const { return assignment_[j]; }
  std::span<const double> x_snapshot(JobIndex j) const { return x_snapshot_[j]; }
  const std::vector<AssignmentRecord>& log() const noexcept { return log_; }
  const RoundingCounters& counters() const noexcept { return counters_; }

  double z_value(double y, double x) const {
    if (y <= 0.0) return 0.0;
    return x < z_threshold() ? y / (2.0 * x) : y;
  }

  std::vector<MachineIndex> activation_step(const JobSnapshot& s) {
    x_snapshot_[s.job] = s.x;
    std::vector<MachineIndex> opened;
    for (MachineIndex i = 0; i < active_.size(); ++i) {
      if (active_[i] || !s.eligible[i]) continue;
      if (crosses_threshold(thresholds_[i], s.x[i], log_mn_)) {
        activate(i);
        opened.push_back(i);
      }
    }
    return opened;
  }

  // q_ij over the active machines; all zero when they carry no z mass.
  std::vector<double> assignment_probabilities(const JobSnapshot& s) const {
    std::vector<double> q(active_.size(), 0.0);
    double total = 0.0;
    for (MachineIndex i = 0; i < active_.size(); ++i) {
      if (active_[i]) total += q[i] = z_value(s.y[i], s.x[i]);
    }
    if (total > 0.0) {
      for (auto& v : q) v /= total;
    }
    return q;
  }

  AssignmentRecord assignment_step(const JobSnapshot& s) {
    const JobIndex j = s.job;
    const std::size_t m = active_.size();
    std::vector<double> z(m, 0.0);
    double mass = 0.0;
    for (MachineIndex i = 0; i < m; ++i) {
      z[i] = z_value(s.y[i], s.x[i]);
      if (s.x[i] < z_threshold() && z[i] > 1.0 + kTolerance) ++counters_.z_bound_violations;
      if (active_[i]) mass += z[i];
    }

    AssignmentRecord record;
    record.job = j;
    record.active_z_mass = mass;
    const double cost_before = int_cost_;
    if (mass < 1.0 - kTolerance) ++counters_.low_mass;

    MachineIndex chosen = 0;
    if (mass > 0.0) {
      const double u = uniform01(sampler_) * mass;
      double cumulative = 0.0;
      std::optional<MachineIndex> last_positive;
      std::optional<MachineIndex> pick;
      for (MachineIndex i = 0; i < m; ++i) {
        if (!active_[i] || z[i] <= 0.0) continue;
        last_positive = i;
        cumulative += z[i];
        if (u < cumulative) {
          pick = i;
          break;
        }
      }
      chosen = pick ? *pick : *last_positive;
    } else {
      ++counters_.fallback;
      record.fallback = true;
      chosen = fallback_machine(s, z);
      activate(chosen);
    }

    assignment_[j] = chosen;
    int_load_[chosen] += instance_->ptime(chosen, j) / instance_->makespan_budget;
    record.machine = chosen;
    record.ptime = instance_->ptime(chosen, j);
    record.newly_activated_cost = int_cost_ - cost_before;
    record.cum_cost = int_cost_;
    record.int_makespan = int_makespan() * instance_->makespan_budget;
    return record;
  }

  // Activation followed by assignment for one completed fractional update.
  AssignmentRecord round(const JobSnapshot& s) {
    const double cost_before = int_cost_;
    activation_step(s);
    AssignmentRecord record = assignment_step(s);
    record.newly_activated_cost = int_cost_ - cost_before;
    log_.push_back(record);
    return record;
  }

  // Fractional step, activation step and assignment step for job j.
  AssignmentRecord process_job(FractionalEngine& engine, JobIndex j) {
    engine.process_job(j);
    return round(snapshot(engine, j));
  }

 private:
  void activate(MachineIndex i) {
    if (active_[i]) return;
    active_[i] = 1;
    int_cost_ += instance_->cost(i);
  }

  // Largest z (ties to the lowest id); with no z mass anywhere, the kept
  // machine minimising c_i p_ij.
  MachineIndex fallback_machine(const JobSnapshot& s, const std::vector<double>& z) const {
    MachineIndex best = 0;
    for (MachineIndex i = 1; i < z.size(); ++i) {
      if (z[i] > z[best]) best = i;
    }
    if (z[best] > 0.0) return best;
    best = 0;
    double best_key = std::numeric_limits<double>::infinity();
    for (MachineIndex i = 0; i < z.size(); ++i) {
      if (!s.eligible[i]) continue;
      const double key = instance_->cost(i) * instance_->ptime(i, s.job);
      if (key < best_key) {
        best_key = key;
        best = i;
      }
    }
    return best;
  }

  const Instance* instance_;
  std::uint64_t seed_;
  std::vector<double> thresholds_;
  Rng sampler_;
  std::vector<char> active_;
  std::vector<double> int_load_;
  std::vector<std::optional<MachineIndex>> assignment_;
  std::vector<std::vector<double>> x_snapshot_;
  std::vector<AssignmentRecord> log_;
  RoundingCounters counters_;
  double int_cost_ = 0.0;
  double log_mn_ = 0.0;
};

}  // namespace actsched
