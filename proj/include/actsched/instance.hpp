#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "actsched/error.hpp"
#include "actsched/random.hpp"

namespace actsched {

using MachineIndex = std::size_t;
using JobIndex = std::size_t;

// Processing time on a machine that cannot run the job, as a multiple of the
// makespan budget. A finite value keeps every p_ij > 0 and all arithmetic
// total.
inline constexpr double kUnavailableFactor = 1e6;

struct Machine {
  MachineIndex id = 0;
  double startup_cost = 1.0;

  friend bool operator==(const Machine&, const Machine&) = default;
};

struct Job {
  JobIndex id = 0;
  // One entry per machine, in machine order.
  std::vector<double> processing_times;

  friend bool operator==(const Job&, const Job&) = default;
};

struct Instance {
  std::vector<Machine> machines;
  // Online arrival order.
  std::vector<Job> jobs;
  double makespan_budget = 1.0;
  std::size_t n_declared = 0;

  std::size_t machine_count() const noexcept { return machines.size(); }
  std::size_t job_count() const noexcept { return jobs.size(); }

  double cost(MachineIndex i) const { return machines[i].startup_cost; }
  double ptime(MachineIndex i, JobIndex j) const { return jobs[j].processing_times[i]; }

  double unavailable_ptime() const noexcept { return kUnavailableFactor * makespan_budget; }

  double total_cost() const {
    double total = 0.0;
    for (const auto& machine : machines) total += machine.startup_cost;
    return total;
  }

  friend bool operator==(const Instance&, const Instance&) = default;
};

// Throws InvalidInput describing the first broken invariant.
inline void validate(const Instance& instance) {
  const std::size_t m = instance.machines.size();
  if (m == 0) throw InvalidInput("instance has no machines");
  if (!(instance.makespan_budget > 0.0) || !std::isfinite(instance.makespan_budget)) {
    throw InvalidInput("makespan budget L must be a positive finite number");
  }
  for (std::size_t i = 0; i < m; ++i) {
    const auto& machine = instance.machines[i];
    if (machine.id != i) {
      throw InvalidInput("machine ids must be contiguous from 0; found id " +
                         std::to_string(machine.id) + " at position " + std::to_string(i));
    }
    if (!(machine.startup_cost > 0.0) || !std::isfinite(machine.startup_cost)) {
      throw InvalidInput("machine " + std::to_string(i) + " has non-positive startup cost");
    }
  }
  for (std::size_t j = 0; j < instance.jobs.size(); ++j) {
    const auto& job = instance.jobs[j];
    if (job.id != j) {
      throw InvalidInput("job ids must follow arrival order; found id " + std::to_string(job.id) +
                         " at position " + std::to_string(j));
    }
    if (job.processing_times.size() != m) {
      throw InvalidInput("job " + std::to_string(j) + " has " +
                         std::to_string(job.processing_times.size()) +
                         " processing times, expected " + std::to_string(m));
    }
    for (double p : job.processing_times) {
      if (!(p > 0.0) || !std::isfinite(p)) {
        throw InvalidInput("job " + std::to_string(j) + " has a non-positive processing time");
      }
    }
  }
  if (instance.n_declared < instance.jobs.size()) {
    throw InvalidInput("declared job count n=" + std::to_string(instance.n_declared) +
                       " is smaller than the number of jobs in the trace");
  }
}

// True when every job fits on at least one machine within the budget.
inline bool every_job_fits_somewhere(const Instance& instance) {
  return std::all_of(instance.jobs.begin(), instance.jobs.end(), [&](const Job& job) {
    return std::any_of(job.processing_times.begin(), job.processing_times.end(),
                       [&](double p) { return p <= instance.makespan_budget; });
  });
}

enum class PtimeModel { kUniform, kRestrictedAssignment, kPowerLaw };

inline std::string_view to_string(PtimeModel model) {
  switch (model) {
    case PtimeModel::kUniform: return "uniform";
    case PtimeModel::kRestrictedAssignment: return "restricted_assignment";
    case PtimeModel::kPowerLaw: return "power_law";
  }
  return "uniform";
}

inline PtimeModel parse_ptime_model(std::string_view name) {
  if (name == "uniform") return PtimeModel::kUniform;
  if (name == "restricted_assignment" || name == "restricted") {
    return PtimeModel::kRestrictedAssignment;
  }
  if (name == "power_law" || name == "power-law") return PtimeModel::kPowerLaw;
  throw InvalidInput("unknown processing-time model '" + std::string(name) + "'");
}

struct GeneratorConfig {
  std::size_t m = 4;
  std::size_t n = 8;
  std::uint64_t seed = 0;
  std::pair<double, double> cost_range{1.0, 10.0};
  PtimeModel ptime_model = PtimeModel::kUniform;
  double makespan_budget = 10.0;
};

inline void validate(const GeneratorConfig& config) {
  if (config.m < 1 || config.n < 1) throw InvalidInput("generator needs m >= 1 and n >= 1");
  const auto [low, high] = config.cost_range;
  if (!(low > 0.0) || !(low <= high)) {
    throw InvalidInput("cost range must satisfy 0 < low <= high");
  }
  if (!(config.makespan_budget > 0.0)) throw InvalidInput("makespan budget must be positive");
}

// Seeded instance generator. A pure function of the config: the same config
// always yields the same instance, bit for bit.
//
// Feasibility is planted: every job gets a home machine up front, and its
// processing time there is drawn from [0.05, 1] L divided by the number of
// jobs sharing that home, so scheduling every job at home meets the budget.
// Other entries follow the chosen model.
inline Instance generate(const GeneratorConfig& config) {
  validate(config);
  Rng rng = make_stream(config.seed, Stream::kGenerator);
  const double budget = config.makespan_budget;
  const double sentinel = kUnavailableFactor * budget;
  constexpr double kMinFraction = 0.05;

  Instance instance;
  instance.makespan_budget = budget;
  instance.n_declared = config.n;
  instance.machines.reserve(config.m);
  for (std::size_t i = 0; i < config.m; ++i) {
    instance.machines.push_back({i, uniform(rng, config.cost_range.first, config.cost_range.second)});
  }

  std::vector<MachineIndex> home(config.n);
  std::vector<std::size_t> sharing(config.m, 0);
  for (auto& h : home) ++sharing[h = uniform_index(rng, config.m)];

  instance.jobs.reserve(config.n);
  for (std::size_t j = 0; j < config.n; ++j) {
    Job job{j, std::vector<double>(config.m)};
    auto& p = job.processing_times;
    switch (config.ptime_model) {
      case PtimeModel::kUniform:
        for (auto& v : p) v = budget * uniform(rng, kMinFraction, 1.0);
        break;
      case PtimeModel::kRestrictedAssignment:
        for (auto& v : p) {
          const bool allowed = uniform01(rng) < 0.5;
          const double draw = budget * uniform(rng, kMinFraction, 1.0);
          v = allowed ? draw : sentinel;
        }
        break;
      case PtimeModel::kPowerLaw: {
        // Pareto tail with shape 1.5 and scale 0.05 L.
        constexpr double kShape = 1.5;
        for (auto& v : p) {
          const double u = uniform01(rng);
          v = std::min(sentinel, budget * kMinFraction * std::pow(1.0 - u, -1.0 / kShape));
        }
        break;
      }
    }
    const MachineIndex h = home[j];
    p[h] = budget * uniform(rng, kMinFraction, 1.0) / static_cast<double>(sharing[h]);
    instance.jobs.push_back(std::move(job));
  }
  return instance;
}

}  // namespace actsched
