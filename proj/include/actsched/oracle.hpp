#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "actsched/error.hpp"
#include "actsched/instance.hpp"

namespace actsched {

struct OracleResult {
  double optimal_cost = 0.0;
  // Machine for every job, in arrival order.
  std::vector<MachineIndex> witness;
  double witness_makespan = 0.0;
  std::size_t nodes_explored = 0;
  // False when the node budget ran out and `optimal_cost` is only the best
  // incumbent found.
  bool exact = true;
};

// Relative slack on the budget so that sums accumulated in different orders
// agree on feasibility.
inline constexpr double kBudgetSlack = 1e-12;

inline bool fits_budget(double load, double budget) { return load <= budget * (1.0 + kBudgetSlack); }

inline std::vector<double> machine_loads(const Instance& instance, std::span<const MachineIndex> assignment) {
  std::vector<double> loads(instance.machine_count(), 0.0);
  for (JobIndex j = 0; j < assignment.size(); ++j) loads[assignment[j]] += instance.ptime(assignment[j], j);
  return loads;
}

inline bool feasible(const Instance& instance, std::span<const MachineIndex> assignment) {
  if (assignment.size() != instance.job_count()) throw InvalidInput("assignment must cover every job");
  for (double load : machine_loads(instance, assignment)) {
    if (!fits_budget(load, instance.makespan_budget)) return false;
  }
  return true;
}

// Startup cost of the machines that receive at least one job, summed in
// machine order.
inline double activation_cost(const Instance& instance, std::span<const MachineIndex> assignment) {
  std::vector<char> used(instance.machine_count(), 0);
  for (MachineIndex i : assignment) used[i] = 1;
  double total = 0.0;
  for (MachineIndex i = 0; i < used.size(); ++i) {
    if (used[i]) total += instance.cost(i);
  }
  return total;
}

inline double makespan(const Instance& instance, std::span<const MachineIndex> assignment) {
  const auto loads = machine_loads(instance, assignment);
  return loads.empty() ? 0.0 : *std::max_element(loads.begin(), loads.end());
}

inline constexpr std::uint64_t kExhaustiveLimit = 10'000'000;
inline constexpr std::size_t kDefaultNodeBudget = 10'000'000;

// True when m^n <= kExhaustiveLimit.
inline bool exhaustive_admissible(std::size_t m, std::size_t n) {
  std::uint64_t count = 1;
  for (std::size_t j = 0; j < n; ++j) {
    count *= m;
    if (count > kExhaustiveLimit) return false;
  }
  return true;
}

// Ground truth by enumerating all m^n assignments. Ties go to the
// lexicographically smallest assignment.
inline OracleResult optimal_exhaustive(const Instance& instance) {
  const std::size_t m = instance.machine_count();
  const std::size_t n = instance.job_count();
  if (!exhaustive_admissible(m, n)) {
    throw InstanceTooLarge("exhaustive search needs m^n <= " + std::to_string(kExhaustiveLimit));
  }

  OracleResult result;
  result.optimal_cost = std::numeric_limits<double>::infinity();
  std::vector<MachineIndex> current(n, 0);
  std::vector<double> loads(m, 0.0);
  const double budget = instance.makespan_budget;
  bool found = false;

  auto visit = [&](auto&& self, JobIndex j) -> void {
    if (j == n) {
      ++result.nodes_explored;
      for (double load : loads) {
        if (!fits_budget(load, budget)) return;
      }
      const double cost = activation_cost(instance, current);
      if (!found || cost < result.optimal_cost) {
        found = true;
        result.optimal_cost = cost;
        result.witness = current;
      }
      return;
    }
    for (MachineIndex i = 0; i < m; ++i) {
      current[j] = i;
      loads[i] += instance.ptime(i, j);
      self(self, j + 1);
      loads[i] -= instance.ptime(i, j);
    }
  };
  visit(visit, 0);

  if (!found) throw InfeasibleInstance("no assignment meets the makespan budget");
  result.witness_makespan = makespan(instance, result.witness);
  return result;
}

// Depth-first branch and bound. The bound adds to the cost of the machines
// already opened the largest, over the remaining jobs that fit on no opened
// machine, of the cheapest machine that could still take that job; at least
// one more machine must be opened, so the bound never overestimates.
inline OracleResult optimal_bnb(const Instance& instance, std::size_t node_budget = kDefaultNodeBudget) {
  const std::size_t m = instance.machine_count();
  const std::size_t n = instance.job_count();
  const double budget = instance.makespan_budget;

  std::vector<std::size_t> fit_count(n, 0);
  std::vector<double> cheapest_fit(n, std::numeric_limits<double>::infinity());
  std::vector<double> smallest_p(n, std::numeric_limits<double>::infinity());
  for (JobIndex j = 0; j < n; ++j) {
    for (MachineIndex i = 0; i < m; ++i) {
      const double p = instance.ptime(i, j);
      smallest_p[j] = std::min(smallest_p[j], p);
      if (fits_budget(p, budget)) {
        ++fit_count[j];
        cheapest_fit[j] = std::min(cheapest_fit[j], instance.cost(i));
      }
    }
    if (fit_count[j] == 0) {
      throw InfeasibleInstance("job " + std::to_string(j) + " fits on no machine within the budget");
    }
  }

  // Most constrained jobs first, then the largest.
  std::vector<JobIndex> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](JobIndex a, JobIndex b) {
    if (fit_count[a] != fit_count[b]) return fit_count[a] < fit_count[b];
    return smallest_p[a] > smallest_p[b];
  });

  std::vector<MachineIndex> by_cost(m);
  std::iota(by_cost.begin(), by_cost.end(), 0);
  std::stable_sort(by_cost.begin(), by_cost.end(),
                   [&](MachineIndex a, MachineIndex b) { return instance.cost(a) < instance.cost(b); });

  OracleResult result;
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  bool out_of_budget = false;
  std::vector<MachineIndex> current(n, 0);
  std::vector<double> loads(m, 0.0);
  std::vector<std::size_t> jobs_on(m, 0);
  double open_cost = 0.0;

  auto lower_bound = [&](std::size_t depth) {
    double extra = 0.0;
    for (std::size_t d = depth; d < n; ++d) {
      const JobIndex j = order[d];
      bool fits_open = false;
      double cheapest_closed = std::numeric_limits<double>::infinity();
      for (MachineIndex i = 0; i < m; ++i) {
        const double p = instance.ptime(i, j);
        if (jobs_on[i] > 0) {
          if (fits_budget(loads[i] + p, budget)) {
            fits_open = true;
            break;
          }
        } else if (fits_budget(p, budget)) {
          cheapest_closed = std::min(cheapest_closed, instance.cost(i));
        }
      }
      if (!fits_open) extra = std::max(extra, cheapest_closed);
    }
    return open_cost + extra;
  };

  auto search = [&](auto&& self, std::size_t depth) -> void {
    if (out_of_budget) return;
    if (++result.nodes_explored > node_budget) {
      out_of_budget = true;
      return;
    }
    if (depth == n) {
      const double cost = activation_cost(instance, current);
      if (!found || cost < best) {
        found = true;
        best = cost;
        result.witness = current;
      }
      return;
    }
    if (found && lower_bound(depth) >= best) return;

    const JobIndex j = order[depth];
    auto place = [&](MachineIndex i) {
      const double p = instance.ptime(i, j);
      if (!fits_budget(loads[i] + p, budget)) return;
      const bool opening = jobs_on[i] == 0;
      if (opening) open_cost += instance.cost(i);
      current[j] = i;
      loads[i] += p;
      ++jobs_on[i];
      self(self, depth + 1);
      --jobs_on[i];
      loads[i] -= p;
      if (opening) open_cost -= instance.cost(i);
    };
    for (MachineIndex i = 0; i < m && !out_of_budget; ++i) {
      if (jobs_on[i] > 0) place(i);
    }
    for (MachineIndex i : by_cost) {
      if (out_of_budget) break;
      if (jobs_on[i] == 0) place(i);
    }
  };
  search(search, 0);

  if (!found) {
    if (out_of_budget) throw InstanceTooLarge("node budget exhausted before any feasible schedule was found");
    throw InfeasibleInstance("no assignment meets the makespan budget");
  }
  result.optimal_cost = best;
  result.witness_makespan = makespan(instance, result.witness);
  result.exact = !out_of_budget;
  return result;
}

// Exhaustive search where admissible, branch and bound otherwise.
inline OracleResult optimal(const Instance& instance, std::size_t node_budget = kDefaultNodeBudget) {
  if (exhaustive_admissible(instance.machine_count(), instance.job_count())) {
    return optimal_exhaustive(instance);
  }
  return optimal_bnb(instance, node_budget);
}

}  // namespace actsched
