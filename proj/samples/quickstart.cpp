// Generate an instance, solve it offline, then schedule it online with the
// oracle value as the guess and again with guess doubling.
#include <cstdio>

#include "actsched/actsched.hpp"

int main() {
  using namespace actsched;
  GeneratorConfig gen;
  gen.m = 5;
  gen.n = 20;
  gen.seed = 3;
  const Instance instance = generate(gen);

  const OracleResult oracle = optimal(instance);
  std::printf("offline optimum %.3f (makespan %.3f, %zu nodes)\n", oracle.optimal_cost, oracle.witness_makespan,
              oracle.nodes_explored);

  RunConfig config;
  config.alpha_mode = AlphaMode::kOracle;
  config.seed = 42;
  const RunResult fixed = run_experiment(instance, config, &oracle);
  std::printf("alpha = B:  cost %.3f  makespan %.3f / L = %.2f\n", fixed.row.int_cost, fixed.row.int_makespan,
              fixed.row.makespan_ratio);

  config.alpha_mode = AlphaMode::kDoubling;
  config.initial_guess = oracle.optimal_cost / 8.0;
  const RunResult doubled = run_experiment(instance, config, &oracle);
  std::printf("doubling:   cost %.3f  makespan %.3f / L = %.2f  phases %zu\n", doubled.row.int_cost,
              doubled.row.int_makespan, doubled.row.makespan_ratio, doubled.row.phases);
  return 0;
}
