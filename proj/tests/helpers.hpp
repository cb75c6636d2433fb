#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "actsched/actsched.hpp"

namespace testing_helpers {

using actsched::Instance;

// ptimes[j][i] is the processing time of job j on machine i.
inline Instance make_instance(const std::vector<double>& costs, const std::vector<std::vector<double>>& ptimes,
                              double L = 1.0) {
  Instance inst;
  for (std::size_t i = 0; i < costs.size(); ++i) inst.machines.push_back({i, costs[i]});
  for (std::size_t j = 0; j < ptimes.size(); ++j) inst.jobs.push_back({j, ptimes[j]});
  inst.makespan_budget = L;
  inst.n_declared = ptimes.size();
  return inst;
}

inline Instance random_instance(std::size_t m, std::size_t n, std::uint64_t seed,
                                actsched::PtimeModel model = actsched::PtimeModel::kUniform) {
  actsched::GeneratorConfig config;
  config.m = m;
  config.n = n;
  config.seed = seed;
  config.ptime_model = model;
  return actsched::generate(config);
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("actsched_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_helpers
