#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"

using namespace actsched;
using testing_helpers::make_instance;
using testing_helpers::random_instance;

namespace {

// Straightforward re-implementation of the update loop, written without
// reference to the engine's internals. Used to cross-check the engine.
struct ReferenceState {
  std::vector<double> c, x, load;
  std::vector<bool> kept, full;
  std::vector<std::vector<double>> y;
  double a = 1.05;
  double n = 1;
};

ReferenceState reference_run(const Instance& inst, double alpha, std::size_t jobs) {
  const std::size_t m = inst.machine_count();
  const double md = static_cast<double>(m);
  ReferenceState s;
  s.n = static_cast<double>(inst.n_declared);
  s.c.assign(m, 0.0);
  s.x.assign(m, 0.0);
  s.load.assign(m, 0.0);
  s.kept.assign(m, false);
  s.full.assign(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    double c = inst.cost(i) * md / alpha;
    if (c > md) continue;
    s.kept[i] = true;
    if (c <= 1.0) {
      s.c[i] = 1.0;
      s.x[i] = 1.0;
      s.full[i] = true;
    } else {
      s.c[i] = c;
      s.x[i] = 1.0 / md;
    }
  }
  const double L = inst.makespan_budget;
  for (std::size_t j = 0; j < jobs; ++j) {
    std::vector<double> yj(m, 0.0);
    auto cov = [&] { return std::accumulate(yj.begin(), yj.end(), 0.0); };
    while (cov() < 1.0 - 1e-9) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < m; ++i) {
        if (s.kept[i]) idx.push_back(i);
      }
      auto eta = [&](std::size_t i) {
        double p = inst.ptime(i, j) / L;
        return s.full[i] ? s.c[i] * std::pow(s.a, s.load[i] - 1.0) * p : s.c[i] * p;
      };
      std::sort(idx.begin(), idx.end(), [&](std::size_t u, std::size_t v) {
        double eu = eta(u), ev = eta(v);
        return eu != ev ? eu < ev : u < v;
      });
      std::size_t cut = 0;
      double sum = 0.0;
      while (cut < idx.size() && sum + s.x[idx[cut]] < 1.0) sum += s.x[idx[cut++]];

      std::vector<std::size_t> who;
      std::vector<double> new_x, dy;
      auto raise = [&](std::size_t i) {
        double xn = std::min(s.x[i] * (1.0 + 1.0 / (s.c[i] * s.n)), 1.0);
        double p = inst.ptime(i, j) / L;
        double d = std::min(2.0 * s.x[i], 6.0 * (xn - s.x[i]) / p);
        d = std::max(0.0, std::min(d, std::min(2.0 * xn, 1.0) - yj[i]));
        who.push_back(i);
        new_x.push_back(xn);
        dy.push_back(d);
      };
      for (std::size_t k = 0; k < cut; ++k) raise(idx[k]);
      if (cut < idx.size()) {
        std::size_t k = idx[cut];
        if (s.full[k]) {
          double d = 6.0 / (eta(k) * s.n);
          d = std::max(0.0, std::min(d, 1.0 - yj[k]));
          who.push_back(k);
          new_x.push_back(1.0);
          dy.push_back(d);
        } else {
          raise(k);
        }
      }
      double total = std::accumulate(dy.begin(), dy.end(), 0.0);
      double room = std::max(0.0, 1.0 - cov());
      if (total > room) {
        for (auto& d : dy) d *= room / total;
      }
      for (std::size_t k = 0; k < who.size(); ++k) {
        std::size_t i = who[k];
        s.x[i] = new_x[k];
        s.full[i] = s.x[i] == 1.0;
        yj[i] += dy[k];
        s.load[i] += inst.ptime(i, j) / L * dy[k];
      }
    }
    s.y.push_back(yj);
  }
  return s;
}

}  // namespace

TEST(Preprocess, DiscardsRaisesAndInitialises) {
  const Instance inst = make_instance({0.5, 1.0, 3.0, 10.0}, {{1, 1, 1, 1}});
  const auto e = FractionalEngine::preprocess(inst, 4.0);
  EXPECT_FALSE(e.discarded(0));
  EXPECT_FALSE(e.discarded(1));
  EXPECT_FALSE(e.discarded(2));
  EXPECT_TRUE(e.discarded(3));
  EXPECT_DOUBLE_EQ(e.scaled_cost(0), 1.0);
  EXPECT_DOUBLE_EQ(e.scaled_cost(1), 1.0);
  EXPECT_DOUBLE_EQ(e.scaled_cost(2), 3.0);
  EXPECT_EQ(e.x(0), 1.0);
  EXPECT_EQ(e.x(1), 1.0);
  EXPECT_DOUBLE_EQ(e.x(2), 0.25);
  EXPECT_TRUE(e.fully_active(0));
  EXPECT_TRUE(e.fully_active(1));
  EXPECT_FALSE(e.fully_active(2));
}

TEST(Preprocess, ScalesCostsByMachineCountOverGuess) {
  // m = 2, alpha = 8: costs 6 and 9 scale to 1.5 and 2.25; the second is discarded.
  const Instance inst = make_instance({6.0, 9.0}, {{1, 1}});
  const auto e = FractionalEngine::preprocess(inst, 8.0);
  EXPECT_DOUBLE_EQ(e.scaled_cost(0), 1.5);
  EXPECT_DOUBLE_EQ(e.x(0), 0.5);
  EXPECT_TRUE(e.discarded(1));
}

TEST(Preprocess, AllDiscardedMeansGuessTooSmall) {
  const Instance inst = make_instance({100.0, 200.0}, {{1, 1}});
  EXPECT_THROW(FractionalEngine::preprocess(inst, 2.0), GuessTooSmall);
}

TEST(Preprocess, RejectsBadParameters) {
  const Instance inst = make_instance({1.0}, {{1}});
  EXPECT_THROW(FractionalEngine::preprocess(inst, 0.0), InvalidInput);
  EXPECT_THROW(FractionalEngine::preprocess(inst, std::nan("")), InvalidInput);
  FractionalOptions options;
  options.a = 1.0;
  EXPECT_THROW(FractionalEngine::preprocess(inst, 1.0, options), InvalidInput);
}

TEST(Preprocess, PotentialAtMostMachineCount) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Instance inst = random_instance(2 + seed % 9, 5, seed);
    const double alpha = 0.5 + static_cast<double>(seed % 40);
    try {
      const auto e = FractionalEngine::preprocess(inst, alpha);
      EXPECT_LE(e.potential(), static_cast<double>(inst.machine_count()) + 1e-9) << "seed " << seed;
      EXPECT_NEAR(e.potential(), e.recompute_potential(), 1e-12);
    } catch (const GuessTooSmall&) {
    }
  }
}

TEST(VirtualCost, Formula) {
  EXPECT_DOUBLE_EQ(virtual_cost(3.0, 0.5, 0.0, 1.05, false), 1.5);
  EXPECT_DOUBLE_EQ(virtual_cost(2.0, 0.5, 1.0, 1.05, true), 1.0);
  EXPECT_DOUBLE_EQ(virtual_cost(2.0, 0.5, 1.0, 1.07, true), 1.0);
  EXPECT_DOUBLE_EQ(virtual_cost(1.0, 1.0, 2.0, 1.05, true), 1.05);
}

TEST(VirtualCost, EngineUsesLoadOfFullyActiveMachines) {
  // One machine of scaled cost 1; two unit jobs bring its load to 2.
  const Instance inst = make_instance({1.0}, {{1.0}, {1.0}, {1.0}});
  auto e = FractionalEngine::preprocess(inst, 1.0);
  EXPECT_DOUBLE_EQ(e.virtual_cost(0, 0), 1.0 / 1.05);
  e.process_job(0);
  e.process_job(1);
  EXPECT_NEAR(e.load(0), 2.0, 1e-12);
  EXPECT_NEAR(e.virtual_cost(0, 2), 1.05, 1e-12);
}

TEST(VirtualCost, EngineUsesScaledCostForPartialMachines) {
  const Instance inst = make_instance({0.5, 1.0, 3.0, 10.0}, {{1, 1, 0.5, 1}});
  const auto e = FractionalEngine::preprocess(inst, 4.0);
  EXPECT_DOUBLE_EQ(e.virtual_cost(2, 0), 1.5);
}

TEST(OrderAndSplit, PrefixRule) {
  const std::vector<double> a{0.3, 0.4, 0.5};
  EXPECT_EQ(prefix_length(a), 2u);
  const std::vector<double> b{1.0};
  EXPECT_EQ(prefix_length(b), 0u);
  const std::vector<double> c{0.2, 0.3};
  EXPECT_EQ(prefix_length(c), 2u);
  const std::vector<double> d{0.5, 0.5};
  EXPECT_EQ(prefix_length(d), 1u);
}

TEST(OrderAndSplit, SingleFullyActiveMachineIsThePivot) {
  const Instance inst = make_instance({1.0}, {{0.5}});
  const auto e = FractionalEngine::preprocess(inst, 1.0);
  const auto split = e.order_and_split(0);
  EXPECT_TRUE(split.prefix().empty());
  ASSERT_TRUE(split.pivot.has_value());
  EXPECT_EQ(*split.pivot, 0u);
}

TEST(OrderAndSplit, NoPivotWhenAllMassBelowOne) {
  // Four kept machines at x = 1/5 carry total mass 0.8.
  const Instance inst = make_instance({2.0, 2.0, 2.0, 2.0, 100.0}, {{0.1, 0.2, 0.3, 0.4, 0.05}});
  const auto e = FractionalEngine::preprocess(inst, 5.0);
  EXPECT_TRUE(e.discarded(4));
  const auto split = e.order_and_split(0);
  EXPECT_EQ(split.prefix_size, 4u);
  EXPECT_FALSE(split.pivot.has_value());
  const std::vector<MachineIndex> expected{0, 1, 2, 3};
  EXPECT_EQ(split.order, expected);
}

TEST(OrderAndSplit, TiesBrokenByMachineId) {
  const Instance inst = make_instance({3.0, 3.0, 3.0}, {{0.5, 0.5, 0.5}});
  const auto e = FractionalEngine::preprocess(inst, 3.0);
  const std::vector<MachineIndex> expected{0, 1, 2};
  EXPECT_EQ(e.order_and_split(0).order, expected);
}

TEST(EffectiveCapacity, Formula) {
  EXPECT_DOUBLE_EQ(effective_capacity(0.1, 0.01, 0.5), 0.12);
  EXPECT_DOUBLE_EQ(effective_capacity(0.1, 0.01, 1.0), 0.06);
  EXPECT_EQ(effective_capacity(0.1, 0.0, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(effective_capacity(0.1, 1.0, 0.5), 0.2);
}

TEST(ExecuteStep, TypeBIncrement) {
  // Scaled cost 1 (fully active), load 0, p = 2.1: eta = 2.1 / 1.05 = 2,
  // so the first Type B step adds 6 / (2 * 10).
  std::vector<std::vector<double>> jobs(10, std::vector<double>{2.1});
  const Instance inst = make_instance({1.0}, jobs);
  auto e = FractionalEngine::preprocess(inst, 1.0);
  e.begin_job(0);
  const auto step = e.execute_step(0);
  EXPECT_EQ(step.type, StepType::kB);
  EXPECT_NEAR(e.y(0, 0), 0.3, 1e-12);
  EXPECT_NEAR(step.delta_coverage, 0.3, 1e-12);
  EXPECT_NEAR(e.load(0), 0.3 * 2.1, 1e-12);
}

TEST(ExecuteStep, TypeARaisesPrefixAndPivot) {
  // Four machines of scaled cost 2 at x = 1/4, n = 10.
  std::vector<std::vector<double>> jobs(10, std::vector<double>{0.5, 0.5, 0.5, 0.5});
  const Instance inst = make_instance({2.0, 2.0, 2.0, 2.0}, jobs);
  auto e = FractionalEngine::preprocess(inst, 4.0);
  e.begin_job(0);
  const double phi_before = e.potential();
  const auto step = e.execute_step(0);
  EXPECT_EQ(step.type, StepType::kA);
  EXPECT_EQ(step.machines_touched.size(), 4u);
  for (MachineIndex i = 0; i < 4; ++i) {
    EXPECT_NEAR(e.x(i), 0.2625, 1e-15);
    // min(2 * 0.25, 6 * 0.0125 / 0.5)
    EXPECT_NEAR(e.y(i, 0), 0.15, 1e-12);
  }
  EXPECT_NEAR(step.delta_potential, 4 * 2.0 * 0.0125, 1e-12);
  EXPECT_NEAR(e.potential() - phi_before, step.delta_potential, 1e-12);
  EXPECT_LE(step.delta_potential, 2.0 / 10.0 + 1e-9);
}

TEST(ExecuteStep, RequiresJobInProgress) {
  const Instance inst = make_instance({1.0}, {{0.5}});
  auto e = FractionalEngine::preprocess(inst, 1.0);
  EXPECT_THROW(e.execute_step(0), Error);
  EXPECT_THROW(e.begin_job(3), Error);
  e.process_job(0);
  EXPECT_THROW(e.begin_job(0), Error);
}

TEST(ProcessJob, SingleMachineReachesExactCoverage) {
  const Instance inst = make_instance({1.0}, {{0.5}});
  auto e = FractionalEngine::preprocess(inst, 1.0);
  const auto steps = e.process_job(0);
  ASSERT_FALSE(steps.empty());
  for (const auto& s : steps) EXPECT_EQ(s.type, StepType::kB);
  EXPECT_DOUBLE_EQ(e.y(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(e.load(0), 0.5);
  EXPECT_EQ(e.status(0), JobStatus::kComplete);
  EXPECT_GE(e.clamps().total(), 1u);
}

TEST(ProcessJob, StepCapAborts) {
  FractionalOptions options;
  options.max_steps_per_job = 2;
  std::vector<std::vector<double>> jobs(100, std::vector<double>{0.5, 0.5});
  const Instance inst = make_instance({5.0, 5.0}, jobs);
  auto e = FractionalEngine::preprocess(inst, 5.0, options);
  try {
    e.process_job(0);
    FAIL() << "expected the step cap to trigger";
  } catch (const StepCapExceeded& err) {
    EXPECT_NE(std::string(err.what()).find("coverage"), std::string::npos);
  }
}

TEST(ProcessJob, MatchesIndependentReference) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Instance inst = random_instance(2 + seed % 6, 4 + seed % 9, 500 + seed);
    const double alpha = inst.total_cost() / (1.0 + static_cast<double>(seed % 3));
    auto e = FractionalEngine::preprocess(inst, alpha);
    for (JobIndex j = 0; j < inst.job_count(); ++j) e.process_job(j);
    const auto ref = reference_run(inst, alpha, inst.job_count());
    for (MachineIndex i = 0; i < inst.machine_count(); ++i) {
      EXPECT_NEAR(e.x(i), ref.x[i], 1e-12) << "seed " << seed << " machine " << i;
      EXPECT_NEAR(e.load(i), ref.load[i], 1e-9) << "seed " << seed << " machine " << i;
      for (JobIndex j = 0; j < inst.job_count(); ++j) {
        EXPECT_NEAR(e.y(i, j), ref.y[j][i], 1e-12) << "seed " << seed << " y[" << i << "," << j << "]";
      }
    }
  }
}

TEST(ProcessJob, Deterministic) {
  const Instance inst = random_instance(6, 20, 31);
  auto a = FractionalEngine::preprocess(inst, inst.total_cost() / 2);
  auto b = FractionalEngine::preprocess(inst, inst.total_cost() / 2);
  for (JobIndex j = 0; j < inst.job_count(); ++j) {
    a.process_job(j);
    b.process_job(j);
  }
  for (MachineIndex i = 0; i < inst.machine_count(); ++i) {
    EXPECT_EQ(a.x(i), b.x(i));
    EXPECT_EQ(a.load(i), b.load(i));
  }
  EXPECT_EQ(a.steps_taken(), b.steps_taken());
}

TEST(ProcessJob, SnapshotTakenAfterLastStep) {
  const Instance inst = random_instance(4, 6, 8);
  auto e = FractionalEngine::preprocess(inst, inst.total_cost());
  e.process_job(0);
  const std::vector<double> after(e.x().begin(), e.x().end());
  const auto snap = e.x_snapshot(0);
  EXPECT_TRUE(std::equal(snap.begin(), snap.end(), after.begin(), after.end()));
  EXPECT_TRUE(e.x_snapshot(1).empty());
}

TEST(Potential, Formula) {
  EXPECT_DOUBLE_EQ(machine_potential(5.0, 0.2, 0.0, 1.05, false), 1.0);
  EXPECT_DOUBLE_EQ(machine_potential(1.0, 1.0, 1.0, 1.05, true), 1.0);
  EXPECT_DOUBLE_EQ(machine_potential(2.0, 1.0, 3.0, 1.05, true), 2.0 * 1.05 * 1.05);
}

TEST(Potential, DiscardedMachinesExcluded) {
  const Instance inst = make_instance({0.5, 3.0, 10.0}, {{1, 1, 1}});
  const auto e = FractionalEngine::preprocess(inst, 3.0);
  EXPECT_TRUE(e.discarded(2));
  EXPECT_EQ(e.machine_potential(2), 0.0);
  EXPECT_NEAR(e.potential(), 1.0 / 1.05 + 3.0 / 3.0, 1e-12);
}

TEST(FractionalCost, FreshState) {
  // One machine raised to cost 1, two at scaled cost 3 with x = 1/4.
  const Instance inst = make_instance({0.5, 3.0, 3.0, 10.0}, {{1, 1, 1, 1}});
  const auto e = FractionalEngine::preprocess(inst, 4.0);
  EXPECT_DOUBLE_EQ(e.fractional_cost(), 1.0 + 2 * 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(e.fractional_cost_original(), 0.5 + 2 * 3.0 / 4.0);
  EXPECT_EQ(e.fractional_makespan(), 0.0);
}

TEST(FractionalCost, EmptyInstance) {
  Instance inst = make_instance({2.0, 3.0}, {});
  const auto e = FractionalEngine::preprocess(inst, 5.0);
  EXPECT_EQ(e.fractional_makespan(), 0.0);
  EXPECT_EQ(e.n(), 1u);
}

TEST(FractionalCost, MakespanInBudgetUnits) {
  const Instance inst = make_instance({1.0}, {{5.0}}, 10.0);
  auto e = FractionalEngine::preprocess(inst, 1.0);
  e.process_job(0);
  EXPECT_DOUBLE_EQ(e.fractional_makespan(), 0.5);
}

TEST(AbandonJob, KeepsLoadButClearsSnapshot) {
  const Instance inst = make_instance({1.0, 1.0}, {{0.5, 0.5}, {0.5, 0.5}});
  auto e = FractionalEngine::preprocess(inst, 2.0);
  e.process_job(0);
  e.abandon_job(0);
  EXPECT_EQ(e.status(0), JobStatus::kAbandoned);
  EXPECT_TRUE(e.x_snapshot(0).empty());
  EXPECT_NEAR(e.load(0) + e.load(1), 0.5, 1e-12);
}
