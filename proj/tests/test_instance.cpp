#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"

using namespace actsched;
using testing_helpers::make_instance;
using testing_helpers::random_instance;
using testing_helpers::scratch_dir;

TEST(Generator, SingleMachineSingleJobFits) {
  GeneratorConfig config;
  config.m = 1;
  config.n = 1;
  config.seed = 7;
  const Instance inst = generate(config);
  ASSERT_EQ(inst.machine_count(), 1u);
  ASSERT_EQ(inst.job_count(), 1u);
  EXPECT_LE(inst.ptime(0, 0), inst.makespan_budget);
  EXPECT_GT(inst.ptime(0, 0), 0.0);
}

TEST(Generator, SameSeedSameBytes) {
  for (auto model : {PtimeModel::kUniform, PtimeModel::kRestrictedAssignment, PtimeModel::kPowerLaw}) {
    GeneratorConfig config;
    config.m = 6;
    config.n = 15;
    config.seed = 1234;
    config.ptime_model = model;
    EXPECT_EQ(to_json_string(generate(config)), to_json_string(generate(config))) << to_string(model);
  }
}

TEST(Generator, DifferentSeedsDiffer) {
  EXPECT_NE(random_instance(4, 8, 1), random_instance(4, 8, 2));
}

TEST(Generator, RestrictedAssignmentEveryJobFeasible) {
  const Instance inst = random_instance(4, 8, 42, PtimeModel::kRestrictedAssignment);
  for (JobIndex j = 0; j < inst.job_count(); ++j) {
    bool fits = false;
    for (MachineIndex i = 0; i < inst.machine_count(); ++i) fits |= inst.ptime(i, j) <= inst.makespan_budget;
    EXPECT_TRUE(fits) << "job " << j;
  }
  // Sentinels are large and finite.
  bool saw_sentinel = false;
  for (JobIndex j = 0; j < inst.job_count(); ++j) {
    for (MachineIndex i = 0; i < inst.machine_count(); ++i) {
      EXPECT_TRUE(std::isfinite(inst.ptime(i, j)));
      saw_sentinel |= inst.ptime(i, j) == inst.unavailable_ptime();
    }
  }
  EXPECT_TRUE(saw_sentinel);
}

TEST(Generator, AllModelsSatisfyInstanceInvariants) {
  for (auto model : {PtimeModel::kUniform, PtimeModel::kRestrictedAssignment, PtimeModel::kPowerLaw}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const Instance inst = random_instance(1 + seed % 7, 1 + seed % 13, seed, model);
      EXPECT_NO_THROW(validate(inst));
      EXPECT_TRUE(every_job_fits_somewhere(inst)) << to_string(model) << " seed " << seed;
      for (MachineIndex i = 0; i < inst.machine_count(); ++i) {
        EXPECT_GE(inst.cost(i), 1.0);
        EXPECT_LE(inst.cost(i), 10.0);
      }
    }
  }
}

TEST(Generator, JointlyFeasible) {
  for (auto model : {PtimeModel::kUniform, PtimeModel::kRestrictedAssignment, PtimeModel::kPowerLaw}) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const Instance inst = random_instance(1 + seed % 4, 1 + seed % 9, seed, model);
      const OracleResult r = optimal(inst);
      EXPECT_TRUE(feasible(inst, r.witness));
      EXPECT_LE(r.witness_makespan, inst.makespan_budget);
    }
  }
}

TEST(Generator, RejectsBadConfig) {
  GeneratorConfig config;
  config.m = 0;
  EXPECT_THROW(validate(config), InvalidInput);
  config.m = 2;
  config.cost_range = {5.0, 1.0};
  EXPECT_THROW(generate(config), InvalidInput);
}

TEST(Generator, ModelNames) {
  EXPECT_EQ(parse_ptime_model("uniform"), PtimeModel::kUniform);
  EXPECT_EQ(parse_ptime_model("restricted_assignment"), PtimeModel::kRestrictedAssignment);
  EXPECT_EQ(parse_ptime_model("restricted"), PtimeModel::kRestrictedAssignment);
  EXPECT_EQ(parse_ptime_model("power_law"), PtimeModel::kPowerLaw);
  EXPECT_THROW(parse_ptime_model("zipf"), InvalidInput);
}

TEST(Instance, ValidateRejectsBrokenInstances) {
  Instance ok = make_instance({1.0, 2.0}, {{0.5, 0.5}});
  EXPECT_NO_THROW(validate(ok));

  Instance bad_cost = ok;
  bad_cost.machines[0].startup_cost = 0.0;
  EXPECT_THROW(validate(bad_cost), InvalidInput);

  Instance bad_p = ok;
  bad_p.jobs[0].processing_times[1] = 0.0;
  EXPECT_THROW(validate(bad_p), InvalidInput);

  Instance short_row = ok;
  short_row.jobs[0].processing_times.pop_back();
  EXPECT_THROW(validate(short_row), InvalidInput);

  Instance bad_budget = ok;
  bad_budget.makespan_budget = 0.0;
  EXPECT_THROW(validate(bad_budget), InvalidInput);

  Instance bad_ids = ok;
  bad_ids.machines[1].id = 5;
  EXPECT_THROW(validate(bad_ids), InvalidInput);
}

TEST(InstanceIo, RoundTrip) {
  const auto dir = scratch_dir("roundtrip");
  const Instance inst = random_instance(5, 9, 77, PtimeModel::kPowerLaw);
  save_instance(inst, dir / "inst.json");
  EXPECT_EQ(load_instance(dir / "inst.json"), inst);
}

TEST(InstanceIo, MissingMachinesKeyIsNamed) {
  const std::string text = R"({"version": 1, "m": 1, "n": 1, "L": 1, "jobs": [{"id": 0, "p": [0.5]}]})";
  try {
    instance_from_json_string(text, "mem");
    FAIL() << "expected a parse error";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("machines"), std::string::npos) << e.what();
  }
}

TEST(InstanceIo, RejectsWrongVersionAndCounts) {
  EXPECT_THROW(instance_from_json_string(
                   R"({"version": 2, "m": 1, "n": 1, "L": 1, "machines": [{"id": 0, "cost": 1}],
                       "jobs": [{"id": 0, "p": [0.5]}]})"),
               FormatError);
  EXPECT_THROW(instance_from_json_string(
                   R"({"version": 1, "m": 2, "n": 1, "L": 1, "machines": [{"id": 0, "cost": 1}],
                       "jobs": [{"id": 0, "p": [0.5]}]})"),
               InvalidInput);
  EXPECT_THROW(instance_from_json_string(
                   R"({"version": 1, "m": 1, "n": 3, "L": 1, "machines": [{"id": 0, "cost": 1}],
                       "jobs": [{"id": 0, "p": [0.5]}]})"),
               InvalidInput);
  EXPECT_THROW(instance_from_json_string("{not json"), FormatError);
}

TEST(InstanceIo, HeaderDeclaresCounts) {
  const Instance inst = make_instance({1.0, 2.0}, {{0.5, 0.4}, {0.3, 0.2}, {0.1, 0.9}});
  const auto doc = nlohmann::json::parse(to_json_string(inst));
  EXPECT_EQ(doc["version"], 1);
  EXPECT_EQ(doc["m"], 2);
  EXPECT_EQ(doc["n"], 3);
  EXPECT_EQ(doc["machines"].size(), 2u);
  EXPECT_EQ(doc["jobs"][2]["p"][1], 0.9);
}

TEST(InstanceIo, TraceRoundTripAndPrefix) {
  const Instance inst = random_instance(3, 6, 5);
  std::stringstream buffer;
  write_trace(inst, buffer);

  std::string header;
  std::getline(buffer, header);
  const auto head = nlohmann::json::parse(header);
  EXPECT_EQ(head["m"], 3);
  EXPECT_EQ(head["n"], 6);
  EXPECT_TRUE(head.contains("L"));

  std::stringstream again;
  write_trace(inst, again);
  EXPECT_EQ(read_trace(again), inst);

  // A trace may stop early; n stays as declared.
  std::stringstream full;
  write_trace(inst, full);
  std::string text = full.str();
  std::size_t cut = 0;
  for (int lines = 0; lines < 3; ++lines) cut = text.find('\n', cut) + 1;
  std::stringstream prefix(text.substr(0, cut));
  const Instance partial = read_trace(prefix);
  EXPECT_EQ(partial.job_count(), 2u);
  EXPECT_EQ(partial.n_declared, 6u);
}

TEST(InstanceIo, TraceErrorsCarryLineNumbers) {
  std::stringstream in;
  in << R"({"version": 1, "m": 1, "n": 2, "L": 1, "machines": [{"id": 0, "cost": 1}]})" << '\n'
     << R"({"id": 0, "p": [0.5]})" << '\n'
     << R"({"id": 1})" << '\n';
  try {
    read_trace(in, "t");
    FAIL() << "expected a parse error";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
}

TEST(Random, StreamsAreIndependentAndReproducible) {
  Rng a = make_stream(9, Stream::kThresholds);
  Rng b = make_stream(9, Stream::kThresholds);
  Rng c = make_stream(9, Stream::kAssignment);
  const double va = uniform01(a);
  EXPECT_EQ(va, uniform01(b));
  EXPECT_NE(va, uniform01(c));
  for (int k = 0; k < 1000; ++k) {
    const double u = uniform01(a);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}
