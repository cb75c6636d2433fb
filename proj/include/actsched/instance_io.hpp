#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "actsched/error.hpp"
#include "actsched/instance.hpp"

namespace actsched {

inline constexpr int kInstanceSchemaVersion = 1;

namespace detail {

using nlohmann::json;

inline const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw FormatError(where, "expected a JSON object");
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(where, std::string("missing required key \"") + key + "\"");
  return *it;
}

template <typename T>
T require_as(const json& obj, const char* key, const std::string& where) {
  const json& value = require(obj, key, where);
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw FormatError(where + "." + key, "wrong type (" + std::string(value.type_name()) + ")");
  }
}

inline void check_version(const json& doc, const std::string& where) {
  const int version = require_as<int>(doc, "version", where);
  if (version != kInstanceSchemaVersion) {
    throw FormatError(where + ".version", "schema version " + std::to_string(version) +
                                              " is not supported (expected " +
                                              std::to_string(kInstanceSchemaVersion) + ")");
  }
}

inline json machines_to_json(const Instance& instance) {
  json machines = json::array();
  for (const auto& machine : instance.machines) {
    machines.push_back({{"id", machine.id}, {"cost", machine.startup_cost}});
  }
  return machines;
}

inline json job_to_json(const Job& job) { return {{"id", job.id}, {"p", job.processing_times}}; }

inline json header_to_json(const Instance& instance) {
  return {{"version", kInstanceSchemaVersion},
          {"m", instance.machine_count()},
          {"n", instance.n_declared},
          {"L", instance.makespan_budget},
          {"machines", machines_to_json(instance)}};
}

// Reads version, m, n, L and machines; leaves jobs empty.
inline Instance header_from_json(const json& doc, const std::string& where) {
  check_version(doc, where);
  Instance instance;
  const auto m = require_as<std::size_t>(doc, "m", where);
  instance.n_declared = require_as<std::size_t>(doc, "n", where);
  instance.makespan_budget = require_as<double>(doc, "L", where);
  const json& machines = require(doc, "machines", where);
  if (!machines.is_array()) throw FormatError(where + ".machines", "expected an array");
  if (machines.size() != m) {
    throw FormatError(where + ".machines", "header declares m=" + std::to_string(m) + " but lists " +
                                               std::to_string(machines.size()) + " machines");
  }
  for (std::size_t i = 0; i < machines.size(); ++i) {
    const std::string at = where + ".machines[" + std::to_string(i) + "]";
    instance.machines.push_back(
        {require_as<std::size_t>(machines[i], "id", at), require_as<double>(machines[i], "cost", at)});
  }
  return instance;
}

inline Job job_from_json(const json& obj, const std::string& where) {
  return {require_as<std::size_t>(obj, "id", where),
          require_as<std::vector<double>>(obj, "p", where)};
}

inline void validate_loaded(const Instance& instance, const std::string& where) {
  try {
    validate(instance);
  } catch (const InvalidInput& e) {
    throw FormatError(where, e.what());
  }
}

}  // namespace detail

inline std::string to_json_string(const Instance& instance) {
  auto doc = detail::header_to_json(instance);
  auto jobs = nlohmann::json::array();
  for (const auto& job : instance.jobs) jobs.push_back(detail::job_to_json(job));
  doc["jobs"] = std::move(jobs);
  return doc.dump(1) + "\n";
}

inline Instance instance_from_json_string(const std::string& text, const std::string& where = "instance") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(where, e.what());
  }
  Instance instance = detail::header_from_json(doc, where);
  const auto& jobs = detail::require(doc, "jobs", where);
  if (!jobs.is_array()) throw FormatError(where + ".jobs", "expected an array");
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    instance.jobs.push_back(detail::job_from_json(jobs[j], where + ".jobs[" + std::to_string(j) + "]"));
  }
  if (instance.jobs.size() != instance.n_declared) {
    throw FormatError(where + ".n", "declares n=" + std::to_string(instance.n_declared) + " but lists " +
                                        std::to_string(instance.jobs.size()) + " jobs");
  }
  detail::validate_loaded(instance, where);
  return instance;
}

inline void save_instance(const Instance& instance, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  out << to_json_string(instance);
  if (!out) throw InvalidInput("failed writing " + path.string());
}

inline Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return instance_from_json_string(buffer.str(), path.string());
}

// JSON-lines online trace: a header object (version, m, n, L, machines) on
// the first line, then one job object per line in arrival order.
inline void write_trace(const Instance& instance, std::ostream& out) {
  out << detail::header_to_json(instance).dump() << '\n';
  for (const auto& job : instance.jobs) out << detail::job_to_json(job).dump() << '\n';
}

// Reads a trace. A trace may be a prefix of the stream (fewer than n jobs).
inline Instance read_trace(std::istream& in, const std::string& name = "trace") {
  std::string line;
  std::size_t line_no = 0;
  auto where = [&] { return name + ":" + std::to_string(line_no); };
  auto parse = [&](const std::string& text) {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(where(), e.what());
    }
  };

  Instance instance;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto obj = parse(line);
    if (!have_header) {
      instance = detail::header_from_json(obj, where());
      have_header = true;
    } else {
      instance.jobs.push_back(detail::job_from_json(obj, where()));
    }
  }
  if (!have_header) throw FormatError(name, "missing header line");
  detail::validate_loaded(instance, name);
  return instance;
}

}  // namespace actsched
