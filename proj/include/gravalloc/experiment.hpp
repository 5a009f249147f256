#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace gravalloc {

inline constexpr const char* kVersion = "0.3.0";
inline constexpr const char* kSchema = "gravalloc.report/1";

// kind: equal-volume | rates | mc-tail | verify | galaxy | wormhole | sample
struct ExperimentConfig {
  std::string kind;
  int dim = 3;
  std::vector<double> R;
  std::size_t replicas = 1;
  std::vector<std::uint64_t> seeds{1};
  nlohmann::json tolerances = nlohmann::json::object();
  std::string out = "out";
  nlohmann::json params = nlohmann::json::object();  // kind-specific

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

struct ExperimentResult {
  std::string status = "ok";  // ok | fail | censored | error
  std::vector<std::string> files;
  nlohmann::json summary = nlohmann::json::object();
  int exit_code = 0;
};

// seed, versions, tolerances and the config itself
nlohmann::json provenance(const ExperimentConfig& cfg);

// Writes into cfg.out. Module errors are caught and written to failure.json;
// files written before the error are kept.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace gravalloc
