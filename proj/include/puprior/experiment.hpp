#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "puprior/alphamax.hpp"
#include "puprior/csv.hpp"
#include "puprior/datagen.hpp"
#include "puprior/msgmm.hpp"
#include "puprior/transform.hpp"

namespace puprior {

struct SyntheticSource {
  Family family = Family::Gaussian;
  double delta_mu = 2.0;
  double alpha = 0.25;
  double beta = 0.95;
  std::int64_t n_unlabeled = 10000;
  std::int64_t n_labeled = 1000;
};

struct CsvSource {
  std::string path;
  CsvSchema schema;
  std::int64_t n_labeled = 1000;
  double beta = 1.0;
  std::int64_t unlabeled_cap = 10000;
};

struct ExperimentConfig {
  std::variant<SyntheticSource, CsvSource> source;
  bool run_msgmm = true;
  bool run_alphamax_n = true;
  bool run_alphamax = true;
  bool transform = false;     // score the samples before estimating
  int pca_components = 0;     // 0: off; mutually exclusive with transform
  int repeats = 50;
  std::uint64_t base_seed = 1;
  int threads = 0;            // repeat-level worker pool; 0: hardware
  MlpConfig mlp;
  MsGmmConfig msgmm;
  AlphaMaxConfig amax;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& doc);
};

struct MethodResult {
  bool ok = false;
  std::string error;
  PriorEstimate estimate;
  std::vector<std::string> warnings;
};

struct RepeatRecord {
  std::uint64_t seed = 0;
  double alpha_true = 0.0;
  double beta_true = 0.0;
  bool data_ok = true;
  std::string data_error;
  double oob_auc = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;  // reported only when timing output is requested
  std::map<std::string, MethodResult> methods;
};

struct MethodAggregate {
  double mae = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  int n_success = 0;
  int n_failed = 0;
};

struct RunReport {
  nlohmann::ordered_json config_echo;
  std::string family_label;  // synthetic family or dataset name
  double alpha_label = 0.0;  // nominal proportions for the summary rows
  double beta_label = 0.0;
  std::vector<RepeatRecord> records;
  std::map<std::string, MethodAggregate> aggregates;

  // Deterministic document: timing is excluded unless requested, so the
  // same config and seed reproduce the bytes exactly.
  nlohmann::ordered_json to_json(bool include_timing = false) const;
  // Summary table: family,alpha,beta,method,mae,se,n_success,n_failed
  std::string to_csv() const;
};

RunReport run_experiment(const ExperimentConfig& config);

}  // namespace puprior
