#pragma once

#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "swcrt/cox.hpp"
#include "swcrt/power.hpp"

namespace swcrt {

struct SimConfig {
  int J = 3;
  int n = 30;
  int m = 50;
  // Overrides the balanced (J, n) layout when set.
  std::optional<TrialDesign> design;
  double p_a = 0.2;
  double trend = 0.2;
  double c_star = 1.0;
  double tau_w = 0.05;
  double tau_b = 0.01;
  double beta0 = 0;
  double beta1 = 0;
  double alpha = 0.05;
  int replicates = 1000;
  std::uint64_t seed = 20240625;
  DofRule dof = DofRule::n_minus_2;
  unsigned threads = 0;  // 0 = hardware concurrency
  bool predict = true;

  TrialDesign trial_design() const;
  Scenario scenario() const;
  void validate() const;

  static SimConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Empirical tests run on every replicate.
const std::vector<std::string>& harness_methods();

struct MethodRate {
  std::string method;
  int rejections = 0;
  int valid = 0;
  double rate = 0;
  double ci_low = 0;   // Clopper-Pearson 95%
  double ci_high = 1;
};

struct SimResult {
  SimConfig config;
  std::vector<MethodRate> rates;
  std::map<std::string, double> predicted;  // wald, sm, tang
  double mean_beta = 0;
  int nonconverged = 0;
  int failed = 0;  // converged but a correction was undefined
  int used = 0;
  double max_abs_score = 0;  // |U(beta_hat)| over used fits
  double wall_seconds = 0;

  const MethodRate* find(const std::string& method) const;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

SimResult run_study(const SimConfig& config);

struct Difference {
  std::string empirical;   // harness method
  std::string prediction;  // power method
  double difference = 0;   // empirical - predicted
  double se = 0;           // Monte Carlo SE of the empirical rate
};

// Pairs the Wald tests with the Wald prediction and the score tests with
// each score prediction present in `predictions`.
std::vector<Difference> compare_predicted(const SimResult& result,
                                          const std::map<std::string, double>& predictions);

}  // namespace swcrt
