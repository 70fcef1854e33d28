#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "swcrt/power.hpp"
#include "swcrt/simulate.hpp"

namespace swcrt {

enum class Correction { none, fg, kc, md };
enum class Grouping { cluster, cluster_period };

Correction parse_correction(const std::string& s);
std::string to_string(Correction c);
Grouping parse_grouping(const std::string& s);
std::string to_string(Grouping g);

struct CoxOptions {
  double tolerance = 1e-10;  // on |U(beta)|
  int max_iterations = 50;
};

// Score-derived pieces for one grouping: residual sums U_g and their
// information shares A_g = -dU_g/dbeta (summing to A).
struct GroupScores {
  std::vector<double> residual;
  std::vector<double> information;
};

struct CoxFit {
  double beta_hat = 0;
  double information = 0;  // A(beta_hat), observed, summed over strata
  double score = 0;        // U(beta_hat)
  double loglik = 0;
  bool converged = false;
  int iterations = 0;
  std::string status;
  int clusters = 0;
  int periods = 0;
  int events = 0;
  GroupScores by_cluster;         // index = rank of cluster id
  GroupScores by_cluster_period;  // index = cluster * periods + (period - 1)
};

struct TestResult {
  std::string method;
  double estimate = 0;
  double statistic = 0;
  double dof = 0;  // 0 means standard normal reference
  double p_value = 1;
  bool reject = false;
};

// Partial likelihood pieces at a fixed beta, no iteration.
struct CoxEvaluation {
  double loglik = 0;
  double score = 0;
  double information = 0;
  int events = 0;
  GroupScores by_cluster;
  GroupScores by_cluster_period;
};

CoxEvaluation evaluate_cox(const TrialDataset& data, double beta,
                           bool residuals = true);

CoxFit fit_cox(const TrialDataset& data, const CoxOptions& opts = {});

double robust_variance(const CoxFit& fit, Correction correction,
                       Grouping grouping = Grouping::cluster,
                       double kc_bound = 0.75);

TestResult wald_t_test(const CoxFit& fit, double variance, DofRule dof,
                       double beta0, double alpha);

TestResult robust_score_test(const TrialDataset& data, double beta0,
                             bool modified, double alpha);
TestResult robust_score_test(const CoxEvaluation& at_beta0, int clusters,
                             bool modified, double alpha);

nlohmann::json to_json(const CoxFit& fit);
nlohmann::json to_json(const TestResult& t);

}  // namespace swcrt
