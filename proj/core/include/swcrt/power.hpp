#pragma once

#include <optional>
#include <string>
#include <vector>

#include "swcrt/variance.hpp"

namespace swcrt {

enum class DofRule { n_minus_1, n_minus_2, normal };
enum class Method { wald_t, score_sm, score_tang };

DofRule parse_dof_rule(const std::string& s);
std::string to_string(DofRule r);
Method parse_method(const std::string& s);
std::string to_string(Method m);

struct PowerRequest {
  Scenario scenario;
  double beta0 = 0;
  double beta1 = 0;
  double alpha = 0.05;
  DofRule dof = DofRule::n_minus_2;
  // Empty means every method the correlation mode supports.
  std::vector<Method> methods;
  QuadratureOptions quad;

  std::vector<Method> resolved_methods() const;
  void validate() const;
};

struct PowerResult {
  std::optional<double> wald;
  std::optional<double> sm;
  std::optional<double> tang;
  VarianceReport variance;
  std::optional<ScoreMoments> moments;
};

// Phi_t(|b1 - b0| / sqrt(var) - t_{alpha/2, dof}); dof <= 0 means normal.
double wald_power(double effect, double var, double alpha, double dof);
double sm_power(double n, double mean_alt, double sigma2_alt, double alpha);
double tang_power(double n, double mean_alt, double sigma2_null,
                  double sigma2_alt, double alpha);
double dof_for(DofRule rule, int n);

PowerResult compute_power(const PowerRequest& req);
double power_wald(const PowerRequest& req);
double power_score_sm(const PowerRequest& req);
double power_score_tang(const PowerRequest& req);

struct ClusterCount {
  Method method;
  double continuous = 0;  // before rounding up
  int clusters = 0;
  bool needs_unbalanced = false;  // not a multiple of J - 1
};

struct SampleSizeResult {
  std::vector<ClusterCount> counts;
  GICCProfile giccs;
  std::optional<ScoreMoments> moments;
  double per_cluster_variance = 0;

  const ClusterCount* find(Method m) const;
};

// Normal-quantile solve n = ((z_{a/2} s0 + z_pow s1) / drift)^2, rounded up.
// Only the allocation fractions of the request design matter.
SampleSizeResult solve_clusters(const PowerRequest& req, double target_power);

struct SensitivityGrid {
  std::vector<double> tau_w;
  std::vector<double> ratio;
  std::vector<Method> methods;
  // power[method][i][k] for tau_w[i], ratio[k]
  std::vector<std::vector<std::vector<double>>> power;
};

SensitivityGrid sensitivity_grid(const PowerRequest& req,
                                 const std::vector<double>& tau_w,
                                 const std::vector<double>& ratio,
                                 unsigned threads = 1);

}  // namespace swcrt
