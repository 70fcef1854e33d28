#pragma once

#include <vector>

#include "swcrt/design.hpp"
#include "swcrt/quadrature.hpp"
#include "swcrt/survival.hpp"

namespace swcrt {

struct Scenario {
  TrialDesign design = build_balanced_design(2, 1);
  HazardSpec hazard;
  CensoringSpec censoring;
  CorrelationSpec corr;

  void validate() const;
};

// Event times are generated at `data`; the working model (mu weights and the
// compensator's exp term) sits at `model`. Equal values give the correctly
// specified case.
struct Betas {
  double data = 0;
  double model = 0;
};

struct QuadratureOptions {
  int order = default_quadrature_order();
  // Recompute at twice the order and fail when any upsilon moves by more
  // than `tolerance` relative.
  bool verify = false;
  double tolerance = 1e-6;
  unsigned threads = 1;
};

struct GICCProfile {
  double rho_w = 0;
  double rho_b = 0;
  double sum_upsilon0 = 0;
  double sum_upsilon1_within = 0;
  double sum_upsilon1_between = 0;
};

struct VarianceReport {
  double var_beta = 0;     // A^-1 B A^-1 for n clusters
  double model_based = 0;  // A^-1
  double bread_b = 0;      // B
  double design_effect = 1;
  GICCProfile giccs;

  double per_cluster_variance(int n) const { return var_beta * n; }
};

struct ScoreMoments {
  double mean_alt = 0;     // per cluster E_H1 U_i++(beta0)
  double sigma2_null = 0;  // per cluster Var_H0 U_i++(beta0)
  double sigma2_alt = 0;   // per cluster Var_H1 U_i++(beta0)
  double kappa_w_null = 0, kappa_b_null = 0;
  double kappa_w_alt = 0, kappa_b_alt = 0;
};

struct Upsilons {
  std::vector<double> upsilon0;                // index j-1
  std::vector<std::vector<double>> upsilon1;   // [j-1][l-1]
};

class VarianceEngine {
 public:
  explicit VarianceEngine(Scenario scenario, QuadratureOptions opts = {});

  const Scenario& scenario() const { return sc_; }
  const QuadratureOptions& options() const { return opts_; }

  double limit_mu(double s, int j, Betas b) const;
  double q0(int j, int z, Betas b) const;
  double nu(int j, int z, double beta) const;
  double q_cov(int j, int l, int z_j, int z_l, Betas b) const;

  // Marginal terms first; copula terms only when the correlation mode is
  // generative.
  Upsilons upsilons(Betas b) const;
  GICCProfile profile(Betas b) const;

  VarianceReport variance(double beta1) const;
  ScoreMoments score_moments(double beta0, double beta1) const;
  double mean_alt(double beta0, double beta1) const;

 private:
  Upsilons compute(const QuadratureRule& rule, Betas b) const;
  double q0_on(const QuadratureRule& rule, int j, int z, Betas b) const;
  double q_cov_on(const QuadratureRule& rule, int j, int l, int z_j, int z_l,
                  Betas b) const;

  Scenario sc_;
  QuadratureOptions opts_;
  QuadratureRule rule_;
};

double design_effect(int m, int J, double rho_w, double rho_b);

VarianceReport variance_theorem1(const Scenario& sc, double beta1,
                                 QuadratureOptions opts = {});
ScoreMoments score_moments(const Scenario& sc, double beta0, double beta1,
                           QuadratureOptions opts = {});

}  // namespace swcrt
