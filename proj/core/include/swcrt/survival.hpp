#pragma once

#include <cmath>

namespace swcrt {

// Exponential margins with a period-additive baseline rate:
// lambda_0j = lambda0 + trend * (j - 1).
struct HazardSpec {
  double lambda0 = 1.0;
  double trend = 0.0;
  double beta = 0.0;

  double baseline(int j) const { return lambda0 + trend * (j - 1); }
  double rate(int j, int z, double b) const { return baseline(j) * std::exp(b * z); }
  double rate(int j, int z) const { return rate(j, z, beta); }

  // Throws unless every period 1..J has a positive baseline rate.
  void validate(int J) const;
};

// Uniform loss to follow-up on (0, C*), administrative censoring at C*.
struct CensoringSpec {
  double c_star = 1.0;

  double survival(double t) const {
    return t <= 0 ? 1.0 : (t >= c_star ? 0.0 : 1.0 - t / c_star);
  }
  void validate() const;
};

enum class CorrelationMode { kendall, gicc };

struct CorrelationSpec {
  CorrelationMode mode = CorrelationMode::kendall;
  double tau_w = 0.0;
  double tau_b = 0.0;
  double rho_w = 0.0;
  double rho_b = 0.0;

  static CorrelationSpec kendall(double tau_w, double tau_b);
  static CorrelationSpec gicc(double rho_w, double rho_b);

  bool generative() const { return mode == CorrelationMode::kendall; }
  double theta_within() const { return 1.0 / (1.0 - tau_w); }
  double theta_between() const { return 1.0 / (1.0 - tau_b); }
  void validate() const;
};

// Baseline rate that leaves a fraction p_a of period-1 controls event free
// at C*.
double solve_lambda0(double p_a, double c_star);

double event_survival(double t, int j, int z, const HazardSpec& h);
double event_density(double t, int j, int z, const HazardSpec& h);
double censor_survival(double t, const CensoringSpec& c);

struct BivariateSurvival {
  double F = 1;   // P(T1 > s, T2 > t)
  double Fs = 0;  // dF/ds
  double Ft = 0;  // dF/dt
  double f = 0;   // d2F/dsdt
};

// Gumbel copula with parameter theta >= 1 applied to exponential survival
// margins with rates a and b.
BivariateSurvival gumbel_survival(double s, double t, double a, double b,
                                  double theta);

// Same-period pairs use theta_01, cross-period pairs theta_0.
BivariateSurvival bivariate_event_survival(double s, double t, bool same_period,
                                           int j, int z_j, int l, int z_l,
                                           const HazardSpec& h,
                                           const CorrelationSpec& corr);

}  // namespace swcrt
