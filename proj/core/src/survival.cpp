#include "swcrt/survival.hpp"

#include <string>

#include "swcrt/error.hpp"

namespace swcrt {

void HazardSpec::validate(int J) const {
  if (!std::isfinite(lambda0) || !std::isfinite(trend) || !std::isfinite(beta))
    throw Error("hazard.not_finite", "hazard parameters must be finite");
  for (int j = 1; j <= J; ++j)
    if (!(baseline(j) > 0))
      throw Error("hazard.nonpositive",
                  "baseline hazard is not positive in period " + std::to_string(j),
                  "trend");
}

void CensoringSpec::validate() const {
  if (!(c_star > 0) || !std::isfinite(c_star))
    throw Error("censoring.c_star", "maximum follow-up must be positive", "c_star");
}

CorrelationSpec CorrelationSpec::kendall(double tau_w, double tau_b) {
  CorrelationSpec c;
  c.mode = CorrelationMode::kendall;
  c.tau_w = tau_w;
  c.tau_b = tau_b;
  c.validate();
  return c;
}

CorrelationSpec CorrelationSpec::gicc(double rho_w, double rho_b) {
  CorrelationSpec c;
  c.mode = CorrelationMode::gicc;
  c.rho_w = rho_w;
  c.rho_b = rho_b;
  c.validate();
  return c;
}

void CorrelationSpec::validate() const {
  if (mode == CorrelationMode::kendall) {
    if (!(tau_w >= 0 && tau_w < 1))
      throw Error("corr.tau_w", "tau_w must lie in [0, 1)", "tau_w");
    if (!(tau_b >= 0 && tau_b < 1))
      throw Error("corr.tau_b", "tau_b must lie in [0, 1)", "tau_b");
    if (tau_b > tau_w)
      throw Error("corr.order", "tau_b must not exceed tau_w", "tau_b");
  } else {
    if (!(rho_w > -1 && rho_w < 1))
      throw Error("corr.rho_w", "rho_w must lie in (-1, 1)", "rho_w");
    if (!(rho_b > -1 && rho_b < 1))
      throw Error("corr.rho_b", "rho_b must lie in (-1, 1)", "rho_b");
  }
}

double solve_lambda0(double p_a, double c_star) {
  if (!(p_a > 0 && p_a < 1))
    throw Error("hazard.p_a", "administrative censoring proportion must lie in (0, 1)",
                "p_a");
  if (!(c_star > 0))
    throw Error("censoring.c_star", "maximum follow-up must be positive", "c_star");
  return -std::log(p_a) / c_star;
}

double event_survival(double t, int j, int z, const HazardSpec& h) {
  if (t < 0) throw Error("survival.negative_time", "time must be non-negative");
  return std::exp(-h.rate(j, z) * t);
}

double event_density(double t, int j, int z, const HazardSpec& h) {
  return h.rate(j, z) * event_survival(t, j, z, h);
}

double censor_survival(double t, const CensoringSpec& c) {
  return c.survival(t);
}

BivariateSurvival gumbel_survival(double s, double t, double a, double b,
                                  double theta) {
  if (s < 0 || t < 0) throw Error("survival.negative_time", "time must be non-negative");
  BivariateSurvival out;
  if (s == 0 && t == 0) return out;
  if (theta == 1.0) {
    out.F = std::exp(-a * s - b * t);
    out.Fs = -a * out.F;
    out.Ft = -b * out.F;
    out.f = a * b * out.F;
    return out;
  }
  // x = (as)^theta and x/s = a (as)^(theta-1), which stays finite at s = 0.
  const double x = std::pow(a * s, theta);
  const double y = std::pow(b * t, theta);
  const double xs = a * std::pow(a * s, theta - 1);
  const double yt = b * std::pow(b * t, theta - 1);
  const double W = x + y;
  const double Wp = std::pow(W, 1.0 / theta);
  const double Wq = Wp / W;
  const double Rs = Wq * xs;
  const double Rt = Wq * yt;
  const double Rst = (1 - theta) * Wq / W * xs * yt;
  out.F = std::exp(-Wp);
  out.Fs = -out.F * Rs;
  out.Ft = -out.F * Rt;
  out.f = out.F * (Rs * Rt - Rst);
  return out;
}

BivariateSurvival bivariate_event_survival(double s, double t, bool same_period,
                                           int j, int z_j, int l, int z_l,
                                           const HazardSpec& h,
                                           const CorrelationSpec& corr) {
  if (!corr.generative())
    throw Error("corr.not_generative",
                "direct g-ICC input has no bivariate survival distribution");
  const double theta = same_period ? corr.theta_within() : corr.theta_between();
  return gumbel_survival(s, t, h.rate(j, z_j), h.rate(l, z_l), theta);
}

}  // namespace swcrt
