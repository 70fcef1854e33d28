#include "swcrt/power.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "swcrt/error.hpp"
#include "swcrt/parallel.hpp"

namespace swcrt {

namespace bm = boost::math;

DofRule parse_dof_rule(const std::string& s) {
  if (s == "n-1") return DofRule::n_minus_1;
  if (s == "n-2") return DofRule::n_minus_2;
  if (s == "normal" || s == "z") return DofRule::normal;
  throw Error("request.dof", "dof must be one of n-1, n-2, normal", "dof");
}

std::string to_string(DofRule r) {
  switch (r) {
    case DofRule::n_minus_1: return "n-1";
    case DofRule::n_minus_2: return "n-2";
    case DofRule::normal: return "normal";
  }
  return "normal";
}

Method parse_method(const std::string& s) {
  if (s == "wald" || s == "wald_t") return Method::wald_t;
  if (s == "sm" || s == "score_sm") return Method::score_sm;
  if (s == "tang" || s == "score_tang") return Method::score_tang;
  throw Error("request.method", "unknown method '" + s + "'", "methods");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::wald_t: return "wald";
    case Method::score_sm: return "sm";
    case Method::score_tang: return "tang";
  }
  return "wald";
}

std::vector<Method> PowerRequest::resolved_methods() const {
  if (!methods.empty()) return methods;
  if (scenario.corr.generative())
    return {Method::wald_t, Method::score_sm, Method::score_tang};
  return {Method::wald_t};
}

void PowerRequest::validate() const {
  scenario.validate();
  if (!(alpha > 0 && alpha < 1))
    throw Error("request.alpha", "alpha must lie in (0, 1)", "alpha");
  if (!std::isfinite(beta0) || !std::isfinite(beta1))
    throw Error("request.beta", "effect sizes must be finite", "beta");
  for (Method m : resolved_methods())
    if (m != Method::wald_t && !scenario.corr.generative())
      throw Error("power.method_unsupported",
                  "score methods need Kendall's tau input; direct g-ICCs support "
                  "the Wald method only",
                  "methods");
}

double dof_for(DofRule rule, int n) {
  switch (rule) {
    case DofRule::n_minus_1: return n - 1;
    case DofRule::n_minus_2: return n - 2;
    case DofRule::normal: return 0;
  }
  return 0;
}

double wald_power(double effect, double var, double alpha, double dof) {
  const double ncp = std::abs(effect) / std::sqrt(var);
  if (dof <= 0) {
    const bm::normal z;
    return bm::cdf(z, ncp - bm::quantile(z, 1 - alpha / 2));
  }
  const bm::students_t t(dof);
  return bm::cdf(t, ncp - bm::quantile(t, 1 - alpha / 2));
}

double sm_power(double n, double mean_alt, double sigma2_alt, double alpha) {
  const bm::normal z;
  return bm::cdf(z, std::sqrt(n) * std::abs(mean_alt) / std::sqrt(sigma2_alt) -
                        bm::quantile(z, 1 - alpha / 2));
}

double tang_power(double n, double mean_alt, double sigma2_null,
                  double sigma2_alt, double alpha) {
  const bm::normal z;
  return bm::cdf(z, std::sqrt(n) * std::abs(mean_alt) / std::sqrt(sigma2_alt) -
                        bm::quantile(z, 1 - alpha / 2) *
                            std::sqrt(sigma2_null / sigma2_alt));
}

PowerResult compute_power(const PowerRequest& req) {
  req.validate();
  const int n = req.scenario.design.clusters();
  const VarianceEngine engine(req.scenario, req.quad);
  PowerResult out;
  out.variance = engine.variance(req.beta1);
  for (Method m : req.resolved_methods()) {
    if (m == Method::wald_t) {
      const double dof = dof_for(req.dof, n);
      if (req.dof != DofRule::normal && dof < 1)
        throw Error("power.dof", "too few clusters for the chosen degrees of freedom",
                    "n");
      out.wald = wald_power(req.beta1 - req.beta0, out.variance.var_beta,
                            req.alpha, dof);
      continue;
    }
    if (!out.moments) out.moments = engine.score_moments(req.beta0, req.beta1);
    const ScoreMoments& sm = *out.moments;
    if (m == Method::score_sm)
      out.sm = sm_power(n, sm.mean_alt, sm.sigma2_alt, req.alpha);
    else
      out.tang = tang_power(n, sm.mean_alt, sm.sigma2_null, sm.sigma2_alt, req.alpha);
  }
  return out;
}

namespace {

PowerRequest only(const PowerRequest& req, Method m) {
  PowerRequest r = req;
  r.methods = {m};
  return r;
}

}  // namespace

double power_wald(const PowerRequest& req) {
  return *compute_power(only(req, Method::wald_t)).wald;
}
double power_score_sm(const PowerRequest& req) {
  return *compute_power(only(req, Method::score_sm)).sm;
}
double power_score_tang(const PowerRequest& req) {
  return *compute_power(only(req, Method::score_tang)).tang;
}

const ClusterCount* SampleSizeResult::find(Method m) const {
  for (const auto& c : counts)
    if (c.method == m) return &c;
  return nullptr;
}

SampleSizeResult solve_clusters(const PowerRequest& req, double target_power) {
  req.validate();
  if (!(target_power >= req.alpha && target_power < 1))
    throw Error("request.power", "target power must lie in [alpha, 1)", "power");
  const bm::normal z;
  const double za = bm::quantile(z, 1 - req.alpha / 2);
  const double zp = bm::quantile(z, target_power);
  const int J = req.scenario.design.periods();
  const VarianceEngine engine(req.scenario, req.quad);

  SampleSizeResult out;
  auto add = [&](Method m, double s0, double s1, double drift) {
    if (!(std::abs(drift) > 0))
      throw Error("power.unreachable", "the effect size gives no drift; no cluster "
                                       "count reaches the target",
                  "beta");
    const double q = (za * s0 + zp * s1) / std::abs(drift);
    ClusterCount c;
    c.method = m;
    c.continuous = q > 0 ? q * q : 0;
    // Guard the ceiling against representation noise just above an integer.
    c.clusters = std::max(1, static_cast<int>(std::ceil(c.continuous * (1 - 1e-12))));
    c.needs_unbalanced = c.clusters % (J - 1) != 0;
    out.counts.push_back(c);
  };

  const VarianceReport v = engine.variance(req.beta1);
  out.giccs = v.giccs;
  out.per_cluster_variance = v.per_cluster_variance(req.scenario.design.clusters());
  for (Method m : req.resolved_methods()) {
    if (m == Method::wald_t) {
      const double s = std::sqrt(out.per_cluster_variance);
      add(m, s, s, req.beta1 - req.beta0);
      continue;
    }
    if (!out.moments) out.moments = engine.score_moments(req.beta0, req.beta1);
    const ScoreMoments& sm = *out.moments;
    const double s1 = std::sqrt(sm.sigma2_alt);
    const double s0 = m == Method::score_tang ? std::sqrt(sm.sigma2_null) : s1;
    add(m, s0, s1, sm.mean_alt);
  }
  return out;
}

SensitivityGrid sensitivity_grid(const PowerRequest& req,
                                 const std::vector<double>& tau_w,
                                 const std::vector<double>& ratio,
                                 unsigned threads) {
  if (tau_w.empty() || ratio.empty())
    throw Error("request.grid", "grid ranges must not be empty");
  for (double r : ratio)
    if (!(r >= 0 && r <= 1))
      throw Error("request.ratio", "tau_b / tau_w ratios must lie in [0, 1]", "ratio");
  for (double t : tau_w)
    if (!(t >= 0 && t < 1))
      throw Error("request.tau_w", "tau_w values must lie in [0, 1)", "tau_w");
  PowerRequest base = req;
  base.scenario.corr = CorrelationSpec::kendall(tau_w.front(), 0.0);
  base.validate();

  SensitivityGrid g;
  g.tau_w = tau_w;
  g.ratio = ratio;
  g.methods = base.resolved_methods();
  const std::size_t I = tau_w.size(), K = ratio.size();
  std::vector<PowerResult> cells(I * K);
  parallel_for(I * K, threads, [&](std::size_t c) {
    PowerRequest r = base;
    const double tw = tau_w[c / K];
    r.scenario.corr = CorrelationSpec::kendall(tw, tw * ratio[c % K]);
    cells[c] = compute_power(r);
  });
  g.power.assign(g.methods.size(), std::vector<std::vector<double>>(I, std::vector<double>(K)));
  for (std::size_t mi = 0; mi < g.methods.size(); ++mi)
    for (std::size_t c = 0; c < I * K; ++c) {
      const PowerResult& p = cells[c];
      const Method m = g.methods[mi];
      g.power[mi][c / K][c % K] =
          m == Method::wald_t ? *p.wald : (m == Method::score_sm ? *p.sm : *p.tang);
    }
  return g;
}

}  // namespace swcrt
