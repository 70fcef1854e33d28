#include "swcrt/variance.hpp"

#include <cmath>
#include <string>

#include "swcrt/error.hpp"
#include "swcrt/parallel.hpp"

namespace swcrt {

void Scenario::validate() const {
  hazard.validate(design.periods());
  censoring.validate();
  corr.validate();
}

double design_effect(int m, int J, double rho_w, double rho_b) {
  return 1.0 + (m - 1) * rho_w + static_cast<double>(m) * (J - 1) * rho_b;
}

VarianceEngine::VarianceEngine(Scenario scenario, QuadratureOptions opts)
    : sc_(std::move(scenario)), opts_(opts) {
  sc_.validate();
  if (opts_.order < 2 || opts_.order > 256)
    throw Error("quadrature.order", "quadrature order must lie in [2, 256]");
  rule_ = graded_gauss_legendre(opts_.order, sc_.censoring.c_star);
}

namespace {

// mu_j(s) = p e^{bm} F1 / (p e^{bm} F1 + (1 - p) F0), survival at the data
// beta and weights at the model beta.
double mu_at(double s, double p, double lam, Betas b) {
  if (p <= 0) return 0;
  if (p >= 1) return 1;
  const double f0 = std::exp(-lam * s);
  const double f1 = std::exp(-lam * std::exp(b.data) * s);
  const double t = p * std::exp(b.model) * f1;
  return t / (t + (1 - p) * f0);
}

}  // namespace

double VarianceEngine::limit_mu(double s, int j, Betas b) const {
  if (!(s > 0 && s <= sc_.censoring.c_star))
    throw Error("varengine.time", "mu is defined on (0, C*]");
  return mu_at(s, sc_.design.treat_prob(j), sc_.hazard.baseline(j), b);
}

double VarianceEngine::q0_on(const QuadratureRule& rule, int j, int z,
                             Betas b) const {
  // Variance of one individual's martingale score: the compensator is
  // weighted at the model beta, survival follows the data beta.
  const double p = sc_.design.treat_prob(j);
  const double lam = sc_.hazard.baseline(j);
  const double data_rate = lam * std::exp(b.data * z);
  const double model_rate = lam * std::exp(b.model * z);
  double acc = 0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double s = rule.nodes[i];
    const double d = z - mu_at(s, p, lam, b);
    acc += rule.weights[i] * sc_.censoring.survival(s) * d * d *
           std::exp(-data_rate * s) * model_rate;
  }
  return acc;
}

double VarianceEngine::q0(int j, int z, Betas b) const {
  if (j < 1 || j > sc_.design.periods())
    throw Error("varengine.period", "period out of range");
  return q0_on(rule_, j, z, b);
}

double VarianceEngine::nu(int j, int z, double beta) const {
  const double p = sc_.design.treat_prob(j);
  const double lam = sc_.hazard.baseline(j);
  const double rate = lam * std::exp(beta * z);
  const Betas b{beta, beta};
  double acc = 0;
  for (std::size_t i = 0; i < rule_.size(); ++i) {
    const double s = rule_.nodes[i];
    const double mu = mu_at(s, p, lam, b);
    acc += rule_.weights[i] * sc_.censoring.survival(s) * mu * (1 - mu) * rate *
           std::exp(-rate * s);
  }
  return acc;
}

double VarianceEngine::q_cov_on(const QuadratureRule& rule, int j, int l,
                                int z_j, int z_l, Betas b) const {
  const CorrelationSpec& corr = sc_.corr;
  if (!corr.generative())
    throw Error("corr.not_generative",
                "score covariances need a generative (Kendall's tau) correlation");
  const double theta = j == l ? corr.theta_within() : corr.theta_between();
  if (theta == 1.0) return 0.0;

  // E[int int A(s) B(t) dM_k(s) dM_d(t)] with the four pieces folded into
  // F [(R_s - a)(R_t - b) - R_st], where F_s = -F R_s, F_t = -F R_t and
  // f = F (R_s R_t - R_st) for the Gumbel survival function.
  const std::size_t N = rule.size();
  const double pj = sc_.design.treat_prob(j), pl = sc_.design.treat_prob(l);
  const double lj = sc_.hazard.baseline(j), ll = sc_.hazard.baseline(l);
  const double a = lj * std::exp(b.data * z_j);
  const double c = ll * std::exp(b.data * z_l);
  std::vector<double> xs(N), xd(N), ws(N), yt(N), yd(N), wt(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double s = rule.nodes[i];
    const double g = sc_.censoring.survival(s);
    const double as = std::pow(a * s, theta - 1);
    const double cs = std::pow(c * s, theta - 1);
    xs[i] = as * a * s;
    xd[i] = as * a;
    yt[i] = cs * c * s;
    yd[i] = cs * c;
    ws[i] = rule.weights[i] * g * (z_j - mu_at(s, pj, lj, b));
    wt[i] = rule.weights[i] * g * (z_l - mu_at(s, pl, ll, b));
  }
  const double inv = 1.0 / theta;
  double total = 0;
  for (std::size_t i = 0; i < N; ++i) {
    if (ws[i] == 0) continue;
    double row = 0;
    for (std::size_t k = 0; k < N; ++k) {
      const double W = xs[i] + yt[k];
      const double Wp = std::pow(W, inv);
      const double Wq = Wp / W;
      const double Rs = Wq * xd[i];
      const double Rt = Wq * yd[k];
      const double Rst = (1 - theta) * Wq / W * xd[i] * yd[k];
      row += wt[k] * std::exp(-Wp) * ((Rs - a) * (Rt - c) - Rst);
    }
    total += ws[i] * row;
  }
  return total;
}

double VarianceEngine::q_cov(int j, int l, int z_j, int z_l, Betas b) const {
  const int J = sc_.design.periods();
  if (j < 1 || j > J || l < 1 || l > J)
    throw Error("varengine.period", "period out of range");
  return q_cov_on(rule_, j, l, z_j, z_l, b);
}

Upsilons VarianceEngine::compute(const QuadratureRule& rule, Betas b) const {
  const TrialDesign& d = sc_.design;
  const int J = d.periods();
  Upsilons u;
  u.upsilon0.assign(J, 0.0);
  u.upsilon1.assign(J, std::vector<double>(J, 0.0));
  for (int j = 1; j <= J; ++j) {
    const double p = d.treat_prob(j);
    u.upsilon0[j - 1] = (1 - p) * q0_on(rule, j, 0, b) + p * q0_on(rule, j, 1, b);
  }
  if (!sc_.corr.generative()) return u;

  // One task per (j, l, a, a') cell with positive probability, summed in a
  // fixed order afterwards.
  struct Task {
    int j, l, a, c;
    double prob;
  };
  std::vector<Task> tasks;
  for (int j = 1; j <= J; ++j)
    for (int a = 0; a <= 1; ++a) {
      const double p = a ? d.treat_prob(j) : 1 - d.treat_prob(j);
      if (p > 0) tasks.push_back({j, j, a, a, p});
    }
  for (int j = 1; j <= J; ++j)
    for (int l = j + 1; l <= J; ++l) {
      const JointProbs jp = d.joint_probs(j, l);
      for (int a = 0; a <= 1; ++a)
        for (int c = 0; c <= 1; ++c)
          if (jp(a, c) > 0) tasks.push_back({j, l, a, c, jp(a, c)});
    }
  std::vector<double> vals(tasks.size());
  parallel_for(tasks.size(), opts_.threads, [&](std::size_t i) {
    const Task& t = tasks[i];
    vals[i] = t.prob * q_cov_on(rule, t.j, t.l, t.a, t.c, b);
  });
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& t = tasks[i];
    u.upsilon1[t.j - 1][t.l - 1] += vals[i];
  }
  for (int j = 0; j < J; ++j)
    for (int l = j + 1; l < J; ++l) u.upsilon1[l][j] = u.upsilon1[j][l];
  return u;
}

Upsilons VarianceEngine::upsilons(Betas b) const {
  Upsilons u = compute(rule_, b);
  if (!opts_.verify) return u;
  const QuadratureRule fine =
      graded_gauss_legendre(2 * opts_.order, sc_.censoring.c_star);
  const Upsilons v = compute(fine, b);
  auto check = [&](double x, double y, const std::string& what) {
    if (std::abs(x - y) > opts_.tolerance * std::abs(y) + 1e-300)
      throw Error("quadrature.nonconvergence",
                  what + " changed by more than the tolerance when the "
                         "quadrature order was doubled");
  };
  const std::size_t J = u.upsilon0.size();
  for (std::size_t j = 0; j < J; ++j) {
    check(u.upsilon0[j], v.upsilon0[j], "upsilon0");
    for (std::size_t l = 0; l < J; ++l)
      check(u.upsilon1[j][l], v.upsilon1[j][l], "upsilon1");
  }
  return v;
}

namespace {

GICCProfile summarize(const Upsilons& u) {
  GICCProfile g;
  const std::size_t J = u.upsilon0.size();
  for (std::size_t j = 0; j < J; ++j) {
    g.sum_upsilon0 += u.upsilon0[j];
    g.sum_upsilon1_within += u.upsilon1[j][j];
    for (std::size_t l = 0; l < J; ++l)
      if (l != j) g.sum_upsilon1_between += u.upsilon1[j][l];
  }
  g.rho_w = g.sum_upsilon1_within / g.sum_upsilon0;
  g.rho_b = g.sum_upsilon1_between / ((J - 1) * g.sum_upsilon0);
  return g;
}

}  // namespace

GICCProfile VarianceEngine::profile(Betas b) const {
  GICCProfile g = summarize(upsilons(b));
  if (!sc_.corr.generative()) {
    g.rho_w = sc_.corr.rho_w;
    g.rho_b = sc_.corr.rho_b;
    g.sum_upsilon1_within = g.rho_w * g.sum_upsilon0;
    g.sum_upsilon1_between = g.rho_b * (sc_.design.periods() - 1) * g.sum_upsilon0;
  }
  if (!(g.sum_upsilon0 > 0))
    throw Error("varengine.degenerate", "marginal score variance is not positive");
  return g;
}

VarianceReport VarianceEngine::variance(double beta1) const {
  const GICCProfile g = profile({beta1, beta1});
  const int n = sc_.design.clusters(), m = sc_.design.cluster_size();
  const int J = sc_.design.periods();
  VarianceReport r;
  r.giccs = g;
  r.design_effect = design_effect(m, J, g.rho_w, g.rho_b);
  const double info = static_cast<double>(n) * m * g.sum_upsilon0;
  r.model_based = 1.0 / info;
  r.bread_b = info * r.design_effect;
  r.var_beta = r.design_effect / info;
  return r;
}

double VarianceEngine::mean_alt(double beta0, double beta1) const {
  const TrialDesign& d = sc_.design;
  const Betas b{beta1, beta0};
  double total = 0;
  for (int j = 1; j <= d.periods(); ++j) {
    const double p = d.treat_prob(j);
    const double lam = sc_.hazard.baseline(j);
    for (int a = 0; a <= 1; ++a) {
      const double pa = a ? p : 1 - p;
      if (pa == 0) continue;
      const double rate = lam * std::exp(beta1 * a);
      double acc = 0;
      for (std::size_t i = 0; i < rule_.size(); ++i) {
        const double s = rule_.nodes[i];
        acc += rule_.weights[i] * sc_.censoring.survival(s) *
               (a - mu_at(s, p, lam, b)) * rate * std::exp(-rate * s);
      }
      total += pa * acc;
    }
  }
  return d.cluster_size() * total;
}

ScoreMoments VarianceEngine::score_moments(double beta0, double beta1) const {
  if (!sc_.corr.generative())
    throw Error("power.method_unsupported",
                "score methods need a generative (Kendall's tau) correlation");
  const int m = sc_.design.cluster_size();
  auto sigma2 = [&](const GICCProfile& g) {
    return m * g.sum_upsilon0 + static_cast<double>(m) * (m - 1) * g.sum_upsilon1_within +
           static_cast<double>(m) * m * g.sum_upsilon1_between;
  };
  const GICCProfile h0 = profile({beta0, beta0});
  const GICCProfile h1 = beta1 == beta0 ? h0 : profile({beta1, beta0});
  ScoreMoments out;
  out.mean_alt = beta1 == beta0 ? 0.0 : mean_alt(beta0, beta1);
  out.sigma2_null = sigma2(h0);
  out.sigma2_alt = sigma2(h1);
  out.kappa_w_null = h0.rho_w;
  out.kappa_b_null = h0.rho_b;
  out.kappa_w_alt = h1.rho_w;
  out.kappa_b_alt = h1.rho_b;
  return out;
}

VarianceReport variance_theorem1(const Scenario& sc, double beta1,
                                 QuadratureOptions opts) {
  return VarianceEngine(sc, opts).variance(beta1);
}

ScoreMoments score_moments(const Scenario& sc, double beta0, double beta1,
                           QuadratureOptions opts) {
  return VarianceEngine(sc, opts).score_moments(beta0, beta1);
}

}  // namespace swcrt
