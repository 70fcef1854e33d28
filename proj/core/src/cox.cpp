#include "swcrt/cox.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <map>
#include <numeric>

#include "swcrt/error.hpp"

namespace swcrt {

namespace bm = boost::math;

Correction parse_correction(const std::string& s) {
  if (s == "none") return Correction::none;
  if (s == "fg" || s == "FG") return Correction::fg;
  if (s == "kc" || s == "KC") return Correction::kc;
  if (s == "md" || s == "MD") return Correction::md;
  throw Error("request.correction", "correction must be none, fg, kc or md",
              "correction");
}

std::string to_string(Correction c) {
  switch (c) {
    case Correction::none: return "none";
    case Correction::fg: return "fg";
    case Correction::kc: return "kc";
    case Correction::md: return "md";
  }
  return "none";
}

Grouping parse_grouping(const std::string& s) {
  if (s == "cluster") return Grouping::cluster;
  if (s == "cluster-period" || s == "cluster_period") return Grouping::cluster_period;
  throw Error("request.grouping", "grouping must be cluster or cluster-period",
              "grouping");
}

std::string to_string(Grouping g) {
  return g == Grouping::cluster ? "cluster" : "cluster-period";
}

namespace {

// Per stratum, record indices ordered by time; ties broken by the sorted
// (cluster, individual) key so the result does not depend on input order.
struct Layout {
  int periods = 0;
  int clusters = 0;
  std::vector<int> cluster_rank;  // per record
  std::vector<std::vector<std::size_t>> strata;
};

Layout make_layout(const TrialDataset& data) {
  if (data.records.empty()) throw Error("cox.empty", "dataset has no records");
  Layout L;
  std::map<int, int> rank;
  for (const auto& r : data.records) {
    rank.emplace(r.cluster, 0);
    L.periods = std::max(L.periods, r.period);
  }
  int next = 0;
  for (auto& kv : rank) kv.second = next++;
  L.clusters = next;
  L.cluster_rank.reserve(data.records.size());
  L.strata.assign(L.periods, {});
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const auto& r = data.records[i];
    L.cluster_rank.push_back(rank[r.cluster]);
    L.strata[r.period - 1].push_back(i);
  }
  for (auto& s : L.strata)
    std::sort(s.begin(), s.end(), [&](std::size_t a, std::size_t b) {
      const auto &ra = data.records[a], &rb = data.records[b];
      if (ra.time != rb.time) return ra.time < rb.time;
      if (ra.cluster != rb.cluster) return ra.cluster < rb.cluster;
      return ra.individual < rb.individual;
    });
  return L;
}

CoxEvaluation evaluate(const TrialDataset& data, const Layout& L, double beta,
                       bool residuals) {
  CoxEvaluation ev;
  const std::size_t cells = static_cast<std::size_t>(L.clusters) * L.periods;
  if (residuals) {
    ev.by_cluster.residual.assign(L.clusters, 0.0);
    ev.by_cluster.information.assign(L.clusters, 0.0);
    ev.by_cluster_period.residual.assign(cells, 0.0);
    ev.by_cluster_period.information.assign(cells, 0.0);
  }
  const double er = std::exp(beta);
  for (int j = 0; j < L.periods; ++j) {
    const auto& idx = L.strata[j];
    const std::size_t N = idx.size();
    if (N == 0) continue;
    // Risk-set sums at each tie block, accumulated from the largest time.
    std::vector<double> s0(N), s1(N), s2(N);
    {
      double a0 = 0, a1 = 0, a2 = 0;
      std::size_t hi = N;
      while (hi > 0) {
        std::size_t lo = hi - 1;
        const double t = data.records[idx[lo]].time;
        while (lo > 0 && data.records[idx[lo - 1]].time == t) --lo;
        for (std::size_t q = lo; q < hi; ++q) {
          const double z = data.records[idx[q]].treatment;
          const double r = z ? er : 1.0;
          a0 += r;
          a1 += r * z;
          a2 += r * z * z;
        }
        for (std::size_t q = lo; q < hi; ++q) s0[q] = a0, s1[q] = a1, s2[q] = a2;
        hi = lo;
      }
    }
    // Forward pass: event contributions and, for residuals, the cumulative
    // hazard-type sums K0, K1, K2 over event times up to each record.
    double k0 = 0, k1 = 0, k2 = 0;
    std::size_t lo = 0;
    while (lo < N) {
      std::size_t hi = lo + 1;
      const double t = data.records[idx[lo]].time;
      while (hi < N && data.records[idx[hi]].time == t) ++hi;
      int d = 0;
      double zsum = 0;
      for (std::size_t q = lo; q < hi; ++q) {
        const auto& r = data.records[idx[q]];
        if (r.event) ++d, zsum += r.treatment;
      }
      const double zbar = s1[lo] / s0[lo];
      const double var = s2[lo] / s0[lo] - zbar * zbar;
      if (d > 0) {
        ev.events += d;
        ev.loglik += beta * zsum - d * std::log(s0[lo]);
        ev.score += zsum - d * zbar;
        ev.information += d * var;
        k0 += d / s0[lo];
        k1 += d * zbar / s0[lo];
        k2 += d * (zbar * zbar - var) / s0[lo];
      }
      if (residuals) {
        for (std::size_t q = lo; q < hi; ++q) {
          const auto& r = data.records[idx[q]];
          const double z = r.treatment;
          const double rk = z ? er : 1.0;
          double w = -rk * (z * k0 - k1);
          double a = rk * (z * z * k0 - 2 * z * k1 + k2);
          if (r.event) {
            w += z - zbar;
            a += var;
          }
          const int c = L.cluster_rank[idx[q]];
          const std::size_t cp = static_cast<std::size_t>(c) * L.periods + j;
          ev.by_cluster.residual[c] += w;
          ev.by_cluster.information[c] += a;
          ev.by_cluster_period.residual[cp] += w;
          ev.by_cluster_period.information[cp] += a;
        }
      }
      lo = hi;
    }
  }
  return ev;
}

// The partial likelihood is monotone, with its supremum at +/- infinity,
// exactly when every event carries the largest (or every event the smallest)
// covariate of its risk set.
bool monotone_likelihood(const TrialDataset& data, const Layout& L) {
  bool all_max = true, all_min = true;
  for (const auto& idx : L.strata) {
    const std::size_t N = idx.size();
    int zmax = -1, zmin = 2;
    std::size_t hi = N;
    while (hi > 0) {
      std::size_t lo = hi - 1;
      const double t = data.records[idx[lo]].time;
      while (lo > 0 && data.records[idx[lo - 1]].time == t) --lo;
      for (std::size_t q = lo; q < hi; ++q) {
        zmax = std::max(zmax, data.records[idx[q]].treatment);
        zmin = std::min(zmin, data.records[idx[q]].treatment);
      }
      for (std::size_t q = lo; q < hi; ++q) {
        const auto& r = data.records[idx[q]];
        if (!r.event) continue;
        all_max = all_max && r.treatment == zmax;
        all_min = all_min && r.treatment == zmin;
      }
      hi = lo;
    }
  }
  return all_max || all_min;
}

}  // namespace

CoxEvaluation evaluate_cox(const TrialDataset& data, double beta, bool residuals) {
  return evaluate(data, make_layout(data), beta, residuals);
}

CoxFit fit_cox(const TrialDataset& data, const CoxOptions& opts) {
  const Layout L = make_layout(data);
  CoxFit fit;
  fit.clusters = L.clusters;
  fit.periods = L.periods;

  double beta = 0;
  CoxEvaluation ev = evaluate(data, L, beta, false);
  if (ev.events == 0) throw Error("cox.no_events", "dataset has no events");
  fit.events = ev.events;
  if (!(ev.information > 0)) {
    fit.status = "no treatment variation in any stratum with events";
    fit.beta_hat = beta;
    fit.score = ev.score;
    fit.loglik = ev.loglik;
    return fit;
  }
  if (monotone_likelihood(data, L)) {
    fit.status = "estimate diverged (monotone likelihood)";
    fit.beta_hat = beta;
    fit.score = ev.score;
    fit.loglik = ev.loglik;
    return fit;
  }
  for (int it = 1; it <= opts.max_iterations; ++it) {
    fit.iterations = it;
    double step = ev.score / ev.information;
    CoxEvaluation trial = evaluate(data, L, beta + step, false);
    for (int h = 0; h < 40 && !(trial.loglik >= ev.loglik - 1e-12 * std::abs(ev.loglik)); ++h) {
      step *= 0.5;
      trial = evaluate(data, L, beta + step, false);
    }
    beta += step;
    ev = trial;
    if (!std::isfinite(beta) || std::abs(beta) > 50 || !(ev.information > 0)) {
      fit.status = "estimate diverged (monotone likelihood)";
      break;
    }
    // Stop at the tolerance, or once Newton steps reach the rounding floor.
    if (std::abs(ev.score) < opts.tolerance ||
        (std::abs(step) < 1e-15 * (1 + std::abs(beta)) && std::abs(ev.score) < 1e-8)) {
      fit.converged = true;
      fit.status = "converged";
      break;
    }
  }
  if (!fit.converged && fit.status.empty()) fit.status = "iteration limit reached";
  const CoxEvaluation full = evaluate(data, L, beta, true);
  fit.beta_hat = beta;
  fit.information = full.information;
  fit.score = full.score;
  fit.loglik = full.loglik;
  fit.by_cluster = full.by_cluster;
  fit.by_cluster_period = full.by_cluster_period;
  return fit;
}

double robust_variance(const CoxFit& fit, Correction correction, Grouping grouping,
                       double kc_bound) {
  if (!fit.converged)
    throw Error("cox.not_converged", "robust variance needs a converged fit");
  const GroupScores& g =
      grouping == Grouping::cluster ? fit.by_cluster : fit.by_cluster_period;
  const double A = fit.information;
  std::vector<double> terms;
  terms.reserve(g.residual.size());
  for (std::size_t i = 0; i < g.residual.size(); ++i) {
    const double h = g.information[i] / A;
    double c2 = 1;
    switch (correction) {
      case Correction::none: break;
      case Correction::fg:
      case Correction::md:
        if (!(h < 1))
          throw Error("cox.leverage", "group " + std::to_string(i + 1) +
                                          " has leverage " + std::to_string(h) +
                                          " >= 1; correction undefined");
        c2 = correction == Correction::fg ? 1 / (1 - h) : 1 / ((1 - h) * (1 - h));
        break;
      case Correction::kc:
        c2 = 1 / (1 - std::min(kc_bound, h));
        break;
    }
    terms.push_back(c2 * g.residual[i] * g.residual[i]);
  }
  // Canonical summation order keeps the result label-invariant to the bit.
  std::sort(terms.begin(), terms.end());
  const double meat = std::accumulate(terms.begin(), terms.end(), 0.0);
  return meat / (A * A);
}

TestResult wald_t_test(const CoxFit& fit, double variance, DofRule dof,
                       double beta0, double alpha) {
  if (!(variance > 0)) throw Error("cox.variance", "variance must be positive");
  TestResult t;
  t.method = "wald_t";
  t.estimate = fit.beta_hat;
  t.dof = dof_for(dof, fit.clusters);
  if (dof != DofRule::normal && t.dof <= 0)
    throw Error("cox.dof", "degrees of freedom must be positive");
  t.statistic = std::abs(fit.beta_hat - beta0) / std::sqrt(variance);
  if (dof == DofRule::normal)
    t.p_value = 2 * bm::cdf(bm::complement(bm::normal(), t.statistic));
  else
    t.p_value = 2 * bm::cdf(bm::complement(bm::students_t(t.dof), t.statistic));
  t.p_value = std::min(1.0, t.p_value);
  t.reject = t.p_value < alpha;
  return t;
}

TestResult robust_score_test(const CoxEvaluation& ev, int clusters, bool modified,
                             double alpha) {
  TestResult t;
  t.method = modified ? "score_modified" : "score";
  std::vector<double> sq;
  sq.reserve(ev.by_cluster.residual.size());
  for (double u : ev.by_cluster.residual) sq.push_back(u * u);
  std::sort(sq.begin(), sq.end());
  double s2 = std::accumulate(sq.begin(), sq.end(), 0.0);
  if (modified) s2 *= (clusters - 1.0) / clusters;
  if (!(s2 > 0)) throw Error("cox.score_variance", "empirical score variance is zero");
  t.estimate = ev.score;
  t.statistic = std::abs(ev.score) / std::sqrt(s2);
  t.p_value = std::min(1.0, 2 * bm::cdf(bm::complement(bm::normal(), t.statistic)));
  t.reject = t.p_value < alpha;
  return t;
}

TestResult robust_score_test(const TrialDataset& data, double beta0, bool modified,
                             double alpha) {
  const Layout L = make_layout(data);
  return robust_score_test(evaluate(data, L, beta0, true), L.clusters, modified, alpha);
}

nlohmann::json to_json(const CoxFit& fit) {
  return {{"beta_hat", fit.beta_hat},
          {"information", fit.information},
          {"score", fit.score},
          {"loglik", fit.loglik},
          {"converged", fit.converged},
          {"iterations", fit.iterations},
          {"status", fit.status},
          {"clusters", fit.clusters},
          {"periods", fit.periods},
          {"events", fit.events},
          {"cluster_residuals", fit.by_cluster.residual}};
}

nlohmann::json to_json(const TestResult& t) {
  return {{"method", t.method},     {"estimate", t.estimate}, {"statistic", t.statistic},
          {"dof", t.dof},           {"p_value", t.p_value},   {"reject", t.reject}};
}

}  // namespace swcrt
