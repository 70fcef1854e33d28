#include "swcrt/harness.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "swcrt/error.hpp"
#include "swcrt/parallel.hpp"

namespace swcrt {

TrialDesign SimConfig::trial_design() const {
  if (design) return design->with_cluster_size(m);
  return build_balanced_design(J, n, m);
}

Scenario SimConfig::scenario() const {
  Scenario sc;
  sc.design = trial_design();
  sc.hazard = {solve_lambda0(p_a, c_star), trend, beta1};
  sc.censoring = {c_star};
  sc.corr = CorrelationSpec::kendall(tau_w, tau_b);
  return sc;
}

void SimConfig::validate() const {
  if (replicates < 1) throw Error("sim.replicates", "replicates must be at least 1", "replicates");
  if (!(alpha > 0 && alpha < 1)) throw Error("request.alpha", "alpha must lie in (0, 1)", "alpha");
  scenario().validate();
}

SimConfig SimConfig::from_json(const nlohmann::json& j) {
  SimConfig c;
  auto get = [&](const char* key, auto& dst) {
    if (j.contains(key)) dst = j.at(key).get<std::decay_t<decltype(dst)>>();
  };
  static const char* known[] = {"J", "n", "m", "design", "p_a", "trend", "c_star",
                                "tau_w", "tau_b", "beta0", "beta", "beta1", "alpha",
                                "replicates", "seed", "dof", "threads", "predict"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw Error("request.unknown_field", "unknown field '" + it.key() + "'", it.key());
  }
  try {
    get("J", c.J);
    get("n", c.n);
    get("m", c.m);
    get("p_a", c.p_a);
    get("trend", c.trend);
    get("c_star", c.c_star);
    get("tau_w", c.tau_w);
    get("tau_b", c.tau_b);
    get("beta0", c.beta0);
    get("beta", c.beta1);
    get("beta1", c.beta1);
    get("alpha", c.alpha);
    get("replicates", c.replicates);
    get("seed", c.seed);
    get("threads", c.threads);
    get("predict", c.predict);
    if (j.contains("dof")) c.dof = parse_dof_rule(j.at("dof").get<std::string>());
    if (j.contains("design")) {
      c.design = parse_design_csv(j.at("design").get<std::string>(), c.m);
      c.J = c.design->periods();
      c.n = c.design->clusters();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("request.type", std::string("config field has the wrong type: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json SimConfig::to_json() const {
  nlohmann::json j = {{"J", J},         {"n", n},           {"m", m},
                      {"p_a", p_a},     {"trend", trend},   {"c_star", c_star},
                      {"tau_w", tau_w}, {"tau_b", tau_b},   {"beta0", beta0},
                      {"beta1", beta1}, {"alpha", alpha},   {"replicates", replicates},
                      {"seed", seed},   {"dof", swcrt::to_string(dof)},
                      {"threads", threads}, {"predict", predict}};
  if (design) j["design"] = design->to_csv();
  return j;
}

const std::vector<std::string>& harness_methods() {
  static const std::vector<std::string> m = {"wald_none", "wald_fg", "wald_kc",
                                             "wald_md",   "score",   "score_modified"};
  return m;
}

const MethodRate* SimResult::find(const std::string& method) const {
  for (const auto& r : rates)
    if (r.method == method) return &r;
  return nullptr;
}

namespace {

struct ReplicateOutcome {
  bool converged = false;
  bool failed = false;
  double beta = 0;
  double score = 0;
  std::vector<char> reject;
};

ReplicateOutcome run_replicate(const SimConfig& cfg, const Scenario& sc,
                               std::uint64_t r) {
  ReplicateOutcome out;
  const TrialDataset data =
      generate_trial(sc.design, sc.hazard, sc.censoring, sc.corr, cfg.seed, r);
  const CoxFit fit = fit_cox(data);
  if (!fit.converged) return out;
  out.converged = true;
  out.beta = fit.beta_hat;
  out.score = fit.score;
  try {
    for (Correction c : {Correction::none, Correction::fg, Correction::kc, Correction::md}) {
      const double v = robust_variance(fit, c, Grouping::cluster);
      out.reject.push_back(wald_t_test(fit, v, cfg.dof, cfg.beta0, cfg.alpha).reject);
    }
    const CoxEvaluation at0 = evaluate_cox(data, cfg.beta0, true);
    out.reject.push_back(robust_score_test(at0, fit.clusters, false, cfg.alpha).reject);
    out.reject.push_back(robust_score_test(at0, fit.clusters, true, cfg.alpha).reject);
  } catch (const Error&) {
    out.failed = true;
  }
  return out;
}

}  // namespace

SimResult run_study(const SimConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario sc = cfg.scenario();
  std::vector<ReplicateOutcome> outcomes(cfg.replicates);
  parallel_for(outcomes.size(), cfg.threads, [&](std::size_t r) {
    outcomes[r] = run_replicate(cfg, sc, r);
  });

  SimResult res;
  res.config = cfg;
  const auto& methods = harness_methods();
  std::vector<int> rejections(methods.size(), 0);
  double sum = 0, comp = 0;  // Neumaier summation of beta_hat
  for (const auto& o : outcomes) {
    if (!o.converged) {
      ++res.nonconverged;
      continue;
    }
    if (o.failed) {
      ++res.failed;
      continue;
    }
    ++res.used;
    const double t = sum + o.beta;
    comp += std::abs(sum) >= std::abs(o.beta) ? (sum - t) + o.beta : (o.beta - t) + sum;
    sum = t;
    res.max_abs_score = std::max(res.max_abs_score, std::abs(o.score));
    for (std::size_t k = 0; k < methods.size(); ++k) rejections[k] += o.reject[k];
  }
  if (res.used == 0)
    throw Error("sim.no_valid_replicates", "no replicate produced a usable fit");
  res.mean_beta = (sum + comp) / res.used;
  using boost::math::binomial_distribution;
  for (std::size_t k = 0; k < methods.size(); ++k) {
    MethodRate mr;
    mr.method = methods[k];
    mr.rejections = rejections[k];
    mr.valid = res.used;
    mr.rate = static_cast<double>(mr.rejections) / mr.valid;
    mr.ci_low = binomial_distribution<>::find_lower_bound_on_p(mr.valid, mr.rejections, 0.025);
    mr.ci_high = binomial_distribution<>::find_upper_bound_on_p(mr.valid, mr.rejections, 0.025);
    res.rates.push_back(mr);
  }
  if (cfg.predict) {
    PowerRequest req;
    req.scenario = sc;
    req.beta0 = cfg.beta0;
    req.beta1 = cfg.beta1;
    req.alpha = cfg.alpha;
    req.dof = cfg.dof;
    const PowerResult p = compute_power(req);
    res.predicted = {{"wald", *p.wald}, {"sm", *p.sm}, {"tang", *p.tang}};
  }
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

std::vector<Difference> compare_predicted(const SimResult& result,
                                          const std::map<std::string, double>& predictions) {
  std::vector<Difference> out;
  for (const auto& r : result.rates) {
    const bool wald = r.method.rfind("wald", 0) == 0;
    std::vector<std::string> keys = wald ? std::vector<std::string>{"wald"}
                                         : std::vector<std::string>{"sm", "tang"};
    bool matched = false;
    for (const auto& k : keys) {
      auto it = predictions.find(k);
      if (it == predictions.end()) continue;
      matched = true;
      out.push_back({r.method, k, r.rate - it->second,
                     std::sqrt(r.rate * (1 - r.rate) / r.valid)});
    }
    if (!matched)
      throw Error("sim.method_mismatch", "no prediction for empirical method " + r.method);
  }
  return out;
}

nlohmann::json SimResult::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rates)
    rows.push_back({{"method", r.method},   {"rejections", r.rejections},
                    {"valid", r.valid},     {"rate", r.rate},
                    {"ci_low", r.ci_low},   {"ci_high", r.ci_high}});
  nlohmann::json j = {{"config", config.to_json()},
                      {"rates", rows},
                      {"mean_beta", mean_beta},
                      {"nonconverged", nonconverged},
                      {"failed", failed},
                      {"used", used},
                      {"max_abs_score", max_abs_score},
                      {"wall_seconds", wall_seconds}};
  if (!predicted.empty()) {
    j["predicted"] = predicted;
    nlohmann::json diffs = nlohmann::json::array();
    for (const auto& d : compare_predicted(*this, predicted))
      diffs.push_back({{"empirical", d.empirical}, {"prediction", d.prediction},
                       {"difference", d.difference}, {"se", d.se}});
    j["differences"] = diffs;
  }
  return j;
}

std::string SimResult::to_csv() const {
  std::ostringstream out;
  out << "J,n,m,tau_w,tau_b,beta1,replicates,seed,method,rejections,valid,rate,"
         "ci_low,ci_high,predicted,difference\n";
  char buf[512];
  for (const auto& r : rates) {
    const bool wald = r.method.rfind("wald", 0) == 0;
    auto it = predicted.find(wald ? "wald" : "sm");
    std::string pred, diff;
    if (it != predicted.end()) {
      std::snprintf(buf, sizeof buf, "%.6f", it->second);
      pred = buf;
      std::snprintf(buf, sizeof buf, "%.6f", r.rate - it->second);
      diff = buf;
    }
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%g,%g,%g,%d,%llu,%s,%d,%d,%.6f,%.6f,%.6f,",
                  config.trial_design().periods(), config.trial_design().clusters(),
                  config.m, config.tau_w, config.tau_b, config.beta1, config.replicates,
                  static_cast<unsigned long long>(config.seed), r.method.c_str(),
                  r.rejections, r.valid, r.rate, r.ci_low, r.ci_high);
    out << buf << pred << ',' << diff << '\n';
  }
  return out.str();
}

}  // namespace swcrt
