#include "swcrt/api.hpp"

#include <set>

#include "swcrt/error.hpp"

namespace swcrt::api {

namespace {

const std::set<std::string> kCommonFields = {
    "J",     "m",     "n",     "design", "design_rows", "counts",  "beta",
    "beta1", "beta0", "alpha", "dof",    "tau_w",       "tau_b",   "rho_w",
    "rho_b", "p_a",   "lambda0", "trend", "c_star",     "methods", "quad_order"};

void reject_unknown(const json& body, const std::set<std::string>& extra) {
  if (!body.is_object())
    throw Error("request.malformed", "request body must be a JSON object");
  for (auto it = body.begin(); it != body.end(); ++it)
    if (!kCommonFields.count(it.key()) && !extra.count(it.key()))
      throw Error("request.unknown_field", "unknown field '" + it.key() + "'", it.key());
}

template <class T>
T field(const json& body, const char* key) {
  if (!body.contains(key)) throw Error("request.missing_field", std::string("missing field '") + key + "'", key);
  try {
    return body.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error("request.type", std::string("field '") + key + "' has the wrong type", key);
  }
}

template <class T>
T field_or(const json& body, const char* key, T fallback) {
  return body.contains(key) ? field<T>(body, key) : fallback;
}

TrialDesign parse_design(const json& body, bool need_n) {
  const int m = field<int>(body, "m");
  if (body.contains("design")) {
    TrialDesign d = parse_design_csv(field<std::string>(body, "design"), m);
    if (body.contains("J") && field<int>(body, "J") != d.periods())
      throw Error("request.design_mismatch", "J disagrees with the uploaded design", "J");
    if (body.contains("n") && field<int>(body, "n") != d.clusters())
      throw Error("request.design_mismatch", "n disagrees with the uploaded design", "n");
    return d;
  }
  if (body.contains("design_rows")) {
    auto rows = field<std::vector<std::vector<int>>>(body, "design_rows");
    std::optional<std::vector<int>> counts;
    if (body.contains("counts")) counts = field<std::vector<int>>(body, "counts");
    return parse_design_matrix(rows, counts, m);
  }
  const int J = field<int>(body, "J");
  // Sample-size solves only need allocation fractions; one cluster per
  // sequence carries them exactly.
  const int n = need_n ? field<int>(body, "n") : field_or<int>(body, "n", J - 1);
  if (!need_n && n % (J - 1) != 0) return build_balanced_design(J, J - 1, m);
  return build_balanced_design(J, n, m);
}

json profile_json(const GICCProfile& g) {
  return {{"rho_w", g.rho_w},
          {"rho_b", g.rho_b},
          {"sum_upsilon0", g.sum_upsilon0},
          {"sum_upsilon1_within", g.sum_upsilon1_within},
          {"sum_upsilon1_between", g.sum_upsilon1_between}};
}

json moments_json(const ScoreMoments& s) {
  return {{"mean_alt", s.mean_alt},
          {"sigma2_null", s.sigma2_null},
          {"sigma2_alt", s.sigma2_alt},
          {"kappa_w_null", s.kappa_w_null},
          {"kappa_b_null", s.kappa_b_null},
          {"kappa_w_alt", s.kappa_w_alt},
          {"kappa_b_alt", s.kappa_b_alt}};
}

json echo(const PowerRequest& r) {
  const Scenario& s = r.scenario;
  json j = {{"J", s.design.periods()},
            {"m", s.design.cluster_size()},
            {"n", s.design.clusters()},
            {"design", s.design.to_csv()},
            {"beta0", r.beta0},
            {"beta", r.beta1},
            {"alpha", r.alpha},
            {"dof", to_string(r.dof)},
            {"lambda0", s.hazard.lambda0},
            {"trend", s.hazard.trend},
            {"c_star", s.censoring.c_star},
            {"quad_order", r.quad.order}};
  if (s.corr.generative()) {
    j["tau_w"] = s.corr.tau_w;
    j["tau_b"] = s.corr.tau_b;
  } else {
    j["rho_w"] = s.corr.rho_w;
    j["rho_b"] = s.corr.rho_b;
  }
  json methods = json::array();
  for (Method m : r.resolved_methods()) methods.push_back(to_string(m));
  j["methods"] = methods;
  return j;
}

}  // namespace

PowerRequest parse_power_request(const json& body, bool need_n) {
  PowerRequest r;
  r.scenario.design = parse_design(body, need_n);
  const bool has_tau = body.contains("tau_w") || body.contains("tau_b");
  const bool has_rho = body.contains("rho_w") || body.contains("rho_b");
  if (has_tau && has_rho)
    throw Error("request.correlation", "give either tau_w/tau_b or rho_w/rho_b, not both",
                "tau_w");
  if (has_rho)
    r.scenario.corr = CorrelationSpec::gicc(field<double>(body, "rho_w"),
                                            field<double>(body, "rho_b"));
  else
    r.scenario.corr = CorrelationSpec::kendall(field<double>(body, "tau_w"),
                                               field<double>(body, "tau_b"));
  r.scenario.censoring.c_star = field_or<double>(body, "c_star", 1.0);
  if (body.contains("lambda0") && body.contains("p_a"))
    throw Error("request.hazard", "give either p_a or lambda0, not both", "p_a");
  r.scenario.hazard.lambda0 =
      body.contains("lambda0")
          ? field<double>(body, "lambda0")
          : solve_lambda0(field<double>(body, "p_a"), r.scenario.censoring.c_star);
  r.scenario.hazard.trend = field_or<double>(body, "trend", 0.0);
  if (body.contains("beta") && body.contains("beta1"))
    throw Error("request.beta", "give beta or beta1, not both", "beta");
  r.beta1 = body.contains("beta1") ? field<double>(body, "beta1") : field<double>(body, "beta");
  r.scenario.hazard.beta = r.beta1;
  r.beta0 = field_or<double>(body, "beta0", 0.0);
  r.alpha = field_or<double>(body, "alpha", 0.05);
  r.dof = parse_dof_rule(field_or<std::string>(body, "dof", "n-2"));
  if (body.contains("methods"))
    for (const auto& s : field<std::vector<std::string>>(body, "methods"))
      r.methods.push_back(parse_method(s));
  if (body.contains("quad_order")) {
    r.quad.order = field<int>(body, "quad_order");
    if (r.quad.order < 2 || r.quad.order > 256)
      throw Error("request.quad_order", "quad_order must lie in [2, 256]", "quad_order");
  }
  r.validate();
  return r;
}

json power(const json& body) {
  reject_unknown(body, {});
  const PowerRequest r = parse_power_request(body);
  const PowerResult p = compute_power(r);
  json pw = json::object();
  if (p.wald) pw["wald"] = *p.wald;
  if (p.sm) pw["sm"] = *p.sm;
  if (p.tang) pw["tang"] = *p.tang;
  json out = {{"power", pw},
              {"giccs", profile_json(p.variance.giccs)},
              {"design_effect", p.variance.design_effect},
              {"var_beta", p.variance.var_beta},
              {"model_based", p.variance.model_based},
              {"bread_b", p.variance.bread_b},
              {"inputs", echo(r)}};
  if (p.moments) out["moments"] = moments_json(*p.moments);
  return out;
}

json samplesize(const json& body) {
  reject_unknown(body, {"power"});
  const PowerRequest r = parse_power_request(body, false);
  const double target = field<double>(body, "power");
  const SampleSizeResult s = solve_clusters(r, target);
  json out = json::object();
  json details = json::array();
  for (const auto& c : s.counts) {
    out[to_string(c.method)] = c.clusters;
    details.push_back({{"method", to_string(c.method)},
                       {"clusters", c.clusters},
                       {"continuous", c.continuous},
                       {"needs_unbalanced", c.needs_unbalanced}});
  }
  out["details"] = details;
  out["target_power"] = target;
  out["giccs"] = profile_json(s.giccs);
  out["per_cluster_variance"] = s.per_cluster_variance;
  if (s.moments) out["moments"] = moments_json(*s.moments);
  json in = echo(r);
  in.erase("n");
  in.erase("design");
  out["inputs"] = in;
  return out;
}

json gicc(const json& body) {
  reject_unknown(body, {});
  const PowerRequest r = parse_power_request(body, false);
  const VarianceEngine engine(r.scenario, r.quad);
  const VarianceReport v = engine.variance(r.beta1);
  json out = profile_json(v.giccs);
  out["design_effect"] = v.design_effect;
  out["per_cluster_variance"] = v.per_cluster_variance(r.scenario.design.clusters());
  return out;
}

json sensitivity(const json& body) {
  reject_unknown(body, {"tau_w_values", "ratio_values"});
  json base = body;
  base.erase("tau_w_values");
  base.erase("ratio_values");
  auto tau_w = field<std::vector<double>>(body, "tau_w_values");
  auto ratio = field<std::vector<double>>(body, "ratio_values");
  if (tau_w.empty())
    throw Error("request.grid", "tau_w_values must not be empty", "tau_w_values");
  if (ratio.empty())
    throw Error("request.grid", "ratio_values must not be empty", "ratio_values");
  if (!base.contains("tau_w")) base["tau_w"] = tau_w.front();
  if (!base.contains("tau_b")) base["tau_b"] = 0.0;
  const PowerRequest r = parse_power_request(base);
  if (!r.scenario.corr.generative())
    throw Error("request.correlation", "sensitivity grids vary Kendall's tau", "rho_w");
  const SensitivityGrid g = sensitivity_grid(r, tau_w, ratio);
  json pw = json::object();
  for (std::size_t k = 0; k < g.methods.size(); ++k) pw[to_string(g.methods[k])] = g.power[k];
  return {{"tau_w_values", g.tau_w}, {"ratio_values", g.ratio}, {"power", pw}};
}

json design_validate(const json& body) {
  if (!body.is_object()) throw Error("request.malformed", "request body must be a JSON object");
  for (auto it = body.begin(); it != body.end(); ++it)
    if (it.key() != "design" && it.key() != "design_rows" && it.key() != "counts" &&
        it.key() != "m")
      throw Error("request.unknown_field", "unknown field '" + it.key() + "'", it.key());
  json b = body;
  if (!b.contains("m")) b["m"] = 1;
  if (!b.contains("design") && !b.contains("design_rows"))
    throw Error("request.missing_field", "missing field 'design'", "design");
  const TrialDesign d = parse_design(b, true);
  json probs = json::array();
  for (int j = 1; j <= d.periods(); ++j) probs.push_back(d.treat_prob(j));
  return {{"valid", true},
          {"J", d.periods()},
          {"n", d.clusters()},
          {"sequences", d.sequences()},
          {"counts", d.counts()},
          {"balanced", d.balanced()},
          {"treat_prob", probs},
          {"design", d.to_csv()}};
}

json error_body(const std::string& code, const std::string& message,
                const std::string& field) {
  json e = {{"code", code}, {"message", message}};
  if (!field.empty()) e["field"] = field;
  return {{"error", e}};
}

std::pair<int, json> dispatch(const std::string& endpoint, const std::string& body) {
  json parsed;
  try {
    parsed = json::parse(body);
  } catch (const json::parse_error& e) {
    return {400, error_body("request.malformed", std::string("body is not valid JSON: ") + e.what())};
  }
  try {
    if (endpoint == "power") return {200, power(parsed)};
    if (endpoint == "samplesize") return {200, samplesize(parsed)};
    if (endpoint == "gicc") return {200, gicc(parsed)};
    if (endpoint == "sensitivity") return {200, sensitivity(parsed)};
    if (endpoint == "design/validate") return {200, design_validate(parsed)};
    return {404, error_body("request.unknown_endpoint", "no endpoint named " + endpoint)};
  } catch (const Error& e) {
    return {400, error_body(e.code(), e.what(), e.field())};
  }
}

}  // namespace swcrt::api
