#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "server.hpp"
#include "swcrt/api.hpp"
#include "swcrt/error.hpp"
#include "swcrt/harness.hpp"

using json = nlohmann::json;

namespace {

struct ModelFlags {
  int J = 0, m = 0, n = 0, quad_order = 0;
  double beta = 0, beta0 = 0, tau_w = 0, tau_b = 0, rho_w = 0, rho_b = 0;
  double pa = 0, lambda0 = 0, trend = 0, c_star = 1, alpha = 0.05;
  std::string dof = "n-2", design_file, format = "text";
  std::vector<std::string> methods;
  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app, bool with_n) {
    opts["J"] = app->add_option("--J", J, "number of periods");
    opts["m"] = app->add_option("--m", m, "cluster-period size");
    if (with_n) opts["n"] = app->add_option("--n", n, "number of clusters");
    opts["beta"] = app->add_option("--beta", beta, "log hazard ratio under H1");
    opts["beta0"] = app->add_option("--beta0", beta0, "log hazard ratio under H0");
    opts["tau_w"] = app->add_option("--tau-w", tau_w, "within-period Kendall's tau");
    opts["tau_b"] = app->add_option("--tau-b", tau_b, "between-period Kendall's tau");
    opts["rho_w"] = app->add_option("--rho-w", rho_w, "within-period g-ICC (direct mode)");
    opts["rho_b"] = app->add_option("--rho-b", rho_b, "between-period g-ICC (direct mode)");
    opts["p_a"] = app->add_option("--pa", pa, "administrative censoring proportion");
    opts["lambda0"] = app->add_option("--lambda0", lambda0, "baseline hazard in period 1");
    opts["trend"] = app->add_option("--trend", trend, "baseline hazard change per period");
    opts["c_star"] = app->add_option("--c-star", c_star, "maximum follow-up time");
    opts["alpha"] = app->add_option("--alpha", alpha, "two-sided significance level");
    opts["dof"] = app->add_option("--dof", dof, "n-1, n-2 or normal");
    opts["methods"] = app->add_option("--methods", methods, "wald, sm, tang");
    opts["quad_order"] = app->add_option("--quad-order", quad_order, "nodes per quadrature panel");
    app->add_option("--design", design_file, "design CSV (rows of 0/1, optional count column)");
    app->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
  }

  json body() const {
    json b = json::object();
    auto set = [&](const char* key, const auto& v) {
      auto it = opts.find(key);
      if (it != opts.end() && it->second->count()) b[key] = v;
    };
    set("J", J);
    set("m", m);
    set("n", n);
    set("beta", beta);
    set("beta0", beta0);
    set("tau_w", tau_w);
    set("tau_b", tau_b);
    set("rho_w", rho_w);
    set("rho_b", rho_b);
    set("p_a", pa);
    set("lambda0", lambda0);
    set("trend", trend);
    set("c_star", c_star);
    set("alpha", alpha);
    set("dof", dof);
    set("methods", methods);
    set("quad_order", quad_order);
    if (!design_file.empty()) b["design"] = read_file(design_file);
    return b;
  }

  static std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw swcrt::Error("io.open", "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

const char* label(const std::string& method) {
  if (method == "wald") return "Wald t-test";
  if (method == "sm") return "Robust score (S&M)";
  return "Robust score (Tang)";
}

void print_power(const json& r) {
  for (const char* m : {"wald", "sm", "tang"})
    if (r["power"].contains(m))
      std::printf("%-22s power %.4f\n", label(m), r["power"][m].get<double>());
  std::printf("within-period g-ICC   %.4f\n", r["giccs"]["rho_w"].get<double>());
  std::printf("between-period g-ICC  %.4f\n", r["giccs"]["rho_b"].get<double>());
  std::printf("design effect         %.4f\n", r["design_effect"].get<double>());
  std::printf("Var(beta_hat)         %.6g\n", r["var_beta"].get<double>());
}

void print_samplesize(const json& r) {
  for (const auto& d : r["details"]) {
    const std::string m = d["method"];
    std::printf("%-22s clusters %d%s\n", label(m), d["clusters"].get<int>(),
                d["needs_unbalanced"].get<bool>() ? "  (not a multiple of J-1: "
                                                    "check power with an unbalanced design)"
                                                  : "");
  }
  std::printf("within-period g-ICC   %.4f\n", r["giccs"]["rho_w"].get<double>());
  std::printf("between-period g-ICC  %.4f\n", r["giccs"]["rho_b"].get<double>());
}

void print_gicc(const json& r) {
  std::printf("within-period g-ICC   %.6f\n", r["rho_w"].get<double>());
  std::printf("between-period g-ICC  %.6f\n", r["rho_b"].get<double>());
  std::printf("design effect         %.6f\n", r["design_effect"].get<double>());
}

int fail(const swcrt::Error& e) {
  std::fprintf(stderr, "error [%s]%s%s: %s\n", e.code().c_str(),
               e.field().empty() ? "" : " field ", e.field().c_str(), e.what());
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power and sample size for stepped-wedge trials with time-to-event outcomes"};
  app.require_subcommand(1);

  ModelFlags pf, sf, gf;
  auto* power = app.add_subcommand("power", "predicted power at a given number of clusters");
  pf.add(power, true);
  auto* samplesize = app.add_subcommand("samplesize", "clusters needed for a target power");
  sf.add(samplesize, false);
  double target = 0.8;
  samplesize->add_option("--power", target, "target power")->required();
  auto* gicc = app.add_subcommand("gicc", "generalized ICCs implied by Kendall's tau");
  gf.add(gicc, false);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo study or one simulated dataset");
  std::string sim_config, out_csv, out_json, dataset_out;
  std::uint64_t dataset_replicate = 0;
  swcrt::SimConfig sim;
  std::string sim_dof = "n-2";
  simulate->add_option("--config", sim_config, "study configuration (JSON)");
  simulate->add_option("--J", sim.J);
  simulate->add_option("--n", sim.n);
  simulate->add_option("--m", sim.m);
  simulate->add_option("--beta", sim.beta1);
  simulate->add_option("--tau-w", sim.tau_w);
  simulate->add_option("--tau-b", sim.tau_b);
  simulate->add_option("--pa", sim.p_a);
  simulate->add_option("--trend", sim.trend);
  simulate->add_option("--alpha", sim.alpha);
  simulate->add_option("--dof", sim_dof);
  simulate->add_option("--replicates", sim.replicates);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--threads", sim.threads);
  simulate->add_option("--csv", out_csv, "write per-method rates as CSV");
  simulate->add_option("--json", out_json, "write the full result as JSON");
  simulate->add_option("--dataset", dataset_out, "write one simulated dataset as CSV and stop");
  simulate->add_option("--replicate", dataset_replicate, "replicate index for --dataset");

  auto* fit = app.add_subcommand("fit", "fit the stratified Cox model to a dataset CSV");
  std::string fit_file, correction = "md", grouping = "cluster", fit_dof = "n-2";
  double fit_alpha = 0.05, fit_beta0 = 0;
  fit->add_option("dataset", fit_file, "dataset CSV")->required();
  fit->add_option("--correction", correction, "none, fg, kc or md");
  fit->add_option("--grouping", grouping, "cluster or cluster-period");
  fit->add_option("--dof", fit_dof);
  fit->add_option("--alpha", fit_alpha);
  fit->add_option("--beta0", fit_beta0);

  auto* validate = app.add_subcommand("validate", "check a design CSV");
  std::string validate_file;
  validate->add_option("design", validate_file, "design CSV")->required();

  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  int port = 8080;
  std::string host = "127.0.0.1";
  serve->add_option("--port", port);
  serve->add_option("--host", host);

  CLI11_PARSE(app, argc, argv);

  try {
    if (power->parsed()) {
      const json r = swcrt::api::power(pf.body());
      pf.format == "json" ? void(std::cout << r.dump(2) << '\n') : print_power(r);
    } else if (samplesize->parsed()) {
      json b = sf.body();
      b["power"] = target;
      const json r = swcrt::api::samplesize(b);
      sf.format == "json" ? void(std::cout << r.dump(2) << '\n') : print_samplesize(r);
    } else if (gicc->parsed()) {
      const json r = swcrt::api::gicc(gf.body());
      gf.format == "json" ? void(std::cout << r.dump(2) << '\n') : print_gicc(r);
    } else if (simulate->parsed()) {
      if (!sim_config.empty()) {
        sim = swcrt::SimConfig::from_json(json::parse(ModelFlags::read_file(sim_config)));
      } else {
        sim.dof = swcrt::parse_dof_rule(sim_dof);
      }
      if (!dataset_out.empty()) {
        const swcrt::Scenario sc = sim.scenario();
        const auto data = swcrt::generate_trial(sc.design, sc.hazard, sc.censoring,
                                                sc.corr, sim.seed, dataset_replicate);
        std::ofstream out(dataset_out);
        swcrt::write_dataset_csv(out, data);
        return out ? 0 : 1;
      }
      const swcrt::SimResult res = swcrt::run_study(sim);
      if (!out_csv.empty()) std::ofstream(out_csv) << res.to_csv();
      if (!out_json.empty()) std::ofstream(out_json) << res.to_json().dump(2) << '\n';
      std::cout << res.to_csv();
      std::fprintf(stderr, "%d replicates used, %d non-converged, %.1f s\n", res.used,
                   res.nonconverged, res.wall_seconds);
    } else if (fit->parsed()) {
      std::ifstream in(fit_file);
      if (!in) throw swcrt::Error("io.open", "cannot read " + fit_file);
      const auto data = swcrt::read_dataset_csv(in);
      const auto f = swcrt::fit_cox(data);
      json out = swcrt::to_json(f);
      if (f.converged) {
        const double v = swcrt::robust_variance(f, swcrt::parse_correction(correction),
                                                swcrt::parse_grouping(grouping));
        out["robust_variance"] = v;
        out["wald"] = swcrt::to_json(
            swcrt::wald_t_test(f, v, swcrt::parse_dof_rule(fit_dof), fit_beta0, fit_alpha));
      }
      out["score_test"] =
          swcrt::to_json(swcrt::robust_score_test(data, fit_beta0, false, fit_alpha));
      std::cout << out.dump(2) << '\n';
    } else if (validate->parsed()) {
      const auto d = swcrt::parse_design_csv(ModelFlags::read_file(validate_file));
      std::printf("valid design: J=%d, %d sequences, n=%d%s\n", d.periods(),
                  d.sequence_count(), d.clusters(), d.balanced() ? " (balanced)" : "");
      std::cout << d.to_csv();
    } else if (serve->parsed()) {
      if (!swcrt::serve(host, port)) {
        std::fprintf(stderr, "cannot bind %s:%d\n", host.c_str(), port);
        return 1;
      }
    }
  } catch (const swcrt::Error& e) {
    return fail(e);
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error [request.malformed]: %s\n", e.what());
    return 2;
  }
  return 0;
}
