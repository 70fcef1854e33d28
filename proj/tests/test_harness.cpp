#include <doctest.h>

#include "swcrt/error.hpp"
#include "swcrt/harness.hpp"

using namespace swcrt;

namespace {

SimConfig small() {
  SimConfig c;
  c.J = 3;
  c.n = 8;
  c.m = 12;
  c.replicates = 24;
  c.beta1 = 0.5;
  c.seed = 123;
  return c;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("results do not depend on the thread count") {
  SimConfig a = small(), b = small();
  a.threads = 1;
  b.threads = 4;
  const SimResult ra = run_study(a), rb = run_study(b);
  CHECK(ra.mean_beta == rb.mean_beta);
  CHECK(ra.used == rb.used);
  for (const auto& m : harness_methods())
    CHECK(ra.find(m)->rejections == rb.find(m)->rejections);
}

TEST_CASE("single replicate smoke") {
  SimConfig c = small();
  c.replicates = 1;
  c.predict = false;
  const SimResult r = run_study(c);
  CHECK(r.used + r.nonconverged + r.failed == 1);
  CHECK(r.predicted.empty());
  CHECK(r.rates.size() == harness_methods().size());
}

TEST_CASE("rates, intervals and predictions") {
  const SimResult r = run_study(small());
  REQUIRE(r.predicted.count("wald"));
  for (const auto& m : r.rates) {
    CHECK(m.ci_low <= m.rate);
    CHECK(m.rate <= m.ci_high);
    CHECK(m.valid == r.used);
  }
  CHECK(r.max_abs_score < 1e-8);
  const auto diffs = compare_predicted(r, r.predicted);
  // Four Wald rows against one prediction, two score rows against two.
  CHECK(diffs.size() == 8);
  for (const auto& d : diffs)
    CHECK(d.difference == doctest::Approx(r.find(d.empirical)->rate - r.predicted.at(d.prediction)));
  const auto j = r.to_json();
  CHECK(j.at("rates").size() == 6);
  CHECK(j.at("differences").size() == 8);
  CHECK(r.to_csv().find("wald_md") != std::string::npos);
}

TEST_CASE("config json") {
  const SimConfig c = SimConfig::from_json(
      {{"J", 4}, {"n", 6}, {"m", 5}, {"beta", 0.3}, {"replicates", 7}, {"dof", "n-1"}});
  CHECK(c.beta1 == 0.3);
  CHECK(c.dof == DofRule::n_minus_1);
  const SimConfig d = SimConfig::from_json(c.to_json());
  CHECK(d.to_json() == c.to_json());
  CHECK_THROWS_AS(SimConfig::from_json({{"reps", 3}}), Error);
  CHECK_THROWS_AS(SimConfig::from_json({{"J", "four"}}), Error);
  CHECK_THROWS_AS(SimConfig::from_json({{"replicates", 0}}), Error);
  const SimConfig u = SimConfig::from_json(
      {{"design", "count,p1,p2,p3\n2,0,1,1\n1,0,0,1\n"}, {"m", 4}});
  CHECK(u.trial_design().clusters() == 3);
  CHECK(u.trial_design().cluster_size() == 4);
}

}
