#include <doctest.h>

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "swcrt/error.hpp"
#include "swcrt/simulate.hpp"

using namespace swcrt;

TEST_SUITE("simulate") {

TEST_CASE("counter-based streams are reproducible and distinct") {
  RngStream a(1, 2, 3), b(1, 2, 3), c(1, 2, 4), d(2, 2, 3);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
  }
  RngStream u(9, 0);
  double sum = 0;
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    const double v = u.uniform();
    REQUIRE(v > 0);
    REQUIRE(v < 1);
    sum += v;
  }
  CHECK(std::abs(sum / N - 0.5) < 4 * std::sqrt(1.0 / 12 / N));
}

TEST_CASE("positive stable Laplace transform") {
  const double alpha = 0.95;
  RngStream rng(42, 0);
  const int N = 1000000;
  std::vector<double> v(N);
  for (auto& x : v) x = sample_positive_stable(alpha, rng);
  for (double t : {0.5, 1.0, 2.0}) {
    double acc = 0;
    for (double x : v) acc += std::exp(-t * x);
    CHECK(acc / N == doctest::Approx(std::exp(-std::pow(t, alpha))).epsilon(2e-3));
  }
}

TEST_CASE("index one half is the Levy law") {
  // Laplace transform exp(-sqrt(t)) is Levy with scale 1/2; its median is
  // c / (2 erfc^-1(1/2)^2).
  RngStream rng(7, 1);
  const int N = 200001;
  std::vector<double> v(N);
  for (auto& x : v) x = sample_positive_stable(0.5, rng);
  std::nth_element(v.begin(), v.begin() + N / 2, v.end());
  const double e = boost::math::erfc_inv(0.5);
  const double median = 0.5 / (2 * e * e);
  CHECK(median == doctest::Approx(1.0990).epsilon(1e-3));
  CHECK(v[N / 2] == doctest::Approx(median).epsilon(0.01));
  RngStream one(1, 1);
  CHECK(sample_positive_stable(1.0, one) == 1.0);
  CHECK_THROWS_AS(sample_positive_stable(0.0, one), Error);
}

TEST_CASE("independence path is plain exponential draws") {
  HazardSpec h{1.5, 0.1, 0.3};
  RngStream rng(5, 6, 7), replay(5, 6, 7);
  const auto t = sample_cluster({0, 1, 1}, 4, h, CorrelationSpec::kendall(0, 0), rng);
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 4; ++k)
      CHECK(t[j][k] == replay.exponential() / h.rate(j + 1, j > 0));
}

TEST_CASE("margins stay exponential under dependence") {
  HazardSpec h{std::log(5.0), 0.2, 0.4};
  const auto corr = CorrelationSpec::kendall(0.3, 0.1);
  const std::vector<int> sched{0, 1};
  std::vector<std::vector<double>> cells(2);
  for (int c = 0; c < 4000; ++c) {
    RngStream rng(11, 0, c);
    const auto t = sample_cluster(sched, 5, h, corr, rng);
    cells[0].push_back(t[0][c % 5]);
    cells[1].push_back(t[1][c % 5]);
  }
  for (int j = 0; j < 2; ++j) {
    const double D = oracle::ks_exponential(cells[j], h.rate(j + 1, sched[j]));
    CHECK(oracle::ks_pvalue(D, cells[j].size()) > 0.01);
  }
}

TEST_CASE("Kendall tau estimator") {
  RngStream rng(3, 3);
  std::vector<std::pair<double, double>> xy(1500);
  for (auto& p : xy) {
    const double z = rng.uniform();
    p = {z + 0.5 * rng.uniform(), z + 0.5 * rng.uniform()};
  }
  CHECK(empirical_kendall_tau(xy) == doctest::Approx(oracle::kendall_tau_slow(xy)).epsilon(1e-12));
  CHECK_THROWS_AS(empirical_kendall_tau({{1, 2}}), Error);
}

TEST_CASE("pair dependence matches the Kendall inputs") {
  HazardSpec h{1, 0, 0};
  const auto corr = CorrelationSpec::kendall(0.4, 0.15);
  std::vector<std::pair<double, double>> within, between;
  for (int c = 0; c < 20000; ++c) {
    RngStream rng(13, 0, c);
    const auto t = sample_cluster({0, 0}, 2, h, corr, rng);
    within.push_back({t[0][0], t[0][1]});
    between.push_back({t[0][0], t[1][1]});
  }
  CHECK(empirical_kendall_tau(within) == doctest::Approx(0.4).epsilon(0.03));
  CHECK(empirical_kendall_tau(between) == doctest::Approx(0.15).epsilon(0.08));
}

TEST_CASE("trial generation") {
  const TrialDesign d = build_balanced_design(3, 30, 50);
  HazardSpec h{std::log(5.0), 0.2, 0.0};
  const CensoringSpec cens{1.0};
  const auto corr = CorrelationSpec::kendall(0.05, 0.01);
  const TrialDataset a = generate_trial(d, h, cens, corr, 99, 3);
  const TrialDataset b = generate_trial(d, h, cens, corr, 99, 3);
  const TrialDataset c = generate_trial(d, h, cens, corr, 99, 4);
  REQUIRE(a.records.size() == 30u * 3 * 50);
  CHECK(dataset_to_csv(a) == dataset_to_csv(b));
  CHECK(dataset_to_csv(a) != dataset_to_csv(c));

  // Event fraction against int_0^1 (1 - s) r e^{-r s} ds per cell.
  double expected = 0, events = 0;
  for (const auto& r : a.records) {
    const double rate = h.rate(r.period, r.treatment);
    expected += 1 - (1 - std::exp(-rate)) / rate;
    events += r.event;
    CHECK(r.treatment == d.treatment(r.cluster - 1, r.period));
    CHECK(r.time > 0);
    CHECK(r.time <= 1.0);
  }
  const double n = static_cast<double>(a.records.size());
  CHECK(std::abs(events - expected) / n < 0.03);
}

TEST_CASE("dataset csv is bit exact") {
  const TrialDesign d = build_balanced_design(4, 3, 6);
  const TrialDataset a = generate_trial(d, {1.3, 0.1, 0.5}, {1.0},
                                        CorrelationSpec::kendall(0.2, 0.1), 1, 0);
  const TrialDataset b = dataset_from_csv(dataset_to_csv(a));
  REQUIRE(b.records.size() == a.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(b.records[i].time == a.records[i].time);
    CHECK(b.records[i].event == a.records[i].event);
    CHECK(b.records[i].cluster == a.records[i].cluster);
  }
  CHECK(b.periods == 4);
  CHECK(b.clusters == 3);
  CHECK_THROWS_AS(dataset_from_csv("a,b\n"), Error);
  CHECK_THROWS_AS(dataset_from_csv("cluster,period,individual,time,event,treatment\n1,1,x\n"),
                  Error);
}

TEST_CASE("simulation needs Kendall input") {
  RngStream rng(1, 1);
  CHECK_THROWS_AS(sample_cluster({0, 1}, 2, {}, CorrelationSpec::gicc(0.1, 0.01), rng), Error);
}

}
