#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>

#include "oracles.hpp"
#include "swcrt/error.hpp"
#include "swcrt/survival.hpp"

using namespace swcrt;

TEST_SUITE("survival") {

TEST_CASE("lambda0 from the period-1 control survival") {
  CHECK(solve_lambda0(0.2, 1.0) == doctest::Approx(std::log(5.0)).epsilon(1e-14));
  CHECK(solve_lambda0(0.05, 2.0) == doctest::Approx(-std::log(0.05) / 2));
  HazardSpec h{solve_lambda0(0.2, 1.0), 0.2, 0.4};
  CHECK(event_survival(1.0, 1, 0, h) == doctest::Approx(0.2));
  CHECK(h.baseline(3) == doctest::Approx(std::log(5.0) + 0.4));
  CHECK(h.rate(2, 1) == doctest::Approx((std::log(5.0) + 0.2) * std::exp(0.4)));
  CHECK(event_density(0.3, 2, 1, h) ==
        doctest::Approx(h.rate(2, 1) * event_survival(0.3, 2, 1, h)));
}

TEST_CASE("censoring survival") {
  CensoringSpec c{2.0};
  CHECK(censor_survival(0.5, c) == doctest::Approx(0.75));
  CHECK(censor_survival(2.5, c) == 0.0);
  CHECK(censor_survival(-1, c) == 1.0);
}

TEST_CASE("hazard validation") {
  HazardSpec h{0.1, -0.05, 0};
  CHECK_NOTHROW(h.validate(2));
  CHECK_THROWS_AS(h.validate(3), Error);
}

TEST_CASE("correlation ordering") {
  CHECK_NOTHROW(CorrelationSpec::kendall(0.1, 0.05).validate());
  CHECK_THROWS_AS(CorrelationSpec::kendall(0.01, 0.05).validate(), Error);
  CHECK(CorrelationSpec::kendall(0.5, 0).theta_within() == doctest::Approx(2.0));
  CHECK(CorrelationSpec::kendall(0.5, 0).theta_between() == 1.0);
}

TEST_CASE("gumbel partials against complex-step derivatives") {
  for (double theta : {1.05, 1.25, 2.0, 4.0})
    for (double s : {0.01, 0.2, 0.9})
      for (double t : {0.003, 0.5, 1.0}) {
        const double a = 1.6, b = 0.7;
        const BivariateSurvival g = gumbel_survival(s, t, a, b, theta);
        CHECK(g.F == doctest::Approx(oracle::gumbel(s, t, a, b, theta)).epsilon(1e-13));
        CHECK(g.Fs == doctest::Approx(oracle::gumbel_ds(s, t, a, b, theta)).epsilon(1e-10));
        CHECK(g.Ft == doctest::Approx(oracle::gumbel_dt(s, t, a, b, theta)).epsilon(1e-10));
        CHECK(g.f == doctest::Approx(oracle::gumbel_dst(s, t, a, b, theta)).epsilon(1e-5));
      }
}

TEST_CASE("gumbel is 2-increasing with exponential margins") {
  for (double theta : {1.0, 1.1, 3.0}) {
    for (double s = 0.05; s < 2; s += 0.15)
      for (double t = 0.05; t < 2; t += 0.15)
        CHECK(gumbel_survival(s, t, 1, 2, theta).f >= 0);
    CHECK(gumbel_survival(0.7, 0, 1.3, 2, theta).F == doctest::Approx(std::exp(-0.91)));
    CHECK(gumbel_survival(0, 0.4, 1.3, 2, theta).F == doctest::Approx(std::exp(-0.8)));
  }
  const BivariateSurvival ind = gumbel_survival(0.3, 0.6, 1, 2, 1.0);
  CHECK(ind.F == doctest::Approx(std::exp(-0.3 - 1.2)));
  CHECK(ind.f == doctest::Approx(2 * std::exp(-0.3 - 1.2)));
}

TEST_CASE("Kendall tau of the copula is 1 - 1/theta") {
  // tau = 1 - 4 int int F_s F_t ds dt for a continuous survival pair.
  boost::math::quadrature::exp_sinh<double> q;
  for (double tau : {0.1, 0.4}) {
    const double theta = 1 / (1 - tau);
    auto inner = [&](double s) {
      return q.integrate([&](double t) {
        const BivariateSurvival g = gumbel_survival(s, t, 1, 1, theta);
        return g.Fs * g.Ft;
      });
    };
    const double I = q.integrate(inner);
    CHECK(1 - 4 * I == doctest::Approx(tau).epsilon(1e-3));
  }
}

TEST_CASE("period-dependent theta selection") {
  HazardSpec h{1, 0, 0};
  const auto corr = CorrelationSpec::kendall(0.5, 0.2);
  const auto w = bivariate_event_survival(0.4, 0.5, true, 2, 0, 2, 0, h, corr);
  const auto b = bivariate_event_survival(0.4, 0.5, false, 1, 0, 2, 0, h, corr);
  CHECK(w.F == doctest::Approx(gumbel_survival(0.4, 0.5, 1, 1, 2.0).F));
  CHECK(b.F == doctest::Approx(gumbel_survival(0.4, 0.5, 1, 1, 1.25).F));
  CHECK_THROWS_AS(bivariate_event_survival(0.4, 0.5, true, 1, 0, 1, 0, h,
                                           CorrelationSpec::gicc(0.1, 0.01)),
                  Error);
}

}
