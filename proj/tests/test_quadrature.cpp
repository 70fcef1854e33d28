#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "oracles.hpp"
#include "swcrt/error.hpp"
#include "swcrt/quadrature.hpp"
#include "swcrt/variance.hpp"

using namespace swcrt;

namespace {

double integrate(const QuadratureRule& r, auto&& f) {
  double acc = 0;
  for (std::size_t i = 0; i < r.size(); ++i) acc += r.weights[i] * f(r.nodes[i]);
  return acc;
}

}  // namespace

TEST_SUITE("quadrature") {

TEST_CASE("Gauss-Legendre is exact to degree 2n-1") {
  for (int n : {1, 2, 5, 16, 64}) {
    const QuadratureRule r = gauss_legendre(n, 0.0, 2.0);
    CHECK(r.size() == static_cast<std::size_t>(n));
    const int deg = 2 * n - 1;
    const double exact = std::pow(2.0, deg + 1) / (deg + 1);
    CHECK(integrate(r, [&](double x) { return std::pow(x, deg); }) ==
          doctest::Approx(exact).epsilon(1e-13));
  }
}

TEST_CASE("graded rule resolves endpoint singularities") {
  const QuadratureRule r = graded_gauss_legendre(16, 1.0);
  CHECK(std::accumulate(r.weights.begin(), r.weights.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-14));
  for (double x : r.nodes) {
    CHECK(x > 0);
    CHECK(x < 1);
  }
  // int_0^1 s^(theta - 1) with theta close to 1.
  for (double p : {0.05, 0.11}) {
    const double got = integrate(r, [&](double s) { return std::pow(s, p); });
    CHECK(got == doctest::Approx(1 / (p + 1)).epsilon(1e-13));
  }
  // A harsher singularity still converges as the order grows.
  auto root = [](double s) { return 1 / std::sqrt(s); };
  CHECK(std::abs(integrate(r, root) / 2 - 1) < 1e-6);
  CHECK(std::abs(integrate(graded_gauss_legendre(32, 1.0), root) / 2 - 1) < 1e-10);
  const QuadratureRule c2 = graded_gauss_legendre(8, 2.5);
  CHECK(integrate(c2, [](double s) { return s * s; }) ==
        doctest::Approx(2.5 * 2.5 * 2.5 / 3).epsilon(1e-13));
}

TEST_CASE("order from the environment") {
  ::setenv("SWCRT_QUAD_ORDER", "24", 1);
  CHECK(default_quadrature_order() == 24);
  ::unsetenv("SWCRT_QUAD_ORDER");
  CHECK(default_quadrature_order() == 16);
}

TEST_CASE("q0 closed form under the null") {
  // J=3, two clusters: period 2 splits 1:1 and mu = 1/2 at beta = 0, so
  // q0(2, 0) = (1/4) int_0^1 (1 - s) lam e^{-lam s} ds with lam = ln 5.
  Scenario sc;
  sc.design = build_balanced_design(3, 2, 10);
  sc.hazard = {std::log(5.0), 0, 0};
  const VarianceEngine e(sc);
  const double lam = std::log(5.0);
  const double closed = 0.25 * (1 - (1 - std::exp(-lam)) / lam);
  CHECK(closed == doctest::Approx(0.125737).epsilon(1e-5));
  CHECK(e.q0(2, 0, {0, 0}) == doctest::Approx(closed).epsilon(1e-13));
  CHECK(e.q0(2, 1, {0, 0}) == doctest::Approx(closed).epsilon(1e-13));
  CHECK(e.q0(1, 0, {0, 0}) == 0.0);
}

TEST_CASE("q0 against adaptive quadrature under a mixed beta") {
  Scenario sc;
  sc.design = build_balanced_design(4, 3, 10);
  sc.hazard = {std::log(5.0), 0.2, 0.4};
  const VarianceEngine e(sc);
  for (int j = 2; j <= 3; ++j)
    for (int z = 0; z <= 1; ++z) {
      const Betas b{0.4, 0.1};
      const oracle::LimitMu mu{sc.design.treat_prob(j), sc.hazard.baseline(j), b.data, b.model};
      const double dr = mu.lam * std::exp(b.data * z), mr = mu.lam * std::exp(b.model * z);
      const double ref = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          [&](double s) {
            const double d = z - mu.at(s);
            return (1 - s) * d * d * std::exp(-dr * s) * mr;
          },
          0.0, 1.0, 10, 1e-14);
      CHECK(e.q0(j, z, b) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("node doubling leaves every upsilon fixed") {
  Scenario sc;
  sc.design = build_balanced_design(6, 5, 35);
  sc.hazard = {solve_lambda0(0.05, 1), 0.05, 0.4};
  sc.corr = CorrelationSpec::kendall(0.1, 0.05);
  QuadratureOptions opts;
  opts.verify = true;
  const VarianceEngine e(sc, opts);
  CHECK_NOTHROW(e.upsilons({0.4, 0.4}));
  CHECK_NOTHROW(e.upsilons({0.4, 0.0}));

  QuadratureOptions coarse;
  coarse.order = 3;
  coarse.verify = true;
  coarse.tolerance = 1e-12;
  CHECK_THROWS_AS(VarianceEngine(sc, coarse).upsilons({0.4, 0.4}), Error);
}

}
