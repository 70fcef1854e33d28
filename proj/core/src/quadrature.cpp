#include "swcrt/quadrature.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

#include "swcrt/error.hpp"

namespace swcrt {

QuadratureRule gauss_legendre(int n, double lo, double hi) {
  if (n < 1) throw Error("quadrature.order", "quadrature order must be positive");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration from the Tricomi initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
    }
    const double w = 2.0 / ((1 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = rule.weights[n - 1 - i] = half * w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = mid;
  return rule;
}

QuadratureRule graded_gauss_legendre(int order, double c, int levels,
                                     double ratio) {
  if (levels < 0) levels = order;
  if (!(c > 0)) throw Error("quadrature.range", "integration range must be positive");
  std::vector<double> edges{0.0};
  for (int k = levels; k >= 1; --k) edges.push_back(c * std::pow(ratio, k));
  edges.push_back(c);
  QuadratureRule out;
  out.nodes.reserve(order * (edges.size() - 1));
  out.weights.reserve(order * (edges.size() - 1));
  const QuadratureRule base = gauss_legendre(order);
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    const double mid = 0.5 * (edges[p + 1] + edges[p]);
    for (int i = 0; i < order; ++i) {
      out.nodes.push_back(mid + half * base.nodes[i]);
      out.weights.push_back(half * base.weights[i]);
    }
  }
  return out;
}

int default_quadrature_order() {
  if (const char* env = std::getenv("SWCRT_QUAD_ORDER")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 2 && v <= 256) return static_cast<int>(v);
    throw Error("quadrature.env", std::string("SWCRT_QUAD_ORDER must be an integer in "
                                              "[2, 256], got '") + env + "'");
  }
  return 16;
}

}  // namespace swcrt
