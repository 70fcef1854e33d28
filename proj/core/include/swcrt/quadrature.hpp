#pragma once

#include <vector>

namespace swcrt {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

// Classical n-point Gauss-Legendre rule on [lo, hi].
QuadratureRule gauss_legendre(int n, double lo = -1.0, double hi = 1.0);

// Composite Gauss-Legendre on (0, c] with panels graded geometrically
// towards 0: breakpoints 0, c*r^levels, ..., c*r, c. Copula integrands carry
// t^(theta-1) factors at the axes, which defeat a single global rule; the
// grading restores fast convergence. With levels = order, halving the panel
// ratio and doubling the per-panel order both refine the rule.
QuadratureRule graded_gauss_legendre(int order, double c, int levels = -1,
                                     double ratio = 0.25);

// Nodes per panel. Read from SWCRT_QUAD_ORDER when set, otherwise 16.
int default_quadrature_order();

}  // namespace swcrt
