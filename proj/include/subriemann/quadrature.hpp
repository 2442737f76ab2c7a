// Gauss-Legendre rules and composite tensor-product quadrature.
#pragma once

#include <functional>
#include <span>
#include <vector>

namespace subriemann {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1].
const QuadratureRule& gauss_legendre(int n);

// Composite rule on [a, b]: the interval is cut at the interior breakpoints,
// each piece is split into `panels` equal panels of `order` nodes.
QuadratureRule composite_rule(double a, double b, int order, int panels = 1,
                              std::span<const double> breakpoints = {});

double integrate_1d(const QuadratureRule& rule, const std::function<double(double)>& f);

// Tensor product integral; integrand evaluations run in parallel and are
// summed in a fixed order.
double integrate_2d(const QuadratureRule& ru, const QuadratureRule& rv,
                    const std::function<double(double, double)>& f);

}  // namespace subriemann
