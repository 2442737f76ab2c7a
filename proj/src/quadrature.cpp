#include "subriemann/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "subriemann/parallel.hpp"

namespace subriemann {

namespace {

QuadratureRule build_gauss_legendre(int n) {
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre order must be positive");
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_gauss_legendre(n)).first;
  return it->second;
}

QuadratureRule composite_rule(double a, double b, int order, int panels, std::span<const double> breakpoints) {
  std::vector<double> cuts{a};
  for (double c : breakpoints)
    if (c > std::min(a, b) && c < std::max(a, b)) cuts.push_back(c);
  cuts.push_back(b);
  std::sort(cuts.begin() + 1, cuts.end() - 1);
  if (b < a) std::reverse(cuts.begin() + 1, cuts.end() - 1);
  const QuadratureRule& base = gauss_legendre(order);
  QuadratureRule r;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double h = (cuts[s + 1] - cuts[s]) / panels;
    for (int p = 0; p < panels; ++p) {
      const double lo = cuts[s] + p * h;
      for (int k = 0; k < order; ++k) {
        r.nodes.push_back(lo + 0.5 * h * (base.nodes[k] + 1.0));
        r.weights.push_back(0.5 * h * base.weights[k]);
      }
    }
  }
  return r;
}

double integrate_1d(const QuadratureRule& rule, const std::function<double(double)>& f) {
  std::vector<double> terms(rule.nodes.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = rule.weights[i] * f(rule.nodes[i]);
  return ordered_sum(terms);
}

double integrate_2d(const QuadratureRule& ru, const QuadratureRule& rv, const std::function<double(double, double)>& f) {
  const std::size_t nu = ru.nodes.size(), nv = rv.nodes.size();
  auto rows = parallel_map<double>(nu, [&](std::size_t i) {
    std::vector<double> terms(nv);
    for (std::size_t j = 0; j < nv; ++j) terms[j] = rv.weights[j] * f(ru.nodes[i], rv.nodes[j]);
    return ru.weights[i] * ordered_sum(terms);
  });
  return ordered_sum(rows);
}

}  // namespace subriemann
