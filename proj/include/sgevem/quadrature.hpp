#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "sgevem/common.hpp"

namespace sgevem {

/// Quadrature on a reference cell. Edge rules live on [0,1] (measure 1);
/// triangle rules on the unit right triangle (measure 1/2).
struct QuadratureRule {
  enum class Flavor { edge, triangle };
  Flavor flavor = Flavor::edge;
  int degree = 0;  // polynomial exactness
  std::vector<Point2> points;  // edge rules use only x()
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const { return weights.size(); }
};

namespace detail {

inline constexpr int kMaxGaussPoints = 40;

// Gauss-Legendre nodes on [0,1] via Newton iteration on P_n.
inline QuadratureRule make_gauss_legendre(int n) {
  QuadratureRule rule;
  rule.flavor = QuadratureRule::Flavor::edge;
  rule.degree = 2 * n - 1;
  rule.points.resize(n, Point2::Zero());
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1,1] -> [0,1]; the cosine guess orders nodes descending.
    rule.points[i].x() = 0.5 * (1.0 - x);
    rule.points[n - 1 - i].x() = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

inline const QuadratureRule& gauss_legendre_cached(int n) {
  static const std::vector<QuadratureRule> table = [] {
    std::vector<QuadratureRule> t;
    t.reserve(kMaxGaussPoints + 1);
    t.emplace_back();
    for (int k = 1; k <= kMaxGaussPoints; ++k) t.push_back(make_gauss_legendre(k));
    return t;
  }();
  if (n < 1 || n > kMaxGaussPoints) throw ValidationError("Gauss rule size out of range: " + std::to_string(n));
  return table[n];
}

// Collapsed (Duffy) tensor-product rule on the unit triangle.
inline QuadratureRule make_triangle_rule(int degree) {
  const int n = (degree + 2) / 2 + ((degree + 2) % 2);
  const auto& g = gauss_legendre_cached(n);
  QuadratureRule rule;
  rule.flavor = QuadratureRule::Flavor::triangle;
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    const double u = g.points[i].x();
    for (int j = 0; j < n; ++j) {
      const double v = g.points[j].x();
      rule.points.emplace_back(u, v * (1.0 - u));
      rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - u));
    }
  }
  return rule;
}

}  // namespace detail

/// Gauss-Legendre rule on [0,1] exact to `degree`.
inline const QuadratureRule& edge_quadrature(int degree) {
  if (degree < 0) throw ValidationError("quadrature degree must be nonnegative");
  return detail::gauss_legendre_cached(degree / 2 + 1);
}

/// Triangle rule exact to `degree` on the reference triangle.
inline const QuadratureRule& triangle_quadrature(int degree) {
  static const std::vector<QuadratureRule> table = [] {
    std::vector<QuadratureRule> t;
    for (int d = 0; d <= 2 * detail::kMaxGaussPoints - 4; ++d) t.push_back(detail::make_triangle_rule(d));
    return t;
  }();
  if (degree < 0 || degree >= static_cast<int>(table.size()))
    throw ValidationError("triangle quadrature degree out of range: " + std::to_string(degree));
  return table[degree];
}

}  // namespace sgevem
