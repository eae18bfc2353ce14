#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "sgevem/common.hpp"
#include "sgevem/mesh.hpp"
#include "sgevem/quadrature.hpp"

namespace sgevem {

/// Scaled monomials ((x - x_D)/h_D)^s, |s| <= degree, graded lexicographic:
/// 1, xi, eta, xi^2, xi*eta, eta^2, xi^3, ...
struct ScaledMonomialBasis2D {
  int degree = 2;
  Point2 center = Point2::Zero();
  double h = 1.0;

  ScaledMonomialBasis2D() = default;
  ScaledMonomialBasis2D(int deg, Point2 c, double diam) : degree(deg), center(std::move(c)), h(diam) {}
  explicit ScaledMonomialBasis2D(const ElementGeometry& g, int deg = 2) : degree(deg), center(g.centroid), h(g.diameter) {}

  [[nodiscard]] static int dimension(int r) { return (r + 1) * (r + 2) / 2; }
  [[nodiscard]] int size() const { return dimension(degree); }

  [[nodiscard]] static std::pair<int, int> exponents(int index) {
    int d = 0;
    while (dimension(d) <= index) ++d;
    const int offset = index - (d == 0 ? 0 : dimension(d - 1));
    return {d - offset, offset};
  }

  [[nodiscard]] static int index_of(int a, int b) { return (a + b == 0 ? 0 : dimension(a + b - 1)) + b; }

  [[nodiscard]] Point2 scaled(const Point2& x) const { return (x - center) / h; }
};

/// Scaled monomials ((s - s_mid)/|e|)^j on an edge, j <= degree.
struct ScaledMonomialBasis1D {
  int degree = 0;
  double length = 1.0;

  [[nodiscard]] int size() const { return degree + 1; }
  /// t is the edge parameter in [0,1].
  [[nodiscard]] double value(int j, double t) const { return std::pow(t - 0.5, j); }
};

/// Basis values and derivatives at a point. Derivative order d: 0 values,
/// 1 adds gradients (n x 2), 2 adds Hessians (n x 3: xx, xy, yy).
struct BasisEvaluation {
  Vector values;
  Matrix gradients;
  Matrix hessians;
};

inline double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

inline BasisEvaluation eval_basis(const ScaledMonomialBasis2D& basis, const Point2& x, int derivative_order) {
  if (derivative_order < 0 || derivative_order > 2) throw ValidationError("derivative order must be 0, 1 or 2");
  const int n = basis.size();
  const Point2 s = basis.scaled(x);
  const double ih = 1.0 / basis.h;
  BasisEvaluation out;
  out.values.resize(n);
  if (derivative_order >= 1) out.gradients.setZero(n, 2);
  if (derivative_order >= 2) out.hessians.setZero(n, 3);
  for (int i = 0; i < n; ++i) {
    const auto [a, b] = ScaledMonomialBasis2D::exponents(i);
    out.values[i] = ipow(s.x(), a) * ipow(s.y(), b);
    if (derivative_order >= 1) {
      if (a > 0) out.gradients(i, 0) = a * ipow(s.x(), a - 1) * ipow(s.y(), b) * ih;
      if (b > 0) out.gradients(i, 1) = b * ipow(s.x(), a) * ipow(s.y(), b - 1) * ih;
    }
    if (derivative_order >= 2) {
      if (a > 1) out.hessians(i, 0) = a * (a - 1) * ipow(s.x(), a - 2) * ipow(s.y(), b) * ih * ih;
      if (a > 0 && b > 0) out.hessians(i, 1) = a * b * ipow(s.x(), a - 1) * ipow(s.y(), b - 1) * ih * ih;
      if (b > 1) out.hessians(i, 2) = b * (b - 1) * ipow(s.x(), a) * ipow(s.y(), b - 2) * ih * ih;
    }
  }
  return out;
}

/// Evaluates a batch of points; one BasisEvaluation per point.
inline std::vector<BasisEvaluation> eval_basis(const ScaledMonomialBasis2D& basis, const std::vector<Point2>& points,
                                               int derivative_order) {
  std::vector<BasisEvaluation> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(eval_basis(basis, p, derivative_order));
  return out;
}

/// Physical quadrature points and weights on a cell, from the fan triangulation.
struct CellQuadrature {
  std::vector<Point2> points;
  std::vector<double> weights;
};

inline CellQuadrature cell_quadrature(const ElementGeometry& g, int degree) {
  const auto& ref = triangle_quadrature(degree);
  CellQuadrature q;
  q.points.reserve(ref.size() * g.vertices.size());
  q.weights.reserve(ref.size() * g.vertices.size());
  for (int i = 0; i < g.num_vertices(); ++i) {
    const auto t = g.fan_triangle(i);
    const Point2 e1 = t[1] - t[0];
    const Point2 e2 = t[2] - t[0];
    const double jac = std::abs(cross2(e1, e2));
    for (std::size_t k = 0; k < ref.size(); ++k) {
      q.points.push_back(t[0] + ref.points[k].x() * e1 + ref.points[k].y() * e2);
      q.weights.push_back(ref.weights[k] * jac);
    }
  }
  return q;
}

/// Integrates f over the cell with a rule exact for polynomials of `degree`.
/// F returns a scalar or an Eigen vector/matrix type.
template <class F>
auto integrate_polygon(F&& f, const ElementGeometry& g, int degree = 8) {
  const auto q = cell_quadrature(g, degree);
  using R = std::decay_t<decltype(f(q.points[0]))>;
  if constexpr (std::is_arithmetic_v<R>) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.points.size(); ++i) s += q.weights[i] * f(q.points[i]);
    return s;
  } else {
    auto s = (q.weights[0] * f(q.points[0])).eval();
    for (std::size_t i = 1; i < q.points.size(); ++i) s += q.weights[i] * f(q.points[i]);
    return s;
  }
}

/// Coefficients of the quadratic on an edge with given endpoint values and mean,
/// in the power basis of the edge parameter t in [0,1]: v(t) = c0 + c1 t + c2 t^2.
inline std::array<double, 3> edge_polynomial_from_dofs(double value_a, double value_b, double mean) {
  // v = a (1-t) + b t + 6 (m - (a+b)/2) t (1-t)
  const double bubble = 6.0 * (mean - 0.5 * (value_a + value_b));
  return {value_a, value_b - value_a + bubble, -bubble};
}

/// Weights of (value_a, value_b, mean) in the edge reconstruction at parameter t.
inline std::array<double, 3> edge_reconstruction_weights(double t) {
  const double b = t * (1.0 - t);
  return {1.0 - t - 3.0 * b, t - 3.0 * b, 6.0 * b};
}

/// Coefficient-space derivative maps on the scalar scaled-monomial basis of
/// a given degree: (dx * c) are the coefficients of d/dx of sum c_i m_i.
inline std::pair<Matrix, Matrix> derivative_matrices(const ScaledMonomialBasis2D& basis) {
  const int n = basis.size();
  Matrix dx = Matrix::Zero(n, n), dy = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto [a, b] = ScaledMonomialBasis2D::exponents(i);
    if (a > 0) dx(ScaledMonomialBasis2D::index_of(a - 1, b), i) = a / basis.h;
    if (b > 0) dy(ScaledMonomialBasis2D::index_of(a, b - 1), i) = b / basis.h;
  }
  return {dx, dy};
}

/// Vector polynomials p in (P_2)^2 are stored as 12 coefficients: the six
/// scalar coefficients of p_x followed by those of p_y.
inline constexpr int kScalarDim = 6;
inline constexpr int kVectorDim = 12;

/// Linear maps from (P_2)^2 coefficients to derived quantities, all expressed
/// in the same scaled basis.
///  - strain: 9 x 12, blocks (eps_xx, eps_xy, eps_yy), each in the 3 P1 coefficients
///  - div: 3 x 12, P1 coefficients
///  - grad_strain: 8 x 12, entry 4k + 2i + j holds M^k_ij = d_i eps_kj (constant)
///  - grad_div: 2 x 12, constant gradient of the divergence
struct StrainTables {
  Matrix strain;
  Matrix div;
  Matrix grad_strain;
  Matrix grad_div;
};

inline StrainTables strain_divergence_tables(const ScaledMonomialBasis2D& basis) {
  if (basis.degree != 2) throw ValidationError("strain tables are defined for the degree-2 basis");
  const auto [dx, dy] = derivative_matrices(basis);
  // Blocks acting on one component; derivatives of P2 land in P1 (first 3 rows).
  const Matrix dx1 = dx.topRows(3), dy1 = dy.topRows(3);
  StrainTables t;
  t.strain = Matrix::Zero(9, kVectorDim);
  t.strain.block(0, 0, 3, 6) = dx1;            // eps_xx = d_x u_x
  t.strain.block(3, 0, 3, 6) = 0.5 * dy1;      // eps_xy = (d_y u_x + d_x u_y)/2
  t.strain.block(3, 6, 3, 6) = 0.5 * dx1;
  t.strain.block(6, 6, 3, 6) = dy1;            // eps_yy = d_y u_y
  t.div = Matrix::Zero(3, kVectorDim);
  t.div.block(0, 0, 3, 6) = dx1;
  t.div.block(0, 6, 3, 6) = dy1;
  // Constant part of the derivative of a P1 coefficient vector.
  const Matrix dx0 = dx.block(0, 0, 1, 3), dy0 = dy.block(0, 0, 1, 3);
  auto eps = [&](int k, int j) -> Matrix {
    const int block = (k == 0 && j == 0) ? 0 : (k == 1 && j == 1) ? 2 : 1;
    return t.strain.middleRows(3 * block, 3);
  };
  t.grad_strain = Matrix::Zero(8, kVectorDim);
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) t.grad_strain.row(4 * k + 2 * i + j) = (i == 0 ? dx0 : dy0) * eps(k, j);
  t.grad_div = Matrix::Zero(2, kVectorDim);
  t.grad_div.row(0) = dx0 * t.div;
  t.grad_div.row(1) = dy0 * t.div;
  return t;
}

/// Evaluates a vector polynomial (12 coefficients) at x.
inline Point2 eval_vector_poly(const ScaledMonomialBasis2D& basis, const Vector& coeffs, const Point2& x) {
  const auto e = eval_basis(basis, x, 0);
  return {e.values.dot(coeffs.head(kScalarDim)), e.values.dot(coeffs.tail(kScalarDim))};
}

}  // namespace sgevem
