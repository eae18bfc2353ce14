#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sgevem/common.hpp"
#include "sgevem/mesh.hpp"
#include "sgevem/poly.hpp"
#include "sgevem/quadrature.hpp"

namespace sgevem {

/// Lame constants and the microscopic length.
struct ModelParams {
  double lambda = 1.0;
  double mu = 1.0;
  double iota = 1.0;

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be finite and >= 0");
    if (!(mu > 0.0) || !std::isfinite(mu)) throw ValidationError("mu must be finite and > 0");
    if (!(iota > 0.0) || !(iota <= 1.0)) throw ValidationError("iota must lie in (0, 1]");
  }
};

/// Local degrees of freedom of the k = 2 lifting space on a cell with n
/// vertices. Scalar functionals are ordered
///   [vertex values (n), edge means (n), edge normal-derivative moments (n), interior mean (1)]
/// and the two displacement components are interleaved: vector index = 2 * scalar + component.
///
/// Edge means carry |e|^-1, normal moments carry no length factor and are taken
/// against the global edge normal, the interior moment carries |K|^-1.
struct DofLayout {
  int n_vertices = 0;

  [[nodiscard]] int scalar_size() const { return 3 * n_vertices + 1; }
  [[nodiscard]] int size() const { return 2 * scalar_size(); }
  [[nodiscard]] int vertex(int i) const { return i; }
  [[nodiscard]] int edge_mean(int i) const { return n_vertices + i; }
  [[nodiscard]] int edge_normal(int i) const { return 2 * n_vertices + i; }
  [[nodiscard]] int interior() const { return 3 * n_vertices; }
  [[nodiscard]] static int index(int scalar, int component) { return 2 * scalar + component; }
};

/// Everything the local builders need about one cell.
struct LocalElement {
  ElementGeometry geom;
  std::vector<int> flips;  // +1 if the outward normal of local edge i is the global normal
  ScaledMonomialBasis2D basis;
  DofLayout layout;
};

inline LocalElement make_local_element(std::span<const Point2> polygon, std::vector<int> flips = {}) {
  LocalElement el;
  el.geom = compute_geometry(polygon);
  el.flips = flips.empty() ? std::vector<int>(polygon.size(), 1) : std::move(flips);
  if (el.flips.size() != polygon.size()) throw ValidationError("one orientation flip per edge required");
  el.basis = ScaledMonomialBasis2D(el.geom, 2);
  el.layout.n_vertices = el.geom.num_vertices();
  return el;
}

inline LocalElement make_local_element(const PolygonMesh& mesh, int cell) {
  LocalElement el;
  el.geom = compute_geometry(mesh, cell);
  el.flips = mesh.cell_edge_flips(cell);
  el.basis = ScaledMonomialBasis2D(el.geom, 2);
  el.layout.n_vertices = el.geom.num_vertices();
  return el;
}

/// Test hooks for mutation checks of the projector construction.
struct ProjectorOptions {
  bool flip_vertex_jump_sign = false;
};

/// Matrices mapping local DOF vectors to polynomial coefficients.
///  D      ndof x 12: DOFs of the vector monomials
///  P1     12 x ndof: strain-energy projector onto (P2)^2
///  P2     12 x ndof: strain-gradient projector onto (P2)^2
///  Pdiv    3 x ndof: L2 projection of div onto P1
///  Pgdiv   2 x ndof: L2 projection of grad div onto (P0)^2
///  G1, G2 12 x 12: c1 and d1 on the vector monomials; M1 is the P1 Gram matrix
struct LocalProjectors {
  Matrix D, P1, P2, Pdiv, Pgdiv;
  Matrix G1, G2, M1;
};

namespace detail {

inline constexpr int kEdgeQuadDegree = 6;

inline Vector p1_values(const ScaledMonomialBasis2D& b, const Point2& x) {
  const Point2 s = b.scaled(x);
  Vector v(3);
  v << 1.0, s.x(), s.y();
  return v;
}

/// Row r with r . chi(u) = int_{dK} w(x, e) . u ds, using the quadratic edge
/// traces rebuilt from vertex values and edge means. Exact for w of degree <= 4.
template <class W>
Eigen::RowVectorXd boundary_trace_row(const LocalElement& el, W&& w) {
  const auto& g = el.geom;
  const auto& L = el.layout;
  const int n = g.num_vertices();
  const auto& q = edge_quadrature(kEdgeQuadDegree);
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(L.size());
  for (int e = 0; e < n; ++e) {
    const Point2& a = g.vertices[e];
    const Point2& b = g.vertices[(e + 1) % n];
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double t = q.points[k].x();
      const Point2 x = a + t * (b - a);
      const Point2 wx = w(x, e);
      const auto r = edge_reconstruction_weights(t);
      const double jw = q.weights[k] * g.edge_length[e];
      for (int c = 0; c < 2; ++c) {
        row(L.index(L.vertex(e), c)) += jw * wx[c] * r[0];
        row(L.index(L.vertex((e + 1) % n), c)) += jw * wx[c] * r[1];
        row(L.index(L.edge_mean(e), c)) += jw * wx[c] * r[2];
      }
    }
  }
  return row;
}

/// Solves the constrained projection
///   [G  C^T] [c ]   [B ]
///   [C  0  ] [mu] = [Bc]
/// for c (12 x ndof). Constraint rows are rescaled to G's magnitude.
inline Matrix solve_constrained(const Matrix& G, const Matrix& Cpoly, const Matrix& B, const Matrix& Bc,
                                const char* what) {
  const int n = static_cast<int>(G.rows());
  const int m = static_cast<int>(Cpoly.rows());
  const double s = G.norm() / std::max(Cpoly.norm(), 1e-300);
  Matrix K = Matrix::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = G;
  K.topRightCorner(n, m) = s * Cpoly.transpose();
  K.bottomLeftCorner(m, n) = s * Cpoly;
  Matrix rhs(n + m, B.cols());
  rhs.topRows(n) = B;
  rhs.bottomRows(m) = s * Bc;
  Eigen::FullPivLU<Matrix> lu(K);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible())
    throw DegenerateMeshError(std::string("singular constrained system in ") + what);
  return lu.solve(rhs).topRows(n);
}

}  // namespace detail

/// chi applied to the 12 vector monomials. Edge means use an exact Gauss rule;
/// the interior mean uses exact polygon integration.
inline Matrix build_dof_matrix(const LocalElement& el) {
  const auto& g = el.geom;
  const auto& L = el.layout;
  const int n = g.num_vertices();
  Matrix D = Matrix::Zero(L.size(), kVectorDim);
  const auto& q = edge_quadrature(4);
  for (int i = 0; i < n; ++i) {
    const auto ev = eval_basis(el.basis, g.vertices[i], 0);
    Vector mean = Vector::Zero(kScalarDim);
    Vector normal = Vector::Zero(kScalarDim);
    const Point2& a = g.vertices[i];
    const Point2& b = g.vertices[(i + 1) % n];
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto e = eval_basis(el.basis, Point2(a + q.points[k].x() * (b - a)), 1);
      mean += q.weights[k] * e.values;
      normal += q.weights[k] * g.edge_length[i] * (e.gradients * g.normal[i]);
    }
    normal *= el.flips[i];
    for (int c = 0; c < 2; ++c) {
      D.block(L.index(L.vertex(i), c), kScalarDim * c, 1, kScalarDim) = ev.values.transpose();
      D.block(L.index(L.edge_mean(i), c), kScalarDim * c, 1, kScalarDim) = mean.transpose();
      D.block(L.index(L.edge_normal(i), c), kScalarDim * c, 1, kScalarDim) = normal.transpose();
    }
  }
  const Vector interior =
      integrate_polygon([&](const Point2& x) { return eval_basis(el.basis, x, 0).values; }, g, 2) / g.area;
  for (int c = 0; c < 2; ++c)
    D.block(L.index(L.interior(), c), kScalarDim * c, 1, kScalarDim) = interior.transpose();
  return D;
}

/// Gram matrix of {1, xi, eta} on the cell.
inline Matrix p1_gram(const LocalElement& el) {
  return integrate_polygon(
      [&](const Point2& x) {
        const Vector v = detail::p1_values(el.basis, x);
        return (v * v.transpose()).eval();
      },
      el.geom, 2);
}

/// c1(p_a, p_b) = (eps(p_a), eps(p_b))_K on the vector monomials.
inline Matrix strain_energy_gram(const StrainTables& t, const Matrix& M1) {
  const Matrix exx = t.strain.middleRows(0, 3), exy = t.strain.middleRows(3, 3), eyy = t.strain.middleRows(6, 3);
  return exx.transpose() * M1 * exx + 2.0 * exy.transpose() * M1 * exy + eyy.transpose() * M1 * eyy;
}

/// Strain-energy projector. The right-hand side of c1(Pi u, p) = c1(u, p)
/// uses the Green identity -int_K div eps(p) . u + int_dK eps(p) n . u, and the
/// rigid-motion kernel is fixed by matching boundary moments against RM(K).
inline Matrix build_pi1(const LocalElement& el, const Matrix& D) {
  const auto& g = el.geom;
  const auto& L = el.layout;
  const auto t = strain_divergence_tables(el.basis);
  const Matrix M1 = p1_gram(el);
  const Matrix G = strain_energy_gram(t, M1);

  Matrix B = Matrix::Zero(kVectorDim, L.size());
  for (int a = 0; a < kVectorDim; ++a) {
    const Vector exx = t.strain.block(0, a, 3, 1), exy = t.strain.block(3, a, 3, 1), eyy = t.strain.block(6, a, 3, 1);
    B.row(a) = detail::boundary_trace_row(el, [&](const Point2& x, int e) -> Point2 {
      const Vector v = detail::p1_values(el.basis, x);
      const double sxx = v.dot(exx), sxy = v.dot(exy), syy = v.dot(eyy);
      const Point2& n = g.normal[e];
      return {sxx * n.x() + sxy * n.y(), sxy * n.x() + syy * n.y()};
    });
    for (int k = 0; k < 2; ++k) {
      // (div eps(p))_k = sum_j d_j eps_kj = sum_j M^k_jj
      const double div_eps = t.grad_strain(4 * k + 0, a) + t.grad_strain(4 * k + 3, a);
      B(a, L.index(L.interior(), k)) -= div_eps * g.area;
    }
  }

  Matrix Bc(3, L.size());
  const auto& basis = el.basis;
  Bc.row(0) = detail::boundary_trace_row(el, [](const Point2&, int) { return Point2(1.0, 0.0); });
  Bc.row(1) = detail::boundary_trace_row(el, [](const Point2&, int) { return Point2(0.0, 1.0); });
  Bc.row(2) = detail::boundary_trace_row(el, [&](const Point2& x, int) {
    const Point2 s = basis.scaled(x);
    return Point2(-s.y(), s.x());
  });
  return detail::solve_constrained(G, Bc * D, B, Bc, "Pi1");
}

/// Strain-gradient projector. For p in (P2)^2 the moments M^k_ij(p) = d_i eps_kj(p)
/// are constant, so d1(u, p) reduces to
///   sum_e M_nn(p) . int_e d_n u  -  sum_i [M_tn(p)](z_i) . u(z_i),
/// jumps taken CCW as (edge leaving z_i) - (edge entering z_i). The (P1)^2
/// kernel is fixed by int_dK Pi u = int_dK u and int_dK grad Pi u = int_dK grad u.
inline Matrix build_pi2(const LocalElement& el, const Matrix& D, const ProjectorOptions& opts = {}) {
  const auto& g = el.geom;
  const auto& L = el.layout;
  const int n = g.num_vertices();
  const auto t = strain_divergence_tables(el.basis);
  const Matrix G = g.area * t.grad_strain.transpose() * t.grad_strain;
  const double jump_sign = opts.flip_vertex_jump_sign ? -1.0 : 1.0;

  Matrix B = Matrix::Zero(kVectorDim, L.size());
  for (int a = 0; a < kVectorDim; ++a) {
    auto M = [&](int k, int i, int j) { return t.grad_strain(4 * k + 2 * i + j, a); };
    auto contract = [&](int k, const Point2& u, const Point2& v) {
      double s = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) s += M(k, i, j) * u[i] * v[j];
      return s;
    };
    for (int k = 0; k < 2; ++k) {
      for (int e = 0; e < n; ++e) {
        const double mnn = contract(k, g.normal[e], g.normal[e]);
        B(a, L.index(L.edge_normal(e), k)) += mnn * el.flips[e];
      }
      for (int i = 0; i < n; ++i) {
        const int leaving = i, entering = (i + n - 1) % n;
        const double jump = contract(k, g.tangent[leaving], g.normal[leaving]) -
                            contract(k, g.tangent[entering], g.normal[entering]);
        B(a, L.index(L.vertex(i), k)) -= jump_sign * jump;
      }
    }
  }

  // Constraint functionals: rows 0..1 boundary integral of u_c, rows 2 + 2c + d
  // boundary integral of d_d u_c via normal moments and tangential differences.
  Matrix Bc = Matrix::Zero(6, L.size());
  for (int c = 0; c < 2; ++c) {
    for (int e = 0; e < n; ++e) {
      const int next = (e + 1) % n;
      Bc(c, L.index(L.edge_mean(e), c)) += g.edge_length[e];
      for (int d = 0; d < 2; ++d) {
        Bc(2 + 2 * c + d, L.index(L.edge_normal(e), c)) += g.normal[e][d] * el.flips[e];
        Bc(2 + 2 * c + d, L.index(L.vertex(next), c)) += g.tangent[e][d];
        Bc(2 + 2 * c + d, L.index(L.vertex(e), c)) -= g.tangent[e][d];
      }
    }
    // Put both groups on the same length scale.
    Bc.row(c) /= g.diameter;
  }
  return detail::solve_constrained(G, Bc * D, B, Bc, "Pi2");
}

/// L2 projection of div onto P1 from (div u, q) = -(u, grad q) + (u . n, q)_dK.
inline Matrix build_pidiv(const LocalElement& el) {
  const auto& g = el.geom;
  const auto& L = el.layout;
  const Matrix M1 = p1_gram(el);
  Matrix B(3, L.size());
  for (int qi = 0; qi < 3; ++qi) {
    B.row(qi) = detail::boundary_trace_row(el, [&](const Point2& x, int e) -> Point2 {
      return detail::p1_values(el.basis, x)[qi] * g.normal[e];
    });
  }
  const double ih = 1.0 / el.basis.h;
  B(1, L.index(L.interior(), 0)) -= g.area * ih;  // grad xi = (1/h, 0)
  B(2, L.index(L.interior(), 1)) -= g.area * ih;  // grad eta = (0, 1/h)
  Eigen::LDLT<Matrix> ldlt(M1);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 1e-14 * ldlt.vectorD().maxCoeff())
    throw DegenerateMeshError("singular P1 Gram matrix in Pi0 div");
  return ldlt.solve(B);
}

/// L2 projection of grad div onto constants from
///   (grad div u, p)_K = int_dK M_0n(p) . d_n u - sum_i [M_0t(p)](z_i) . u(z_i),
/// with M_0n^j = (p.n) n_j and M_0t^j = (p.t) n_j edgewise constant.
inline Matrix build_pigraddiv(const LocalElement& el, const ProjectorOptions& opts = {}) {
  const auto& g = el.geom;
  const auto& L = el.layout;
  const int n = g.num_vertices();
  const double jump_sign = opts.flip_vertex_jump_sign ? -1.0 : 1.0;
  Matrix B = Matrix::Zero(2, L.size());
  for (int m = 0; m < 2; ++m) {
    for (int e = 0; e < n; ++e)
      for (int j = 0; j < 2; ++j)
        B(m, L.index(L.edge_normal(e), j)) += g.normal[e][m] * g.normal[e][j] * el.flips[e];
    for (int i = 0; i < n; ++i) {
      const int leaving = i, entering = (i + n - 1) % n;
      for (int j = 0; j < 2; ++j) {
        const double jump =
            g.tangent[leaving][m] * g.normal[leaving][j] - g.tangent[entering][m] * g.normal[entering][j];
        B(m, L.index(L.vertex(i), j)) -= jump_sign * jump;
      }
    }
  }
  return B / g.area;
}

inline LocalProjectors build_projectors(const LocalElement& el, const ProjectorOptions& opts = {}) {
  LocalProjectors p;
  p.D = build_dof_matrix(el);
  p.P1 = build_pi1(el, p.D);
  p.P2 = build_pi2(el, p.D, opts);
  p.Pdiv = build_pidiv(el);
  p.Pgdiv = build_pigraddiv(el, opts);
  const auto t = strain_divergence_tables(el.basis);
  p.M1 = p1_gram(el);
  p.G1 = strain_energy_gram(t, p.M1);
  p.G2 = el.geom.area * t.grad_strain.transpose() * t.grad_strain;
  return p;
}

/// S^K(v, w) = sum_i chi_i(v) chi_i(w).
inline double stabilization(const Vector& chi_v, const Vector& chi_w) { return chi_v.dot(chi_w); }

/// Matrix of S^K restricted to projection complements: (I - D P)^T (I - D P).
inline Matrix stabilization_complement(const Matrix& D, const Matrix& P) {
  const Matrix R = Matrix::Identity(D.rows(), D.rows()) - D * P;
  return R.transpose() * R;
}

/// Which constant vector stands for grad div in the lambda-weighted gradient term:
/// the L2 projection of grad div onto constants, or the gradient of the P1
/// projection of div. Both are exact on polynomials; only the first matches
/// the continuous form when tested against general local functions.
enum class GradDivForm { projected_gradient, gradient_of_projection };

/// Split bilinear forms of the local stiffness, each unweighted by material constants.
struct LocalForms {
  Matrix c1, c2, d1, d2;
};

inline LocalForms local_forms(const LocalElement& el, const LocalProjectors& p,
                              GradDivForm grad_div = GradDivForm::projected_gradient) {
  LocalForms f;
  f.c1 = p.P1.transpose() * p.G1 * p.P1 + stabilization_complement(p.D, p.P1);
  f.c2 = p.Pdiv.transpose() * p.M1 * p.Pdiv;
  f.d1 = p.P2.transpose() * p.G2 * p.P2 +
         stabilization_complement(p.D, p.P2) / (el.geom.diameter * el.geom.diameter);
  // grad of the P1 divergence projection: coefficients of xi, eta scaled by 1/h
  const Matrix grad =
      grad_div == GradDivForm::projected_gradient ? p.Pgdiv : Matrix(p.Pdiv.bottomRows(2) / el.basis.h);
  f.d2 = el.geom.area * grad.transpose() * grad;
  return f;
}

/// A_K = 2 mu c1h + lambda c2h + iota^2 (2 mu d1h + lambda d2h).
inline Matrix local_stiffness(const LocalElement& el, const LocalProjectors& p, const ModelParams& params,
                              GradDivForm grad_div = GradDivForm::projected_gradient) {
  const auto f = local_forms(el, p, grad_div);
  const double i2 = params.iota * params.iota;
  Matrix A = 2.0 * params.mu * f.c1 + params.lambda * f.c2 + i2 * (2.0 * params.mu * f.d1 + params.lambda * f.d2);
  const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(A.cwiseAbs().maxCoeff(), 1e-300))
    throw NumericalError("local stiffness is not symmetric (defect " + std::to_string(asym) + ")");
  return 0.5 * (A + A.transpose());
}

using VectorField = std::function<Point2(const Point2&)>;

/// Load vector of the piecewise-constant projection of f: only the interior-moment
/// entries are nonzero and equal |K| times the cell mean of each component.
inline Vector local_load(const LocalElement& el, const VectorField& f, int degree = 8) {
  const auto& L = el.layout;
  Vector b = Vector::Zero(L.size());
  const Point2 integral = integrate_polygon([&](const Point2& x) { return f(x); }, el.geom, degree);
  b(L.index(L.interior(), 0)) = integral.x();
  b(L.index(L.interior(), 1)) = integral.y();
  return b;
}

/// DOF vector of a polynomial (12 coefficients).
inline Vector dofs_of_polynomial(const LocalProjectors& p, const Vector& coeffs) { return p.D * coeffs; }

/// Local DOF vectors of the three rigid motions (1,0), (0,1), (-eta, xi).
inline Matrix rigid_motion_dofs(const LocalProjectors& p) {
  Matrix R = Matrix::Zero(kVectorDim, 3);
  R(0, 0) = 1.0;
  R(kScalarDim, 1) = 1.0;
  R(ScaledMonomialBasis2D::index_of(0, 1), 2) = -1.0;
  R(kScalarDim + ScaledMonomialBasis2D::index_of(1, 0), 2) = 1.0;
  return p.D * R;
}

}  // namespace sgevem
