#pragma once

// Independent oracles for the unit tests. Nothing here calls the library's
// quadrature, basis or projector code.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "sgevem/sgevem.hpp"

namespace oracle {

using sgevem::Matrix;
using sgevem::Point2;
using sgevem::Vector;
using Polygon = std::vector<Point2>;

// Gauss-Legendre on [0,1] by Golub-Welsch.
struct Gauss {
  std::vector<double> x, w;
};

inline Gauss gauss(int n) {
  Matrix J = Matrix::Zero(n, n);
  for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(J);
  Gauss g;
  for (int i = 0; i < n; ++i) {
    g.x.push_back(0.5 * (es.eigenvalues()[i] + 1.0));
    g.w.push_back(es.eigenvectors()(0, i) * es.eigenvectors()(0, i));
  }
  return g;
}

/// Integral over a convex polygon: fan from vertex 0, collapsed Gauss product per triangle.
template <class F>
double integrate(const Polygon& p, F&& f, int n = 10) {
  const auto g = gauss(n);
  double s = 0.0;
  for (std::size_t k = 1; k + 1 < p.size(); ++k) {
    const Point2 a = p[0], b = p[k], c = p[k + 1];
    const double jac = std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double u = g.x[i], v = g.x[j] * (1.0 - g.x[i]);
        s += g.w[i] * g.w[j] * (1.0 - g.x[i]) * jac * f(Point2(a + u * (b - a) + v * (c - a)));
      }
  }
  return s;
}

inline double area(const Polygon& p) {
  return integrate(p, [](const Point2&) { return 1.0; }, 2);
}

inline Point2 centroid(const Polygon& p) {
  const double a = area(p);
  return Point2(integrate(p, [](const Point2& x) { return x.x(); }, 3) / a,
                integrate(p, [](const Point2& x) { return x.y(); }, 3) / a);
}

inline double diameter(const Polygon& p) {
  double d = 0.0;
  for (const auto& a : p)
    for (const auto& b : p) d = std::max(d, (a - b).norm());
  return d;
}

/// Random convex polygon: sorted angles on an ellipse, then an affine map.
inline Polygon random_convex_polygon(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> ang;
  const double gap = 0.25 * 2.0 * std::numbers::pi / n;
  while (true) {
    ang.clear();
    for (int i = 0; i < n; ++i) ang.push_back(2.0 * std::numbers::pi * U(rng));
    std::sort(ang.begin(), ang.end());
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      const double d = i + 1 < n ? ang[i + 1] - ang[i] : ang[0] + 2.0 * std::numbers::pi - ang[i];
      ok = ok && d > gap;
    }
    if (ok) break;
  }
  const double sx = 0.5 + U(rng), sy = 0.5 + U(rng), sh = 0.4 * (U(rng) - 0.5);
  const Point2 shift(U(rng), U(rng));
  const double scale = 0.05 + 0.3 * U(rng);
  Polygon p;
  for (double t : ang) {
    const double x = sx * std::cos(t), y = sy * std::sin(t);
    p.push_back(shift + scale * Point2(x + sh * y, y));
  }
  return p;
}

inline Polygon regular_polygon(int n, double r = 1.0, Point2 c = Point2::Zero()) {
  Polygon p;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * i / n;
    p.push_back(c + r * Point2(std::cos(t), std::sin(t)));
  }
  return p;
}

inline Polygon unit_square() { return {Point2(0, 0), Point2(1, 0), Point2(1, 1), Point2(0, 1)}; }

// ---- scaled monomials and vector fields ----

inline constexpr std::array<std::array<int, 2>, 6> kExp{{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}}};

/// Value, gradient and Hessian of a vector field; row c of J / H[c] belong to component c.
struct Jet2 {
  Point2 v = Point2::Zero();
  Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
  std::array<Eigen::Matrix2d, 2> H{Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero()};
};

using Field = std::function<Jet2(const Point2&)>;

/// Vector monomial a in (P2)^2: component a / 6 carries ((x - c)/h)^kExp[a % 6].
inline Jet2 vector_monomial(int a, const Point2& c, double h, const Point2& x) {
  const int comp = a / 6;
  const auto [i, j] = kExp[a % 6];
  const double X = (x.x() - c.x()) / h, Y = (x.y() - c.y()) / h;
  auto pw = [](double b, int e) { return e < 0 ? 0.0 : std::pow(b, e); };
  Jet2 r;
  r.v[comp] = pw(X, i) * pw(Y, j);
  r.J(comp, 0) = i * pw(X, i - 1) * pw(Y, j) / h;
  r.J(comp, 1) = j * pw(X, i) * pw(Y, j - 1) / h;
  r.H[comp](0, 0) = i * (i - 1) * pw(X, i - 2) * pw(Y, j) / (h * h);
  r.H[comp](1, 1) = j * (j - 1) * pw(X, i) * pw(Y, j - 2) / (h * h);
  r.H[comp](0, 1) = r.H[comp](1, 0) = i * j * pw(X, i - 1) * pw(Y, j - 1) / (h * h);
  return r;
}

inline Field monomial_field(int a, const Point2& c, double h) {
  return [=](const Point2& x) { return vector_monomial(a, c, h, x); };
}

/// Random polynomial field of degree <= 2 with unscaled coefficients.
inline Field random_quadratic(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::array<double, 12> c{};
  for (auto& v : c) v = U(rng);
  return [c](const Point2& x) {
    Jet2 r;
    for (int a = 0; a < 12; ++a) {
      const auto m = vector_monomial(a, Point2::Zero(), 1.0, x);
      r.v += c[a] * m.v;
      r.J += c[a] * m.J;
      r.H[0] += c[a] * m.H[0];
      r.H[1] += c[a] * m.H[1];
    }
    return r;
  };
}

inline Eigen::Matrix2d strain(const Jet2& u) { return 0.5 * (u.J + u.J.transpose()); }

/// d_i eps_kj(u), indexed [k](i, j).
inline std::array<Eigen::Matrix2d, 2> grad_strain(const Jet2& u) {
  std::array<Eigen::Matrix2d, 2> g;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) g[k](i, j) = 0.5 * (u.H[k](i, j) + u.H[j](i, k));
  return g;
}

inline double divergence(const Jet2& u) { return u.J.trace(); }
inline Point2 grad_div(const Jet2& u) {
  return Point2(u.H[0](0, 0) + u.H[1](1, 0), u.H[0](0, 1) + u.H[1](1, 1));
}

/// Continuous local form a^K(u, v).
inline double continuous_form(const Polygon& p, const Field& u, const Field& v, double lam, double mu, double iota) {
  return integrate(p, [&](const Point2& x) {
    const auto a = u(x), b = v(x);
    const auto ga = grad_strain(a), gb = grad_strain(b);
    double gg = 0.0;
    for (int k = 0; k < 2; ++k) gg += (ga[k].array() * gb[k].array()).sum();
    return 2.0 * mu * (strain(a).array() * strain(b).array()).sum() + lam * divergence(a) * divergence(b) +
           iota * iota * (2.0 * mu * gg + lam * grad_div(a).dot(grad_div(b)));
  });
}

// ---- DOFs ----

/// Outward normal of a CCW edge a -> b.
inline Point2 outward(const Point2& a, const Point2& b) {
  const Point2 d = b - a;
  return Point2(d.y(), -d.x()).normalized();
}

/// Local DOF vector of a field (interleaved components), normal moments against
/// flips[e] times the outward normal.
inline Vector local_dofs(const Polygon& p, const Field& u, const std::vector<int>& flips = {}) {
  const int n = static_cast<int>(p.size());
  const int ns = 3 * n + 1;
  Vector chi = Vector::Zero(2 * ns);
  const auto g = gauss(10);
  for (int e = 0; e < n; ++e) {
    const Point2 a = p[e], b = p[(e + 1) % n];
    const double len = (b - a).norm();
    const Point2 nrm = outward(a, b);
    const int f = flips.empty() ? 1 : flips[e];
    Point2 mean = Point2::Zero(), dn = Point2::Zero();
    for (std::size_t q = 0; q < g.x.size(); ++q) {
      const auto j = u(a + g.x[q] * (b - a));
      mean += g.w[q] * j.v;
      dn += g.w[q] * len * (j.J * nrm);
    }
    const auto va = u(a).v;
    for (int c = 0; c < 2; ++c) {
      chi[2 * e + c] = va[c];
      chi[2 * (n + e) + c] = mean[c];
      chi[2 * (2 * n + e) + c] = f * dn[c];
    }
  }
  const double A = area(p);
  for (int c = 0; c < 2; ++c) chi[2 * (3 * n) + c] = integrate(p, [&](const Point2& x) { return u(x).v[c]; }) / A;
  return chi;
}

/// DOF matrix of the 12 scaled vector monomials.
inline Matrix dof_matrix(const Polygon& p, const std::vector<int>& flips = {}) {
  const Point2 c = centroid(p);
  const double h = diameter(p);
  Matrix D(2 * (3 * p.size() + 1), 12);
  for (int a = 0; a < 12; ++a) D.col(a) = local_dofs(p, monomial_field(a, c, h), flips);
  return D;
}

/// Quadratic edge trace rebuilt from (value at a, value at b, mean).
inline Point2 edge_trace(const Vector& chi, int n, int e, double t) {
  const int e1 = (e + 1) % n;
  Point2 r;
  for (int c = 0; c < 2; ++c) {
    const double va = chi[2 * e + c], vb = chi[2 * e1 + c], m = chi[2 * (n + e) + c];
    // unique quadratic with those endpoint values and mean
    const double lin = va * (1 - t) + vb * t;
    r[c] = lin + 6.0 * (m - 0.5 * (va + vb)) * t * (1 - t);
  }
  return r;
}

/// Boundary integral of w . u with u rebuilt from chi.
template <class W>
double boundary_pairing(const Polygon& p, const Vector& chi, W&& w) {
  const int n = static_cast<int>(p.size());
  const auto g = gauss(8);
  double s = 0.0;
  for (int e = 0; e < n; ++e) {
    const Point2 a = p[e], b = p[(e + 1) % n];
    const double len = (b - a).norm();
    for (std::size_t q = 0; q < g.x.size(); ++q) {
      const Point2 x = a + g.x[q] * (b - a);
      s += g.w[q] * len * w(x, outward(a, b)).dot(edge_trace(chi, n, e, g.x[q]));
    }
  }
  return s;
}

/// Saddle-point solve [G C^T; C 0][c; m] = [r; k] without rescaling.
inline Vector kkt(const Matrix& G, const Matrix& C, const Vector& r, const Vector& k) {
  const int n = G.rows(), m = C.rows();
  Matrix K = Matrix::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = G;
  K.topRightCorner(n, m) = C.transpose();
  K.bottomLeftCorner(m, n) = C;
  Vector rhs(n + m);
  rhs << r, k;
  return K.fullPivLu().solve(rhs).head(n);
}

/// Strain-energy projection of a DOF vector by a dense saddle-point solve.
inline Vector pi1(const Polygon& p, const Vector& chi) {
  const int n = static_cast<int>(p.size());
  const Point2 c = centroid(p);
  const double h = diameter(p), A = area(p);
  Matrix G(12, 12);
  Vector r(12);
  for (int a = 0; a < 12; ++a) {
    for (int b = 0; b < 12; ++b)
      G(a, b) = integrate(p, [&](const Point2& x) {
        return (strain(vector_monomial(a, c, h, x)).array() * strain(vector_monomial(b, c, h, x)).array()).sum();
      }, 4);
    const auto gs = grad_strain(vector_monomial(a, c, h, c));
    const Point2 div_eps(gs[0](0, 0) + gs[0](1, 1), gs[1](0, 0) + gs[1](1, 1));
    r[a] = -A * (div_eps[0] * chi[2 * 3 * n] + div_eps[1] * chi[2 * 3 * n + 1]) +
           boundary_pairing(p, chi, [&](const Point2& x, const Point2& nrm) {
             return Point2(strain(vector_monomial(a, c, h, x)) * nrm);
           });
  }
  auto rigid = [&](int m) {
    return [&, m](const Point2& x, const Point2&) -> Point2 {
      if (m == 0) return Point2(1, 0);
      if (m == 1) return Point2(0, 1);
      return Point2(-(x.y() - c.y()) / h, (x.x() - c.x()) / h);
    };
  };
  const Matrix D = dof_matrix(p);
  Matrix C(3, 12);
  Vector k(3);
  for (int m = 0; m < 3; ++m) {
    for (int a = 0; a < 12; ++a) C(m, a) = boundary_pairing(p, Vector(D.col(a)), rigid(m));
    k[m] = boundary_pairing(p, chi, rigid(m));
  }
  return kkt(G, C, r, k);
}

/// Strain-gradient projection by a dense saddle-point solve, right-hand side
/// from the edge identity d1(u, p) = int_dK n_i d_j u_k M^k_ij.
inline Vector pi2(const Polygon& p, const Vector& chi, const std::vector<int>& flips = {}) {
  const int n = static_cast<int>(p.size());
  const Point2 c = centroid(p);
  const double h = diameter(p), A = area(p);
  auto fl = [&](int e) { return flips.empty() ? 1 : flips[e]; };
  auto vert = [&](int i, int comp) { return chi[2 * (i % n) + comp]; };
  Matrix G(12, 12);
  Vector r = Vector::Zero(12);
  for (int a = 0; a < 12; ++a) {
    const auto Ma = grad_strain(vector_monomial(a, c, h, c));
    for (int b = 0; b < 12; ++b) {
      const auto Mb = grad_strain(vector_monomial(b, c, h, c));
      G(a, b) = A * ((Ma[0].array() * Mb[0].array()).sum() + (Ma[1].array() * Mb[1].array()).sum());
    }
    for (int e = 0; e < n; ++e) {
      const Point2 za = p[e], zb = p[(e + 1) % n];
      const Point2 nrm = outward(za, zb), t = (zb - za).normalized();
      for (int k = 0; k < 2; ++k) {
        const double mnn = nrm.dot(Ma[k] * nrm), mnt = nrm.dot(Ma[k] * t);
        r[a] += mnn * fl(e) * chi[2 * (2 * n + e) + k] + mnt * (vert(e + 1, k) - vert(e, k));
      }
    }
  }
  // constraints: int_dK u_c and int_dK grad u_c
  auto constraints = [&](const Vector& x) {
    Vector k(6);
    for (int comp = 0; comp < 2; ++comp) {
      double s = 0.0;
      Point2 g = Point2::Zero();
      for (int e = 0; e < n; ++e) {
        const Point2 za = p[e], zb = p[(e + 1) % n];
        const double len = (zb - za).norm();
        s += len * x[2 * (n + e) + comp];
        g += outward(za, zb) * fl(e) * x[2 * (2 * n + e) + comp] +
             (zb - za).normalized() * (x[2 * ((e + 1) % n) + comp] - x[2 * e + comp]);
      }
      k[comp] = s;
      k[2 + 2 * comp] = g.x();
      k[3 + 2 * comp] = g.y();
    }
    return k;
  };
  const Matrix D = dof_matrix(p, flips);
  Matrix C(6, 12);
  for (int a = 0; a < 12; ++a) C.col(a) = constraints(D.col(a));
  return kkt(G, C, r, constraints(chi));
}

/// Rigid-motion DOF vectors.
inline Matrix rigid_dofs(const Polygon& p, const std::vector<int>& flips = {}) {
  Matrix R(2 * (3 * p.size() + 1), 3);
  R.col(0) = local_dofs(p, [](const Point2&) { Jet2 j; j.v = Point2(1, 0); return j; }, flips);
  R.col(1) = local_dofs(p, [](const Point2&) { Jet2 j; j.v = Point2(0, 1); return j; }, flips);
  R.col(2) = local_dofs(p, [](const Point2& x) {
    Jet2 j;
    j.v = Point2(-x.y(), x.x());
    j.J << 0, -1, 1, 0;
    return j;
  }, flips);
  return R;
}

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Matrix& A) { return Eigen::SelfAdjointEigenSolver<Matrix>(A).eigenvalues()[0]; }

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace oracle
