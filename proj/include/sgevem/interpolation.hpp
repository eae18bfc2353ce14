#pragma once

#include "sgevem/assembly.hpp"
#include "sgevem/dof_map.hpp"
#include "sgevem/manufactured.hpp"
#include "sgevem/poly.hpp"

namespace sgevem {

inline constexpr int kInterpolationEdgeDegree = 12;
inline constexpr int kInterpolationCellDegree = 8;

/// Nodal interpolant I_h u: point values at vertices, edge means and normal
/// moments by Gauss quadrature, cell means by polygon quadrature.
inline Vector interpolate_dofs(const ExactSolution& u, const PolygonMesh& mesh, const GlobalDofMap& dofs) {
  Vector x = Vector::Zero(dofs.size());
  for (int v = 0; v < dofs.n_vertices; ++v) {
    const Point2 val = u.value(mesh.vertex(v));
    for (int c = 0; c < 2; ++c) x[dofs.vertex(v, c)] = val[c];
  }
  const auto& q = edge_quadrature(kInterpolationEdgeDegree);
  for (int e = 0; e < dofs.n_edges; ++e) {
    const Point2& a = mesh.vertex(mesh.edge(e).vertices[0]);
    const Point2& b = mesh.vertex(mesh.edge(e).vertices[1]);
    const Point2 n = mesh.edge_normal(e);
    const double len = (b - a).norm();
    Point2 mean = Point2::Zero(), normal = Point2::Zero();
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto t = u.partials(a + q.points[k].x() * (b - a));
      for (int c = 0; c < 2; ++c) {
        mean[c] += q.weights[k] * t[c](0, 0);
        normal[c] += q.weights[k] * len * (t[c](1, 0) * n.x() + t[c](0, 1) * n.y());
      }
    }
    for (int c = 0; c < 2; ++c) {
      x[dofs.edge_mean(e, c)] = mean[c];
      x[dofs.edge_normal(e, c)] = normal[c];
    }
  }
  for (int k = 0; k < dofs.n_cells; ++k) {
    const auto g = compute_geometry(mesh, k);
    const Point2 m = integrate_polygon([&](const Point2& p) { return u.value(p); }, g, kInterpolationCellDegree) / g.area;
    for (int c = 0; c < 2; ++c) x[dofs.interior(k, c)] = m[c];
  }
  return x;
}

inline Vector interpolate_dofs(const ExactSolution& u, const Discretization& disc) {
  return interpolate_dofs(u, *disc.mesh, disc.dofs);
}

/// Interpolant in the lifting space whose divergence projections commute:
/// I_h u plus a correction of the interior means only, chosen so that
///   -(correction, grad q)_K = (div (u - I_h u), q)_K  for q in P1(K).
/// The constant q gives no condition, the two linear ones fix the 2 means.
inline Vector commuting_interpolant(const ExactSolution& u, const Discretization& disc) {
  Vector x = interpolate_dofs(u, disc);
  for (std::size_t k = 0; k < disc.elements.size(); ++k) {
    const auto& el = disc.elements[k];
    const auto& p = disc.projectors[k];
    const auto& map = disc.local_to_global[k];
    const Vector exact = integrate_polygon(
        [&](const Point2& pt) -> Vector { return u.divergence(pt) * detail::p1_values(el.basis, pt); }, el.geom,
        kInterpolationCellDegree);
    // (div I_h u, q)_K is exactly (Pi0 div I_h u, q)_K for q in P1.
    const Vector discrete = p.M1 * (p.Pdiv * gather(x, map));
    const Vector r = exact - discrete;
    // grad xi = (1/h, 0), grad eta = (0, 1/h)
    const double scale = -el.basis.h / el.geom.area;
    x[disc.dofs.interior(static_cast<int>(k), 0)] += scale * r[1];
    x[disc.dofs.interior(static_cast<int>(k), 1)] += scale * r[2];
  }
  return x;
}

}  // namespace sgevem
