#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "sgevem/mesh.hpp"
#include "sgevem/poly.hpp"

namespace sgevem {

using Polygon = std::vector<Point2>;

namespace detail {

// Keeps the part of `poly` where (x - m) . d <= 0.
inline Polygon clip_half_plane(const Polygon& poly, const Point2& m, const Point2& d) {
  Polygon out;
  out.reserve(poly.size() + 2);
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % n];
    const double fp = (p - m).dot(d);
    const double fq = (q - m).dot(d);
    if (fp <= 0.0) out.push_back(p);
    if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
      const double t = fp / (fp - fq);
      out.push_back(p + t * (q - p));
    }
  }
  return out;
}

inline double snap_unit(double x) {
  if (std::abs(x) < 1e-14) return 0.0;
  if (std::abs(x - 1.0) < 1e-14) return 1.0;
  return x;
}

inline Point2 polygon_centroid(const Polygon& poly) { return compute_geometry(std::span<const Point2>(poly)).centroid; }

inline bool is_convex_ccw(const std::vector<Point2>& pts, const std::vector<int>& cell) {
  Polygon poly;
  for (int v : cell) poly.push_back(pts[v]);
  if (poly.size() < 3) return false;
  try {
    check_convex_ccw(poly, 0);
  } catch (const DegenerateMeshError&) {
    return false;
  }
  return true;
}

}  // namespace detail

/// Voronoi cells of `sites` clipped to the unit square, one CCW polygon per site.
inline std::vector<Polygon> voronoi_cells(const std::vector<Point2>& sites) {
  const Polygon square{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
  const std::size_t n = sites.size();
  std::vector<Polygon> cells(n);
  std::vector<std::size_t> order(n);
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[j] = (sites[j] - sites[i]).squaredNorm();
    std::iota(order.begin(), order.end(), 0);
    auto closer = [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
    // Most cells are settled by their nearest few dozen neighbours; sort the rest only on demand.
    const std::size_t head = std::min<std::size_t>(n, 48);
    std::partial_sort(order.begin(), order.begin() + head, order.end(), closer);
    Polygon poly = square;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == head) std::sort(order.begin() + head, order.end(), closer);
      const std::size_t j = order[r];
      if (j == i) continue;
      double rmax = 0.0;
      for (const auto& v : poly) rmax = std::max(rmax, (v - sites[i]).squaredNorm());
      // Bisector of a site farther than twice the cell radius cannot cut the cell.
      if (dist[j] > 4.0 * rmax) break;
      poly = detail::clip_half_plane(poly, 0.5 * (sites[i] + sites[j]), sites[j] - sites[i]);
    }
    for (auto& v : poly) v = Point2(detail::snap_unit(v.x()), detail::snap_unit(v.y()));
    cells[i] = std::move(poly);
  }
  return cells;
}

/// Sum over cells of int_{V_i} |x - s_i|^2 dx.
inline double cvt_energy(const std::vector<Point2>& sites, const std::vector<Polygon>& cells) {
  const auto& rule = triangle_quadrature(2);
  double e = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& poly = cells[i];
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
      const Point2 e1 = poly[k] - poly[0], e2 = poly[k + 1] - poly[0];
      const double jac = std::abs(cross2(e1, e2));
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Point2 x = poly[0] + rule.points[q].x() * e1 + rule.points[q].y() * e2;
        e += rule.weights[q] * jac * (x - sites[i]).squaredNorm();
      }
    }
  }
  return e;
}

inline std::vector<Point2> random_sites(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point2> s(n);
  for (auto& p : s) {
    const double x = u(rng);
    const double y = u(rng);
    p = Point2(x, y);
  }
  return s;
}

/// Lloyd relaxation; returns the final sites. If `energies` is given it
/// receives the CVT energy of every intermediate tessellation (iters + 1 values).
inline std::vector<Point2> lloyd_relaxation(std::vector<Point2> sites, int iters,
                                            std::vector<double>* energies = nullptr) {
  for (int it = 0; it <= iters; ++it) {
    const auto cells = voronoi_cells(sites);
    if (energies) energies->push_back(cvt_energy(sites, cells));
    if (it == iters) break;
    for (std::size_t i = 0; i < sites.size(); ++i) sites[i] = detail::polygon_centroid(cells[i]);
  }
  return sites;
}

/// Turns independently clipped Voronoi polygons into a conforming mesh:
/// coincident vertices are merged, then edges subtending a small angle at the
/// cell centroid are collapsed as long as every touched cell stays convex.
inline PolygonMesh conforming_mesh_from_polygons(const std::vector<Polygon>& polys, double merge_tol = 1e-10) {
  struct Item {
    Point2 p;
    std::size_t cell, local;
  };
  std::vector<Item> items;
  for (std::size_t c = 0; c < polys.size(); ++c)
    for (std::size_t l = 0; l < polys[c].size(); ++l) items.push_back({polys[c][l], c, l});
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return items[a].p.x() < items[b].p.x() || (items[a].p.x() == items[b].p.x() && a < b);
  });
  // Union-find over near-coincident points.
  std::vector<std::size_t> parent(items.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t a = 0; a < order.size(); ++a)
    for (std::size_t b = a + 1; b < order.size() && items[order[b]].p.x() - items[order[a]].p.x() <= merge_tol; ++b)
      if ((items[order[a]].p - items[order[b]].p).norm() <= merge_tol) {
        const auto ra = find(order[a]), rb = find(order[b]);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
      }
  std::vector<int> vid(items.size(), -1);
  std::vector<Point2> verts;
  std::vector<std::vector<int>> cells(polys.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto r = find(i);
    if (vid[r] < 0) {
      vid[r] = static_cast<int>(verts.size());
      verts.push_back(items[r].p);
    }
    vid[i] = vid[r];
  }
  {
    std::size_t i = 0;
    for (std::size_t c = 0; c < polys.size(); ++c)
      for (std::size_t l = 0; l < polys[c].size(); ++l, ++i) cells[c].push_back(vid[i]);
  }
  auto dedupe = [](std::vector<int>& cell) {
    std::vector<int> out;
    for (int v : cell)
      if (out.empty() || out.back() != v) out.push_back(v);
    while (out.size() > 1 && out.front() == out.back()) out.pop_back();
    cell = std::move(out);
  };
  for (auto& c : cells) dedupe(c);

  auto priority = [&](int v) {
    const Point2& p = verts[v];
    const int sides = (p.x() == 0.0 || p.x() == 1.0) + (p.y() == 0.0 || p.y() == 1.0);
    return sides;  // 2 corner, 1 boundary, 0 interior
  };
  auto same_side = [&](int a, int b) {
    const Point2 &p = verts[a], &q = verts[b];
    return (p.x() == q.x() && (p.x() == 0.0 || p.x() == 1.0)) || (p.y() == q.y() && (p.y() == 0.0 || p.y() == 1.0));
  };

  for (int pass = 0; pass < 100; ++pass) {
    std::set<std::pair<int, int>> candidates;
    for (const auto& cell : cells) {
      const int nv = static_cast<int>(cell.size());
      if (nv < 4) continue;
      Polygon poly;
      for (int v : cell) poly.push_back(verts[v]);
      const Point2 c = compute_geometry(std::span<const Point2>(poly)).centroid;
      const double tol = std::max(0.1 * 2.0 * std::numbers::pi / nv, 6.0 * std::numbers::pi / 180.0);
      for (int i = 0; i < nv; ++i) {
        const Point2 u = poly[i] - c, w = poly[(i + 1) % nv] - c;
        if (std::atan2(cross2(u, w), u.dot(w)) < tol)
          candidates.insert(std::minmax(cell[i], cell[(i + 1) % nv]));
      }
    }
    std::vector<std::vector<int>> vertex_cells(verts.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
      for (int v : cells[c]) vertex_cells[v].push_back(static_cast<int>(c));
    std::set<int> touched;
    bool changed = false;
    for (auto [a, b] : candidates) {
      if (touched.count(a) || touched.count(b)) continue;
      const int pa = priority(a), pb = priority(b);
      int keep = a, drop = b;
      if (pb > pa) std::swap(keep, drop);
      if (pa == 2 && pb == 2) continue;
      if (pa == 1 && pb == 1 && !same_side(a, b)) continue;
      std::set<int> affected(vertex_cells[a].begin(), vertex_cells[a].end());
      affected.insert(vertex_cells[b].begin(), vertex_cells[b].end());
      bool ok = true;
      std::vector<std::pair<int, std::vector<int>>> updated;
      for (int c : affected) {
        std::vector<int> cell = cells[c];
        for (auto& v : cell)
          if (v == drop) v = keep;
        dedupe(cell);
        if (cell.size() < 3 || !detail::is_convex_ccw(verts, cell)) {
          ok = false;
          break;
        }
        updated.emplace_back(c, std::move(cell));
      }
      if (!ok) continue;
      for (auto& [c, cell] : updated) cells[c] = std::move(cell);
      touched.insert(a);
      touched.insert(b);
      changed = true;
    }
    if (!changed) break;
  }

  // Compact vertex numbering in order of first use.
  std::vector<int> remap(verts.size(), -1);
  std::vector<Point2> used;
  for (auto& cell : cells)
    for (auto& v : cell) {
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(used.size());
        used.push_back(verts[v]);
      }
      v = remap[v];
    }
  return PolygonMesh(std::move(used), std::move(cells));
}

/// Centroidal Voronoi tessellation of the unit square with `n_cells` cells:
/// uniform random sites, `lloyd_iters` Lloyd steps, conforming cleanup.
/// Throws DegenerateMeshError rather than return an invalid cell.
inline PolygonMesh generate_cvt_mesh(int n_cells, std::uint64_t seed, int lloyd_iters) {
  if (n_cells < 1) throw ValidationError("n_cells must be positive");
  if (lloyd_iters < 0) throw ValidationError("lloyd_iters must be nonnegative");
  const auto sites = lloyd_relaxation(random_sites(n_cells, seed), lloyd_iters);
  const auto polys = voronoi_cells(sites);
  for (std::size_t i = 0; i < polys.size(); ++i)
    if (polys[i].size() < 3) throw DegenerateMeshError("Voronoi cell " + std::to_string(i) + " is empty");
  PolygonMesh mesh = conforming_mesh_from_polygons(polys);
  if (static_cast<int>(mesh.num_cells()) != n_cells)
    throw DegenerateMeshError("CVT produced " + std::to_string(mesh.num_cells()) + " cells, expected " +
                              std::to_string(n_cells));
  validate_mesh(mesh);
  return mesh;
}

}  // namespace sgevem
