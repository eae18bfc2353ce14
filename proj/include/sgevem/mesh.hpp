#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sgevem/common.hpp"

namespace sgevem {

/// Mesh edge. `vertices` is ordered low -> high index; the global normal
/// points to the right of that direction.
struct MeshEdge {
  std::array<int, 2> vertices{-1, -1};
  std::array<int, 2> cells{-1, -1};  // cells[1] == -1 on the boundary
  bool boundary = false;
};

/// Conforming polygonal mesh with derived edge topology. Geometry checks
/// (orientation, convexity, domain coverage) are separate, see validate_mesh.
class PolygonMesh {
 public:
  PolygonMesh() = default;

  PolygonMesh(std::vector<Point2> vertices, std::vector<std::vector<int>> cells)
      : vertices_(std::move(vertices)), cells_(std::move(cells)) {
    build_topology();
  }

  [[nodiscard]] const std::vector<Point2>& vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<std::vector<int>>& cells() const { return cells_; }
  [[nodiscard]] const std::vector<MeshEdge>& edges() const { return edges_; }

  [[nodiscard]] std::size_t num_vertices() const { return vertices_.size(); }
  [[nodiscard]] std::size_t num_cells() const { return cells_.size(); }
  [[nodiscard]] std::size_t num_edges() const { return edges_.size(); }

  [[nodiscard]] const Point2& vertex(int i) const { return vertices_[i]; }
  [[nodiscard]] const std::vector<int>& cell(int k) const { return cells_[k]; }
  [[nodiscard]] const MeshEdge& edge(int e) const { return edges_[e]; }

  /// Edge indices of cell k in local order: local edge i joins local vertices i and i+1.
  [[nodiscard]] const std::vector<int>& cell_edges(int k) const { return cell_edges_[k]; }

  /// +1 when cell k's outward normal on local edge i equals the global edge normal.
  [[nodiscard]] const std::vector<int>& cell_edge_flips(int k) const { return cell_flips_[k]; }

  [[nodiscard]] bool is_boundary_vertex(int v) const { return boundary_vertex_[v]; }

  [[nodiscard]] std::vector<Point2> cell_polygon(int k) const {
    std::vector<Point2> poly;
    poly.reserve(cells_[k].size());
    for (int v : cells_[k]) poly.push_back(vertices_[v]);
    return poly;
  }

  /// Unit normal of edge e, right of the low -> high direction.
  [[nodiscard]] Point2 edge_normal(int e) const {
    const Point2 d = vertices_[edges_[e].vertices[1]] - vertices_[edges_[e].vertices[0]];
    return Point2(d.y(), -d.x()).normalized();
  }

 private:
  void build_topology() {
    const int nv = static_cast<int>(vertices_.size());
    std::map<std::pair<int, int>, int> lookup;
    cell_edges_.assign(cells_.size(), {});
    cell_flips_.assign(cells_.size(), {});
    boundary_vertex_.assign(vertices_.size(), false);
    std::vector<bool> used(vertices_.size(), false);
    for (std::size_t k = 0; k < cells_.size(); ++k) {
      const auto& c = cells_[k];
      if (c.size() < 3)
        throw ValidationError("cell " + std::to_string(k) + " has fewer than 3 vertices");
      for (std::size_t i = 0; i < c.size(); ++i) {
        const int a = c[i];
        const int b = c[(i + 1) % c.size()];
        if (a < 0 || a >= nv)
          throw ValidationError("cell " + std::to_string(k) + " references vertex " + std::to_string(a) +
                                " out of range [0, " + std::to_string(nv) + ")");
        if (a == b) throw DegenerateMeshError("cell " + std::to_string(k) + " repeats vertex " + std::to_string(a));
        used[a] = true;
        const auto key = std::minmax(a, b);
        auto [it, inserted] = lookup.try_emplace({key.first, key.second}, static_cast<int>(edges_.size()));
        if (inserted) {
          MeshEdge e;
          e.vertices = {key.first, key.second};
          e.cells = {static_cast<int>(k), -1};
          edges_.push_back(e);
        } else {
          auto& e = edges_[it->second];
          if (e.cells[1] != -1 || e.cells[0] == static_cast<int>(k))
            throw ValidationError("edge (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                                  ") is shared by more than two cells (cell " + std::to_string(k) + ")");
          e.cells[1] = static_cast<int>(k);
        }
        cell_edges_[k].push_back(it->second);
        cell_flips_[k].push_back(a < b ? 1 : -1);
      }
    }
    for (std::size_t v = 0; v < used.size(); ++v)
      if (!used[v]) throw ValidationError("vertex " + std::to_string(v) + " is not referenced by any cell");
    for (auto& e : edges_) {
      e.boundary = e.cells[1] == -1;
      if (e.boundary) {
        boundary_vertex_[e.vertices[0]] = true;
        boundary_vertex_[e.vertices[1]] = true;
      }
    }
  }

  std::vector<Point2> vertices_;
  std::vector<std::vector<int>> cells_;
  std::vector<MeshEdge> edges_;
  std::vector<std::vector<int>> cell_edges_;
  std::vector<std::vector<int>> cell_flips_;
  std::vector<bool> boundary_vertex_;
};

/// Per-cell geometric data. Local edge i runs from vertex i to vertex i+1 (CCW).
struct ElementGeometry {
  std::vector<Point2> vertices;
  double area = 0.0;
  Point2 centroid = Point2::Zero();
  double diameter = 0.0;
  std::vector<double> edge_length;
  std::vector<Point2> normal;   // outward unit normal
  std::vector<Point2> tangent;  // unit tangent, CCW traversal

  [[nodiscard]] int num_vertices() const { return static_cast<int>(vertices.size()); }

  /// Fan triangle i: (centroid, vertex i, vertex i+1). This is the virtual triangulation.
  [[nodiscard]] std::array<Point2, 3> fan_triangle(int i) const {
    return {centroid, vertices[i], vertices[(i + 1) % vertices.size()]};
  }
};

inline double signed_area(std::span<const Point2> poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) a += cross2(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * a;
}

/// Geometry of a single polygon given by its CCW vertex list.
inline ElementGeometry compute_geometry(std::span<const Point2> poly) {
  const int n = static_cast<int>(poly.size());
  if (n < 3) throw DegenerateMeshError("polygon has fewer than 3 vertices");
  ElementGeometry g;
  g.vertices.assign(poly.begin(), poly.end());
  // Centroid relative to the first vertex for better conditioning.
  const Point2 o = poly[0];
  double a2 = 0.0;
  Point2 c = Point2::Zero();
  for (int i = 0; i < n; ++i) {
    const Point2 p = poly[i] - o;
    const Point2 q = poly[(i + 1) % n] - o;
    const double w = cross2(p, q);
    a2 += w;
    c += w * (p + q);
  }
  g.area = 0.5 * a2;
  if (!(g.area > 0.0)) throw DegenerateMeshError("polygon has non-positive signed area");
  g.centroid = o + c / (3.0 * a2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.diameter = std::max(g.diameter, (poly[i] - poly[j]).norm());
  g.edge_length.resize(n);
  g.normal.resize(n);
  g.tangent.resize(n);
  for (int i = 0; i < n; ++i) {
    const Point2 d = poly[(i + 1) % n] - poly[i];
    const double len = d.norm();
    if (!(len > 1e-14 * g.diameter)) throw DegenerateMeshError("zero-length edge at local vertex " + std::to_string(i));
    g.edge_length[i] = len;
    g.tangent[i] = d / len;
    g.normal[i] = Point2(g.tangent[i].y(), -g.tangent[i].x());
  }
  return g;
}

inline ElementGeometry compute_geometry(const PolygonMesh& mesh, int cell) {
  const auto poly = mesh.cell_polygon(cell);
  try {
    return compute_geometry(std::span<const Point2>(poly));
  } catch (const DegenerateMeshError& e) {
    throw DegenerateMeshError("cell " + std::to_string(cell) + ": " + e.what());
  }
}

/// Throws unless the polygon is CCW and convex. Collinear vertices are accepted
/// within the tolerance 1e-12 * h^2 on the turn cross products.
inline void check_convex_ccw(std::span<const Point2> poly, int cell_index) {
  const std::string where = "cell " + std::to_string(cell_index);
  const double area = signed_area(poly);
  if (!(area > 0.0)) throw DegenerateMeshError(where + " is not counter-clockwise (signed area " + std::to_string(area) + ")");
  double h = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i)
    for (std::size_t j = i + 1; j < poly.size(); ++j) h = std::max(h, (poly[i] - poly[j]).norm());
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = poly[(i + n - 1) % n], b = poly[i], c = poly[(i + 1) % n];
    if ((c - b).norm() <= 1e-14 * h) throw DegenerateMeshError(where + " has a zero-length edge");
    if (cross2(b - a, c - b) < -1e-12 * h * h)
      throw DegenerateMeshError(where + " is not convex at local vertex " + std::to_string(i));
  }
}

/// Full validation for meshes of the unit square: convex CCW cells, boundary
/// edges on the square's boundary, areas summing to one.
inline void validate_mesh(const PolygonMesh& mesh) {
  double total = 0.0;
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const auto poly = mesh.cell_polygon(static_cast<int>(k));
    check_convex_ccw(poly, static_cast<int>(k));
    total += signed_area(poly);
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("cell areas sum to " + std::to_string(total) + ", expected the unit square");
  auto on_side = [](const Point2& p, const Point2& q) {
    return (p.x() == 0.0 && q.x() == 0.0) || (p.x() == 1.0 && q.x() == 1.0) || (p.y() == 0.0 && q.y() == 0.0) ||
           (p.y() == 1.0 && q.y() == 1.0);
  };
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto& ed = mesh.edge(static_cast<int>(e));
    if (ed.boundary && !on_side(mesh.vertex(ed.vertices[0]), mesh.vertex(ed.vertices[1])))
      throw ValidationError("boundary edge " + std::to_string(e) + " (cell " + std::to_string(ed.cells[0]) +
                            ") does not lie on the unit-square boundary");
  }
}

inline double max_diameter(const PolygonMesh& mesh) {
  double h = 0.0;
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const auto poly = mesh.cell_polygon(static_cast<int>(k));
    for (std::size_t i = 0; i < poly.size(); ++i)
      for (std::size_t j = i + 1; j < poly.size(); ++j) h = std::max(h, (poly[i] - poly[j]).norm());
  }
  return h;
}

/// Uniform right-triangle mesh of the unit square, 2 n^2 cells.
inline PolygonMesh generate_structured_triangles(int n_per_side) {
  if (n_per_side < 1) throw ValidationError("n_per_side must be positive");
  const int n = n_per_side;
  std::vector<Point2> verts;
  verts.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      verts.emplace_back(i == n ? 1.0 : static_cast<double>(i) / n, j == n ? 1.0 : static_cast<double>(j) / n);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::vector<int>> cells;
  cells.reserve(2 * n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return PolygonMesh(std::move(verts), std::move(cells));
}

struct MeshQuality {
  std::size_t num_cells = 0;
  double min_fan_angle_deg = 180.0;  // over all virtual-triangulation triangles
  double max_diameter_to_min_edge = 0.0;
  double max_h = 0.0;
  std::vector<int> flagged_cells;  // some fan angle below the threshold
};

inline double min_triangle_angle_deg(const std::array<Point2, 3>& t) {
  double m = 180.0;
  for (int i = 0; i < 3; ++i) {
    const Point2 u = t[(i + 1) % 3] - t[i];
    const Point2 v = t[(i + 2) % 3] - t[i];
    const double ang = std::atan2(std::abs(cross2(u, v)), u.dot(v)) * 180.0 / std::numbers::pi;
    m = std::min(m, ang);
  }
  return m;
}

inline MeshQuality mesh_quality(const PolygonMesh& mesh, double flag_threshold_deg = 5.0) {
  MeshQuality q;
  q.num_cells = mesh.num_cells();
  for (int k = 0; k < static_cast<int>(mesh.num_cells()); ++k) {
    const auto g = compute_geometry(mesh, k);
    double cell_min = 180.0;
    for (int i = 0; i < g.num_vertices(); ++i) cell_min = std::min(cell_min, min_triangle_angle_deg(g.fan_triangle(i)));
    const double min_edge = *std::min_element(g.edge_length.begin(), g.edge_length.end());
    q.min_fan_angle_deg = std::min(q.min_fan_angle_deg, cell_min);
    q.max_diameter_to_min_edge = std::max(q.max_diameter_to_min_edge, g.diameter / min_edge);
    q.max_h = std::max(q.max_h, g.diameter);
    if (cell_min < flag_threshold_deg) q.flagged_cells.push_back(k);
  }
  return q;
}

}  // namespace sgevem
