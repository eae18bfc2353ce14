#pragma once

#include <vector>

#include "sgevem/mesh.hpp"
#include "sgevem/vem_local.hpp"

namespace sgevem {

/// Global numbering, entity-type major, entity index minor, component last:
///   vertex values, edge means, edge normal moments, cell interior means.
/// Normal moments refer to the global edge normal.
struct GlobalDofMap {
  int n_vertices = 0;
  int n_edges = 0;
  int n_cells = 0;
  std::vector<char> boundary;  // 1 on DOFs fixed to zero by the clamped condition

  [[nodiscard]] int size() const { return 2 * (n_vertices + 2 * n_edges + n_cells); }
  [[nodiscard]] int vertex(int v, int c) const { return 2 * v + c; }
  [[nodiscard]] int edge_mean(int e, int c) const { return 2 * n_vertices + 2 * e + c; }
  [[nodiscard]] int edge_normal(int e, int c) const { return 2 * n_vertices + 2 * n_edges + 2 * e + c; }
  [[nodiscard]] int interior(int k, int c) const { return 2 * n_vertices + 4 * n_edges + 2 * k + c; }

  [[nodiscard]] int num_fixed() const {
    int n = 0;
    for (char b : boundary) n += b;
    return n;
  }
  [[nodiscard]] std::vector<int> free_dofs() const {
    std::vector<int> f;
    for (int i = 0; i < size(); ++i)
      if (!boundary[i]) f.push_back(i);
    return f;
  }

  /// Global index of every local DOF of cell k, in the local layout order.
  [[nodiscard]] std::vector<int> local_to_global(const PolygonMesh& mesh, int k) const {
    const auto& cell = mesh.cell(k);
    const auto& edges = mesh.cell_edges(k);
    const DofLayout L{static_cast<int>(cell.size())};
    std::vector<int> map(L.size());
    for (int i = 0; i < L.n_vertices; ++i) {
      for (int c = 0; c < 2; ++c) {
        map[L.index(L.vertex(i), c)] = vertex(cell[i], c);
        map[L.index(L.edge_mean(i), c)] = edge_mean(edges[i], c);
        map[L.index(L.edge_normal(i), c)] = edge_normal(edges[i], c);
      }
    }
    for (int c = 0; c < 2; ++c) map[L.index(L.interior(), c)] = interior(k, c);
    return map;
  }
};

inline GlobalDofMap build_dof_map(const PolygonMesh& mesh) {
  GlobalDofMap m;
  m.n_vertices = static_cast<int>(mesh.num_vertices());
  m.n_edges = static_cast<int>(mesh.num_edges());
  m.n_cells = static_cast<int>(mesh.num_cells());
  m.boundary.assign(m.size(), 0);
  for (int v = 0; v < m.n_vertices; ++v)
    if (mesh.is_boundary_vertex(v))
      for (int c = 0; c < 2; ++c) m.boundary[m.vertex(v, c)] = 1;
  for (int e = 0; e < m.n_edges; ++e) {
    if (!mesh.edge(e).boundary) continue;
    for (int c = 0; c < 2; ++c) {
      m.boundary[m.edge_mean(e, c)] = 1;
      m.boundary[m.edge_normal(e, c)] = 1;
    }
  }
  return m;
}

/// Restriction of a global vector to the local DOFs of one cell.
inline Vector gather(const Vector& global, const std::vector<int>& map) {
  Vector v(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) v[i] = global[map[i]];
  return v;
}

}  // namespace sgevem
