#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgevem/mesh.hpp"

namespace sgevem {

/// Mesh JSON: {"vertices": [[x, y], ...], "cells": [[i0, i1, ...], ...]},
/// 0-based CCW cells. Edges and boundary flags are derived on load.
inline nlohmann::json mesh_to_json(const PolygonMesh& mesh) {
  nlohmann::json j;
  auto& verts = j["vertices"] = nlohmann::json::array();
  for (const auto& v : mesh.vertices()) verts.push_back({v.x(), v.y()});
  auto& cells = j["cells"] = nlohmann::json::array();
  for (const auto& c : mesh.cells()) cells.push_back(c);
  return j;
}

/// Parses and fully validates a unit-square mesh. Diagnostics name the
/// offending vertex or cell index.
inline PolygonMesh mesh_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("vertices") || !j.contains("cells"))
    throw ValidationError("mesh JSON must be an object with \"vertices\" and \"cells\"");
  const auto& jv = j.at("vertices");
  const auto& jc = j.at("cells");
  if (!jv.is_array() || !jc.is_array()) throw ValidationError("\"vertices\" and \"cells\" must be arrays");
  std::vector<Point2> vertices;
  vertices.reserve(jv.size());
  for (std::size_t i = 0; i < jv.size(); ++i) {
    const auto& p = jv[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw ValidationError("vertex " + std::to_string(i) + " must be a pair of numbers");
    vertices.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  std::vector<std::vector<int>> cells;
  cells.reserve(jc.size());
  for (std::size_t k = 0; k < jc.size(); ++k) {
    const auto& c = jc[k];
    if (!c.is_array()) throw ValidationError("cell " + std::to_string(k) + " must be an array of vertex indices");
    std::vector<int> idx;
    for (const auto& x : c) {
      if (!x.is_number_integer()) throw ValidationError("cell " + std::to_string(k) + " has a non-integer index");
      const auto v = x.get<long long>();
      if (v < 0 || v >= static_cast<long long>(vertices.size()))
        throw ValidationError("cell " + std::to_string(k) + " references vertex " + std::to_string(v) +
                              " out of range [0, " + std::to_string(vertices.size()) + ")");
      idx.push_back(static_cast<int>(v));
    }
    cells.push_back(std::move(idx));
  }
  PolygonMesh mesh(std::move(vertices), std::move(cells));
  validate_mesh(mesh);
  return mesh;
}

inline void save_mesh(const PolygonMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << mesh_to_json(mesh).dump() << '\n';
  if (!out) throw ValidationError("failed writing " + path);
}

inline PolygonMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open mesh file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": malformed JSON: " + e.what());
  }
  try {
    return mesh_from_json(j);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace sgevem
