#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "sgevem/dof_map.hpp"
#include "sgevem/mesh.hpp"
#include "sgevem/vem_local.hpp"

namespace sgevem {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Parameter-independent per-cell data: geometry, projectors and the DOF map.
/// Build once per mesh, then assemble for any (lambda, mu, iota).
struct Discretization {
  const PolygonMesh* mesh = nullptr;
  GlobalDofMap dofs;
  std::vector<LocalElement> elements;
  std::vector<LocalProjectors> projectors;
  std::vector<std::vector<int>> local_to_global;
};

inline Discretization discretize(const PolygonMesh& mesh, const ProjectorOptions& opts = {}) {
  Discretization d;
  d.mesh = &mesh;
  d.dofs = build_dof_map(mesh);
  const int nc = static_cast<int>(mesh.num_cells());
  d.elements.reserve(nc);
  d.projectors.reserve(nc);
  d.local_to_global.reserve(nc);
  for (int k = 0; k < nc; ++k) {
    try {
      d.elements.push_back(make_local_element(mesh, k));
      d.projectors.push_back(build_projectors(d.elements.back(), opts));
    } catch (const ValidationError& e) {
      throw DegenerateMeshError("cell " + std::to_string(k) + ": " + e.what());
    }
    d.local_to_global.push_back(d.dofs.local_to_global(mesh, k));
  }
  return d;
}

struct AssemblyOptions {
  GradDivForm grad_div = GradDivForm::projected_gradient;
  /// Values for the boundary DOFs (full-length global vector); zero when empty.
  Vector boundary_values;
};

struct LinearSystem {
  SparseMatrix A;
  Vector b;
  std::vector<int> free;
  std::vector<char> fixed;
};

/// Sums triplets into a sparse matrix. Duplicates are accumulated in (col, row,
/// value) order, so the result is bit-identical for any input ordering.
inline SparseMatrix scatter_sum(int n, std::vector<Eigen::Triplet<double>> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
    if (a.col() != b.col()) return a.col() < b.col();
    if (a.row() != b.row()) return a.row() < b.row();
    return a.value() < b.value();
  });
  SparseMatrix A(n, n);
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  return A;
}

/// Global system with boundary DOFs eliminated symmetrically: their rows and
/// columns are zeroed, the diagonal set to 1 and the right-hand side to the
/// prescribed value (0 for the clamped problem), moved to the free rows.
inline LinearSystem assemble(const Discretization& disc, const ModelParams& params, const VectorField& f,
                             const AssemblyOptions& opts = {}) {
  params.validate();
  const auto& dofs = disc.dofs;
  const int n = dofs.size();
  LinearSystem sys;
  sys.fixed = dofs.boundary;
  sys.free = dofs.free_dofs();
  sys.b = Vector::Zero(n);
  const bool lifted = opts.boundary_values.size() > 0;
  if (lifted && opts.boundary_values.size() != n) throw ValidationError("boundary value vector has the wrong length");
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t k = 0; k < disc.elements.size(); ++k) {
    const auto& el = disc.elements[k];
    const auto& map = disc.local_to_global[k];
    Matrix Ak;
    Vector bk;
    try {
      Ak = local_stiffness(el, disc.projectors[k], params, opts.grad_div);
      bk = local_load(el, f);
    } catch (const NumericalError& e) {
      throw NumericalError("cell " + std::to_string(k) + ": " + e.what());
    }
    for (std::size_t i = 0; i < map.size(); ++i) {
      const int gi = map[i];
      if (sys.fixed[gi]) continue;
      sys.b[gi] += bk[i];
      for (std::size_t j = 0; j < map.size(); ++j) {
        const int gj = map[j];
        if (!sys.fixed[gj])
          trip.emplace_back(gi, gj, Ak(i, j));
        else if (lifted)
          sys.b[gi] -= Ak(i, j) * opts.boundary_values[gj];
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!sys.fixed[i]) continue;
    trip.emplace_back(i, i, 1.0);
    if (lifted) sys.b[i] = opts.boundary_values[i];
  }
  sys.A = scatter_sum(n, std::move(trip));
  return sys;
}

/// Writes the matrix as "row col value" lines, 0-based.
inline void dump_matrix(const SparseMatrix& A, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << std::setprecision(17);
  for (int c = 0; c < A.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(A, c); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

#if defined(__SIZEOF_FLOAT128__)
using Extended = __float128;
#else
using Extended = long double;
#endif
using ExtendedVector = std::vector<Extended>;

inline ExtendedVector to_extended(const Vector& v) { return ExtendedVector(v.data(), v.data() + v.size()); }

inline Vector to_double(const ExtendedVector& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = static_cast<double>(v[i]);
  return out;
}

inline double norm(const ExtendedVector& v) {
  Extended s = 0;
  for (const auto& x : v) s += x * x;
  return std::sqrt(static_cast<double>(s));
}

/// Residual b - A x with the products and sums in extended precision.
inline ExtendedVector residual(const SparseMatrix& A, const ExtendedVector& x, const Vector& b) {
  ExtendedVector r = to_extended(b);
  for (int c = 0; c < A.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(A, c); it; ++it) r[it.row()] -= static_cast<Extended>(it.value()) * x[c];
  return r;
}

inline double relative_residual(const SparseMatrix& A, const Vector& x, const Vector& b) {
  const double bn = b.norm();
  const double rn = norm(residual(A, to_extended(x), b));
  return bn > 0.0 ? rn / bn : rn;
}

struct SolveReport {
  double relative_residual = 0.0;  // of the extended-precision iterate
  double rounded_residual = 0.0;   // of the returned double vector
  int refinement_steps = 0;
};

inline constexpr double kResidualTolerance = 1e-10;

/// Sparse LDL^T solve with iterative refinement. The iterate and residual are
/// carried in extended precision: with large lambda, A x cancels down to O(1)
/// from terms of size lambda |x|, so the residual of a double vector cannot drop
/// much below lambda * eps. Boundary DOFs come out exactly as prescribed.
inline Vector solve(const LinearSystem& sys, SolveReport* report = nullptr) {
  const int n = static_cast<int>(sys.b.size());
  SolveReport rep;
  const double bnorm = sys.b.norm();
  if (bnorm == 0.0) {
    if (report) *report = rep;
    return Vector::Zero(n);
  }
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  ldlt.compute(sys.A);
  if (ldlt.info() != Eigen::Success) throw NumericalError("sparse LDL^T factorization failed");
  const Vector d = ldlt.vectorD();
  const double dmin = d.minCoeff(), dmax = d.cwiseAbs().maxCoeff();
  if (!(dmin > 0.0))
    throw NumericalError("system matrix is not positive definite (min pivot " + std::to_string(dmin) +
                         ", max pivot " + std::to_string(dmax) + ")");
  ExtendedVector x = to_extended(ldlt.solve(sys.b));
  ExtendedVector r = residual(sys.A, x, sys.b);
  double rel = norm(r) / bnorm;
  int stalled = 0;
  while (rel > 1e-3 * kResidualTolerance && rep.refinement_steps < 30 && stalled < 3) {
    const Vector dx = ldlt.solve(to_double(r));
    ExtendedVector xn = x;
    for (int i = 0; i < n; ++i) xn[i] += dx[i];
    ExtendedVector rn = residual(sys.A, xn, sys.b);
    ++rep.refinement_steps;
    const double reln = norm(rn) / bnorm;
    if (!(reln < 0.5 * rel)) ++stalled;
    if (reln < rel) {
      x = std::move(xn);
      r = std::move(rn);
      rel = reln;
    }
  }
  rep.relative_residual = rel;
  if (!(rel <= kResidualTolerance)) {
    std::ostringstream msg;
    msg << "relative residual " << rel << " above " << kResidualTolerance << " after " << rep.refinement_steps
        << " refinement steps (LDL^T pivot ratio " << dmax / dmin << ")";
    throw NumericalError(msg.str());
  }
  Vector out = to_double(x);
  for (int i = 0; i < n; ++i)
    if (sys.fixed[i]) out[i] = sys.b[i];
  rep.rounded_residual = relative_residual(sys.A, out, sys.b);
  if (report) *report = rep;
  return out;
}

}  // namespace sgevem
