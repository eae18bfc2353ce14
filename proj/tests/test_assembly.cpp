#include <algorithm>
#include <filesystem>
#include <numeric>
#include <fstream>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace sgevem;

namespace {

Matrix free_block(const LinearSystem& sys) {
  const Matrix A(sys.A);
  Matrix F(sys.free.size(), sys.free.size());
  for (std::size_t i = 0; i < sys.free.size(); ++i)
    for (std::size_t j = 0; j < sys.free.size(); ++j) F(i, j) = A(sys.free[i], sys.free[j]);
  return F;
}

VectorField constant_force(double fx, double fy) {
  return [=](const Point2&) { return Point2(fx, fy); };
}

}  // namespace

TEST(DofMap, SingleSquareCell) {
  const PolygonMesh m(oracle::unit_square(), {{0, 1, 2, 3}});
  const auto d = build_dof_map(m);
  EXPECT_EQ(d.size(), 26);
  EXPECT_EQ(d.num_fixed(), 24);
  const auto f = d.free_dofs();
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0], d.interior(0, 0));
  EXPECT_EQ(f[1], d.interior(0, 1));
}

TEST(DofMap, TwoTriangles) {
  const auto m = generate_structured_triangles(1);
  const auto d = build_dof_map(m);
  // the interior diagonal carries a mean and a normal moment per component
  EXPECT_EQ(d.size() - d.num_fixed(), 4 + 4);
  int interior_edges = 0;
  for (int e = 0; e < d.n_edges; ++e) {
    if (m.edge(e).boundary) continue;
    ++interior_edges;
    for (int c = 0; c < 2; ++c) {
      EXPECT_FALSE(d.boundary[d.edge_mean(e, c)]);
      EXPECT_FALSE(d.boundary[d.edge_normal(e, c)]);
    }
  }
  EXPECT_EQ(interior_edges, 1);
}

TEST(DofMap, CountsAndBijection) {
  const auto m = generate_cvt_mesh(32, 7, 100);
  const auto d = build_dof_map(m);
  EXPECT_EQ(d.size(), 2 * static_cast<int>(m.num_vertices() + 2 * m.num_edges() + m.num_cells()));
  std::vector<int> hit(d.size(), 0);
  for (int v = 0; v < d.n_vertices; ++v)
    for (int c = 0; c < 2; ++c) ++hit[d.vertex(v, c)];
  for (int e = 0; e < d.n_edges; ++e)
    for (int c = 0; c < 2; ++c) ++hit[d.edge_mean(e, c)], ++hit[d.edge_normal(e, c)];
  for (int k = 0; k < d.n_cells; ++k)
    for (int c = 0; c < 2; ++c) ++hit[d.interior(k, c)];
  EXPECT_TRUE(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
  int boundary_vertices = 0, boundary_edges = 0;
  for (int v = 0; v < d.n_vertices; ++v) boundary_vertices += m.is_boundary_vertex(v);
  for (int e = 0; e < d.n_edges; ++e) boundary_edges += m.edge(e).boundary;
  EXPECT_EQ(d.num_fixed(), 2 * boundary_vertices + 4 * boundary_edges);
}

TEST(Assembly, Symmetric) {
  const auto m = generate_cvt_mesh(32, 7, 100);
  const auto disc = discretize(m);
  const auto sys = assemble(disc, ModelParams{1.0, 1.0, 1e-2}, constant_force(1, 2));
  const SparseMatrix At = sys.A.transpose();
  const double defect = Matrix(sys.A - At).cwiseAbs().maxCoeff();
  EXPECT_LE(defect, 1e-12 * Matrix(sys.A).cwiseAbs().maxCoeff());
}

TEST(Assembly, ScatterOfTwoCells) {
  const auto m = generate_structured_triangles(1);
  const auto disc = discretize(m);
  const ModelParams params{2.0, 1.0, 0.3};
  const auto sys = assemble(disc, params, constant_force(1, -1));
  Matrix ref = Matrix::Zero(disc.dofs.size(), disc.dofs.size());
  Vector bref = Vector::Zero(disc.dofs.size());
  for (int k = 0; k < 2; ++k) {
    const Matrix Ak = local_stiffness(disc.elements[k], disc.projectors[k], params);
    const Vector bk = local_load(disc.elements[k], constant_force(1, -1));
    const auto& map = disc.local_to_global[k];
    for (std::size_t i = 0; i < map.size(); ++i) {
      bref[map[i]] += bk[i];
      for (std::size_t j = 0; j < map.size(); ++j) ref(map[i], map[j]) += Ak(i, j);
    }
  }
  const Matrix A(sys.A);
  for (int i : sys.free) {
    EXPECT_NEAR(sys.b[i], bref[i], 1e-15);
    for (int j : sys.free) EXPECT_NEAR(A(i, j), ref(i, j), 1e-13 * std::max(1.0, std::abs(ref(i, j))));
  }
  for (int i = 0; i < disc.dofs.size(); ++i) {
    if (!sys.fixed[i]) continue;
    EXPECT_EQ(sys.b[i], 0.0);
    EXPECT_EQ(A(i, i), 1.0);
    EXPECT_EQ(A.row(i).cwiseAbs().sum(), 1.0);
    EXPECT_EQ(A.col(i).cwiseAbs().sum(), 1.0);
  }
}

TEST(Assembly, FreeBlockIsPositiveDefinite) {
  const auto m = generate_structured_triangles(3);
  const auto disc = discretize(m);
  const auto sys = assemble(disc, ModelParams{1e3, 1.0, 1e-3}, constant_force(0, 0));
  ASSERT_LE(sys.free.size(), 200u);
  const Matrix F = free_block(sys);
  EXPECT_GT(oracle::min_eigenvalue(F), 0.0);
  const auto cvt = generate_cvt_mesh(6, 3, 20);
  const auto d2 = discretize(cvt);
  const auto s2 = assemble(d2, ModelParams{1.0, 1.0, 1.0}, constant_force(0, 0));
  ASSERT_LE(s2.free.size(), 200u);
  EXPECT_GT(oracle::min_eigenvalue(free_block(s2)), 0.0);
}

TEST(Assembly, ScatterSumIsOrderIndependent) {
  const auto m = generate_cvt_mesh(24, 9, 20);
  const auto disc = discretize(m);
  const ModelParams params{7.0, 1.3, 0.2};
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t k = 0; k < disc.elements.size(); ++k) {
    const Matrix Ak = local_stiffness(disc.elements[k], disc.projectors[k], params);
    const auto& map = disc.local_to_global[k];
    for (std::size_t i = 0; i < map.size(); ++i)
      for (std::size_t j = 0; j < map.size(); ++j) trip.emplace_back(map[i], map[j], Ak(i, j));
  }
  const SparseMatrix A = scatter_sum(disc.dofs.size(), trip);
  std::reverse(trip.begin(), trip.end());
  std::mt19937_64 rng(1);
  std::shuffle(trip.begin(), trip.end(), rng);
  const SparseMatrix B = scatter_sum(disc.dofs.size(), trip);
  ASSERT_EQ(A.nonZeros(), B.nonZeros());
  for (int i = 0; i < A.nonZeros(); ++i) EXPECT_EQ(A.valuePtr()[i], B.valuePtr()[i]);
  // and assembling twice is identical
  const auto s1 = assemble(disc, params, constant_force(1, 1));
  const auto s2 = assemble(disc, params, constant_force(1, 1));
  EXPECT_EQ(Matrix(s1.A - s2.A).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Solve, ZeroRightHandSide) {
  const auto m = generate_cvt_mesh(20, 2, 10);
  const auto disc = discretize(m);
  const auto sys = assemble(disc, ModelParams{}, constant_force(0, 0));
  SolveReport rep;
  const Vector u = solve(sys, &rep);
  EXPECT_EQ(u.cwiseAbs().maxCoeff(), 0.0);
  const auto out = run_example(disc, "zero", ModelParams{});
  EXPECT_EQ(out.uh.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(out.record.e_pi, 0.0);
}

TEST(Solve, ResidualContractAndBoundaryValues) {
  const auto m = generate_cvt_mesh(64, 7, 50);
  const auto disc = discretize(m);
  for (double lam : {1.0, 1e5}) {
    const ModelParams params{lam, 1.0, 1e-3};
    const auto u = example_solution("exam3", params);
    const auto sys = assemble(disc, params, body_force_field(u, params));
    SolveReport rep;
    const Vector x = solve(sys, &rep);
    EXPECT_LE(rep.relative_residual, kResidualTolerance);
    for (int i = 0; i < disc.dofs.size(); ++i)
      if (sys.fixed[i]) EXPECT_EQ(x[i], 0.0);
    // the returned vector itself, residual in extended precision
    EXPECT_LE(relative_residual(sys.A, x, sys.b), 1e-6);
  }
}

TEST(Solve, InvariantUnderRenumbering) {
  const auto m = generate_cvt_mesh(32, 4, 30);
  const auto disc = discretize(m);
  const ModelParams params{10.0, 1.0, 0.1};
  const auto u = example_solution("exam1a", params);
  const auto sys = assemble(disc, params, body_force_field(u, params));
  const Vector x = solve(sys);
  const int n = disc.dofs.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(5);
  std::shuffle(perm.begin(), perm.end(), rng);  // new index of old dof i is perm[i]
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < sys.A.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(sys.A, c); it; ++it) trip.emplace_back(perm[it.row()], perm[it.col()], it.value());
  LinearSystem ps;
  ps.A = scatter_sum(n, trip);
  ps.b = Vector(n);
  ps.fixed.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    ps.b[perm[i]] = sys.b[i];
    ps.fixed[perm[i]] = sys.fixed[i];
  }
  const Vector y = solve(ps);
  Vector back(n);
  for (int i = 0; i < n; ++i) back[i] = y[perm[i]];
  const Vector d = back - x;
  const double energy = std::sqrt(x.dot(sys.A * x));
  EXPECT_LE(std::sqrt(std::abs(d.dot(sys.A * d))), 1e-9 * energy);
}

TEST(Assembly, MatrixDump) {
  const auto m = generate_structured_triangles(1);
  const auto disc = discretize(m);
  const auto sys = assemble(disc, ModelParams{}, constant_force(0, 0));
  const auto path = (std::filesystem::temp_directory_path() / "sgevem_test_dump.txt").string();
  dump_matrix(sys.A, path);
  std::ifstream in(path);
  int r, c, count = 0;
  double v;
  const Matrix A(sys.A);
  while (in >> r >> c >> v) {
    EXPECT_EQ(A(r, c), v);
    ++count;
  }
  EXPECT_EQ(count, sys.A.nonZeros());
  std::remove(path.c_str());
}
