// Command-line driver: mesh generation, single solves, convergence sweeps and
// the property-check suite.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgevem/sgevem.hpp"

namespace {

using namespace sgevem;

enum ExitCode { kOk = 0, kUsage = 1, kValidation = 2, kNumerical = 3 };

struct RunConfig {
  std::string example = "exam1a";
  double lambda = 1.0, mu = 1.0, iota = 1.0;
  std::vector<int> cells;
  std::vector<int> tri;
  std::uint64_t seed = kDefaultSeed;
  int lloyd = kDefaultLloydIters;
  std::string mesh_file;
  std::string out;
  std::string report;
  std::string format = "csv";
  std::string preset;
  std::string boundary = "exact";
  std::string grad_div = "projected";
  std::string dump_matrix;
  std::string gnuplot;
  int check_meshes = 3;
  bool flip_jump_sign = false;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ModelParams params_of(const RunConfig& c) {
  ModelParams p{c.lambda, c.mu, c.iota};
  p.validate();
  return p;
}

RunOptions run_options(const RunConfig& c) {
  RunOptions o;
  o.boundary = c.boundary == "clamped" ? BoundaryMode::clamped : BoundaryMode::exact_data;
  o.grad_div = c.grad_div == "differentiated" ? GradDivForm::gradient_of_projection : GradDivForm::projected_gradient;
  return o;
}

ReportFormat format_of(const RunConfig& c) { return c.format == "md" ? ReportFormat::markdown : ReportFormat::csv; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << text;
}

/// Meshes requested by the flags, in order. A mesh file overrides generation.
std::vector<PolygonMesh> meshes_of(const RunConfig& c, bool single) {
  std::vector<PolygonMesh> meshes;
  const int sources = (!c.mesh_file.empty()) + (!c.cells.empty()) + (!c.tri.empty());
  if (sources > 1) throw UsageError("give exactly one of --mesh-file, --cells, --tri");
  if (!c.mesh_file.empty()) {
    meshes.push_back(load_mesh(c.mesh_file));
    return meshes;
  }
  if (!c.tri.empty()) {
    if (single && c.tri.size() != 1) throw UsageError("--tri takes a single value here");
    for (int n : c.tri) {
      if (n < 1) throw UsageError("--tri must be a positive integer");
      meshes.push_back(generate_structured_triangles(n));
    }
    return meshes;
  }
  std::vector<int> counts = c.cells;
  if (counts.empty()) counts = single ? std::vector<int>{100} : default_cell_counts();
  if (single && counts.size() != 1) throw UsageError("--cells takes a single value here");
  for (int n : counts) {
    if (n < 1) throw UsageError("--cells must be positive");
    if (c.lloyd < 0) throw UsageError("--lloyd must be nonnegative");
    meshes.push_back(generate_cvt_mesh(n, c.seed, c.lloyd));
  }
  return meshes;
}

void print_quality(const PolygonMesh& m) {
  const auto q = mesh_quality(m);
  std::cout << "cells " << q.num_cells << "  vertices " << m.num_vertices() << "  edges " << m.num_edges()
            << "\nmax h " << q.max_h << "\nmin fan angle (deg) " << q.min_fan_angle_deg
            << "\nmax h/min edge " << q.max_diameter_to_min_edge << "\nflagged cells " << q.flagged_cells.size() << '\n';
}

int cmd_mesh(const RunConfig& c) {
  if (c.cells.empty() && c.tri.empty() && c.mesh_file.empty()) throw UsageError("mesh: give --cells N or --tri N");
  const auto meshes = meshes_of(c, true);
  print_quality(meshes[0]);
  if (!c.out.empty()) save_mesh(meshes[0], c.out);
  return kOk;
}

int cmd_solve(const RunConfig& c) {
  const auto params = params_of(c);
  const auto meshes = meshes_of(c, true);
  const auto disc = discretize(meshes[0]);
  const auto opts = run_options(c);
  if (!c.dump_matrix.empty()) {
    const auto u = example_solution(c.example, params);
    dump_matrix(assemble(disc, params, body_force_field(u, params)).A, c.dump_matrix);
  }
  const auto res = run_example(disc, c.example, params, opts);
  if (!c.out.empty()) {
    nlohmann::json j;
    j["example"] = c.example;
    j["lambda"] = params.lambda;
    j["mu"] = params.mu;
    j["iota"] = params.iota;
    j["num_dofs"] = res.uh.size();
    j["relative_residual"] = res.report.relative_residual;
    j["dofs"] = std::vector<double>(res.uh.data(), res.uh.data() + res.uh.size());
    write_text(c.out, j.dump() + "\n");
  }
  const std::string text = emit_report({res.record}, format_of(c));
  std::cout << text;
  if (!c.report.empty()) write_text(c.report, text);
  std::cerr << "relative residual " << res.report.relative_residual << " (" << res.report.refinement_steps
            << " refinement steps)\n";
  return kOk;
}

/// Parameter grids of the preset sweeps.
struct Sweep {
  std::string example;
  ModelParams params;
  bool triangles = false;
};

std::vector<Sweep> preset_sweeps(const std::string& preset) {
  std::vector<Sweep> s;
  const std::vector<double> iotas{1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  if (preset == "table1-top" || preset == "table1-bottom") {
    const std::string ex = preset == "table1-top" ? "exam1a" : "exam1b";
    for (double i : iotas) s.push_back({ex, {1.0, 1.0, i}});
  } else if (preset == "table2") {
    for (double l : {1e1, 1e2, 1e3, 1e4, 1e5}) s.push_back({"exam3", {l, 1.0, 1e-5}});
  } else if (preset == "fig1") {
    s.push_back({"divfree", {1e8, 1.0, 1e-5}, false});
    s.push_back({"divfree", {1e8, 1.0, 1e-5}, true});
  } else {
    throw UsageError("unknown preset '" + preset + "' (table1-top, table1-bottom, table2, fig1)");
  }
  return s;
}

int cmd_convergence(const RunConfig& c) {
  const auto opts = run_options(c);
  std::vector<ConvergenceRecord> all;
  std::vector<PolygonMesh> cvt, tri;
  auto pointers = [](const std::vector<PolygonMesh>& v) {
    std::vector<const PolygonMesh*> p;
    for (const auto& m : v) p.push_back(&m);
    return p;
  };
  if (c.preset.empty()) {
    const auto params = params_of(c);
    cvt = meshes_of(c, false);
    if (cvt.size() < 2) throw UsageError("convergence needs at least two meshes");
    all = convergence_sweep(pointers(cvt), c.example, params, opts);
  } else if (c.preset == "table2") {
    RunConfig one = c;
    if (one.cells.empty() && one.mesh_file.empty() && one.tri.empty()) one.cells = {100};
    cvt = meshes_of(one, true);
    const auto disc = discretize(cvt[0]);
    for (const auto& s : preset_sweeps(c.preset)) all.push_back(run_example(disc, s.example, s.params, opts).record);
  } else {
    const auto sweeps = preset_sweeps(c.preset);
    RunConfig base = c;
    base.tri.clear();
    cvt = meshes_of(base, false);
    for (const auto& s : sweeps) {
      if (s.triangles && tri.empty())
        for (int n : c.tri.empty() ? std::vector<int>{4, 8, 16, 32, 64} : c.tri)
          tri.push_back(generate_structured_triangles(n));
      const auto recs = convergence_sweep(pointers(s.triangles ? tri : cvt), s.example, s.params, opts);
      all.insert(all.end(), recs.begin(), recs.end());
    }
  }
  const std::string text = emit_report(all, format_of(c));
  std::cout << text;
  if (!c.out.empty()) write_text(c.out, text);
  if (!c.gnuplot.empty()) write_text(c.gnuplot, gnuplot_dump(all));
  return kOk;
}

int cmd_check(const RunConfig& c) {
  ProjectorOptions popts;
  popts.flip_vertex_jump_sign = c.flip_jump_sign;
  const ModelParams params{2.0, 1.0, 0.5};
  struct Row {
    std::string name;
    double worst;
    double tol;
  };
  std::vector<Row> rows{{"patch test (k-consistency)", 0.0, 1e-10},  {"Pi1 reproduction", 0.0, 1e-12},
                        {"Pi2 reproduction", 0.0, 1e-12},            {"div projection exactness", 0.0, 1e-12},
                        {"grad div projection exactness", 0.0, 1e-12}, {"rigid-motion kernel residual", 0.0, 1e-9},
                        {"kernel dimension defect", 0.0, 0.5},       {"commuting relation (div)", 0.0, 1e-9},
                        {"commuting relation (grad div)", 0.0, 1e-9}, {"global SPD (1 if min pivot <= 0)", 0.0, 0.5}};
  for (int s = 0; s < c.check_meshes; ++s) {
    const auto mesh = generate_cvt_mesh(24 + 8 * s, c.seed + s, 20);
    const auto disc = discretize(mesh, popts);
    for (std::size_t k = 0; k < disc.elements.size(); ++k) {
      const auto& el = disc.elements[k];
      const auto& p = disc.projectors[k];
      rows[0].worst = std::max(rows[0].worst, patch_test_defect(el, p, params));
      const auto r = reproduction_defects(el, p);
      rows[1].worst = std::max(rows[1].worst, r.pi1);
      rows[2].worst = std::max(rows[2].worst, r.pi2);
      rows[3].worst = std::max(rows[3].worst, r.div);
      rows[4].worst = std::max(rows[4].worst, r.grad_div);
      const auto kr = kernel_report(local_stiffness(el, p, params), rigid_motion_dofs(p));
      rows[5].worst = std::max(rows[5].worst, kr.rigid_residual);
      rows[6].worst = std::max(rows[6].worst, std::abs(kr.null_dim - 3.0));
    }
    const auto cd = commuting_defects(random_smooth_field(c.seed + 100 + s), disc);
    rows[7].worst = std::max(rows[7].worst, cd.div);
    rows[8].worst = std::max(rows[8].worst, cd.grad_div);
    const auto sys = assemble(disc, params, [](const Point2&) { return Point2(1.0, 1.0); });
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(sys.A);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) rows[9].worst = 1.0;
  }
  bool ok = true;
  for (const auto& r : rows) {
    const bool pass = r.worst <= r.tol;
    ok = ok && pass;
    std::printf("%-4s %-36s max %.3e (tol %.0e)\n", pass ? "PASS" : "FAIL", r.name.c_str(), r.worst, r.tol);
  }
  return ok ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonconforming virtual elements for 2D strain gradient elasticity"};
  app.require_subcommand(1);
  RunConfig c;

  auto add_common = [&](CLI::App* s) {
    s->add_option("--cells", c.cells, "CVT cell count(s), comma separated")->delimiter(',');
    s->add_option("--tri", c.tri, "structured triangle mesh with N x N squares (comma list for sweeps)")->delimiter(',');
    s->add_option("--seed", c.seed, "CVT random seed");
    s->add_option("--lloyd", c.lloyd, "Lloyd iterations");
    s->add_option("--mesh-file", c.mesh_file, "mesh JSON file (overrides generation)");
    s->add_option("--out", c.out, "output path");
  };
  auto add_model = [&](CLI::App* s) {
    s->add_option("--example", c.example, "exam1a | exam1b | exam3 | divfree | zero")
        ->check(CLI::IsMember(example_names()));
    s->add_option("--lambda", c.lambda, "Lame constant lambda");
    s->add_option("--mu", c.mu, "Lame constant mu");
    s->add_option("--iota", c.iota, "microscopic length parameter");
    s->add_option("--format", c.format, "report format")->check(CLI::IsMember({"csv", "md"}));
    s->add_option("--boundary", c.boundary, "boundary DOFs: exact (interpolated exact solution) or clamped (zero)")
        ->check(CLI::IsMember({"exact", "clamped"}));
    s->add_option("--grad-div", c.grad_div, "grad div term: projected (L2 projection of grad div) or differentiated (gradient of the projected div)")
        ->check(CLI::IsMember({"projected", "differentiated"}));
  };

  auto* mesh = app.add_subcommand("mesh", "generate a mesh and print its quality report");
  add_common(mesh);
  auto* solve = app.add_subcommand("solve", "solve one example and report its errors");
  add_common(solve);
  add_model(solve);
  solve->add_option("--report", c.report, "also write the error report here");
  solve->add_option("--dump-matrix", c.dump_matrix, "write the assembled matrix as row col value triplets");
  auto* conv = app.add_subcommand("convergence", "convergence sweep over a mesh sequence");
  add_common(conv);
  add_model(conv);
  conv->add_option("--preset", c.preset, "table1-top | table1-bottom | table2 | fig1");
  conv->add_option("--gnuplot", c.gnuplot, "write (log h, log E) columns here");
  auto* check = app.add_subcommand("check", "run the property suite on random meshes");
  check->add_option("--seed", c.seed, "base seed");
  check->add_option("--meshes", c.check_meshes, "number of random meshes")->check(CLI::PositiveNumber);
  check->add_flag("--flip-jump-sign", c.flip_jump_sign, "test hook: negate the vertex jump terms")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  try {
    if (*mesh) return cmd_mesh(c);
    if (*solve) return cmd_solve(c);
    if (*conv) return cmd_convergence(c);
    if (*check) return cmd_check(c);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
