#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "sgevem/assembly.hpp"
#include "sgevem/cvt.hpp"
#include "sgevem/errors.hpp"
#include "sgevem/interpolation.hpp"
#include "sgevem/manufactured.hpp"

namespace sgevem {

/// How the boundary DOFs are fixed: to zero (the clamped problem as posed), or
/// to the interpolated boundary DOFs of the manufactured solution.
enum class BoundaryMode { clamped, exact_data };

struct RunOptions {
  BoundaryMode boundary = BoundaryMode::exact_data;
  GradDivForm grad_div = GradDivForm::projected_gradient;
};

/// Result of one manufactured-solution solve on a fixed mesh.
struct SolveOutcome {
  Vector uh;
  SolveReport report;
  ConvergenceRecord record;
};

/// Assembles, solves and measures the named example. E_inf is reported when the
/// exact vertex values do not all vanish; E_u0 only for the reduced-model example.
inline SolveOutcome run_example(const Discretization& disc, const std::string& example, const ModelParams& params,
                                const RunOptions& opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  const ExactSolution u = example_solution(example, params);
  AssemblyOptions aopts;
  aopts.grad_div = opts.grad_div;
  if (opts.boundary == BoundaryMode::exact_data) {
    aopts.boundary_values = interpolate_dofs(u, disc);
    for (int i = 0; i < disc.dofs.size(); ++i)
      if (!disc.dofs.boundary[i]) aopts.boundary_values[i] = 0.0;
  }
  const LinearSystem sys = assemble(disc, params, body_force_field(u, params), aopts);
  SolveOutcome out;
  out.uh = solve(sys, &out.report);
  auto& r = out.record;
  r.example = example;
  r.iota = params.iota;
  r.lambda = params.lambda;
  r.mu = params.mu;
  r.cells = static_cast<int>(disc.mesh->num_cells());
  r.h = max_diameter(*disc.mesh);
  r.residual = out.report.relative_residual;
  const auto norms = continuous_norms(u, params, *disc.mesh, kErrorQuadDegree);
  if (norms.u_h1 > 0.0) {
    r.e_pi = energy_error_epi(u, disc, out.uh, params);
    double vmax = 0.0;
    for (const auto& v : disc.mesh->vertices()) vmax = std::max(vmax, u.value(v).norm());
    if (vmax > 0.0) r.e_inf = max_error_einf(u, disc, out.uh);
  } else {
    // nothing to normalize by: absolute energy error
    const auto e = projection_errors(u, disc, out.uh);
    r.e_pi = std::sqrt(e.h1_sq + params.iota * params.iota * e.h2_sq);
  }
  if (u.force_model() == ForceModel::reduced) r.e_u0 = reduced_energy_error(u, disc, out.uh, params);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// Runs the example on each mesh in turn and stores the fitted rate on the last record.
inline std::vector<ConvergenceRecord> convergence_sweep(const std::vector<const PolygonMesh*>& meshes,
                                                        const std::string& example, const ModelParams& params,
                                                        const RunOptions& opts = {}) {
  std::vector<ConvergenceRecord> records;
  for (const auto* m : meshes) {
    const auto disc = discretize(*m);
    records.push_back(run_example(disc, example, params, opts).record);
  }
  if (records.size() >= 2) records.back().rate = fit_rate(records);
  return records;
}

inline const std::vector<int>& default_cell_counts() {
  static const std::vector<int> counts{32, 64, 128, 256, 512};
  return counts;
}

inline constexpr std::uint64_t kDefaultSeed = 7;
inline constexpr int kDefaultLloydIters = 100;

}  // namespace sgevem
