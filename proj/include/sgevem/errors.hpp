#pragma once

#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sgevem/assembly.hpp"
#include "sgevem/manufactured.hpp"

namespace sgevem {

inline constexpr int kErrorQuadDegree = 8;

/// Squared broken seminorms of u - Pi1 u_h (H1) and u - Pi2 u_h (H2), summed over cells.
struct ProjectionErrors {
  double h1_sq = 0.0;
  double h2_sq = 0.0;
};

inline ProjectionErrors projection_errors(const ExactSolution& u, const Discretization& disc, const Vector& uh) {
  ProjectionErrors out;
  for (std::size_t k = 0; k < disc.elements.size(); ++k) {
    const auto& el = disc.elements[k];
    const auto& p = disc.projectors[k];
    const Vector chi = gather(uh, disc.local_to_global[k]);
    const Vector c1 = p.P1 * chi;
    const Vector c2 = p.P2 * chi;
    const auto q = cell_quadrature(el.geom, kErrorQuadDegree);
    for (std::size_t i = 0; i < q.points.size(); ++i) {
      const auto t = u.partials(q.points[i]);
      const auto b = eval_basis(el.basis, q.points[i], 2);
      for (int c = 0; c < 2; ++c) {
        const auto a1 = c1.segment(kScalarDim * c, kScalarDim);
        const auto a2 = c2.segment(kScalarDim * c, kScalarDim);
        const Eigen::Vector2d g = b.gradients.transpose() * a1;
        const Eigen::Vector3d hs = b.hessians.transpose() * a2;
        const double ex = t[c](1, 0) - g[0], ey = t[c](0, 1) - g[1];
        const double exx = t[c](2, 0) - hs[0], exy = t[c](1, 1) - hs[1], eyy = t[c](0, 2) - hs[2];
        out.h1_sq += q.weights[i] * (ex * ex + ey * ey);
        out.h2_sq += q.weights[i] * (exx * exx + 2.0 * exy * exy + eyy * eyy);
      }
    }
  }
  return out;
}

/// Relative error in the discrete energy norm, evaluated through the projections.
inline double energy_error_epi(const ExactSolution& u, const Discretization& disc, const Vector& uh,
                               const ModelParams& params) {
  const auto e = projection_errors(u, disc, uh);
  const auto n = continuous_norms(u, params, *disc.mesh, kErrorQuadDegree);
  const double i2 = params.iota * params.iota;
  const double den = n.u_h1 * n.u_h1 + i2 * n.u_h2 * n.u_h2;
  if (!(den > 0.0)) throw ValidationError("energy norm of the exact solution is zero");
  return std::sqrt((e.h1_sq + i2 * e.h2_sq) / den);
}

/// Relative maximum error over mesh vertices, Euclidean norm of the 2-vector.
inline double max_error_einf(const ExactSolution& u, const Discretization& disc, const Vector& uh) {
  double num = 0.0, den = 0.0;
  for (int v = 0; v < disc.dofs.n_vertices; ++v) {
    const Point2 ex = u.value(disc.mesh->vertex(v));
    const Point2 ap(uh[disc.dofs.vertex(v, 0)], uh[disc.dofs.vertex(v, 1)]);
    num = std::max(num, (ex - ap).norm());
    den = std::max(den, ex.norm());
  }
  if (!(den > 0.0)) throw ValidationError("exact solution vanishes at every vertex");
  return num / den;
}

/// Energy-norm distance to the reduced-problem solution u0, divided by ||f||_0.
inline double reduced_energy_error(const ExactSolution& u0, const Discretization& disc, const Vector& uh,
                                   const ModelParams& params) {
  const auto e = projection_errors(u0, disc, uh);
  const double num = std::sqrt(e.h1_sq + params.iota * params.iota * e.h2_sq);
  if (num == 0.0) return 0.0;
  const auto n = continuous_norms(u0, params, *disc.mesh, kErrorQuadDegree);
  if (!(n.force_l2 > 0.0)) throw ValidationError("body force vanishes; reduced error undefined");
  return num / n.force_l2;
}

struct ConvergenceRecord {
  std::string example;
  double iota = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  int cells = 0;
  double h = 0.0;
  double e_pi = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> e_inf;
  std::optional<double> e_u0;
  std::optional<double> rate;
  double seconds = 0.0;
  double residual = 0.0;
};

/// Least-squares slope of log E against log h.
inline double fit_rate(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 2) throw ValidationError("rate fit needs at least two (h, E) pairs");
  const std::size_t n = h.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(h[i] > 0.0) || !(err[i] > 0.0)) throw ValidationError("rate fit needs positive h and errors");
    mx += std::log(h[i]);
    my += std::log(err[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(h[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(err[i]) - my);
  }
  if (sxx <= 1e-24) throw ValidationError("rate fit needs distinct mesh sizes");
  return sxy / sxx;
}

/// The error a sweep is judged by: E_u0 when present, else E_pi.
inline double primary_error(const ConvergenceRecord& r) { return r.e_u0 ? *r.e_u0 : r.e_pi; }

inline double fit_rate(const std::vector<ConvergenceRecord>& records) {
  std::vector<double> h, e;
  for (const auto& r : records) {
    h.push_back(r.h);
    e.push_back(primary_error(r));
  }
  return fit_rate(h, e);
}

enum class ReportFormat { csv, markdown };

namespace detail {

inline std::string sci(double v, int digits = 4) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(digits) << v;
  return s.str();
}

inline std::string fixed(const std::optional<double>& v, int digits) {
  if (!v) return {};
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << *v;
  return s.str();
}

inline std::string opt(const std::optional<double>& v) { return v ? sci(*v, 6) : std::string(); }

inline bool same_row(const ConvergenceRecord& a, const ConvergenceRecord& b) {
  return a.example == b.example && a.iota == b.iota && a.lambda == b.lambda && a.mu == b.mu;
}

}  // namespace detail

inline const char* kCsvHeader = "example,iota,lambda,mu,N,h,E_pi,E_inf,E_u0,rate";

/// CSV: one line per record. Markdown: one row per parameter set, one column
/// per mesh, the fitted rate last.
inline std::string emit_report(const std::vector<ConvergenceRecord>& records, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::csv) {
    out << kCsvHeader << '\n';
    for (const auto& r : records) {
      out << r.example << ',' << detail::sci(r.iota, 6) << ',' << detail::sci(r.lambda, 6) << ','
          << detail::sci(r.mu, 6) << ',' << r.cells << ',' << detail::sci(r.h, 6) << ',' << detail::sci(r.e_pi, 6)
          << ',' << detail::opt(r.e_inf) << ',' << detail::opt(r.e_u0) << ',' << detail::fixed(r.rate, 3) << '\n';
    }
    return out.str();
  }
  std::size_t i = 0;
  bool header = false;
  while (i < records.size()) {
    std::size_t j = i;
    while (j < records.size() && detail::same_row(records[i], records[j])) ++j;
    if (!header) {
      out << "| example | iota | lambda | mu |";
      for (std::size_t k = i; k < j; ++k) out << " N=" << records[k].cells << " |";
      out << " Rate |\n|---|---|---|---|";
      for (std::size_t k = i; k < j; ++k) out << "---|";
      out << "---|\n";
      header = true;
    }
    const auto& r0 = records[i];
    out << "| " << r0.example << " | " << detail::sci(r0.iota, 0) << " | " << detail::sci(r0.lambda, 0) << " | "
        << detail::sci(r0.mu, 0) << " |";
    std::optional<double> rate;
    for (std::size_t k = i; k < j; ++k) {
      out << ' ' << detail::sci(primary_error(records[k])) << " |";
      if (records[k].rate) rate = records[k].rate;
    }
    out << ' ' << detail::fixed(rate, 2) << " |\n";
    i = j;
  }
  return out.str();
}

/// Two-column (log h, log E) blocks, one per parameter set, separated by blank lines.
inline std::string gnuplot_dump(const std::vector<ConvergenceRecord>& records) {
  std::ostringstream out;
  out << std::setprecision(10);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i > 0 && !detail::same_row(records[i - 1], records[i])) out << "\n\n";
    if (i == 0 || !detail::same_row(records[i - 1], records[i]))
      out << "# " << records[i].example << " iota=" << records[i].iota << " lambda=" << records[i].lambda << '\n';
    out << std::log(records[i].h) << ' ' << std::log(primary_error(records[i])) << '\n';
  }
  return out.str();
}

}  // namespace sgevem
