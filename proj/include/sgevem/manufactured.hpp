#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "sgevem/common.hpp"
#include "sgevem/mesh.hpp"
#include "sgevem/poly.hpp"
#include "sgevem/vem_local.hpp"

namespace sgevem {

/// Truncated Taylor series of order 4 around a point: c[k] = f^(k)(x0) / k!.
/// Arithmetic and elementary functions follow the usual jet recurrences, so
/// derivatives of composed 1D factors are exact up to rounding.
struct Jet {
  static constexpr int kOrder = 4;
  std::array<double, kOrder + 1> c{};

  static Jet constant(double v) {
    Jet j;
    j.c[0] = v;
    return j;
  }
  static Jet variable(double x0) {
    Jet j;
    j.c[0] = x0;
    j.c[1] = 1.0;
    return j;
  }
  /// k-th derivative at the expansion point.
  [[nodiscard]] double derivative(int k) const {
    static constexpr std::array<double, kOrder + 1> fact{1.0, 1.0, 2.0, 6.0, 24.0};
    return fact[k] * c[k];
  }

  friend Jet operator+(Jet a, const Jet& b) {
    for (int k = 0; k <= kOrder; ++k) a.c[k] += b.c[k];
    return a;
  }
  friend Jet operator-(Jet a, const Jet& b) {
    for (int k = 0; k <= kOrder; ++k) a.c[k] -= b.c[k];
    return a;
  }
  friend Jet operator-(Jet a) {
    for (auto& v : a.c) v = -v;
    return a;
  }
  friend Jet operator+(Jet a, double s) {
    a.c[0] += s;
    return a;
  }
  friend Jet operator+(double s, Jet a) { return a + s; }
  friend Jet operator-(Jet a, double s) {
    a.c[0] -= s;
    return a;
  }
  friend Jet operator-(double s, const Jet& a) { return -a + s; }
  friend Jet operator*(Jet a, double s) {
    for (auto& v : a.c) v *= s;
    return a;
  }
  friend Jet operator*(double s, Jet a) { return a * s; }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (int k = 0; k <= kOrder; ++k)
      for (int j = 0; j <= k; ++j) r.c[k] += a.c[j] * b.c[k - j];
    return r;
  }
};

inline Jet exp(const Jet& a) {
  Jet r;
  r.c[0] = std::exp(a.c[0]);
  for (int k = 1; k <= Jet::kOrder; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * a.c[j] * r.c[k - j];
    r.c[k] = s / k;
  }
  return r;
}

inline std::pair<Jet, Jet> sincos(const Jet& a) {
  Jet s, c;
  s.c[0] = std::sin(a.c[0]);
  c.c[0] = std::cos(a.c[0]);
  for (int k = 1; k <= Jet::kOrder; ++k) {
    double ss = 0.0, cc = 0.0;
    for (int j = 1; j <= k; ++j) {
      ss += j * a.c[j] * c.c[k - j];
      cc += j * a.c[j] * s.c[k - j];
    }
    s.c[k] = ss / k;
    c.c[k] = -cc / k;
  }
  return {s, c};
}
inline Jet sin(const Jet& a) { return sincos(a).first; }
inline Jet cos(const Jet& a) { return sincos(a).second; }

/// One-dimensional factor of a separable term.
using Factor1D = std::function<Jet(const Jet&)>;

/// coef * X(x) * Y(y)
struct SeparableTerm {
  double coef = 1.0;
  Factor1D fx;
  Factor1D fy;
};

/// All partial derivatives d^(a+b) / dx^a dy^b with a + b <= 4 of one component.
struct PartialTable {
  std::array<std::array<double, Jet::kOrder + 1>, Jet::kOrder + 1> d{};
  [[nodiscard]] double operator()(int a, int b) const { return d[a][b]; }
};

/// How the body force is derived from the displacement.
enum class ForceModel {
  strain_gradient,  // f = (iota^2 Lap - I) L u
  reduced,          // f = -L u with div u = 0, i.e. the classical problem at iota = 0
};

/// Manufactured displacement: two components, each a sum of separable terms.
class ExactSolution {
 public:
  ExactSolution() = default;
  ExactSolution(std::string name, std::array<std::vector<SeparableTerm>, 2> components,
                ForceModel model = ForceModel::strain_gradient)
      : name_(std::move(name)), components_(std::move(components)), model_(model) {}

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] ForceModel force_model() const { return model_; }

  [[nodiscard]] std::array<PartialTable, 2> partials(const Point2& p) const {
    std::array<PartialTable, 2> out{};
    for (int c = 0; c < 2; ++c) {
      for (const auto& term : components_[c]) {
        const Jet X = term.fx(Jet::variable(p.x()));
        const Jet Y = term.fy(Jet::variable(p.y()));
        for (int a = 0; a <= Jet::kOrder; ++a)
          for (int b = 0; a + b <= Jet::kOrder; ++b) out[c].d[a][b] += term.coef * X.derivative(a) * Y.derivative(b);
      }
    }
    return out;
  }

  [[nodiscard]] Point2 value(const Point2& p) const {
    const auto t = partials(p);
    return {t[0](0, 0), t[1](0, 0)};
  }
  /// Row c holds grad u_c.
  [[nodiscard]] Eigen::Matrix2d gradient(const Point2& p) const {
    const auto t = partials(p);
    Eigen::Matrix2d g;
    for (int c = 0; c < 2; ++c) g.row(c) << t[c](1, 0), t[c](0, 1);
    return g;
  }
  [[nodiscard]] double divergence(const Point2& p) const {
    const auto t = partials(p);
    return t[0](1, 0) + t[1](0, 1);
  }

 private:
  std::string name_;
  std::array<std::vector<SeparableTerm>, 2> components_;
  ForceModel model_ = ForceModel::strain_gradient;
};

namespace detail {

inline Factor1D constant_factor(double v) {
  return [v](const Jet&) { return Jet::constant(v); };
}

/// Polynomial factor from power coefficients c0 + c1 t + ...
inline Factor1D polynomial_factor(std::vector<double> coeffs) {
  return [coeffs](const Jet& t) {
    Jet r;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) r = r * t + *it;
    return r;
  };
}

}  // namespace detail

inline const std::vector<std::string>& example_names() {
  static const std::vector<std::string> names{"exam1a", "exam1b", "exam3", "divfree", "zero"};
  return names;
}

/// Shipped manufactured solutions. exam1b depends on iota, exam3 on lambda.
inline ExactSolution example_solution(const std::string& name, const ModelParams& params) {
  using std::numbers::e;
  using std::numbers::pi;
  if (name == "exam1a") {
    auto ecos = [](const Jet& t) { return exp(cos(2.0 * pi * t)) - e; };
    auto cos2 = [](const Jet& t) { return cos(2.0 * pi * t) - 1.0; };
    auto cos4 = [](const Jet& t) { return cos(4.0 * pi * t) - 1.0; };
    return ExactSolution(name, {{{{1.0, ecos, ecos}}, {{1.0, cos2, cos4}}}});
  }
  if (name == "exam1b") {
    const double io = params.iota;
    auto layer = [io](const Jet& t) { return exp(t * (-1.0 / io)); };
    auto one = detail::constant_factor(1.0);
    auto id = detail::polynomial_factor({0.0, 1.0});
    auto sq = detail::polynomial_factor({0.0, 0.0, 1.0});
    return ExactSolution(name, {{{{io, layer, one}, {io, one, layer}, {-1.0, sq, id}},
                                 {{io, layer, one}, {io, one, layer}, {-1.0, id, sq}}}});
  }
  if (name == "exam3") {
    const double s = 1.0 / (1.0 + params.lambda);
    auto c2m1 = [](const Jet& t) { return cos(2.0 * pi * t) - 1.0; };
    auto s2 = [](const Jet& t) { return sin(2.0 * pi * t); };
    auto s1 = [](const Jet& t) { return sin(pi * t); };
    return ExactSolution(name, {{{{1.0, c2m1, s2}, {s, s1, s1}}, {{-1.0, s2, c2m1}, {s, s1, s1}}}});
  }
  if (name == "divfree") {
    // x^2 (1-x)^2 = x^2 - 2x^3 + x^4;  y (1-y)(1-2y) = y - 3y^2 + 2y^3;  x(1-x)(1-2x) likewise.
    auto quartic = detail::polynomial_factor({0.0, 0.0, 1.0, -2.0, 1.0});
    auto cubic = detail::polynomial_factor({0.0, 1.0, -3.0, 2.0});
    return ExactSolution(name, {{{{-1.0, quartic, cubic}}, {{1.0, cubic, quartic}}}}, ForceModel::reduced);
  }
  if (name == "zero") return ExactSolution(name, {});
  std::string known;
  for (const auto& n : example_names()) known += (known.empty() ? "" : ", ") + n;
  throw ValidationError("unknown example '" + name + "' (expected one of: " + known + ")");
}

/// Lame operator L u = mu Lap u + (lambda + mu) grad div u, and its Laplacian.
struct LameTerms {
  Point2 lame;
  Point2 lap_lame;
};

inline LameTerms lame_terms(const std::array<PartialTable, 2>& t, const ModelParams& params) {
  const auto& u = t[0];
  const auto& v = t[1];
  const double mu = params.mu, lm = params.lambda + params.mu;
  LameTerms r;
  r.lame.x() = mu * (u(2, 0) + u(0, 2)) + lm * (u(2, 0) + v(1, 1));
  r.lame.y() = mu * (v(2, 0) + v(0, 2)) + lm * (u(1, 1) + v(0, 2));
  r.lap_lame.x() = mu * (u(4, 0) + 2.0 * u(2, 2) + u(0, 4)) + lm * (u(4, 0) + u(2, 2) + v(3, 1) + v(1, 3));
  r.lap_lame.y() = mu * (v(4, 0) + 2.0 * v(2, 2) + v(0, 4)) + lm * (u(3, 1) + u(1, 3) + v(2, 2) + v(0, 4));
  return r;
}

/// Body force for the given solution. For the reduced model only mu Lap u enters,
/// so the force does not depend on lambda or iota.
inline Point2 force_from_partials(const std::array<PartialTable, 2>& t, ForceModel model, const ModelParams& params) {
  if (model == ForceModel::reduced) return -params.mu * Point2(t[0](2, 0) + t[0](0, 2), t[1](2, 0) + t[1](0, 2));
  const auto l = lame_terms(t, params);
  return params.iota * params.iota * l.lap_lame - l.lame;
}

inline Point2 body_force(const ExactSolution& u, const ModelParams& params, const Point2& x) {
  return force_from_partials(u.partials(x), u.force_model(), params);
}

inline VectorField body_force_field(const ExactSolution& u, const ModelParams& params) {
  return [u, params](const Point2& x) { return body_force(u, params, x); };
}

/// Global norms over the mesh: ||f||_0, lambda ||div u||_2 (full H2 norm),
/// and the H1 / H2 seminorms of u.
struct ContinuousNorms {
  double force_l2 = 0.0;
  double lambda_div_h2 = 0.0;
  double u_h1 = 0.0;
  double u_h2 = 0.0;
};

inline ContinuousNorms continuous_norms(const ExactSolution& u, const ModelParams& params, const PolygonMesh& mesh,
                                        int degree = 8) {
  double f2 = 0.0, div2 = 0.0, h1 = 0.0, h2 = 0.0;
  for (int k = 0; k < static_cast<int>(mesh.num_cells()); ++k) {
    const auto g = compute_geometry(mesh, k);
    const auto q = cell_quadrature(g, degree);
    for (std::size_t i = 0; i < q.points.size(); ++i) {
      const auto& x = q.points[i];
      const auto t = u.partials(x);
      const double w = q.weights[i];
      const Point2 f = force_from_partials(t, u.force_model(), params);
      f2 += w * f.squaredNorm();
      // div u and its first and second derivatives
      const double d = t[0](1, 0) + t[1](0, 1);
      const double dx = t[0](2, 0) + t[1](1, 1), dy = t[0](1, 1) + t[1](0, 2);
      const double dxx = t[0](3, 0) + t[1](2, 1), dxy = t[0](2, 1) + t[1](1, 2), dyy = t[0](1, 2) + t[1](0, 3);
      div2 += w * (d * d + dx * dx + dy * dy + dxx * dxx + 2.0 * dxy * dxy + dyy * dyy);
      for (int c = 0; c < 2; ++c) {
        h1 += w * (t[c](1, 0) * t[c](1, 0) + t[c](0, 1) * t[c](0, 1));
        h2 += w * (t[c](2, 0) * t[c](2, 0) + 2.0 * t[c](1, 1) * t[c](1, 1) + t[c](0, 2) * t[c](0, 2));
      }
    }
  }
  return {std::sqrt(f2), params.lambda * std::sqrt(div2), std::sqrt(h1), std::sqrt(h2)};
}

}  // namespace sgevem
