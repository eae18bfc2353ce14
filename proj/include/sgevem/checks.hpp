#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sgevem/assembly.hpp"
#include "sgevem/interpolation.hpp"
#include "sgevem/manufactured.hpp"
#include "sgevem/vem_local.hpp"

namespace sgevem {

/// Continuous local form a^K(p_a, p_b) on the 12 vector monomials, by quadrature
/// of pointwise derivatives.
inline Matrix continuous_local_form(const LocalElement& el, const ModelParams& params, int degree = 8) {
  const auto q = cell_quadrature(el.geom, degree);
  const double mu = params.mu, lam = params.lambda, i2 = params.iota * params.iota;
  Matrix A = Matrix::Zero(kVectorDim, kVectorDim);
  for (std::size_t k = 0; k < q.points.size(); ++k) {
    const auto b = eval_basis(el.basis, q.points[k], 2);
    // per vector monomial: strain (xx, xy, yy), div, grad strain (8), grad div (2)
    Matrix eps(kVectorDim, 3), gradeps(kVectorDim, 8), gdiv(kVectorDim, 2);
    Vector div(kVectorDim);
    for (int a = 0; a < kVectorDim; ++a) {
      const int c = a / kScalarDim, i = a % kScalarDim;
      Eigen::Matrix2d G = Eigen::Matrix2d::Zero();
      G.row(c) = b.gradients.row(i);
      // Hessian of component c, others zero: H[c](d1, d2)
      const double hxx = b.hessians(i, 0), hxy = b.hessians(i, 1), hyy = b.hessians(i, 2);
      auto H = [&](int comp, int d1, int d2) -> double {
        if (comp != c) return 0.0;
        if (d1 == 0 && d2 == 0) return hxx;
        if (d1 == 1 && d2 == 1) return hyy;
        return hxy;
      };
      const Eigen::Matrix2d E = 0.5 * (G + G.transpose());
      eps.row(a) << E(0, 0), E(0, 1), E(1, 1);
      div[a] = G.trace();
      for (int kk = 0; kk < 2; ++kk)
        for (int ii = 0; ii < 2; ++ii)
          for (int jj = 0; jj < 2; ++jj) gradeps(a, 4 * kk + 2 * ii + jj) = 0.5 * (H(kk, ii, jj) + H(jj, ii, kk));
      for (int ii = 0; ii < 2; ++ii) gdiv(a, ii) = H(0, ii, 0) + H(1, ii, 1);
    }
    const Eigen::Vector3d wts(1.0, 2.0, 1.0);
    const double w = q.weights[k];
    A += w * (2.0 * mu * eps * wts.asDiagonal() * eps.transpose() + lam * div * div.transpose() +
              i2 * (2.0 * mu * gradeps * gradeps.transpose() + lam * gdiv * gdiv.transpose()));
  }
  return A;
}

/// Max over pairs of |chi(p)^T A_K chi(q) - a^K(p, q)| / max(1, |a^K(p, q)|).
inline double patch_test_defect(const LocalElement& el, const LocalProjectors& p, const ModelParams& params,
                                 GradDivForm form = GradDivForm::projected_gradient) {
  const Matrix discrete = p.D.transpose() * local_stiffness(el, p, params, form) * p.D;
  const Matrix exact = continuous_local_form(el, params);
  double worst = 0.0;
  for (int a = 0; a < kVectorDim; ++a)
    for (int b = 0; b < kVectorDim; ++b)
      worst = std::max(worst, std::abs(discrete(a, b) - exact(a, b)) / std::max(1.0, std::abs(exact(a, b))));
  return worst;
}

struct ReproductionDefects {
  double pi1 = 0.0, pi2 = 0.0, div = 0.0, grad_div = 0.0;
  [[nodiscard]] double max() const { return std::max({pi1, pi2, div, grad_div}); }
};

inline ReproductionDefects reproduction_defects(const LocalElement& el, const LocalProjectors& p) {
  const auto t = strain_divergence_tables(el.basis);
  const Matrix I = Matrix::Identity(kVectorDim, kVectorDim);
  ReproductionDefects d;
  d.pi1 = (p.P1 * p.D - I).cwiseAbs().maxCoeff();
  d.pi2 = (p.P2 * p.D - I).cwiseAbs().maxCoeff();
  d.div = (p.Pdiv * p.D - t.div).cwiseAbs().maxCoeff() / std::max(1.0, t.div.cwiseAbs().maxCoeff());
  d.grad_div = (p.Pgdiv * p.D - t.grad_div).cwiseAbs().maxCoeff() / std::max(1.0, t.grad_div.cwiseAbs().maxCoeff());
  return d;
}

struct KernelReport {
  int null_dim = 0;
  double rigid_residual = 0.0;    // ||A r|| / ||A|| over the rigid motions
  double gap = 0.0;               // smallest nonzero eigenvalue / largest
};

/// Null space of the local stiffness: eigenvalues below tol * lambda_max count as zero.
inline KernelReport kernel_report(const Matrix& A, const Matrix& rigid, double tol = 1e-9) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(A);
  const Vector ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  KernelReport r;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev[i]) <= tol * top) ++r.null_dim;
  r.gap = r.null_dim < ev.size() ? ev[r.null_dim] / top : 0.0;
  for (Eigen::Index j = 0; j < rigid.cols(); ++j)
    r.rigid_residual = std::max(r.rigid_residual, (A * rigid.col(j)).norm() / (top * rigid.col(j).norm()));
  return r;
}

/// A smooth random field built from separable sine / cosine products.
inline ExactSolution random_smooth_field(std::uint64_t seed, int terms = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(0.5, 3.0), phase(0.0, 6.283185307179586), coef(-1.0, 1.0);
  std::array<std::vector<SeparableTerm>, 2> comps;
  for (int c = 0; c < 2; ++c) {
    for (int t = 0; t < terms; ++t) {
      const double a = freq(rng), b = phase(rng), cc = freq(rng), d = phase(rng);
      comps[c].push_back({coef(rng), [a, b](const Jet& x) { return sin(a * x + b); },
                          [cc, d](const Jet& y) { return cos(cc * y + d); }});
    }
  }
  return ExactSolution("random" + std::to_string(seed), std::move(comps));
}

struct CommutingDefects {
  double div = 0.0;       // || Pi0 div u_I - Pi0 div u ||_0 / || div u ||_0
  double grad_div = 0.0;  // same for the projection of grad div
};

/// Compares the divergence projections of the commuting interpolant with the
/// projections of the exact field, cell by cell.
inline CommutingDefects commuting_defects(const ExactSolution& u, const Discretization& disc, int degree = 12) {
  const Vector uI = commuting_interpolant(u, disc);
  double e_div = 0.0, e_grad = 0.0, n_div = 0.0, n_grad = 0.0;
  for (std::size_t k = 0; k < disc.elements.size(); ++k) {
    const auto& el = disc.elements[k];
    const auto& p = disc.projectors[k];
    const Vector chi = gather(uI, disc.local_to_global[k]);
    const auto q = cell_quadrature(el.geom, degree);
    Vector rhs = Vector::Zero(3);
    Eigen::Vector2d gd = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < q.points.size(); ++i) {
      const auto t = u.partials(q.points[i]);
      const double d = t[0](1, 0) + t[1](0, 1);
      rhs += q.weights[i] * d * detail::p1_values(el.basis, q.points[i]);
      gd += q.weights[i] * Eigen::Vector2d(t[0](2, 0) + t[1](1, 1), t[0](1, 1) + t[1](0, 2));
      n_div += q.weights[i] * d * d;
    }
    const Vector exact_div = p.M1.ldlt().solve(rhs);
    const Vector diff = p.Pdiv * chi - exact_div;
    e_div += diff.dot(p.M1 * diff);
    const Eigen::Vector2d exact_gd = gd / el.geom.area;
    e_grad += el.geom.area * (Eigen::Vector2d(p.Pgdiv * chi) - exact_gd).squaredNorm();
    n_grad += el.geom.area * exact_gd.squaredNorm();
  }
  CommutingDefects c;
  c.div = std::sqrt(e_div) / std::max(std::sqrt(n_div), 1e-300);
  c.grad_div = std::sqrt(e_grad) / std::max(std::sqrt(n_grad), 1e-300);
  return c;
}

}  // namespace sgevem
