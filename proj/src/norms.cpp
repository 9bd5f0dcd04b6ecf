#include "ciga/norms.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "ciga/gauss.hpp"

namespace ciga {

namespace {

int norm_quad(const ShapeTable& table, int quad_points) {
  return quad_points > 0 ? quad_points : table.spec().p + 2;
}

// Discrete scalar value and physical gradient at a shape evaluation.
void discrete_scalar(const ShapeEval& sh, const DofMap& dofs, int patch,
                     const Vector& u, double& uh, Vec2& grad) {
  uh = 0.0;
  grad.setZero();
  for (std::size_t j = 0; j < sh.global_ids.size(); ++j) {
    const double c = u(dofs.dof(patch, sh.global_ids[j], 0));
    uh += c * sh.values(static_cast<int>(j));
    grad(0) += c * sh.grad_phys(static_cast<int>(j), 0);
    if (sh.grad_phys.cols() > 1) grad(1) += c * sh.grad_phys(static_cast<int>(j), 1);
  }
}

Vec2 discrete_vector(const ShapeEval& sh, const DofMap& dofs, int patch,
                     const Vector& u) {
  Vec2 out = Vec2::Zero();
  for (std::size_t j = 0; j < sh.global_ids.size(); ++j)
    for (int c = 0; c < 2; ++c)
      out(c) += u(dofs.dof(patch, sh.global_ids[j], c)) *
                sh.values(static_cast<int>(j));
  return out;
}

template <class Kernel>
void quadrature_loop(const ShapeTable& table, int nq, Kernel&& kernel) {
  const MultiPatchMesh& mesh = table.mesh();
  const int dim = mesh.dim();
  for (std::size_t e = 0; e < mesh.elements().size(); ++e) {
    const Element& el = mesh.elements()[e];
    const PatchGrid& g = mesh.grids()[el.patch];
    const GaussRule r0 =
        gauss_on_interval(nq, g.abscissae[0][el.i0], g.abscissae[0][el.i0 + 1]);
    if (dim == 1) {
      for (int q0 = 0; q0 < nq; ++q0) {
        Vector xi(1);
        xi(0) = r0.points(q0);
        const ShapeEval sh = table.eval(static_cast<int>(e), xi);
        kernel(sh, el.patch, std::abs(sh.det) * r0.weights(q0));
      }
      continue;
    }
    const GaussRule r1 =
        gauss_on_interval(nq, g.abscissae[1][el.j0], g.abscissae[1][el.j0 + 1]);
    for (int q1 = 0; q1 < nq; ++q1)
      for (int q0 = 0; q0 < nq; ++q0) {
        Vector xi(2);
        xi << r0.points(q0), r1.points(q1);
        const ShapeEval sh = table.eval(static_cast<int>(e), xi);
        kernel(sh, el.patch, std::abs(sh.det) * r0.weights(q0) * r1.weights(q1));
      }
  }
}

double rel(double num, double den) { return den > 0 ? num / den : num; }

}  // namespace

ErrorNorms compute_error_norms(const ShapeTable& table, const DofMap& dofs,
                               const Vector& u, const ExactScalar& exact,
                               int quad_points) {
  double e_l2 = 0, n_l2 = 0, e_h1 = 0, n_h1 = 0;
  quadrature_loop(table, norm_quad(table, quad_points),
                  [&](const ShapeEval& sh, int patch, double w) {
    double uh;
    Vec2 gh;
    discrete_scalar(sh, dofs, patch, u, uh, gh);
    const double ue = exact.value(sh.x);
    const Vec2 ge = exact.gradient(sh.x);
    e_l2 += w * (uh - ue) * (uh - ue);
    n_l2 += w * ue * ue;
    e_h1 += w * (gh - ge).squaredNorm();
    n_h1 += w * ge.squaredNorm();
  });
  ErrorNorms out;
  out.L2 = std::sqrt(e_l2);
  out.L2_rel = rel(out.L2, std::sqrt(n_l2));
  out.H1_broken = std::sqrt(e_l2 + e_h1);
  out.H1_rel = rel(out.H1_broken, std::sqrt(n_l2 + n_h1));
  out.energy = std::sqrt(e_h1);
  out.energy_rel = rel(out.energy, std::sqrt(n_h1));
  return out;
}

ErrorNorms compute_error_norms_elasticity(const ShapeTable& table,
                                          const DofMap& dofs, const Vector& u,
                                          const Eigen::Matrix3d& D,
                                          const ExactElasticity& exact,
                                          int quad_points) {
  const Eigen::Matrix3d C = D.inverse();
  double e_l2 = 0, n_l2 = 0, e_en = 0, n_en = 0;
  quadrature_loop(table, norm_quad(table, quad_points),
                  [&](const ShapeEval& sh, int patch, double w) {
    const Vec2 uh = discrete_vector(sh, dofs, patch, u);
    Eigen::Vector3d strain = Eigen::Vector3d::Zero();
    for (std::size_t j = 0; j < sh.global_ids.size(); ++j) {
      const int jj = static_cast<int>(j);
      const double ux = u(dofs.dof(patch, sh.global_ids[j], 0));
      const double uy = u(dofs.dof(patch, sh.global_ids[j], 1));
      strain(0) += ux * sh.grad_phys(jj, 0);
      strain(1) += uy * sh.grad_phys(jj, 1);
      strain(2) += ux * sh.grad_phys(jj, 1) + uy * sh.grad_phys(jj, 0);
    }
    const Eigen::Vector3d sig_h = D * strain;
    const Eigen::Vector3d sig_e = exact.stress(sh.x);
    const Eigen::Vector3d ds = sig_h - sig_e;
    const Vec2 ue = exact.displacement(sh.x);
    e_l2 += w * (uh - ue).squaredNorm();
    n_l2 += w * ue.squaredNorm();
    e_en += 0.5 * w * ds.dot(C * ds);
    n_en += 0.5 * w * sig_e.dot(C * sig_e);
  });
  ErrorNorms out;
  out.L2 = std::sqrt(e_l2);
  out.L2_rel = rel(out.L2, std::sqrt(n_l2));
  out.energy = std::sqrt(e_en);
  out.energy_rel = rel(out.energy, std::sqrt(n_en));
  out.H1_broken = out.energy;  // energy norm doubles as the broken measure
  out.H1_rel = out.energy_rel;
  return out;
}

namespace {

Vector side_point(const InterfacePair::Side& sd, double t) {
  Vector xi(2);
  xi(sd.axis) = t;
  xi(1 - sd.axis) = sd.fixed;
  return xi;
}

// Matched parameters of the two sides at interpolation fraction of segment k.
void matched_params(const InterfacePair& pair, std::size_t k, double t,
                    double& ta, double& tb) {
  const auto& aa = pair.side_a.abscissae;
  const auto& ab = pair.side_b.abscissae;
  ta = t;
  tb = ab[k] + (ab[k + 1] - ab[k]) * (t - aa[k]) / (aa[k + 1] - aa[k]);
}

template <class Kernel>
void interface_loop(const ShapeTable& table, const InterfacePair& pair, int nq,
                    Kernel&& kernel) {
  const MultiPatchMesh& mesh = table.mesh();
  const NurbsPatch& pa = mesh.patches()[pair.patch_a];
  const auto& absc = pair.side_a.abscissae;
  if (absc.size() < 2) throw DomainError("interface_deviation: empty interface");
  for (std::size_t k = 0; k + 1 < absc.size(); ++k) {
    const GaussRule rule = gauss_on_interval(nq, absc[k], absc[k + 1]);
    for (int q = 0; q < nq; ++q) {
      double ta, tb;
      matched_params(pair, k, rule.points(q), ta, tb);
      const Vector xa = side_point(pair.side_a, ta);
      const Vector xb = side_point(pair.side_b, tb);
      const double ds =
          pa.jacobian(xa).J.col(pair.side_a.axis).norm() * rule.weights(q);
      kernel(table.eval_at(pair.patch_a, xa), table.eval_at(pair.patch_b, xb),
             ds);
    }
  }
}

}  // namespace

double interface_deviation(const ShapeTable& table, const InterfacePair& pair,
                           const DofMap& dofs, const Vector& u,
                           int quad_points) {
  const int comps = dofs.components();
  double jump2 = 0, a2 = 0, b2 = 0;
  interface_loop(table, pair, norm_quad(table, quad_points),
                 [&](const ShapeEval& sa, const ShapeEval& sb, double ds) {
    for (int c = 0; c < comps; ++c) {
      double ua = 0, ub = 0;
      for (std::size_t j = 0; j < sa.global_ids.size(); ++j)
        ua += u(dofs.dof(pair.patch_a, sa.global_ids[j], c)) *
              sa.values(static_cast<int>(j));
      for (std::size_t j = 0; j < sb.global_ids.size(); ++j)
        ub += u(dofs.dof(pair.patch_b, sb.global_ids[j], c)) *
              sb.values(static_cast<int>(j));
      jump2 += ds * (ua - ub) * (ua - ub);
      a2 += ds * ua * ua;
      b2 += ds * ub * ub;
    }
  });
  const double den = std::sqrt(a2) + std::sqrt(b2);
  return den > 0 ? std::sqrt(jump2) / den : std::sqrt(jump2);
}

double interface_jump_max(const ShapeTable& table, const InterfacePair& pair,
                          const DofMap& dofs, const Vector& u, int samples) {
  const auto& absc = pair.side_a.abscissae;
  const double t0 = absc.front(), t1 = absc.back();
  const int comps = dofs.components();
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double t = t0 + (t1 - t0) * (i + 0.5) / samples;
    // Locate the segment for the beta-side reparameterization.
    std::size_t k = 0;
    while (k + 2 < absc.size() && absc[k + 1] <= t) ++k;
    double ta, tb;
    matched_params(pair, k, t, ta, tb);
    const ShapeEval sa = table.eval_at(pair.patch_a, side_point(pair.side_a, ta));
    const ShapeEval sb = table.eval_at(pair.patch_b, side_point(pair.side_b, tb));
    for (int c = 0; c < comps; ++c) {
      double ua = 0, ub = 0;
      for (std::size_t j = 0; j < sa.global_ids.size(); ++j)
        ua += u(dofs.dof(pair.patch_a, sa.global_ids[j], c)) *
              sa.values(static_cast<int>(j));
      for (std::size_t j = 0; j < sb.global_ids.size(); ++j)
        ub += u(dofs.dof(pair.patch_b, sb.global_ids[j], c)) *
              sb.values(static_cast<int>(j));
      worst = std::max(worst, std::abs(ua - ub));
    }
  }
  return worst;
}

}  // namespace ciga
