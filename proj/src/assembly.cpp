#include "ciga/assembly.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <fstream>
#include <set>

#include "ciga/gauss.hpp"

namespace ciga {

DofMap::DofMap(const MultiPatchMesh& mesh, const InterfaceSet& interfaces,
               CompatMode mode, int components)
    : comps_(components), base_count_(mesh.node_count()) {
  if (mode == CompatMode::Penalty) {
    for (const auto& pair : interfaces.pairs)
      for (int node : pair.shared_nodes)
        dup_base_.emplace(std::make_pair(pair.patch_b, node), base_count_++);
  }
}

int DofMap::base(int patch, int node) const {
  const auto it = dup_base_.find({patch, node});
  return it == dup_base_.end() ? node : it->second;
}

int quadrature_points(const ShapeTable& table, const SolveConfig& config) {
  return config.quadrature_order > 0 ? config.quadrature_order
                                     : table.spec().p + 2;
}

Eigen::Matrix3d plane_stress_matrix(double E, double nu) {
  Eigen::Matrix3d D;
  const double c = E / (1.0 - nu * nu);
  D << c, c * nu, 0, c * nu, c, 0, 0, 0, c * (1.0 - nu) / 2.0;
  return D;
}

namespace {

void reserve_pattern(Eigen::SparseMatrix<double>& K, const ShapeTable& table,
                     int comps) {
  // Structural superset: nodes interact within 2s+1 grid layers; add slack
  // for penalty interface coupling.
  const int s = std::max(table.spec().s, 1);
  const int d = table.mesh().dim();
  const int per_node = d == 1 ? (4 * s + 3) : (4 * s + 3) * (4 * s + 3);
  K.reserve(Eigen::VectorXi::Constant(K.cols(), 2 * per_node * comps));
}

struct EdgeQuad {
  Vector xi;      // parametric point on the edge
  Vec2 x;         // physical point
  Vec2 normal;    // outward unit normal
  double dline;   // |dF/dt| * gauss weight
};

std::vector<EdgeQuad> edge_quadrature(const MultiPatchMesh& mesh,
                                      const BoundaryEdge& edge, int nq) {
  const NurbsPatch& patch = mesh.patches()[edge.patch];
  const GaussRule rule = gauss_on_interval(nq, edge.t0, edge.t1);
  std::vector<EdgeQuad> out;
  out.reserve(nq);
  const int m = 1 - edge.axis;  // fixed axis
  for (int q = 0; q < nq; ++q) {
    EdgeQuad eq;
    eq.xi.resize(2);
    eq.xi(edge.axis) = rule.points(q);
    eq.xi(m) = edge.fixed;
    const auto jac = patch.jacobian(eq.xi);
    eq.x = patch.map_forward(eq.xi);
    const Vector tangent = jac.J.col(edge.axis);
    Eigen::Matrix2d Jinv = jac.J.inverse();
    Vec2 n = Jinv.transpose().col(m);
    if (edge.fixed < 0.5) n = -n;
    eq.normal = n.normalized();
    eq.dline = tangent.norm() * rule.weights(q);
    out.push_back(std::move(eq));
  }
  return out;
}

// Volume assembly skeleton shared by Poisson and elasticity: calls the
// kernel with the shape data and the quadrature weight |det J| w.
template <class Kernel>
void for_each_volume_point(const ShapeTable& table, int nq, Kernel&& kernel) {
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
        kernel(sh, std::abs(sh.det) * r0.weights(q0), true);
      }
      continue;
    }
    const GaussRule r1 =
        gauss_on_interval(nq, g.abscissae[1][el.j0], g.abscissae[1][el.j0 + 1]);
    bool first = true;
    for (int q1 = 0; q1 < nq; ++q1)
      for (int q0 = 0; q0 < nq; ++q0) {
        Vector xi(2);
        xi << r0.points(q0), r1.points(q1);
        const ShapeEval sh = table.eval(static_cast<int>(e), xi);
        kernel(sh, std::abs(sh.det) * r0.weights(q0) * r1.weights(q1), first);
        first = false;
      }
  }
}

void scatter_add(Eigen::SparseMatrix<double>& K, const std::vector<int>& dofs,
                 const Matrix& local) {
  const int n = static_cast<int>(dofs.size());
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r)
      if (local(r, c) != 0.0) K.coeffRef(dofs[r], dofs[c]) += local(r, c);
}

void add_penalty_terms(Eigen::SparseMatrix<double>& K, const ShapeTable& table,
                       const InterfaceSet& interfaces, const DofMap& dofs,
                       const SolveConfig& config, int nq) {
  const MultiPatchMesh& mesh = table.mesh();
  for (const auto& pair : interfaces.pairs) {
    const NurbsPatch& pa = mesh.patches()[pair.patch_a];
    const auto& absc = pair.side_a.abscissae;
    for (std::size_t k = 0; k + 1 < absc.size(); ++k) {
      const GaussRule rule = gauss_on_interval(nq, absc[k], absc[k + 1]);
      // Segment length for the default penalty scaling.
      auto side_point = [](const InterfacePair::Side& sd, double t) {
        Vector xi(2);
        xi(sd.axis) = t;
        xi(1 - sd.axis) = sd.fixed;
        return xi;
      };
      double seg_len = 0.0;
      for (int q = 0; q < nq; ++q) {
        const auto jac = pa.jacobian(side_point(pair.side_a, rule.points(q)));
        seg_len += jac.J.col(pair.side_a.axis).norm() * rule.weights(q);
      }
      const double rho =
          config.penalty_rho > 0.0 ? config.penalty_rho : 1e4 / seg_len;

      for (int q = 0; q < nq; ++q) {
        const double t = rule.points(q);
        const double tb = pair.side_b.abscissae[k] +
                          (pair.side_b.abscissae[k + 1] - pair.side_b.abscissae[k]) *
                              (t - absc[k]) / (absc[k + 1] - absc[k]);
        const ShapeEval sa = table.eval_at(pair.patch_a, side_point(pair.side_a, t));
        const ShapeEval sb = table.eval_at(pair.patch_b, side_point(pair.side_b, tb));
        const double ds =
            pa.jacobian(side_point(pair.side_a, t)).J.col(pair.side_a.axis).norm() *
            rule.weights(q);

        std::vector<int> jd;
        Vector jump(sa.global_ids.size() + sb.global_ids.size());
        int idx = 0;
        for (std::size_t j = 0; j < sa.global_ids.size(); ++j, ++idx) {
          jd.push_back(dofs.dof(pair.patch_a, sa.global_ids[j], 0));
          jump(idx) = sa.values(static_cast<int>(j));
        }
        for (std::size_t j = 0; j < sb.global_ids.size(); ++j, ++idx) {
          jd.push_back(dofs.dof(pair.patch_b, sb.global_ids[j], 0));
          jump(idx) = -sb.values(static_cast<int>(j));
        }
        const Matrix local = rho * ds * (jump * jump.transpose());
        scatter_add(K, jd, local);
      }
    }
  }
}

}  // namespace

DofSystem assemble_poisson(const ShapeTable& table, const InterfaceSet& interfaces,
                           const ScalarField& source, const ScalarField& dirichlet,
                           const SolveConfig& config,
                           const std::vector<std::string>& dirichlet_tags) {
  const MultiPatchMesh& mesh = table.mesh();
  DofMap dofs(mesh, interfaces, config.mode, 1);
  const int nq = quadrature_points(table, config);

  DofSystem sys{Eigen::SparseMatrix<double>(dofs.count(), dofs.count()),
                Vector::Zero(dofs.count()),
                {},
                dofs};
  reserve_pattern(sys.K, table, 1);

  std::vector<int> gd;
  Matrix Kloc;
  Vector floc;
  int current = -1;
  auto flush = [&]() {
    if (current >= 0) {
      scatter_add(sys.K, gd, Kloc);
      for (std::size_t j = 0; j < gd.size(); ++j) sys.f(gd[j]) += floc(j);
    }
  };
  for_each_volume_point(table, nq,
                        [&](const ShapeEval& sh, double w, bool first) {
    if (first) {
      flush();
      current = sh.element;
      const int patch = mesh.elements()[sh.element].patch;
      gd.clear();
      for (int id : sh.global_ids) gd.push_back(dofs.dof(patch, id, 0));
      const int n = static_cast<int>(gd.size());
      Kloc = Matrix::Zero(n, n);
      floc = Vector::Zero(n);
    }
    Kloc += w * (sh.grad_phys * sh.grad_phys.transpose());
    floc += (w * source(sh.x)) * sh.values;
  });
  flush();

  if (config.mode == CompatMode::Penalty)
    add_penalty_terms(sys.K, table, interfaces, dofs, config, nq);
  sys.K.makeCompressed();

  // Dirichlet constraints on tagged boundary nodes (empty list = all tags).
  std::map<int, double> fixed;
  for (const auto& edge : mesh.boundary()) {
    if (!dirichlet_tags.empty() &&
        std::find(dirichlet_tags.begin(), dirichlet_tags.end(), edge.tag) ==
            dirichlet_tags.end())
      continue;
    for (int node : edge.nodes) {
      const int dof = dofs.dof(edge.patch, node, 0);
      fixed.emplace(dof, dirichlet(mesh.nodes().row(node).transpose()));
    }
  }
  if (fixed.empty())
    throw ConstructionError("assemble_poisson: no Dirichlet dofs (unconstrained)");
  for (const auto& [dof, value] : fixed) sys.constraints.push_back({dof, value});
  return sys;
}

DofSystem assemble_elasticity(const ShapeTable& table,
                              const InterfaceSet& interfaces, double E, double nu,
                              const ElasticityBC& bc, const SolveConfig& config) {
  const MultiPatchMesh& mesh = table.mesh();
  DofMap dofs(mesh, interfaces, config.mode, 2);
  const int nq = quadrature_points(table, config);
  const Eigen::Matrix3d D = plane_stress_matrix(E, nu);

  DofSystem sys{Eigen::SparseMatrix<double>(dofs.count(), dofs.count()),
                Vector::Zero(dofs.count()),
                {},
                dofs};
  reserve_pattern(sys.K, table, 2);

  std::vector<int> gd;
  Matrix Kloc;
  int current = -1;
  auto flush = [&]() {
    if (current >= 0) scatter_add(sys.K, gd, Kloc);
  };
  for_each_volume_point(table, nq,
                        [&](const ShapeEval& sh, double w, bool first) {
    const int n = static_cast<int>(sh.global_ids.size());
    if (first) {
      flush();
      current = sh.element;
      const int patch = mesh.elements()[sh.element].patch;
      gd.clear();
      for (int id : sh.global_ids)
        for (int c = 0; c < 2; ++c) gd.push_back(dofs.dof(patch, id, c));
      Kloc = Matrix::Zero(2 * n, 2 * n);
    }
    Matrix B = Matrix::Zero(3, 2 * n);
    for (int j = 0; j < n; ++j) {
      B(0, 2 * j) = sh.grad_phys(j, 0);
      B(1, 2 * j + 1) = sh.grad_phys(j, 1);
      B(2, 2 * j) = sh.grad_phys(j, 1);
      B(2, 2 * j + 1) = sh.grad_phys(j, 0);
    }
    Kloc += w * (B.transpose() * D * B);
  });
  flush();

  if (config.mode == CompatMode::Penalty) {
    // Componentwise jump penalty along every interface.
    const int nq1 = nq;
    for (const auto& pair : interfaces.pairs) {
      const NurbsPatch& pa = mesh.patches()[pair.patch_a];
      const auto& absc = pair.side_a.abscissae;
      auto side_point = [](const InterfacePair::Side& sd, double t) {
        Vector xi(2);
        xi(sd.axis) = t;
        xi(1 - sd.axis) = sd.fixed;
        return xi;
      };
      for (std::size_t k = 0; k + 1 < absc.size(); ++k) {
        const GaussRule rule = gauss_on_interval(nq1, absc[k], absc[k + 1]);
        double seg_len = 0.0;
        for (int q = 0; q < nq1; ++q)
          seg_len += pa.jacobian(side_point(pair.side_a, rule.points(q)))
                         .J.col(pair.side_a.axis)
                         .norm() *
                     rule.weights(q);
        const double rho =
            config.penalty_rho > 0.0 ? config.penalty_rho : 1e4 / seg_len;
        for (int q = 0; q < nq1; ++q) {
          const double t = rule.points(q);
          const double tb =
              pair.side_b.abscissae[k] +
              (pair.side_b.abscissae[k + 1] - pair.side_b.abscissae[k]) *
                  (t - absc[k]) / (absc[k + 1] - absc[k]);
          const ShapeEval sa =
              table.eval_at(pair.patch_a, side_point(pair.side_a, t));
          const ShapeEval sb =
              table.eval_at(pair.patch_b, side_point(pair.side_b, tb));
          const double ds = pa.jacobian(side_point(pair.side_a, t))
                                .J.col(pair.side_a.axis)
                                .norm() *
                            rule.weights(q);
          for (int comp = 0; comp < 2; ++comp) {
            std::vector<int> jd;
            Vector jump(sa.global_ids.size() + sb.global_ids.size());
            int idx = 0;
            for (std::size_t j = 0; j < sa.global_ids.size(); ++j, ++idx) {
              jd.push_back(dofs.dof(pair.patch_a, sa.global_ids[j], comp));
              jump(idx) = sa.values(static_cast<int>(j));
            }
            for (std::size_t j = 0; j < sb.global_ids.size(); ++j, ++idx) {
              jd.push_back(dofs.dof(pair.patch_b, sb.global_ids[j], comp));
              jump(idx) = -sb.values(static_cast<int>(j));
            }
            scatter_add(sys.K, jd, rho * ds * (jump * jump.transpose()));
          }
        }
      }
    }
  }

  // Neumann tractions.
  for (const auto& edge : mesh.boundary()) {
    if (std::find(bc.neumann_tags.begin(), bc.neumann_tags.end(), edge.tag) ==
        bc.neumann_tags.end())
      continue;
    for (const EdgeQuad& eq : edge_quadrature(mesh, edge, nq)) {
      const ShapeEval sh = table.eval_at(edge.patch, eq.xi);
      const Vec2 t = bc.traction(eq.x, eq.normal);
      for (std::size_t j = 0; j < sh.global_ids.size(); ++j)
        for (int c = 0; c < 2; ++c)
          sys.f(dofs.dof(edge.patch, sh.global_ids[j], c)) +=
              sh.values(static_cast<int>(j)) * t(c) * eq.dline;
    }
  }
  sys.K.makeCompressed();

  // Dirichlet constraints per tag and component.
  std::map<int, double> fixed;
  for (const auto& [tag, comp, value] : bc.dirichlet) {
    for (const auto& edge : mesh.boundary()) {
      if (edge.tag != tag) continue;
      for (int node : edge.nodes)
        fixed.emplace(dofs.dof(edge.patch, node, comp),
                      value(mesh.nodes().row(node).transpose()));
    }
  }
  if (fixed.empty())
    throw ConstructionError("assemble_elasticity: no Dirichlet dofs");
  for (const auto& [dof, value] : fixed) sys.constraints.push_back({dof, value});
  return sys;
}

Vector solve_system(const DofSystem& system, const SolveConfig& config) {
  const int n = static_cast<int>(system.K.rows());
  Vector g = Vector::Zero(n);
  std::vector<char> is_fixed(n, 0);
  for (const auto& c : system.constraints) {
    g(c.dof) = c.value;
    is_fixed[c.dof] = 1;
  }
  Vector f = system.f - system.K * g;

  // Constrained copy: zero rows/cols of fixed dofs, unit diagonal.
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(system.K.nonZeros() + system.constraints.size());
  for (int col = 0; col < system.K.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(system.K, col); it; ++it)
      if (!is_fixed[it.row()] && !is_fixed[it.col()])
        trips.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < n; ++i)
    if (is_fixed[i]) trips.emplace_back(i, i, 1.0);
  Eigen::SparseMatrix<double> Kc(n, n);
  Kc.setFromTriplets(trips.begin(), trips.end());
  for (const auto& c : system.constraints) f(c.dof) = c.value;

  Vector u;
  if (config.solver == SolveConfig::Solver::ConjugateGradient) {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>
        cg(Kc);
    cg.setTolerance(config.cg_tolerance);
    u = cg.solve(f);
    if (cg.info() != Eigen::Success)
      throw ConstructionError("solve_system: CG did not converge");
  } else {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Kc);
    if (ldlt.info() != Eigen::Success)
      throw ConstructionError(
          "solve_system: factorization failed (singular matrix; missing "
          "constraints?)");
    u = ldlt.solve(f);
    const double rel = (Kc * u - f).norm() / std::max(f.norm(), 1e-30);
    if (rel > 1e-10)
      throw ConstructionError("solve_system: direct solve residual " +
                              std::to_string(rel));
  }
  return u;
}

void write_matrix_market(const Eigen::SparseMatrix<double>& K,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConstructionError("write_matrix_market: cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << K.rows() << " " << K.cols() << " " << K.nonZeros() << "\n";
  out.precision(17);
  for (int col = 0; col < K.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

}  // namespace ciga
