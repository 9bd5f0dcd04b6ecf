#include "ciga/shape_table.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

namespace ciga {

namespace {

int max_spline_degree(const NurbsPatch& patch) {
  int deg = 0;
  for (int m = 0; m < patch.dim(); ++m)
    deg = std::max(deg, patch.knot_vector(m).degree());
  return deg;
}

WeightField patch_weight_field(const NurbsPatch& patch) {
  WeightField w;
  w.value = [&patch](const Vector& xi) { return patch.weight_function(xi); };
  w.gradient = [&patch](const Vector& xi) { return patch.weight_gradient(xi); };
  return w;
}

double max_gap(const std::vector<double>& absc, int lo, int hi) {
  double h = 0.0;
  for (int i = lo; i < hi; ++i) h = std::max(h, absc[i + 1] - absc[i]);
  return h;
}

// Interface-adjacency info of one patch side.
struct SideInfo {
  int pair = -1;       // index into InterfaceSet::pairs, -1 if none
  int own_side = 0;    // 0 = alpha, 1 = beta
  int axis = 0;        // axis along the interface
  int fixed_idx = 0;   // transverse node index of the interface
};

}  // namespace

ShapeTable::ShapeTable(const MultiPatchMesh& mesh, const InterfaceSet& interfaces,
                       const ConvPatchIndex& index, ConvSpec spec,
                       CompatMode mode)
    : mesh_(mesh), spec_(std::move(spec)), mode_(mode) {
  const int npatch = static_cast<int>(mesh.patches().size());
  weighted_basis_.resize(npatch);
  for (int a = 0; a < npatch; ++a)
    weighted_basis_[a] = mesh.patches()[a].kind() == PatchKind::Nurbs &&
                         spec_.p >= max_spline_degree(mesh.patches()[a]);

  element_of_cell_.resize(npatch);
  for (int a = 0; a < npatch; ++a) {
    const PatchGrid& g = mesh.grids()[a];
    const int ncell = g.nelem[0] * std::max(g.nelem[1], 1);
    element_of_cell_[a].assign(ncell, -1);
  }
  for (std::size_t e = 0; e < mesh.elements().size(); ++e) {
    const Element& el = mesh.elements()[e];
    const PatchGrid& g = mesh.grids()[el.patch];
    element_of_cell_[el.patch][el.i0 + g.nelem[0] * el.j0] = static_cast<int>(e);
  }

  if (mode_ == CompatMode::G0)
    for (const auto& pr : interfaces.pairs)
      if (weighted_basis_[pr.patch_a] != weighted_basis_[pr.patch_b])
        throw ConstructionError(
            "shape table (G0): interface pair mixes weighted and unweighted "
            "reproduced bases");

  if (spec_.s == 0) return;  // identity convolution, no tables needed
  evals_.resize(npatch);
  for (int a = 0; a < npatch; ++a) build_patch(a, interfaces, index);
}

void ShapeTable::build_patch(int patch, const InterfaceSet& interfaces,
                             const ConvPatchIndex& index) {
  const NurbsPatch& np = mesh_.patches()[patch];
  const PatchGrid& g = mesh_.grids()[patch];
  const int dim = mesh_.dim();
  const int s = spec_.s;
  const bool weighted = weighted_basis_[patch];

  // Interface adjacency. One interface per patch side is supported; the
  // bundled generators produce at most one pair. Needed in every mode: in
  // nodal/penalty mode interface-adjacent nodes must keep the generic
  // radial construction, and interface sides are excluded from the
  // boundary classification below.
  std::vector<SideInfo> sides;
  bool iface_at[2][2] = {{false, false}, {false, false}};  // [axis][end]
  if (dim == 2) {
    for (std::size_t pi = 0; pi < interfaces.pairs.size(); ++pi) {
      const InterfacePair& pr = interfaces.pairs[pi];
      for (int side = 0; side < 2; ++side) {
        const int p_side = side == 0 ? pr.patch_a : pr.patch_b;
        if (p_side != patch) continue;
        const auto& sd = side == 0 ? pr.side_a : pr.side_b;
        SideInfo info;
        info.pair = static_cast<int>(pi);
        info.own_side = side;
        info.axis = sd.axis;
        info.fixed_idx = sd.fixed > 0.5 ? g.nelem[1 - sd.axis] : 0;
        iface_at[1 - sd.axis][sd.fixed > 0.5 ? 1 : 0] = true;
        sides.push_back(info);

        if (mode_ != CompatMode::G0) continue;
        // Theorem-3 regularity: matching interface abscissae on both sides.
        const auto& aa = pr.side_a.abscissae;
        const auto& ab = pr.side_b.abscissae;
        for (std::size_t k = 0; k < aa.size(); ++k)
          if (std::abs(aa[k] - ab[k]) > 1e-12)
            throw ConstructionError(
                "shape table (G0): interface abscissae of the two patches do "
                "not match; near-interface regularity violated");
      }
    }
  }

  // Shared interface-direction function sets, cached per (pair, range) so
  // both patches of a pair evaluate the identical object.
  auto shared_set = [&](const SideInfo& info, int lo,
                        int hi) -> std::shared_ptr<const SharedInterfaceConv> {
    const long key = (static_cast<long>(info.pair) << 40) |
                     (static_cast<long>(lo) << 20) | hi;
    auto it = shared_cache_.find(key);
    if (it != shared_cache_.end()) return it->second;

    const InterfacePair& pr = interfaces.pairs[info.pair];
    const NurbsPatch& pa = mesh_.patches()[pr.patch_a];
    const NurbsPatch& pb = mesh_.patches()[pr.patch_b];
    const int n = hi - lo + 1;
    SharedInterfaceConv::Nodes nodes;
    nodes.rbf_coords.resize(n, 1);
    nodes.xi_alpha.resize(n);
    nodes.xi_beta.resize(n);
    nodes.w_alpha.resize(n);
    nodes.w_beta.resize(n);
    auto side_point = [](const InterfacePair::Side& sd, double t) {
      Vector xi(2);
      xi(sd.axis) = t;
      xi(1 - sd.axis) = sd.fixed;
      return xi;
    };
    for (int k = 0; k < n; ++k) {
      const double ta = pr.side_a.abscissae[lo + k];
      const double tb = pr.side_b.abscissae[lo + k];
      nodes.rbf_coords(k, 0) = ta;
      nodes.xi_alpha(k) = ta;
      nodes.xi_beta(k) = tb;
      nodes.w_alpha(k) =
          weighted ? pa.weight_function(side_point(pr.side_a, ta)) : 1.0;
      nodes.w_beta(k) =
          weighted ? pb.weight_function(side_point(pr.side_b, tb)) : 1.0;
    }
    const double h = max_gap(pr.side_a.abscissae, lo, hi);
    auto set = std::make_shared<SharedInterfaceConv>(
        std::move(nodes), spec_, spec_.dilation_units() * h);
    shared_cache_.emplace(key, set);
    return set;
  };

  auto make_chart = [&](const SideInfo& info) {
    const InterfacePair& pr = interfaces.pairs[info.pair];
    InterfaceChart chart = InterfaceChart::identity();
    if (!weighted) return chart;
    const NurbsPatch& pa = mesh_.patches()[pr.patch_a];
    const NurbsPatch& pb = mesh_.patches()[pr.patch_b];
    auto trace = [](const NurbsPatch& p, const InterfacePair::Side& sd) {
      return [&p, sd](double t, double& w, double& dw) {
        Vector xi(2);
        xi(sd.axis) = t;
        xi(1 - sd.axis) = sd.fixed;
        w = p.weight_function(xi);
        dw = p.weight_gradient(xi)(sd.axis);
      };
    };
    chart.trace_alpha = trace(pa, pr.side_a);
    chart.trace_beta = trace(pb, pr.side_b);
    return chart;
  };

  const int n0 = g.nelem[0], n1 = (dim == 2) ? g.nelem[1] : 0;
  const int nblocks0 = static_cast<int>(g.span_bounds[0].size()) - 1;
  evals_[patch].resize((n0 + 1) * (n1 + 1));

  for (int j = 0; j <= n1; ++j) {
    for (int i = 0; i <= n0; ++i) {
      const int flat = i + (n0 + 1) * j;
      for (const auto& [key, range] : index.per_patch[patch][flat].by_block) {
        NodeEvaluator ev;
        ev.block_key = key;
        ev.range = &range;

        // Interface proximity: within s layers of an interface side.
        const SideInfo* near_side = nullptr;
        for (const auto& info : sides) {
          const int tr_idx = info.axis == 0 ? j : i;
          if (std::abs(tr_idx - info.fixed_idx) <= s) {
            if (near_side && mode_ == CompatMode::G0)
              throw ConstructionError(
                  "shape table (G0): node within s layers of two interfaces "
                  "is not supported");
            near_side = &info;
          }
        }
        const bool near_iface = near_side != nullptr;
        if (mode_ != CompatMode::G0) near_side = nullptr;

        // Patches touching a domain boundary (a patch side that is not an
        // interface) get the separable product construction so that
        // interior shapes have vanishing traces there and boundary dofs
        // carry the boundary values exactly. Interface-adjacent nodes in
        // nodal/penalty mode are exempt: each patch keeps the ordinary
        // construction over its own parameterization, which is what makes
        // the traces genuinely incompatible across the interface.
        bool touches_boundary = false;
        if (dim == 2 && !near_side && !(near_iface && mode_ != CompatMode::G0))
          for (int m = 0; m < 2; ++m) {
            if (range.lo[m] == 0 && !iface_at[m][0]) touches_boundary = true;
            if (range.hi[m] == g.nelem[m] && !iface_at[m][1])
              touches_boundary = true;
          }

        if (near_side) {
          const int iax = near_side->axis;  // axis along the interface
          const int tax = 1 - iax;
          const int t_lo = range.lo[tax], t_hi = range.hi[tax];
          const int i_lo = range.lo[iax], i_hi = range.hi[iax];
          const int nt = t_hi - t_lo + 1;

          Matrix tnodes(nt, 1);
          for (int k = 0; k < nt; ++k)
            tnodes(k, 0) = g.abscissae[tax][t_lo + k];
          // Full-order basis: with as many basis entries as nodes the
          // moment system forces the radial coefficients to zero, so the
          // transverse factor is the polynomial Lagrange set and boundary
          // traces integrate exactly under Gauss quadrature.
          const int qt = nt - 1;
          Vector center(1), scale(1);
          center(0) = 0.5 * (tnodes(0, 0) + tnodes(nt - 1, 0));
          scale(0) = std::max(0.5 * (tnodes(nt - 1, 0) - tnodes(0, 0)), 1e-12);
          auto tbasis =
              std::make_shared<MonomialBasis>(1, qt, true, center, scale);
          const double ht = max_gap(g.abscissae[tax], t_lo, t_hi);
          auto tset = std::make_shared<ConvFunctionSet>(
              std::move(tnodes), tbasis, spec_.rbf_kind,
              spec_.dilation_units() * ht, g.node_id(i, j));

          ev.iface_axis = iax;
          ev.product = std::make_unique<ProductConv2d>(
              tset, shared_set(*near_side, i_lo, i_hi), make_chart(*near_side),
              iax, weighted ? patch_weight_field(np) : WeightField::unit(2),
              near_side->own_side);
        } else if (touches_boundary) {
          auto axis_set = [&](int m) {
            const int lo = range.lo[m], hi = range.hi[m];
            const int n = hi - lo + 1;
            Matrix nodes(n, 1);
            for (int k = 0; k < n; ++k) nodes(k, 0) = g.abscissae[m][lo + k];
            const int q = n - 1;  // full order: polynomial Lagrange factor
            Vector center(1), scale(1);
            center(0) = 0.5 * (nodes(0, 0) + nodes(n - 1, 0));
            scale(0) = std::max(0.5 * (nodes(n - 1, 0) - nodes(0, 0)), 1e-12);
            auto basis =
                std::make_shared<MonomialBasis>(1, q, true, center, scale);
            const double h = max_gap(g.abscissae[m], lo, hi);
            return std::make_shared<ConvFunctionSet>(
                std::move(nodes), basis, spec_.rbf_kind,
                spec_.dilation_units() * h, g.node_id(i, j));
          };
          ev.tensor = std::make_unique<TensorConv2d>(
              axis_set(0), axis_set(1),
              weighted ? patch_weight_field(np) : WeightField::unit(2));
        } else {
          const int count = static_cast<int>(range.member_ids.size());
          Matrix nodes(count, dim);
          int q_cap = spec_.p;
          for (int m = 0; m < dim; ++m)
            q_cap = std::min(q_cap, range.hi[m] - range.lo[m]);
          // Ranges clamped by a 1D domain boundary get the full-order
          // (Lagrange) basis, so boundary nodes do not reduce the
          // reproduction order of the scheme.
          if (dim == 1 &&
              (range.lo[0] == 0 || range.hi[0] == g.nelem[0]) &&
              range.hi[0] - range.lo[0] < 2 * s)
            q_cap = count - 1;
          int row = 0;
          for (int jj = range.lo[1]; jj <= range.hi[1]; ++jj)
            for (int ii = range.lo[0]; ii <= range.hi[0]; ++ii, ++row) {
              nodes(row, 0) = g.abscissae[0][ii];
              if (dim == 2) nodes(row, 1) = g.abscissae[1][jj];
            }
          Vector center(dim), scale(dim);
          double h = 0.0;
          for (int m = 0; m < dim; ++m) {
            const double lo = g.abscissae[m][range.lo[m]];
            const double hi = g.abscissae[m][range.hi[m]];
            center(m) = 0.5 * (lo + hi);
            scale(m) = std::max(0.5 * (hi - lo), 1e-12);
            h = std::max(h, max_gap(g.abscissae[m], range.lo[m], range.hi[m]));
          }
          std::shared_ptr<ReproducingBasis> basis =
              std::make_shared<MonomialBasis>(dim, q_cap, true, center, scale);
          if (weighted)
            basis = std::make_shared<WeightedBasis>(basis,
                                                    patch_weight_field(np));
          ev.ordinary = std::make_unique<ConvFunctionSet>(
              std::move(nodes), basis, spec_.rbf_kind,
              spec_.dilation_units() * h, g.node_id(i, j));
        }
        evals_[patch][flat].push_back(std::move(ev));
      }
    }
  }
  (void)nblocks0;
}

const ShapeTable::NodeEvaluator& ShapeTable::node_eval(int patch, int flat,
                                                       int block_key) const {
  for (const auto& ev : evals_[patch][flat])
    if (ev.block_key == block_key) return ev;
  throw DomainError("shape table: missing node evaluator for span block");
}

ShapeEval ShapeTable::eval(int element, const Vector& xi) const {
  const Element& el = mesh_.elements()[element];
  const NurbsPatch& np = mesh_.patches()[el.patch];
  const PatchGrid& g = mesh_.grids()[el.patch];
  const int dim = mesh_.dim();
  const int s = spec_.s;

  ShapeEval out;
  out.element = element;
  const auto jac = np.jacobian(xi);
  out.J = jac.J;
  out.det = jac.det;
  out.x = np.map_forward(xi);

  // Linear/bilinear FEM hats on the element's parametric rectangle.
  double hat[2][2], dhat[2][2];  // [dir][corner 0/1]
  const int cell[2] = {el.i0, el.j0};
  for (int m = 0; m < dim; ++m) {
    const double a = g.abscissae[m][cell[m]];
    const double b = g.abscissae[m][cell[m] + 1];
    const double t = (xi(m) - a) / (b - a);
    hat[m][0] = 1.0 - t;
    hat[m][1] = t;
    dhat[m][0] = -1.0 / (b - a);
    dhat[m][1] = 1.0 / (b - a);
  }

  if (s == 0) {
    const int nc = dim == 1 ? 2 : 4;
    out.global_ids.resize(nc);
    out.values.resize(nc);
    out.grad_param = Matrix::Zero(nc, dim);
    for (int c = 0; c < nc; ++c) {
      const int c0 = c & 1, c1 = c >> 1;
      out.global_ids[c] =
          dim == 1 ? g.node_id(el.i0 + c0) : g.node_id(el.i0 + c0, el.j0 + c1);
      double v = hat[0][c0];
      Eigen::RowVectorXd gr(dim);
      gr(0) = dhat[0][c0];
      if (dim == 2) {
        v *= hat[1][c1];
        gr(0) *= hat[1][c1];
        gr(1) = hat[0][c0] * dhat[1][c1];
      }
      out.values(c) = v;
      out.grad_param.row(c) = gr;
    }
  } else {
    // Elemental patch set A_s^e: union of the corner nodes' (possibly
    // shifted) window rectangles within the span block.
    const int b0 = span_block_of_cell(g, 0, el.i0);
    const int b1 = dim == 2 ? span_block_of_cell(g, 1, el.j0) : 0;
    const int nblocks0 = static_cast<int>(g.span_bounds[0].size()) - 1;
    const int block_key = b0 + nblocks0 * b1;

    const int nc = dim == 1 ? 2 : 4;
    const NodeEvaluator* evs[4] = {nullptr, nullptr, nullptr, nullptr};
    int lo[2] = {0, 0}, hi[2] = {0, 0};
    for (int c = 0; c < nc; ++c) {
      const int c0 = c & 1, c1 = c >> 1;
      const int ni = el.i0 + c0, nj = dim == 2 ? el.j0 + c1 : 0;
      evs[c] = &node_eval(el.patch, ni + (g.nelem[0] + 1) * nj, block_key);
      const NodePatchRange& r = *evs[c]->range;
      for (int m = 0; m < dim; ++m) {
        lo[m] = c == 0 ? r.lo[m] : std::min(lo[m], r.lo[m]);
        hi[m] = c == 0 ? r.hi[m] : std::max(hi[m], r.hi[m]);
      }
    }
    const int w0 = hi[0] - lo[0] + 1;
    const int nloc = w0 * (dim == 2 ? hi[1] - lo[1] + 1 : 1);

    out.global_ids.resize(nloc);
    for (int jj = lo[1]; jj <= (dim == 2 ? hi[1] : 0); ++jj)
      for (int ii = lo[0]; ii <= hi[0]; ++ii)
        out.global_ids[(ii - lo[0]) + w0 * (jj - lo[1])] =
            dim == 1 ? g.node_id(ii) : g.node_id(ii, jj);
    out.values = Vector::Zero(nloc);
    out.grad_param = Matrix::Zero(nloc, dim);

    for (int c = 0; c < nc; ++c) {
      const int c0 = c & 1, c1 = c >> 1;
      double N = hat[0][c0];
      Eigen::RowVectorXd dN(dim);
      dN(0) = dhat[0][c0];
      if (dim == 2) {
        N *= hat[1][c1];
        dN(0) *= hat[1][c1];
        dN(1) = hat[0][c0] * dhat[1][c1];
      }

      const NodeEvaluator& ev = *evs[c];
      const NodePatchRange& r = *ev.range;
      ConvEval w;
      if (ev.ordinary || ev.tensor) {
        w = ev.ordinary ? ev.ordinary->eval(xi) : ev.tensor->eval(xi);
        int row = 0;
        for (int jj = r.lo[1]; jj <= (dim == 2 ? r.hi[1] : 0); ++jj)
          for (int ii = r.lo[0]; ii <= r.hi[0]; ++ii, ++row) {
            const int lidx = (ii - lo[0]) + w0 * (dim == 2 ? jj - lo[1] : 0);
            out.values(lidx) += N * w.values(row);
            out.grad_param.row(lidx) += dN * w.values(row) + N * w.gradients.row(row);
          }
      } else {
        w = ev.product->eval(xi);
        // product members flatten as mt + nt * ms
        const int nt = ev.product->transverse_count();
        const int ns = ev.product->shared_count();
        const int tax = 1 - ev.iface_axis;
        for (int ms = 0; ms < ns; ++ms)
          for (int mt = 0; mt < nt; ++mt) {
            const int k = mt + nt * ms;
            const int ii = tax == 0 ? r.lo[0] + mt : r.lo[0] + ms;
            const int jj = tax == 0 ? r.lo[1] + ms : r.lo[1] + mt;
            const int lidx = (ii - lo[0]) + w0 * (jj - lo[1]);
            out.values(lidx) += N * w.values(k);
            out.grad_param.row(lidx) += dN * w.values(k) + N * w.gradients.row(k);
          }
      }
    }
  }

  // Physical gradients through the exact geometric Jacobian.
  if (out.J.rows() == out.J.cols()) {
    out.grad_phys = out.grad_param * out.J.inverse();
  } else {
    out.grad_phys = out.grad_param;  // curves: parametric gradients only
  }
  return out;
}

int ShapeTable::element_index(int patch, const Vector& xi) const {
  const PatchGrid& g = mesh_.grids()[patch];
  const int dim = mesh_.dim();
  int cell[2] = {0, 0};
  for (int m = 0; m < dim; ++m) {
    const auto& a = g.abscissae[m];
    const auto it = std::upper_bound(a.begin(), a.end(), xi(m));
    int c = static_cast<int>(it - a.begin()) - 1;
    c = std::clamp(c, 0, g.nelem[m] - 1);
    cell[m] = c;
  }
  const int idx = element_of_cell_[patch][cell[0] + g.nelem[0] * (dim == 2 ? cell[1] : 0)];
  if (idx < 0) throw DomainError("shape table: no element at that point");
  return idx;
}

ShapeEval ShapeTable::eval_at(int patch, const Vector& xi) const {
  return eval(element_index(patch, xi), xi);
}

double geometric_consistency_check(const ShapeTable& table, int patch,
                                   int sample_count) {
  std::mt19937 rng(7u + static_cast<unsigned>(patch));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int dim = table.mesh().dim();
  const NurbsPatch& np = table.mesh().patches()[patch];
  double worst = 0.0;
  for (int k = 0; k < sample_count; ++k) {
    Vector xi(dim);
    for (int m = 0; m < dim; ++m) xi(m) = uni(rng);
    const ShapeEval sh = table.eval_at(patch, xi);
    Vector sum = Vector::Zero(np.phys_dim());
    for (std::size_t j = 0; j < sh.global_ids.size(); ++j)
      sum += sh.values(static_cast<int>(j)) *
             table.mesh().nodes().row(sh.global_ids[j]).transpose();
    worst = std::max(worst, (sum - np.map_forward(xi)).norm());
  }
  return worst;
}

}  // namespace ciga
