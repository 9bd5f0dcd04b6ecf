#include "ciga/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <utility>

namespace ciga {

Vector PatchGrid::node_param(int i, int j) const {
  const bool one_d = abscissae[1].empty();
  Vector xi(one_d ? 1 : 2);
  xi(0) = abscissae[0][i];
  if (!one_d) xi(1) = abscissae[1][j];
  return xi;
}

namespace {

bool is_boundary_node(const PatchGrid& g, int i, int j, int dim) {
  if (i == 0 || i == g.nelem[0]) return true;
  if (dim == 2 && (j == 0 || j == g.nelem[1])) return true;
  return false;
}

double mesh_scale(const std::vector<NurbsPatch>& patches) {
  double lo = 1e300, hi = -1e300;
  for (const auto& p : patches) {
    lo = std::min(lo, p.net().points().minCoeff());
    hi = std::max(hi, p.net().points().maxCoeff());
  }
  return std::max(hi - lo, 1.0);
}

}  // namespace

MultiPatchMesh MultiPatchMesh::build(std::vector<NurbsPatch> patches,
                                     std::vector<PatchGrid> grids,
                                     const std::vector<BoundarySideTag>& side_tags,
                                     double roundtrip_tol) {
  if (patches.empty() || patches.size() != grids.size())
    throw ConstructionError("mesh build: patch/grid count mismatch");
  const int dim = patches[0].dim();

  MultiPatchMesh mesh;
  mesh.dim_ = dim;
  const double weld_tol = 1e-9 * mesh_scale(patches);

  // Weld pool: previously assigned boundary nodes of earlier patches.
  std::vector<std::pair<int, Vector>> weld_pool;
  std::vector<Vector> positions;

  for (std::size_t a = 0; a < patches.size(); ++a) {
    PatchGrid& g = grids[a];
    for (int m = 0; m < dim; ++m) {
      if (static_cast<int>(g.abscissae[m].size()) != g.nelem[m] + 1)
        throw ConstructionError("mesh build: abscissae/nelem mismatch");
      if (g.span_bounds[m].empty()) g.span_bounds[m] = {0, g.nelem[m]};
    }
    const int n0 = g.nelem[0], n1 = (dim == 2) ? g.nelem[1] : 0;
    g.node_ids.assign((n0 + 1) * (n1 + 1), -1);
    for (int j = 0; j <= n1; ++j) {
      for (int i = 0; i <= n0; ++i) {
        const Vector xi = g.node_param(i, j);
        const Vector x = patches[a].map_forward(xi);
        int id = -1;
        const bool weldable = a > 0 && is_boundary_node(g, i, j, dim);
        if (weldable) {
          for (const auto& [pid, px] : weld_pool) {
            if ((px - x).norm() < weld_tol) {
              id = pid;
              break;
            }
          }
        }
        if (id < 0) {
          id = static_cast<int>(positions.size());
          positions.push_back(x);
          if (is_boundary_node(g, i, j, dim)) weld_pool.emplace_back(id, x);
        }
        g.node_ids[i + (n0 + 1) * j] = id;
      }
    }
  }

  mesh.nodes_.resize(static_cast<int>(positions.size()), patches[0].phys_dim());
  for (std::size_t k = 0; k < positions.size(); ++k)
    mesh.nodes_.row(static_cast<int>(k)) = positions[k].transpose();

  // Round trip: welded nodes must also map back through the *other* patch.
  for (std::size_t a = 0; a < patches.size(); ++a) {
    const PatchGrid& g = grids[a];
    const int n1 = (dim == 2) ? g.nelem[1] : 0;
    for (int j = 0; j <= n1; ++j)
      for (int i = 0; i <= g.nelem[0]; ++i) {
        const Vector x = patches[a].map_forward(g.node_param(i, j));
        if ((x.transpose() - mesh.nodes_.row(g.node_id(i, j))).norm() >
            roundtrip_tol)
          throw ConstructionError("mesh build: node round trip exceeds tolerance");
      }
  }

  for (std::size_t a = 0; a < patches.size(); ++a) {
    const PatchGrid& g = grids[a];
    const int n1 = (dim == 2) ? g.nelem[1] : 1;
    for (int j = 0; j < ((dim == 2) ? g.nelem[1] : 1); ++j) {
      for (int i = 0; i < g.nelem[0]; ++i) {
        Element e;
        e.patch = static_cast<int>(a);
        e.i0 = i;
        e.j0 = j;
        if (dim == 1) {
          e.nodes = {g.node_id(i), g.node_id(i + 1), -1, -1};
        } else {
          e.nodes = {g.node_id(i, j), g.node_id(i + 1, j), g.node_id(i + 1, j + 1),
                     g.node_id(i, j + 1)};
        }
        mesh.elements_.push_back(e);
      }
    }
    (void)n1;
  }

  for (const auto& tag : side_tags) {
    const PatchGrid& g = grids[tag.patch];
    const int along = tag.axis, across = 1 - tag.axis;
    const int fixed_idx = tag.fixed > 0.5 ? g.nelem[across] : 0;
    for (int c = 0; c < g.nelem[along]; ++c) {
      BoundaryEdge edge;
      edge.patch = tag.patch;
      edge.axis = along;
      edge.fixed = tag.fixed;
      edge.tag = tag.tag;
      edge.t0 = g.abscissae[along][c];
      edge.t1 = g.abscissae[along][c + 1];
      if (along == 0) {
        edge.nodes = {g.node_id(c, fixed_idx), g.node_id(c + 1, fixed_idx)};
      } else {
        edge.nodes = {g.node_id(fixed_idx, c), g.node_id(fixed_idx, c + 1)};
      }
      mesh.boundary_.push_back(edge);
    }
  }

  mesh.patches_ = std::move(patches);
  mesh.grids_ = std::move(grids);
  return mesh;
}

std::string MultiPatchMesh::to_json() const {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (int k = 0; k < node_count(); ++k) {
    nlohmann::json row = nlohmann::json::array();
    for (int m = 0; m < nodes_.cols(); ++m) row.push_back(nodes_(k, m));
    j["nodes"].push_back(row);
  }
  j["elements"] = nlohmann::json::array();
  j["patch_of_element"] = nlohmann::json::array();
  for (const auto& e : elements_) {
    nlohmann::json conn = nlohmann::json::array();
    const int nv = dim_ == 1 ? 2 : 4;
    for (int v = 0; v < nv; ++v) conn.push_back(e.nodes[v]);
    j["elements"].push_back(conn);
    j["patch_of_element"].push_back(e.patch);
  }
  j["boundary"] = nlohmann::json::array();
  for (const auto& b : boundary_)
    j["boundary"].push_back({{"edge", {b.nodes[0], b.nodes[1]}}, {"tag", b.tag}});
  return j.dump(2);
}

namespace {

struct SideNodes {
  int patch, axis;
  double fixed;
  std::vector<int> ids;
  std::vector<double> abscissae;
};

std::vector<SideNodes> collect_sides(const MultiPatchMesh& mesh) {
  std::vector<SideNodes> out;
  for (std::size_t a = 0; a < mesh.grids().size(); ++a) {
    const PatchGrid& g = mesh.grids()[a];
    for (int axis = 0; axis < 2; ++axis) {
      const int across = 1 - axis;
      for (int end = 0; end < 2; ++end) {
        SideNodes side;
        side.patch = static_cast<int>(a);
        side.axis = axis;
        side.fixed = end == 0 ? 0.0 : 1.0;
        const int fixed_idx = end == 0 ? 0 : g.nelem[across];
        for (int c = 0; c <= g.nelem[axis]; ++c) {
          side.ids.push_back(axis == 0 ? g.node_id(c, fixed_idx)
                                       : g.node_id(fixed_idx, c));
          side.abscissae.push_back(g.abscissae[axis][c]);
        }
        out.push_back(std::move(side));
      }
    }
  }
  return out;
}

}  // namespace

InterfaceSet detect_interfaces(const MultiPatchMesh& mesh) {
  InterfaceSet set;
  if (mesh.dim() != 2 || mesh.patches().size() < 2) return set;

  const double tol = 1e-6 * std::max(1.0, mesh.nodes().cwiseAbs().maxCoeff());
  const auto sides = collect_sides(mesh);

  for (std::size_t sa = 0; sa < sides.size(); ++sa) {
    for (std::size_t sb = sa + 1; sb < sides.size(); ++sb) {
      const SideNodes& A = sides[sa];
      const SideNodes& B = sides[sb];
      if (A.patch >= B.patch) continue;
      if (A.ids.size() != B.ids.size()) continue;
      const int n = static_cast<int>(A.ids.size());

      // Try both orientations for a geometric match of all node positions.
      for (int rev = 0; rev < 2; ++rev) {
        bool geom = true;
        for (int k = 0; k < n && geom; ++k) {
          const int bk = rev ? n - 1 - k : k;
          geom = (mesh.nodes().row(A.ids[k]) - mesh.nodes().row(B.ids[bk]))
                     .norm() < tol;
        }
        if (!geom) continue;
        bool ids_match = true;
        for (int k = 0; k < n && ids_match; ++k)
          ids_match = A.ids[k] == B.ids[rev ? n - 1 - k : k];
        if (!ids_match)
          throw ConstructionError(
              "detect_interfaces: geometrically coincident patch sides carry "
              "different node ids (nodal-compatibility violation)");

        InterfacePair pair;
        pair.patch_a = A.patch;
        pair.patch_b = B.patch;
        pair.shared_nodes = A.ids;
        pair.side_a = {A.axis, A.fixed, A.abscissae};
        pair.side_b.axis = B.axis;
        pair.side_b.fixed = B.fixed;
        pair.side_b.abscissae.resize(n);
        for (int k = 0; k < n; ++k)
          pair.side_b.abscissae[k] = B.abscissae[rev ? n - 1 - k : k];
        set.pairs.push_back(std::move(pair));
        break;
      }
    }
  }
  return set;
}

int span_block_of_cell(const PatchGrid& grid, int axis, int cell) {
  const auto& bounds = grid.span_bounds[axis];
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k)
    if (cell >= bounds[k] && cell < bounds[k + 1]) return static_cast<int>(k);
  throw DomainError("span_block_of_cell: cell outside grid");
}

namespace {

// Span blocks containing node index i along one axis (1 interior, 2 on an
// interior block boundary).
std::vector<int> blocks_of_node(const std::vector<int>& bounds, int i) {
  std::vector<int> out;
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k)
    if (i >= bounds[k] && i <= bounds[k + 1]) out.push_back(static_cast<int>(k));
  return out;
}

}  // namespace

ConvPatchIndex build_conv_patch_sets(const MultiPatchMesh& mesh,
                                     const InterfaceSet& interfaces, int s) {
  if (s < 1) throw ConstructionError("build_conv_patch_sets: s must be >= 1");
  const int dim = mesh.dim();
  ConvPatchIndex index;
  index.s = s;
  index.per_patch.resize(mesh.patches().size());
  index.partition.resize(mesh.patches().size());

  // Interface node ids per patch.
  std::vector<std::set<int>> iface_nodes(mesh.patches().size());
  for (const auto& pair : interfaces.pairs)
    for (int id : pair.shared_nodes) {
      iface_nodes[pair.patch_a].insert(id);
      iface_nodes[pair.patch_b].insert(id);
    }

  for (std::size_t a = 0; a < mesh.grids().size(); ++a) {
    const PatchGrid& g = mesh.grids()[a];
    const int n0 = g.nelem[0], n1 = (dim == 2) ? g.nelem[1] : 0;
    const int nblocks0 =
        static_cast<int>(g.span_bounds[0].size()) - 1;
    index.per_patch[a].resize((n0 + 1) * (n1 + 1));
    index.partition[a].resize((n0 + 1) * (n1 + 1));

    for (int j = 0; j <= n1; ++j) {
      for (int i = 0; i <= n0; ++i) {
        auto& entry = index.per_patch[a][i + (n0 + 1) * j];
        const auto b0 = blocks_of_node(g.span_bounds[0], i);
        const auto b1 = (dim == 2) ? blocks_of_node(g.span_bounds[1], j)
                                   : std::vector<int>{0};
        std::set<int> all_members;
        for (int k1 : b1) {
          for (int k0 : b0) {
            NodePatchRange range;
            // Full-width windows shifted inward at block boundaries
            // (one-sided stencils): keeps 2s+1 nodes per direction, so
            // near-boundary nodes do not lose reproduction order.
            auto window = [s](int lo_bound, int hi_bound, int c) {
              const int w = std::min(2 * s, hi_bound - lo_bound);
              const int lo =
                  std::clamp(c - s, lo_bound, hi_bound - w);
              return std::pair<int, int>(lo, lo + w);
            };
            std::tie(range.lo[0], range.hi[0]) =
                window(g.span_bounds[0][k0], g.span_bounds[0][k0 + 1], i);
            if (dim == 2)
              std::tie(range.lo[1], range.hi[1]) =
                  window(g.span_bounds[1][k1], g.span_bounds[1][k1 + 1], j);
            for (int jj = range.lo[1]; jj <= range.hi[1]; ++jj)
              for (int ii = range.lo[0]; ii <= range.hi[0]; ++ii) {
                range.member_ids.push_back(g.node_id(ii, jj));
                all_members.insert(g.node_id(ii, jj));
              }
            const int key = k0 + nblocks0 * k1;
            entry.by_block.emplace_back(key, std::move(range));
          }
        }
        auto& part = index.partition[a][i + (n0 + 1) * j];
        for (int id : all_members) {
          if (iface_nodes[a].count(id))
            part.shared.push_back(id);
          else
            part.internal.push_back(id);
        }
      }
    }
  }
  return index;
}

const NodePatchRange& ConvPatchIndex::range(const MultiPatchMesh& mesh,
                                            int patch, int i, int j,
                                            int block_key) const {
  const PatchGrid& g = mesh.grids()[patch];
  const auto& entry = per_patch[patch][i + (g.nelem[0] + 1) * j];
  for (const auto& [key, r] : entry.by_block)
    if (key == block_key) return r;
  throw DomainError("ConvPatchIndex::range: node has no patch in that span block");
}

}  // namespace ciga
