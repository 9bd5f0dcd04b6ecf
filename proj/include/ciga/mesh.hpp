#ifndef CIGA_MESH_HPP
#define CIGA_MESH_HPP

#include <array>
#include <string>
#include <vector>

#include "ciga/nurbs_patch.hpp"

namespace ciga {

/// Structured node grid of one patch in its parametric domain.
/// Node (i,j) has global id node_ids[i + (n0+1)*j] and parametric
/// coordinates (abscissae[0][i], abscissae[1][j]).
struct PatchGrid {
  std::array<int, 2> nelem = {0, 1};                 // elements per direction
  std::array<std::vector<double>, 2> abscissae;      // node abscissae
  std::vector<int> node_ids;
  /// Coarse-span boundaries of the geometric mapping, as node indices
  /// per direction (always includes 0 and nelem). Convolution patches must
  /// not cross these.
  std::array<std::vector<int>, 2> span_bounds;

  int nodes_per_dir(int m) const { return nelem[m] + 1; }
  int node_id(int i, int j = 0) const { return node_ids[i + (nelem[0] + 1) * j]; }
  Vector node_param(int i, int j = 0) const;
};

struct Element {
  int patch = 0;  // index into patches()
  int i0 = 0, j0 = 0;  // grid cell
  std::array<int, 4> nodes = {-1, -1, -1, -1};  // global ids, grid order
};

struct BoundaryEdge {
  std::array<int, 2> nodes = {-1, -1};  // global ids
  std::string tag;
  int patch = 0;
  int axis = 0;        // parametric axis the edge runs along
  double fixed = 0.0;  // value of the other coordinate (0 or 1)
  double t0 = 0.0, t1 = 0.0;  // parametric range along the edge
};

/// Tags a whole parametric side of a patch; expanded into per-cell
/// BoundaryEdge entries during mesh assembly.
struct BoundarySideTag {
  int patch = 0;
  int axis = 0;        // axis the side runs along
  double fixed = 0.0;  // the other coordinate (0 or 1)
  std::string tag;
};

/// One matched interface between two patches. Shared nodes are ordered
/// consistently on both sides.
struct InterfacePair {
  int patch_a = 0, patch_b = 0;  // patch_a < patch_b
  std::vector<int> shared_nodes; // global ids, ordered along the interface
  struct Side {
    int axis = 0;        // parametric axis running along the interface
    double fixed = 0.0;  // the other coordinate (0 or 1)
    std::vector<double> abscissae;  // interface-direction node abscissae
  };
  Side side_a, side_b;
};

struct InterfaceSet {
  std::vector<InterfacePair> pairs;
};

/// Conforming multi-patch mesh: shared physical nodes, per-patch structured
/// parametric grids, elements, tagged boundary edges. Immutable once built.
class MultiPatchMesh {
 public:
  int dim() const { return dim_; }
  int node_count() const { return static_cast<int>(nodes_.rows()); }
  const Matrix& nodes() const { return nodes_; }
  const std::vector<NurbsPatch>& patches() const { return patches_; }
  const std::vector<PatchGrid>& grids() const { return grids_; }
  const std::vector<Element>& elements() const { return elements_; }
  const std::vector<BoundaryEdge>& boundary() const { return boundary_; }

  /// Assembles a mesh from per-patch grids; welds coincident interface
  /// nodes (tolerance-scaled) into shared global ids and validates the
  /// forward-map round trip of every node.
  static MultiPatchMesh build(std::vector<NurbsPatch> patches,
                              std::vector<PatchGrid> grids,
                              const std::vector<BoundarySideTag>& side_tags,
                              double roundtrip_tol = 1e-10);

  std::string to_json() const;

 private:
  int dim_ = 2;
  Matrix nodes_;
  std::vector<NurbsPatch> patches_;
  std::vector<PatchGrid> grids_;
  std::vector<Element> elements_;
  std::vector<BoundaryEdge> boundary_;
};

/// Finds every element edge shared verbatim by two patches. Throws
/// ConstructionError when two patch boundary edges coincide geometrically
/// but carry different node ids (hanging node / nodal-compatibility
/// violation).
InterfaceSet detect_interfaces(const MultiPatchMesh& mesh);

/// Per-node convolution patch index ranges, truncated at domain
/// boundaries, patch interfaces, and coarse-span boundaries.
struct NodePatchRange {
  std::array<int, 2> lo = {0, 0};  // inclusive node-index ranges
  std::array<int, 2> hi = {0, 0};
  std::vector<int> member_ids;     // global ids, index (i,j) flattened i-fastest
};

struct ConvPatchIndex {
  int s = 1;
  /// range(patch, i, j, block0, block1): block indices select the coarse
  /// span block; nodes interior to a block have one valid block only.
  /// per patch: node -> per block-key entry.
  struct PerNode {
    // block key = b0 + nblocks0 * b1; most nodes have a single entry
    std::vector<std::pair<int, NodePatchRange>> by_block;
  };
  std::vector<std::vector<PerNode>> per_patch;  // [patch][node flat index]

  /// Interface-adjacent partition: for nodes of patches touching an
  /// interface, the member ids lying on the interface (P) and the rest (Q).
  struct Partition {
    std::vector<int> shared;    // P_s
    std::vector<int> internal;  // Q_s
  };
  std::vector<std::vector<Partition>> partition;  // [patch][node flat index]

  const NodePatchRange& range(const MultiPatchMesh& mesh, int patch, int i,
                              int j, int block_key) const;
};

ConvPatchIndex build_conv_patch_sets(const MultiPatchMesh& mesh,
                                     const InterfaceSet& interfaces, int s);

/// Block index (per direction) of the coarse span containing element cell
/// index; helper shared with the shape-function tables.
int span_block_of_cell(const PatchGrid& grid, int axis, int cell);

}  // namespace ciga

#endif
