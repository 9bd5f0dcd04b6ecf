#ifndef CIGA_GENERATORS_HPP
#define CIGA_GENERATORS_HPP

#include "ciga/inverse_map.hpp"
#include "ciga/mesh.hpp"

namespace ciga {

/// Quarter plate with a circular hole (radius 0.5, outer half-width 4,
/// quadrant x <= 0, y >= 0) as two quadratic NURBS patches split along the
/// 45-degree diagonal from the hole to the far corner. Both patches blend
/// the exact circular arc (eta = 0) to the straight outer edge (eta = 1).
///
/// The coarsest parameterizations deliberately differ: the first patch
/// uses a quadratic two-span radial coordinate (two IGA elements), the
/// second a linear single-span one. The physical meshes coincide (shared
/// interface nodes, nodal compatibility), but the parametric node
/// distributions along the diagonal do not, so interpolations built per
/// patch disagree between nodes. matched_interface = true instead gives
/// the second patch the same two-span radial parameterization, making the
/// interface abscissae of the two sides identical (required for the G0
/// product construction).
///
/// Refinement level L gives 5 * 2^L elements per direction per patch.
/// two_patch = false builds only the first (upper) patch, for tests.
MultiPatchMesh generate_plate_with_hole(int refinement_level,
                                        bool two_patch = true,
                                        bool matched_interface = false);

/// The two overlapping quadratic 1D parameterizations of [0, 10]
/// (control abscissae {0,3,10} and {0,8,10}) with a shared uniform
/// physical node set; parametric nodes obtained by inversion.
struct TwoMap1d {
  NurbsPatch map1, map2;
  Vector phys_nodes;          // uniform on [0, 10]
  Vector param1, param2;      // per-map parametric nodes
};

TwoMap1d generate_1d_two_map(int n_elements);

/// Unit-square bilinear B-spline patch (identity map), handy for tests.
NurbsPatch make_unit_square_patch(int patch_id = 0);

}  // namespace ciga

#endif
