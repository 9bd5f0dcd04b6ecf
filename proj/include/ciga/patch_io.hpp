#ifndef CIGA_PATCH_IO_HPP
#define CIGA_PATCH_IO_HPP

#include <string>

#include "ciga/nurbs_patch.hpp"

namespace ciga {

/// Patch definition JSON:
/// { "degree": [p1,p2], "knots": [[...],[...]],
///   "points": [[x,y],...] row-major, "weights": [...],
///   "kind": "nurbs"|"bspline" }
NurbsPatch load_patch_json(const std::string& path, int patch_id = 0);
NurbsPatch parse_patch_json(const std::string& json_text, int patch_id = 0);
std::string patch_to_json(const NurbsPatch& patch);
void save_patch_json(const NurbsPatch& patch, const std::string& path);

}  // namespace ciga

#endif
