#include "ciga/patch_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ciga {

using nlohmann::json;

NurbsPatch parse_patch_json(const std::string& json_text, int patch_id) {
  json j = json::parse(json_text);
  const auto degrees = j.at("degree").get<std::vector<int>>();
  const auto knots = j.at("knots").get<std::vector<std::vector<double>>>();
  if (degrees.size() != knots.size())
    throw ConstructionError("patch json: degree/knots length mismatch");
  std::vector<KnotVector> kvs;
  std::vector<int> dims;
  for (size_t m = 0; m < knots.size(); ++m) {
    kvs.emplace_back(knots[m], degrees[m]);
    dims.push_back(kvs.back().basis_count());
  }

  const auto pts = j.at("points").get<std::vector<std::vector<double>>>();
  Matrix points(pts.size(), pts.empty() ? 0 : pts[0].size());
  for (size_t r = 0; r < pts.size(); ++r)
    for (size_t c = 0; c < pts[r].size(); ++c) points(r, c) = pts[r][c];

  Vector weights;
  if (j.contains("weights")) {
    const auto w = j.at("weights").get<std::vector<double>>();
    weights = Eigen::Map<const Vector>(w.data(), w.size());
  } else {
    weights = Vector::Ones(points.rows());
  }

  const std::string kind_str = j.value("kind", std::string("bspline"));
  const PatchKind kind =
      (kind_str == "nurbs") ? PatchKind::Nurbs : PatchKind::BSpline;
  return NurbsPatch(patch_id, std::move(kvs),
                    ControlNet(dims, std::move(points), std::move(weights)),
                    kind);
}

NurbsPatch load_patch_json(const std::string& path, int patch_id) {
  std::ifstream in(path);
  if (!in) throw ConstructionError("patch json: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_patch_json(ss.str(), patch_id);
}

std::string patch_to_json(const NurbsPatch& patch) {
  json j;
  std::vector<int> degrees;
  std::vector<std::vector<double>> knots;
  for (int m = 0; m < patch.dim(); ++m) {
    degrees.push_back(patch.knot_vector(m).degree());
    knots.push_back(patch.knot_vector(m).knots());
  }
  j["degree"] = degrees;
  j["knots"] = knots;
  std::vector<std::vector<double>> pts;
  for (int r = 0; r < patch.net().count(); ++r) {
    std::vector<double> row(patch.phys_dim());
    for (int c = 0; c < patch.phys_dim(); ++c) row[c] = patch.net().points()(r, c);
    pts.push_back(std::move(row));
  }
  j["points"] = pts;
  j["weights"] = std::vector<double>(patch.net().weights().data(),
                                     patch.net().weights().data() +
                                         patch.net().weights().size());
  j["kind"] = (patch.kind() == PatchKind::Nurbs) ? "nurbs" : "bspline";
  return j.dump(2);
}

void save_patch_json(const NurbsPatch& patch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConstructionError("patch json: cannot write " + path);
  out << patch_to_json(patch) << "\n";
}

}  // namespace ciga
