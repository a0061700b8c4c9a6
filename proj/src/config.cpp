#include "cowtopo/config.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cowtopo {

namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void only_keys(const json& j, std::string_view where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ValidationError("config: '" + std::string(where) + "' must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k))
      throw ValidationError("config: unknown key '" + k + "' in '" + std::string(where) + "'");
}

template <class T>
void get(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("config: bad value for '") + key + "'");
  }
}

std::string str(const json& j, const char* key) {
  std::string v;
  get(j, key, v);
  return v;
}

IntensityWindow window_from(const json& j, const char* key, IntensityWindow w) {
  std::array<double, 2> a{w.low, w.high};
  get(j, key, a);
  return {a[0], a[1]};
}

Connectivity conn_from(const json& j, Connectivity c) {
  int n = static_cast<int>(c);
  get(j, "connectivity", n);
  return connectivity_from_int(n);
}

}  // namespace

DistanceUnit parse_distance_unit(std::string_view s) {
  const auto l = lower(s);
  if (l == "voxel" || l == "vox") return DistanceUnit::Voxel;
  if (l == "mm") return DistanceUnit::Millimeter;
  throw ValidationError("unknown distance unit '" + std::string(s) + "' (voxel or mm)");
}

std::string_view distance_unit_name(DistanceUnit u) {
  return u == DistanceUnit::Millimeter ? "mm" : "voxel";
}

BridgeShape parse_bridge_shape(std::string_view s) {
  const auto l = lower(s);
  if (l == "straight" || l == "line") return BridgeShape::Straight;
  if (l == "spline") return BridgeShape::Spline;
  throw ValidationError("unknown bridge shape '" + std::string(s) + "' (straight or spline)");
}

std::string_view bridge_shape_name(BridgeShape b) {
  return b == BridgeShape::Spline ? "spline" : "straight";
}

std::vector<CowClass> parse_class_list(std::string_view s) {
  std::vector<CowClass> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    std::string_view item = s.substr(start, comma == std::string_view::npos ? s.size() - start : comma - start);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) item.remove_prefix(1);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back()))) item.remove_suffix(1);
    if (!item.empty()) {
      const auto c = parse_class(item);
      if (!c) throw ValidationError("unknown class '" + std::string(item) + "'");
      out.push_back(*c);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void RunConfig::validate() const {
  preprocess.validate();
  cal.validate();
  refine.validate();
  graph.validate();
  if (boundary_d < 1) throw ValidationError("boundary_d must be >= 1");
  if (metrics.hd95_penalty_mm && !(*metrics.hd95_penalty_mm >= 0.0))
    throw ValidationError("hd95_penalty_mm must be >= 0");
}

ClassMap RunConfig::class_map() const {
  return class_map_path ? ClassMap::from_json_file(*class_map_path) : ClassMap{};
}

RunConfig RunConfig::from_json_text(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: malformed JSON: ") + e.what());
  }
  only_keys(j, "root", {"class_map", "preprocess", "cal", "refine", "graph", "metrics"});
  RunConfig c;

  if (j.contains("class_map")) {
    std::string p;
    get(j, "class_map", p);
    std::filesystem::path path(p);
    c.class_map_path = path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  }
  if (j.contains("preprocess")) {
    const json& s = j["preprocess"];
    only_keys(s, "preprocess", {"cta_window", "mra_window", "target_spacing", "intensity_order"});
    c.preprocess.cta_window = window_from(s, "cta_window", c.preprocess.cta_window);
    c.preprocess.mra_window = window_from(s, "mra_window", c.preprocess.mra_window);
    std::array<double, 3> t{c.preprocess.target_spacing.dz, c.preprocess.target_spacing.dy,
                            c.preprocess.target_spacing.dx};
    get(s, "target_spacing", t);
    c.preprocess.target_spacing = {t[0], t[1], t[2]};
    get(s, "intensity_order", c.preprocess.intensity_order);
  }
  if (j.contains("cal")) {
    const json& s = j["cal"];
    only_keys(s, "cal", {"alpha_t", "beta_t", "lambda_fg", "epsilon", "focal_exponent", "prob_floor",
                         "weight_floor"});
    get(s, "alpha_t", c.cal.alpha_t);
    get(s, "beta_t", c.cal.beta_t);
    get(s, "lambda_fg", c.cal.lambda_fg);
    get(s, "epsilon", c.cal.epsilon);
    get(s, "focal_exponent", c.cal.focal_exponent);
    get(s, "prob_floor", c.cal.prob_floor);
    get(s, "weight_floor", c.cal.weight_floor);
  }
  if (j.contains("refine")) {
    const json& s = j["refine"];
    only_keys(s, "refine", {"t_com", "t_dis", "t_dis_unit", "classes", "bridge_dilation_radius",
                            "connectivity", "bridge_shape", "spline_tail"});
    get(s, "t_com", c.refine.t_com);
    get(s, "t_dis", c.refine.t_dis);
    if (s.contains("t_dis_unit")) c.refine.t_dis_unit = parse_distance_unit(str(s, "t_dis_unit"));
    if (s.contains("classes")) {
      std::vector<std::string> names;
      get(s, "classes", names);
      c.refine.classes_to_refine.clear();
      for (const auto& n : names) {
        const auto k = parse_class(n);
        if (!k) throw ValidationError("config: unknown class '" + n + "'");
        c.refine.classes_to_refine.push_back(*k);
      }
    }
    get(s, "bridge_dilation_radius", c.refine.bridge_dilation_radius);
    c.refine.connectivity = conn_from(s, c.refine.connectivity);
    if (s.contains("bridge_shape")) c.refine.bridge_shape = parse_bridge_shape(str(s, "bridge_shape"));
    get(s, "spline_tail", c.refine.spline_tail);
  }
  if (j.contains("graph")) {
    const json& s = j["graph"];
    only_keys(s, "graph", {"presence_min_voxels", "adjacency_radius_mm"});
    get(s, "presence_min_voxels", c.graph.presence_min_voxels);
    get(s, "adjacency_radius_mm", c.graph.adjacency_radius_mm);
  }
  if (j.contains("metrics")) {
    const json& s = j["metrics"];
    only_keys(s, "metrics", {"classes_mode", "connectivity", "hd95_penalty_mm", "boundary_d"});
    if (s.contains("classes_mode")) c.metrics.classes_mode = parse_classes_mode(str(s, "classes_mode"));
    c.metrics.connectivity = conn_from(s, c.metrics.connectivity);
    if (s.contains("hd95_penalty_mm") && !s["hd95_penalty_mm"].is_null()) {
      double v = 0;
      get(s, "hd95_penalty_mm", v);
      c.metrics.hd95_penalty_mm = v;
    }
    get(s, "boundary_d", c.boundary_d);
  }
  c.metrics.graph = c.graph;
  c.validate();
  return c;
}

RunConfig RunConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str(), path.parent_path());
}

std::string RunConfig::to_json_text() const {
  ojson j;
  if (class_map_path) j["class_map"] = class_map_path->generic_string();
  j["preprocess"] = {
      {"cta_window", {preprocess.cta_window.low, preprocess.cta_window.high}},
      {"mra_window", {preprocess.mra_window.low, preprocess.mra_window.high}},
      {"target_spacing",
       {preprocess.target_spacing.dz, preprocess.target_spacing.dy, preprocess.target_spacing.dx}},
      {"intensity_order", preprocess.intensity_order}};
  j["cal"] = {{"alpha_t", cal.alpha_t},         {"beta_t", cal.beta_t},
              {"lambda_fg", cal.lambda_fg},     {"epsilon", cal.epsilon},
              {"focal_exponent", cal.focal_exponent}, {"prob_floor", cal.prob_floor},
              {"weight_floor", cal.weight_floor}};
  ojson classes = ojson::array();
  for (CowClass k : refine.classes_to_refine) classes.push_back(std::string(class_name(k)));
  j["refine"] = {{"t_com", refine.t_com},
                 {"t_dis", refine.t_dis},
                 {"t_dis_unit", std::string(distance_unit_name(refine.t_dis_unit))},
                 {"classes", classes},
                 {"bridge_dilation_radius", refine.bridge_dilation_radius},
                 {"connectivity", static_cast<int>(refine.connectivity)},
                 {"bridge_shape", std::string(bridge_shape_name(refine.bridge_shape))},
                 {"spline_tail", refine.spline_tail}};
  j["graph"] = {{"presence_min_voxels", graph.presence_min_voxels},
                {"adjacency_radius_mm", graph.adjacency_radius_mm}};
  j["metrics"] = {{"classes_mode", std::string(classes_mode_name(metrics.classes_mode))},
                  {"connectivity", static_cast<int>(metrics.connectivity)},
                  {"hd95_penalty_mm", metrics.hd95_penalty_mm ? ojson(*metrics.hd95_penalty_mm) : ojson()},
                  {"boundary_d", boundary_d}};
  return j.dump(2);
}

}  // namespace cowtopo
