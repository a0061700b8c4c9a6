// cowtopo command line: one subcommand per pipeline stage.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "cowtopo/cal.hpp"
#include "cowtopo/config.hpp"
#include "cowtopo/cow_tasks.hpp"
#include "cowtopo/io.hpp"
#include "cowtopo/metrics.hpp"
#include "cowtopo/preprocess.hpp"
#include "cowtopo/refine.hpp"
#include "cowtopo/topo.hpp"

#ifndef COWTOPO_VERSION
#define COWTOPO_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using namespace cowtopo;

namespace {

// ---- plumbing -------------------------------------------------------------

void write_text(const std::string& text, const fs::path& path) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void write_json(const ojson& j, const fs::path& path) { write_text(j.dump(2) + "\n", path); }

ojson read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return ojson::parse(in);
  } catch (const ojson::exception& e) {
    throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void make_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

// Runs f(0..n-1) on up to `jobs` threads. The first failure in index order is
// rethrown, so error reporting does not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  std::vector<std::exception_ptr> errors(n);
  const auto run = [&](std::size_t i) {
    try {
      f(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run(i);
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

ojson arr(const Index3& p) { return ojson::array({p.z, p.y, p.x}); }
ojson arr(const Shape& s) { return ojson::array({s.nz, s.ny, s.nx}); }
ojson arr(const Spacing& s) { return ojson::array({s.dz, s.dy, s.dx}); }
ojson arr(const std::array<int, 4>& b) { return ojson::array({b[0], b[1], b[2], b[3]}); }
ojson num(double v) { return std::isfinite(v) ? ojson(v) : ojson(); }

ojson graph_json(const CowGraph& g) { return {{"anterior", arr(g.anterior)}, {"posterior", arr(g.posterior)}}; }

CowClass class_arg(const std::string& name) {
  const auto c = parse_class(name);
  if (!c) throw ValidationError("unknown class '" + name + "'");
  return *c;
}

// Manifest: {"cases": [{"id": ..., <path keys>..., "modality": ...}]} or a bare
// array. Relative paths are resolved against the manifest's directory.
struct ManifestCase {
  std::string id;
  std::map<std::string, fs::path> paths;
  std::string modality;
};

std::vector<ManifestCase> read_manifest(const fs::path& path, std::initializer_list<const char*> path_keys) {
  const ojson j = read_json(path);
  const ojson& list = j.is_object() && j.contains("cases") ? j["cases"] : j;
  if (!list.is_array()) throw ValidationError("manifest must list cases");
  std::vector<ManifestCase> out;
  for (const auto& c : list) {
    if (!c.is_object() || !c.contains("id") || !c["id"].is_string())
      throw ValidationError("manifest case without string id");
    ManifestCase m;
    m.id = c["id"].get<std::string>();
    for (const char* k : path_keys) {
      if (!c.contains(k)) continue;
      if (!c[k].is_string()) throw ValidationError(std::string("manifest: '") + k + "' must be a path");
      fs::path p = c[k].get<std::string>();
      m.paths[k] = p.is_absolute() ? p : path.parent_path() / p;
    }
    if (c.contains("modality")) {
      if (!c["modality"].is_string()) throw ValidationError("manifest: modality must be a string");
      m.modality = c["modality"].get<std::string>();
    }
    for (const auto& prev : out)
      if (prev.id == m.id) throw ValidationError("duplicate case id '" + m.id + "'");
    out.push_back(std::move(m));
  }
  return out;
}

// ---- subcommand options --------------------------------------------------

struct Global {
  std::string config;
  int jobs = 1;
  std::uint64_t seed = 0;
};

struct PreprocessOpts {
  std::string in, out, modality, labels, labels_out, manifest, out_dir, report;
  std::vector<double> target_spacing;
  int order = -1;
};

struct WeightsOpts {
  std::string labels, cls, out, json;
  double epsilon = 0, lambda = 0;
};

struct LossOpts {
  std::string prob, labels, json, grad;
};

struct RefineOpts {
  std::string in, out, report, manifest, out_dir, classes, tdis_unit, bridge;
  int tcom = 0, radius = -1;
  double tdis = 0;
};

struct DetectOpts {
  std::string in, json, compare, metrics;
  int boundary_d = 0;
  bool world = false;
};

struct GraphOpts {
  std::string in, json;
  int presence_min = 0;
  double adjacency_mm = 0;
};

struct EvalOpts {
  std::string pred, gt, json, classes_mode;
  double hd95_penalty = -1;
};

struct TopoOpts {
  std::string in, json, cls;
  int connectivity = 26;
};

RunConfig load_config(const Global& g) {
  return g.config.empty() ? RunConfig{} : RunConfig::from_json_file(g.config);
}

// ---- preprocess -----------------------------------------------------------

ojson preprocess_one(const std::string& id, const fs::path& image, Modality m, const fs::path& out,
                     const fs::path* labels, const fs::path* labels_out, const RunConfig& cfg,
                     const ClassMap& map) {
  const Volume v = load_volume(image);
  const Volume p = preprocess_case(v, m, cfg.preprocess);
  make_parent(out);
  save_volume(p, out);
  float lo = 0, hi = 0;
  if (!p.empty()) {
    const auto [a, b] = std::minmax_element(p.storage().begin(), p.storage().end());
    lo = *a;
    hi = *b;
  }
  ojson r{{"id", id},
          {"modality", std::string(modality_name(m))},
          {"input_shape", arr(v.shape())},
          {"input_spacing", arr(v.spacing())},
          {"output_shape", arr(p.shape())},
          {"output_spacing", arr(p.spacing())},
          {"output_min", lo},
          {"output_max", hi},
          {"output", out.filename().string()}};
  if (labels && labels_out) {
    const LabelVolume l = load_labels(*labels, map);
    const LabelVolume rl = resample(l, cfg.preprocess);
    if (rl.shape() != p.shape()) throw ValidationError(id + ": label grid does not match image grid");
    make_parent(*labels_out);
    save_labels(rl, *labels_out);
    r["labels_output"] = labels_out->filename().string();
  }
  return r;
}

int cmd_preprocess(const PreprocessOpts& o, const Global& g) {
  RunConfig cfg = load_config(g);
  if (!o.target_spacing.empty()) {
    if (o.target_spacing.size() != 3) throw ValidationError("--target-spacing takes dz dy dx");
    cfg.preprocess.target_spacing = {o.target_spacing[0], o.target_spacing[1], o.target_spacing[2]};
  }
  if (o.order >= 0) cfg.preprocess.intensity_order = o.order;
  cfg.validate();
  const ClassMap map = cfg.class_map();

  ojson report;
  if (!o.manifest.empty()) {
    if (o.out_dir.empty()) throw ValidationError("--manifest needs --out-dir");
    const auto cases = read_manifest(o.manifest, {"image", "labels"});
    std::vector<ojson> rows(cases.size());
    parallel_for(cases.size(), g.jobs, [&](std::size_t i) {
      const auto& c = cases[i];
      if (!c.paths.count("image")) throw ValidationError(c.id + ": no image");
      const Modality m = parse_modality(c.modality.empty() ? o.modality : c.modality);
      const fs::path out = fs::path(o.out_dir) / (c.id + ".nii.gz");
      const fs::path lout = fs::path(o.out_dir) / (c.id + "_seg.nii.gz");
      const fs::path* lin = c.paths.count("labels") ? &c.paths.at("labels") : nullptr;
      rows[i] = preprocess_one(c.id, c.paths.at("image"), m, out, lin, &lout, cfg, map);
    });
    report["cases"] = rows;
  } else {
    if (o.in.empty() || o.out.empty() || o.modality.empty())
      throw CLI::RequiredError("preprocess needs --in, --out and --modality (or --manifest)");
    const fs::path lin = o.labels, lout = o.labels_out;
    if (!o.labels.empty() && o.labels_out.empty()) throw ValidationError("--labels needs --labels-out");
    report["cases"] = ojson::array({preprocess_one(fs::path(o.in).filename().string(), o.in,
                                                   parse_modality(o.modality), o.out,
                                                   o.labels.empty() ? nullptr : &lin,
                                                   o.labels.empty() ? nullptr : &lout, cfg, map)});
  }
  for (const auto& r : report["cases"])
    std::cerr << "preprocess: " << r["id"].get<std::string>() << " -> " << r["output_shape"].dump() << "\n";
  if (!o.report.empty()) write_json(report, o.report);
  return 0;
}

// ---- weights --------------------------------------------------------------

int cmd_weights(const WeightsOpts& o, const Global& g, const CLI::App& sub) {
  RunConfig cfg = load_config(g);
  if (sub.count("--epsilon")) cfg.cal.epsilon = o.epsilon;
  if (sub.count("--lambda")) cfg.cal.lambda_fg = o.lambda;
  cfg.validate();
  const ClassMap map = cfg.class_map();
  const LabelVolume lbl = load_labels(o.labels, map);
  if (!o.out.empty() && o.cls.empty()) throw ValidationError("--out needs --class");

  std::vector<CowClass> classes;
  if (o.cls.empty()) classes.assign(kAllCowClasses.begin(), kAllCowClasses.end());
  else classes.push_back(class_arg(o.cls));

  std::vector<WeightMap> maps(classes.size());
  parallel_for(classes.size(), g.jobs, [&](std::size_t i) { maps[i] = weight_map(lbl, classes[i], cfg.cal, map); });

  ojson rows = ojson::array();
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const Mask m = one_hot(lbl, classes[i], map);
    double lo = 0, hi = 0, sum = 0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (!m[k]) continue;
      const double w = maps[i].weights[k];
      lo = n ? std::min(lo, w) : w;
      hi = n ? std::max(hi, w) : w;
      sum += w;
      ++n;
    }
    rows.push_back({{"class", std::string(class_name(classes[i]))},
                    {"voxels", n},
                    {"dc_max_mm", maps[i].dc_max},
                    {"min_weight", n ? ojson(lo) : ojson()},
                    {"max_weight", n ? ojson(hi) : ojson()},
                    {"mean_weight", n ? ojson(sum / static_cast<double>(n)) : ojson()}});
  }
  if (!o.out.empty()) {
    make_parent(o.out);
    save_grid(maps[0].weights, o.out);
  }
  const ojson report{{"centerline_weight", centerline_weight(cfg.cal)},
                     {"background_weight", 1.0},
                     {"lambda_fg", cfg.cal.lambda_fg},
                     {"epsilon", cfg.cal.epsilon},
                     {"classes", rows}};
  write_json(report, o.json);
  return 0;
}

// ---- loss -----------------------------------------------------------------

int cmd_loss(const LossOpts& o, const Global& g) {
  RunConfig cfg = load_config(g);
  cfg.validate();
  const ClassMap map = cfg.class_map();
  const ProbVolume prob = load_probabilities(o.prob);
  const LabelVolume lbl = load_labels(o.labels, map);
  require_same_shape(prob.channels[0], lbl, "loss");

  std::vector<WeightMap> weights(kNumCowClasses);
  parallel_for(kNumCowClasses, g.jobs,
               [&](std::size_t k) { weights[k] = weight_map(lbl, kAllCowClasses[k], cfg.cal, map); });
  const LossBreakdown b = total_loss(prob, lbl, weights, cfg.cal, map);

  ojson rows = ojson::array();
  for (CowClass c : kAllCowClasses) {
    const ClassLoss& l = b.per_class[class_index(c)];
    rows.push_back({{"class", std::string(class_name(c))},
                    {"dice_term", num(l.dice_term)},
                    {"focal_term", num(l.focal_term)},
                    {"tversky_term", num(l.tversky_term)},
                    {"wce_term", num(l.wce_term)},
                    {"total", num(l.total)}});
  }
  const ojson report{{"L_total", num(b.total)},
                     {"num_classes", b.num_classes},
                     {"num_voxels", b.num_voxels},
                     {"per_class", rows}};
  if (!o.grad.empty()) {
    make_parent(o.grad);
    save_probabilities(loss_gradient(prob, lbl, weights, cfg.cal, map), o.grad);
  }
  std::cerr << "loss: L_total = " << b.total << "\n";
  write_json(report, o.json);
  return 0;
}

// ---- refine ---------------------------------------------------------------

ojson refine_report_json(const RefineReport& rep) {
  ojson rows = ojson::array();
  for (const auto& c : rep.classes) {
    ojson r{{"class", std::string(class_name(*c.cls))},
            {"action", std::string(action_name(c.action))},
            {"components_before", c.components_before},
            {"components_after", c.components_after},
            {"voxels_added", c.voxels_added},
            {"voxels_removed", c.voxels_removed}};
    if (c.endpoint_distance) {
      r["endpoint_distance"] = *c.endpoint_distance;
      r["endpoint_a"] = arr(*c.endpoint_a);
      r["endpoint_b"] = arr(*c.endpoint_b);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

int cmd_refine(const RefineOpts& o, const Global& g, const CLI::App& sub) {
  RunConfig cfg = load_config(g);
  if (sub.count("--classes")) cfg.refine.classes_to_refine = parse_class_list(o.classes);
  if (sub.count("--tcom")) cfg.refine.t_com = o.tcom;
  if (sub.count("--tdis")) cfg.refine.t_dis = o.tdis;
  if (sub.count("--tdis-unit")) cfg.refine.t_dis_unit = parse_distance_unit(o.tdis_unit);
  if (sub.count("--bridge")) cfg.refine.bridge_shape = parse_bridge_shape(o.bridge);
  if (sub.count("--radius")) cfg.refine.bridge_dilation_radius = o.radius;
  cfg.validate();
  const ClassMap map = cfg.class_map();

  const auto run = [&](const fs::path& in, const fs::path& out) {
    const LabelVolume lbl = load_labels(in, map);
    auto [refined, rep] = refine_volume(lbl, cfg.refine, map);
    make_parent(out);
    save_labels(refined, out);
    return rep;
  };

  ojson report;
  if (!o.manifest.empty()) {
    if (o.out_dir.empty()) throw ValidationError("--manifest needs --out-dir");
    const auto cases = read_manifest(o.manifest, {"pred"});
    std::vector<RefineReport> reps(cases.size());
    parallel_for(cases.size(), g.jobs, [&](std::size_t i) {
      if (!cases[i].paths.count("pred")) throw ValidationError(cases[i].id + ": no pred");
      reps[i] = run(cases[i].paths.at("pred"), fs::path(o.out_dir) / (cases[i].id + ".nii.gz"));
    });
    report["cases"] = ojson::array();
    for (std::size_t i = 0; i < cases.size(); ++i)
      report["cases"].push_back({{"id", cases[i].id}, {"classes", refine_report_json(reps[i])}});
  } else {
    if (o.in.empty() || o.out.empty()) throw CLI::RequiredError("refine needs --in and --out (or --manifest)");
    const RefineReport rep = run(o.in, o.out);
    for (const auto& c : rep.classes)
      std::cerr << "refine: " << class_name(*c.cls) << " " << action_name(c.action) << "\n";
    report["classes"] = refine_report_json(rep);
  }
  if (!o.report.empty()) write_json(report, o.report);
  return 0;
}

// ---- detect ---------------------------------------------------------------

BoundingBox3D box_from_json(const ojson& j) {
  try {
    const auto lo = j.at("min").get<std::array<std::ptrdiff_t, 3>>();
    const auto hi = j.at("max").get<std::array<std::ptrdiff_t, 3>>();
    BoundingBox3D b{{lo[0], lo[1], lo[2]}, {hi[0], hi[1], hi[2]}};
    if (!b.valid()) throw ValidationError("box min must be <= max");
    return b;
  } catch (const ojson::exception&) {
    throw ValidationError("box JSON needs \"min\":[z,y,x] and \"max\":[z,y,x]");
  }
}

int cmd_detect(const DetectOpts& o, const Global& g, const CLI::App& sub) {
  RunConfig cfg = load_config(g);
  if (sub.count("--boundary-d")) cfg.boundary_d = o.boundary_d;
  cfg.validate();
  const Mask roi = load_mask(o.in);
  const BoundingBox3D box = roi_box_from_mask(roi);
  ojson j{{"min", arr(box.min)}, {"max", arr(box.max)}};
  if (o.world) {
    const auto a = voxel_to_world(box.min, roi.spacing(), roi.world());
    const auto b = voxel_to_world(box.max, roi.spacing(), roi.world());
    j["world_min_xyz"] = {a[0], a[1], a[2]};
    j["world_max_xyz"] = {b[0], b[1], b[2]};
  }
  write_json(j, o.json);
  if (!o.compare.empty()) {
    const BoundingBox3D ref = box_from_json(read_json(o.compare));
    const ojson m{{"iou", box_iou(box, ref)},
                  {"boundary_iou", box_boundary_iou(box, ref, cfg.boundary_d)},
                  {"boundary_d", cfg.boundary_d}};
    if (o.metrics.empty()) throw ValidationError("--compare needs --metrics");
    write_json(m, o.metrics);
  }
  return 0;
}

// ---- classify-graph -------------------------------------------------------

int cmd_graph(const GraphOpts& o, const Global& g, const CLI::App& sub) {
  RunConfig cfg = load_config(g);
  if (sub.count("--presence-min")) cfg.graph.presence_min_voxels = o.presence_min;
  if (sub.count("--adjacency-mm")) cfg.graph.adjacency_radius_mm = o.adjacency_mm;
  cfg.validate();
  const ClassMap map = cfg.class_map();
  const CowGraph gr = derive_graph(load_labels(o.in, map), cfg.graph, map);
  write_json(graph_json(gr), o.json);
  return 0;
}

// ---- evaluate -------------------------------------------------------------

bool is_volume_file(const fs::path& p) {
  const std::string n = p.filename().string();
  const auto ends = [&](std::string_view s) { return n.size() > s.size() && n.ends_with(s); };
  return ends(".nii") || ends(".nii.gz") || ends(".json");
}

std::vector<std::string> volume_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && is_volume_file(e.path())) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

ojson case_json(const std::string& id, const CaseMetrics& m) {
  ojson per = ojson::array();
  for (const auto& c : m.per_class)
    per.push_back({{"class", std::string(class_name(c.cls))},
                   {"in_gt", c.in_gt},
                   {"in_pred", c.in_pred},
                   {"dice", c.dice},
                   {"hd95_mm", c.hd95.mm},
                   {"hd95_undefined", c.hd95.undefined},
                   {"b0_error", c.b0_error}});
  ojson averaged = ojson::array();
  for (CowClass c : m.averaged) averaged.push_back(std::string(class_name(c)));
  return {{"id", id},
          {"avg_dice", m.avg_dice},
          {"avg_hd95_mm", m.avg_hd95},
          {"avg_b0_error", m.avg_b0},
          {"cl_dice", m.cl_dice.value},
          {"topology_precision", m.cl_dice.topology_precision},
          {"topology_sensitivity", m.cl_dice.topology_sensitivity},
          {"averaged_classes", averaged},
          {"per_class", per},
          {"graph_pred", graph_json(m.graph_pred)},
          {"graph_gt", graph_json(m.graph_gt)}};
}

ojson mean_sd_json(const MeanSd& m) { return {{"mean", m.mean}, {"sd", m.sd}}; }

int cmd_evaluate(const EvalOpts& o, const Global& g, const CLI::App& sub) {
  RunConfig cfg = load_config(g);
  if (sub.count("--classes-mode")) cfg.metrics.classes_mode = parse_classes_mode(o.classes_mode);
  if (sub.count("--hd95-penalty")) cfg.metrics.hd95_penalty_mm = o.hd95_penalty;
  cfg.metrics.graph = cfg.graph;
  cfg.validate();
  const ClassMap map = cfg.class_map();

  const auto names = volume_files(o.gt);
  if (names.empty()) throw IoError("no ground-truth volumes in " + o.gt);
  for (const auto& n : names)
    if (!fs::exists(fs::path(o.pred) / n)) throw IoError("missing prediction for " + n);

  std::vector<CaseMetrics> cases(names.size());
  parallel_for(names.size(), g.jobs, [&](std::size_t i) {
    const LabelVolume pred = load_labels(fs::path(o.pred) / names[i], map);
    const LabelVolume gt = load_labels(fs::path(o.gt) / names[i], map);
    cases[i] = evaluate_case(pred, gt, cfg.metrics, map);
  });

  const CohortSummary s = summarize(cases);
  ojson class_dice;
  for (CowClass c : kAllCowClasses) {
    const auto& v = s.class_dice[class_index(c)];
    class_dice[std::string(class_name(c))] = v ? ojson(*v) : ojson();
  }
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < names.size(); ++i) rows.push_back(case_json(names[i], cases[i]));
  const ojson report{
      {"classes_mode", std::string(classes_mode_name(cfg.metrics.classes_mode))},
      {"cases", rows},
      {"cohort",
       {{"cases", s.cases},
        {"dice", mean_sd_json(s.dice)},
        {"hd95_mm", mean_sd_json(s.hd95)},
        {"b0_error", mean_sd_json(s.b0)},
        {"cl_dice", mean_sd_json(s.cl_dice)},
        {"class_dice", class_dice},
        {"anterior_balanced_accuracy", s.anterior_balanced_accuracy},
        {"posterior_balanced_accuracy", s.posterior_balanced_accuracy}}}};
  std::cerr << "evaluate: " << s.cases << " cases, dice " << s.dice.mean << ", clDice " << s.cl_dice.mean
            << "\n";
  write_json(report, o.json);
  return 0;
}

// ---- topo -----------------------------------------------------------------

int cmd_topo(const TopoOpts& o, const Global& g) {
  RunConfig cfg = load_config(g);
  cfg.validate();
  const Connectivity conn = connectivity_from_int(o.connectivity);
  Mask m;
  if (o.cls.empty()) {
    m = load_mask(o.in);
  } else {
    const ClassMap map = cfg.class_map();
    m = one_hot(load_labels(o.in, map), class_arg(o.cls), map);
  }
  const ComponentSet cs = connected_components(m, conn);
  std::size_t skel = 0, ends = 0;
  Index3 lo, hi;
  if (nonzero_bounds(m, lo, hi)) {
    const Skeleton sk = skeletonize(crop(m, lo, hi, 1));
    skel = count_nonzero(sk.centerline);
    ends = sk.endpoints.size();
  }
  ojson j{{"connectivity", static_cast<int>(conn)},
          {"voxels", count_nonzero(m)},
          {"components", cs.count()},
          {"sizes", cs.sizes},
          {"skeleton_voxels", skel},
          {"skeleton_endpoints", ends}};
  if (!o.cls.empty()) j["class"] = std::string(class_name(class_arg(o.cls)));
  write_json(j, o.json);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topology-aware Circle of Willis segmentation toolkit", "cowtopo"};
  app.set_version_flag("--version", std::string("cowtopo ") + COWTOPO_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  app.add_option("--config", g.config, "RunConfig JSON; flags override it");
  app.add_option("--jobs,-j", g.jobs, "worker threads for batch work")->check(CLI::Range(1, 256));
  app.add_option("--seed", g.seed, "reserved; all commands are deterministic");

  PreprocessOpts pp;
  auto* sp = app.add_subcommand("preprocess", "window, resample and normalize images");
  sp->add_option("--in", pp.in, "input image");
  sp->add_option("--out", pp.out, "output image");
  sp->add_option("--modality", pp.modality, "cta or mra");
  sp->add_option("--labels", pp.labels, "label volume to resample alongside");
  sp->add_option("--labels-out", pp.labels_out, "resampled label output");
  sp->add_option("--manifest", pp.manifest, "batch manifest JSON");
  sp->add_option("--out-dir", pp.out_dir, "batch output directory");
  sp->add_option("--report", pp.report, "JSON report");
  sp->add_option("--target-spacing", pp.target_spacing, "dz dy dx in mm")->expected(3);
  sp->add_option("--order", pp.order, "intensity interpolation: 0 nearest, 1 trilinear");

  WeightsOpts wo;
  auto* sw = app.add_subcommand("weights", "centerline-distance weight maps");
  sw->add_option("--labels", wo.labels, "label volume")->required();
  sw->add_option("--class", wo.cls, "single class (default: all)");
  sw->add_option("--out", wo.out, "weight map output (needs --class)");
  sw->add_option("--json", wo.json, "JSON summary")->required();
  sw->add_option("--epsilon", wo.epsilon, "centerline sharpness");
  sw->add_option("--lambda", wo.lambda, "foreground weight scale");

  LossOpts lo;
  auto* sl = app.add_subcommand("loss", "evaluate the connectivity-aware loss");
  sl->add_option("--prob", lo.prob, "14-channel probability volume")->required();
  sl->add_option("--labels", lo.labels, "ground-truth labels")->required();
  sl->add_option("--json", lo.json, "JSON report")->required();
  sl->add_option("--grad", lo.grad, "write the gradient volume");

  RefineOpts ro;
  auto* sr = app.add_subcommand("refine", "topological refinement of selected classes");
  sr->add_option("--in", ro.in, "predicted labels");
  sr->add_option("--out", ro.out, "refined labels");
  sr->add_option("--report", ro.report, "JSON report");
  sr->add_option("--manifest", ro.manifest, "batch manifest JSON (cases with \"pred\")");
  sr->add_option("--out-dir", ro.out_dir, "batch output directory");
  sr->add_option("--classes", ro.classes, "comma-separated classes to refine");
  sr->add_option("--tcom", ro.tcom, "meaningful component size");
  sr->add_option("--tdis", ro.tdis, "maximum bridged gap");
  sr->add_option("--tdis-unit", ro.tdis_unit, "voxel or mm");
  sr->add_option("--bridge", ro.bridge, "straight or spline");
  sr->add_option("--radius", ro.radius, "bridge dilation radius");

  DetectOpts dopt;
  auto* sd = app.add_subcommand("detect", "RoI bounding box from a mask");
  sd->add_option("--in", dopt.in, "RoI mask")->required();
  sd->add_option("--json", dopt.json, "box JSON")->required();
  sd->add_option("--compare", dopt.compare, "reference box JSON");
  sd->add_option("--metrics", dopt.metrics, "IoU JSON when comparing");
  sd->add_option("--boundary-d", dopt.boundary_d, "boundary shell thickness");
  sd->add_flag("--world", dopt.world, "add world-space corners");

  GraphOpts go;
  auto* sg = app.add_subcommand("classify-graph", "derive anterior/posterior edge lists");
  sg->add_option("--in", go.in, "label volume")->required();
  sg->add_option("--json", go.json, "graph JSON")->required();
  sg->add_option("--presence-min", go.presence_min, "voxels for a present communicating artery");
  sg->add_option("--adjacency-mm", go.adjacency_mm, "contact radius for segment edges");

  EvalOpts eo;
  auto* se = app.add_subcommand("evaluate", "per-case and cohort metrics");
  se->add_option("--pred", eo.pred, "prediction directory")->required();
  se->add_option("--gt", eo.gt, "ground-truth directory")->required();
  se->add_option("--json", eo.json, "metrics JSON")->required();
  se->add_option("--classes-mode", eo.classes_mode, "present or all13");
  se->add_option("--hd95-penalty", eo.hd95_penalty, "hd95 value when one side is empty (mm)");

  TopoOpts to;
  auto* st = app.add_subcommand("topo", "component and skeleton statistics");
  st->add_option("--in", to.in, "mask or label volume")->required();
  st->add_option("--json", to.json, "JSON report")->required();
  st->add_option("--class", to.cls, "restrict to one class of a label volume");
  st->add_option("--connectivity", to.connectivity, "6, 18 or 26");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc == 0) return 0;
    std::cerr << app.help();
    return 1;
  }

  try {
    if (sp->parsed()) return cmd_preprocess(pp, g);
    if (sw->parsed()) return cmd_weights(wo, g, *sw);
    if (sl->parsed()) return cmd_loss(lo, g);
    if (sr->parsed()) return cmd_refine(ro, g, *sr);
    if (sd->parsed()) return cmd_detect(dopt, g, *sd);
    if (sg->parsed()) return cmd_graph(go, g, *sg);
    if (se->parsed()) return cmd_evaluate(eo, g, *se);
    if (st->parsed()) return cmd_topo(to, g);
  } catch (const CLI::RequiredError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
