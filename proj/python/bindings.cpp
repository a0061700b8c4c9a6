#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cowtopo/cal.hpp"
#include "cowtopo/config.hpp"
#include "cowtopo/cow_tasks.hpp"
#include "cowtopo/io.hpp"
#include "cowtopo/metrics.hpp"
#include "cowtopo/preprocess.hpp"
#include "cowtopo/refine.hpp"
#include "cowtopo/topo.hpp"

namespace py = pybind11;
using namespace cowtopo;

namespace {

using Sp = std::tuple<double, double, double>;

Spacing to_spacing(const Sp& s) {
  Spacing out{std::get<0>(s), std::get<1>(s), std::get<2>(s)};
  out.validate();
  return out;
}
Sp from_spacing(const Spacing& s) { return {s.dz, s.dy, s.dx}; }

template <class T>
Grid<T> to_grid(const py::array_t<T, py::array::c_style | py::array::forcecast>& a, const Spacing& sp = {}) {
  if (a.ndim() != 3) throw ValidationError("expected a 3D array (z, y, x)");
  const Shape s{static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                static_cast<std::size_t>(a.shape(2))};
  return Grid<T>(s, sp, std::vector<T>(a.data(), a.data() + a.size()));
}

// Masks accept any dtype; nonzero is foreground.
Mask to_mask(const py::array& a, const Spacing& sp = {}) {
  py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> b =
      py::array::ensure(a.attr("astype")("bool"));
  return to_grid<std::uint8_t>(b, sp);
}

template <class T>
py::array_t<T> to_numpy(const Grid<T>& g) {
  const Shape& s = g.shape();
  py::array_t<T> out({s.nz, s.ny, s.nx});
  std::copy(g.storage().begin(), g.storage().end(), out.mutable_data());
  return out;
}

ProbVolume to_prob(const py::array_t<double, py::array::c_style | py::array::forcecast>& a, const Spacing& sp) {
  if (a.ndim() != 4 || a.shape(0) != static_cast<py::ssize_t>(kNumChannels))
    throw ValidationError("probabilities must have shape (14, z, y, x)");
  const Shape s{static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(2)),
                static_cast<std::size_t>(a.shape(3))};
  ProbVolume p(s, sp);
  for (std::size_t c = 0; c < kNumChannels; ++c)
    std::copy(a.data() + c * s.size(), a.data() + (c + 1) * s.size(), p.channels[c].storage().begin());
  return p;
}

py::array_t<double> prob_to_numpy(const ProbVolume& p) {
  const Shape s = p.channels[0].shape();
  py::array_t<double> out({kNumChannels, s.nz, s.ny, s.nx});
  for (std::size_t c = 0; c < kNumChannels; ++c)
    std::copy(p.channels[c].storage().begin(), p.channels[c].storage().end(), out.mutable_data() + c * s.size());
  return out;
}

py::tuple box_tuple(const BoundingBox3D& b) {
  return py::make_tuple(py::make_tuple(b.min.z, b.min.y, b.min.x), py::make_tuple(b.max.z, b.max.y, b.max.x));
}

BoundingBox3D box_from(const std::array<std::ptrdiff_t, 3>& lo, const std::array<std::ptrdiff_t, 3>& hi) {
  return {{lo[0], lo[1], lo[2]}, {hi[0], hi[1], hi[2]}};
}

py::dict graph_dict(const CowGraph& g) {
  py::dict d;
  d["anterior"] = g.anterior;
  d["posterior"] = g.posterior;
  return d;
}

py::dict refine_entry(const ClassRefineReport& r) {
  py::dict d;
  if (r.cls) d["class"] = std::string(class_name(*r.cls));
  d["action"] = std::string(action_name(r.action));
  d["components_before"] = r.components_before;
  d["components_after"] = r.components_after;
  d["voxels_added"] = r.voxels_added;
  d["voxels_removed"] = r.voxels_removed;
  if (r.endpoint_distance) d["endpoint_distance"] = *r.endpoint_distance;
  return d;
}

RefineConfig refine_cfg(int t_com, double t_dis, const std::string& unit, const std::vector<std::string>& classes,
                        int radius, const std::string& bridge) {
  RefineConfig c;
  c.t_com = t_com;
  c.t_dis = t_dis;
  c.t_dis_unit = parse_distance_unit(unit);
  if (!classes.empty()) {
    c.classes_to_refine.clear();
    for (const auto& n : classes) {
      const auto k = parse_class(n);
      if (!k) throw ValidationError("unknown class '" + n + "'");
      c.classes_to_refine.push_back(*k);
    }
  }
  c.bridge_dilation_radius = radius;
  c.bridge_shape = parse_bridge_shape(bridge);
  return c;
}

CalConfig cal_cfg(double lambda_fg, double epsilon, double alpha_t, double beta_t) {
  CalConfig c;
  c.lambda_fg = lambda_fg;
  c.epsilon = epsilon;
  c.alpha_t = alpha_t;
  c.beta_t = beta_t;
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "cowtopo core kernels";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.attr("CLASS_NAMES") = [] {
    std::vector<std::string> n;
    for (CowClass c : kAllCowClasses) n.emplace_back(class_name(c));
    return n;
  }();

  m.def(
      "connected_components",
      [](const py::array& mask, int connectivity) {
        const ComponentSet cs = connected_components(to_mask(mask), connectivity_from_int(connectivity));
        return py::make_tuple(to_numpy(cs.labels), cs.sizes);
      },
      py::arg("mask"), py::arg("connectivity") = 26,
      "Labels (ids by descending size) and component sizes.");

  m.def(
      "edt",
      [](const py::array& ref, const Sp& spacing) { return to_numpy(edt(to_mask(ref), to_spacing(spacing))); },
      py::arg("reference"), py::arg("spacing") = Sp{1, 1, 1},
      "Distance (mm) from every voxel to the nearest nonzero voxel of `reference`.");

  m.def(
      "skeletonize",
      [](const py::array& mask) {
        const Skeleton s = skeletonize(to_mask(mask));
        std::vector<std::tuple<std::ptrdiff_t, std::ptrdiff_t, std::ptrdiff_t>> ends;
        for (const auto& p : s.endpoints) ends.emplace_back(p.z, p.y, p.x);
        return py::make_tuple(to_numpy(s.centerline), ends);
      },
      py::arg("mask"));

  m.def(
      "dilate", [](const py::array& mask, int r) { return to_numpy(dilate(to_mask(mask), r)); }, py::arg("mask"),
      py::arg("radius") = 1);

  m.def(
      "weight_map",
      [](const py::array& mask, const Sp& spacing, double lambda_fg, double epsilon) {
        CalConfig c = cal_cfg(lambda_fg, epsilon, 0.2, 0.8);
        return to_numpy(weight_map(to_mask(mask, to_spacing(spacing)), c).weights);
      },
      py::arg("mask"), py::arg("spacing") = Sp{1, 1, 1}, py::arg("lambda_fg") = 20.0, py::arg("epsilon") = 0.01);

  m.def(
      "total_loss",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& prob,
         const py::array_t<LabelId, py::array::c_style | py::array::forcecast>& labels, const Sp& spacing,
         double lambda_fg, double epsilon, double alpha_t, double beta_t) {
        const Spacing sp = to_spacing(spacing);
        const LossBreakdown b =
            total_loss(to_prob(prob, sp), to_grid<LabelId>(labels, sp), cal_cfg(lambda_fg, epsilon, alpha_t, beta_t));
        py::dict d;
        d["total"] = b.total;
        py::list per;
        for (CowClass c : kAllCowClasses) {
          const auto& l = b.per_class[class_index(c)];
          py::dict e;
          e["class"] = std::string(class_name(c));
          e["dice"] = l.dice_term;
          e["focal"] = l.focal_term;
          e["tversky"] = l.tversky_term;
          e["wce"] = l.wce_term;
          e["total"] = l.total;
          per.append(e);
        }
        d["per_class"] = per;
        return d;
      },
      py::arg("prob"), py::arg("labels"), py::arg("spacing") = Sp{0.6, 0.3525, 0.3525}, py::arg("lambda_fg") = 20.0,
      py::arg("epsilon") = 0.01, py::arg("alpha_t") = 0.2, py::arg("beta_t") = 0.8);

  m.def(
      "loss_gradient",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& prob,
         const py::array_t<LabelId, py::array::c_style | py::array::forcecast>& labels, const Sp& spacing) {
        const Spacing sp = to_spacing(spacing);
        return prob_to_numpy(loss_gradient(to_prob(prob, sp), to_grid<LabelId>(labels, sp)));
      },
      py::arg("prob"), py::arg("labels"), py::arg("spacing") = Sp{0.6, 0.3525, 0.3525});

  m.def(
      "one_hot_probabilities",
      [](const py::array_t<LabelId, py::array::c_style | py::array::forcecast>& labels) {
        return prob_to_numpy(one_hot_probabilities(to_grid<LabelId>(labels)));
      },
      py::arg("labels"));

  m.def(
      "refine_class",
      [](const py::array& mask, int t_com, double t_dis, const std::string& unit, int radius,
         const std::string& bridge, const Sp& spacing) {
        auto r = refine_class(to_mask(mask, to_spacing(spacing)), refine_cfg(t_com, t_dis, unit, {}, radius, bridge));
        return py::make_tuple(to_numpy(r.mask), refine_entry(r.report));
      },
      py::arg("mask"), py::arg("t_com") = 20, py::arg("t_dis") = 10.0, py::arg("t_dis_unit") = "voxel",
      py::arg("radius") = 1, py::arg("bridge") = "straight", py::arg("spacing") = Sp{1, 1, 1});

  m.def(
      "refine_volume",
      [](const py::array_t<LabelId, py::array::c_style | py::array::forcecast>& labels,
         const std::vector<std::string>& classes, int t_com, double t_dis, const std::string& unit, int radius,
         const std::string& bridge, const Sp& spacing) {
        auto [out, rep] = refine_volume(to_grid<LabelId>(labels, to_spacing(spacing)),
                                        refine_cfg(t_com, t_dis, unit, classes, radius, bridge));
        py::list entries;
        for (const auto& e : rep.classes) entries.append(refine_entry(e));
        return py::make_tuple(to_numpy(out), entries);
      },
      py::arg("labels"), py::arg("classes") = std::vector<std::string>{}, py::arg("t_com") = 20,
      py::arg("t_dis") = 10.0, py::arg("t_dis_unit") = "voxel", py::arg("radius") = 1, py::arg("bridge") = "straight",
      py::arg("spacing") = Sp{1, 1, 1});

  m.def(
      "preprocess_case",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& image, const Sp& spacing,
         const std::string& modality) {
        const Volume out = preprocess_case(to_grid<float>(image, to_spacing(spacing)), parse_modality(modality));
        return py::make_tuple(to_numpy(out), from_spacing(out.spacing()));
      },
      py::arg("image"), py::arg("spacing"), py::arg("modality"));

  m.def(
      "roi_box", [](const py::array& mask) { return box_tuple(roi_box_from_mask(to_mask(mask))); }, py::arg("mask"),
      "((zmin, ymin, xmin), (zmax, ymax, xmax)) of the largest component, inclusive.");
  m.def(
      "box_iou",
      [](const std::array<std::ptrdiff_t, 3>& amin, const std::array<std::ptrdiff_t, 3>& amax,
         const std::array<std::ptrdiff_t, 3>& bmin, const std::array<std::ptrdiff_t, 3>& bmax) {
        return box_iou(box_from(amin, amax), box_from(bmin, bmax));
      },
      py::arg("a_min"), py::arg("a_max"), py::arg("b_min"), py::arg("b_max"));
  m.def(
      "box_boundary_iou",
      [](const std::array<std::ptrdiff_t, 3>& amin, const std::array<std::ptrdiff_t, 3>& amax,
         const std::array<std::ptrdiff_t, 3>& bmin, const std::array<std::ptrdiff_t, 3>& bmax, int d) {
        return box_boundary_iou(box_from(amin, amax), box_from(bmin, bmax), d);
      },
      py::arg("a_min"), py::arg("a_max"), py::arg("b_min"), py::arg("b_max"), py::arg("d") = 2);

  m.def(
      "derive_graph",
      [](const py::array_t<LabelId, py::array::c_style | py::array::forcecast>& labels, const Sp& spacing) {
        return graph_dict(derive_graph(to_grid<LabelId>(labels, to_spacing(spacing))));
      },
      py::arg("labels"), py::arg("spacing") = Sp{0.6, 0.3525, 0.3525});

  m.def(
      "dice", [](const py::array& p, const py::array& g) { return dice(to_mask(p), to_mask(g)); }, py::arg("pred"),
      py::arg("gt"));
  m.def(
      "cl_dice", [](const py::array& p, const py::array& g) { return cl_dice(to_mask(p), to_mask(g)); },
      py::arg("pred"), py::arg("gt"));
  m.def(
      "b0_error",
      [](const py::array& p, const py::array& g, int conn) {
        return b0_error(to_mask(p), to_mask(g), connectivity_from_int(conn));
      },
      py::arg("pred"), py::arg("gt"), py::arg("connectivity") = 26);
  m.def(
      "hd95",
      [](const py::array& p, const py::array& g, const Sp& spacing) {
        const Spacing sp = to_spacing(spacing);
        return hd95(to_mask(p, sp), to_mask(g, sp)).mm;
      },
      py::arg("pred"), py::arg("gt"), py::arg("spacing") = Sp{1, 1, 1});
  m.def("balanced_accuracy", &balanced_accuracy, py::arg("preds"), py::arg("actuals"));

  m.def(
      "evaluate_case",
      [](const py::array_t<LabelId, py::array::c_style | py::array::forcecast>& pred,
         const py::array_t<LabelId, py::array::c_style | py::array::forcecast>& gt, const Sp& spacing,
         const std::string& mode) {
        const Spacing sp = to_spacing(spacing);
        EvalConfig cfg;
        cfg.classes_mode = parse_classes_mode(mode);
        const CaseMetrics cm = evaluate_case(to_grid<LabelId>(pred, sp), to_grid<LabelId>(gt, sp), cfg);
        py::dict d;
        d["avg_dice"] = cm.avg_dice;
        d["avg_hd95"] = cm.avg_hd95;
        d["avg_b0"] = cm.avg_b0;
        d["cl_dice"] = cm.cl_dice.value;
        py::dict per;
        for (const auto& c : cm.per_class) {
          py::dict e;
          e["dice"] = c.dice;
          e["hd95"] = c.hd95.mm;
          e["b0_error"] = c.b0_error;
          e["in_gt"] = c.in_gt;
          per[py::str(std::string(class_name(c.cls)))] = e;
        }
        d["per_class"] = per;
        d["graph_pred"] = graph_dict(cm.graph_pred);
        d["graph_gt"] = graph_dict(cm.graph_gt);
        return d;
      },
      py::arg("pred"), py::arg("gt"), py::arg("spacing") = Sp{0.6, 0.3525, 0.3525}, py::arg("classes_mode") = "present");

  m.def(
      "load_labels",
      [](const std::string& path) {
        const LabelVolume v = load_labels(path);
        return py::make_tuple(to_numpy(v), from_spacing(v.spacing()));
      },
      py::arg("path"));
  m.def(
      "load_volume",
      [](const std::string& path) {
        const Volume v = load_volume(path);
        return py::make_tuple(to_numpy(v), from_spacing(v.spacing()));
      },
      py::arg("path"));
  m.def(
      "save_labels",
      [](const py::array_t<LabelId, py::array::c_style | py::array::forcecast>& a, const std::string& path,
         const Sp& spacing) { save_labels(to_grid<LabelId>(a, to_spacing(spacing)), path); },
      py::arg("labels"), py::arg("path"), py::arg("spacing") = Sp{1, 1, 1});
  m.def(
      "save_volume",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a, const std::string& path,
         const Sp& spacing) { save_volume(to_grid<float>(a, to_spacing(spacing)), path); },
      py::arg("image"), py::arg("path"), py::arg("spacing") = Sp{1, 1, 1});
}
