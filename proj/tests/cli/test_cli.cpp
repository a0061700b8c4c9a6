#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <json.hpp>

#include "cowtopo/config.hpp"
#include "support/cli_scenarios.hpp"

using namespace cowtopo;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string g_exe;
fs::path g_root;

json load(const fs::path& p) { return json::parse(cli::slurp(p)); }

}  // namespace

TEST_CASE("every subcommand runs and is deterministic") {
  const fs::path a = g_root / "run_a", b = g_root / "run_b", c = g_root / "run_c";
  for (const auto& [dir, extra] : {std::pair{a, std::string("--jobs 3")}, std::pair{b, std::string("--jobs 3")},
                                   std::pair{c, std::string("")}}) {
    fs::remove_all(dir);
    for (const auto& cmd : cli::commands(g_root, dir, extra)) {
      INFO(cmd);
      CHECK(cli::run(g_exe, cmd, g_root / "log.txt") == 0);
    }
  }
  const auto sa = cli::snapshot(a), sb = cli::snapshot(b), sc = cli::snapshot(c);
  CHECK(sa.size() >= 20);
  CHECK(sa == sb);
  CHECK(sa == sc);
}

TEST_CASE("report contents") {
  const fs::path o = g_root / "run_c";
  CHECK(load(o / "loss.json")["L_total"].get<double>() == doctest::Approx(-1.0).epsilon(1e-5));
  const json r = load(o / "refine.json");
  CHECK(r["classes"][1]["class"] == "L-Pcom");
  CHECK(r["classes"][1]["action"] == "bridged");
  CHECK(load(o / "graph.json") == json::parse(R"({"anterior":[1,1,1,1],"posterior":[1,1,1,1]})"));
  CHECK(load(o / "box.json") == json::parse(R"({"min":[10,10,10],"max":[20,20,20]})"));
  const json m = load(o / "metrics.json");
  CHECK(m["cases"].size() == 3);
  CHECK(m["cases"][0]["id"] == "case_a.nii.gz");
  CHECK(m["cohort"]["cases"] == 3);
  const json pre = load(o / "pre.json")["cases"][0];
  CHECK(pre["output_spacing"] == json::parse("[0.6,0.3525,0.3525]"));
  CHECK(pre["output_min"].get<double>() >= 0.0);
  CHECK(pre["output_max"].get<double>() <= 1.0);
  CHECK(load(o / "weights.json")["centerline_weight"].get<double>() == doctest::Approx(92.10340371976183));
}

TEST_CASE("single-component refine is unchanged") {
  const fs::path in = g_root / "in", o = g_root / "single";
  LabelVolume v({10, 10, 10}, {}, 0);
  phantom::fill_box<LabelId>(v, {2, 2, 2}, {5, 6, 6}, ClassMap{}.id(CowClass::Acom));
  save_labels(v, in / "single.nii.gz");
  REQUIRE(cli::run(g_exe, "refine --in " + (in / "single.nii.gz").string() + " --out " + (o / "b.nii.gz").string() +
                              " --report " + (o / "r.json").string()) == 0);
  CHECK(load_labels(o / "b.nii.gz") == v);
  CHECK(load(o / "r.json")["classes"][2]["action"] == "unchanged");
}

TEST_CASE("exit codes") {
  const std::string in = (g_root / "in").string(), o = (g_root / "codes").string();
  CHECK(cli::run(g_exe, "frobnicate") == 1);
  CHECK(cli::run(g_exe, "") == 1);
  CHECK(cli::run(g_exe, "refine --tcom") == 1);
  CHECK(cli::run(g_exe, "--version") == 0);
  CHECK(cli::run(g_exe, "topo --in " + in + "/nope.nii.gz --json " + o + "/t.json") == 2);
  CHECK(cli::run(g_exe, "evaluate --pred " + in + "/nope --gt " + in + "/gt --json " + o + "/m.json") == 2);
  CHECK(cli::run(g_exe, "--config " + in + "/missing.json topo --in " + in + "/cow.nii.gz --json " + o + "/t.json") == 2);

  LabelVolume bad({4, 4, 4}, {}, 0);
  bad(1, 1, 1) = 99;
  save_labels(bad, g_root / "in" / "bad.nii.gz");
  CHECK(cli::run(g_exe, "classify-graph --in " + in + "/bad.nii.gz --json " + o + "/g.json") == 3);
  CHECK(cli::run(g_exe, "refine --in " + in + "/cow.nii.gz --out " + o + "/x.nii.gz --classes Nope") == 3);
  CHECK(cli::run(g_exe, "refine --in " + in + "/cow.nii.gz --out " + o + "/x.nii.gz --tdis -1") == 3);
  CHECK(cli::run(g_exe, "loss --prob " + in + "/small_prob.nii.gz --labels " + in + "/cow.nii.gz --json " + o +
                            "/l.json") == 3);
  CHECK(cli::run(g_exe, "preprocess --in " + in + "/cta.nii.gz --out " + o + "/p.nii.gz --modality xray") == 3);
}

TEST_CASE("config file and flag precedence") {
  const fs::path in = g_root / "in", o = g_root / "cfg";
  cli::write(in / "cfg.json", R"({"refine": {"t_dis": 2}, "graph": {"presence_min_voxels": 5000}})");
  const std::string base = "--config " + (in / "cfg.json").string();
  REQUIRE(cli::run(g_exe, base + " refine --in " + (in / "split.nii.gz").string() + " --out " +
                              (o / "a.nii.gz").string() + " --report " + (o / "a.json").string()) == 0);
  CHECK(load(o / "a.json")["classes"][1]["action"] == "kept-largest");
  REQUIRE(cli::run(g_exe, base + " refine --tdis 10 --in " + (in / "split.nii.gz").string() + " --out " +
                              (o / "b.nii.gz").string() + " --report " + (o / "b.json").string()) == 0);
  CHECK(load(o / "b.json")["classes"][1]["action"] == "bridged");
  REQUIRE(cli::run(g_exe, base + " classify-graph --in " + (in / "cow.nii.gz").string() + " --json " +
                              (o / "g.json").string()) == 0);
  CHECK(load(o / "g.json")["anterior"][1] == 0);

  cli::write(in / "typo.json", R"({"refine": {"tdis": 2}})");
  CHECK(cli::run(g_exe, "--config " + (in / "typo.json").string() + " topo --in " + (in / "cow.nii.gz").string() +
                            " --json " + (o / "t.json").string()) == 3);
}

TEST_CASE("RunConfig round trip") {
  RunConfig c;
  c.refine.t_dis = 4.5;
  c.refine.classes_to_refine = {CowClass::LPcom};
  c.metrics.classes_mode = ClassesMode::All13;
  const RunConfig back = RunConfig::from_json_text(c.to_json_text());
  CHECK(back.refine.t_dis == 4.5);
  CHECK(back.refine.classes_to_refine == std::vector<CowClass>{CowClass::LPcom});
  CHECK(back.metrics.classes_mode == ClassesMode::All13);
  CHECK(back.to_json_text() == c.to_json_text());
  CHECK_THROWS_AS(RunConfig::from_json_text("{\"cal\": {\"alpha_t\": 0.5}}"), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json_text("not json"), ValidationError);
}

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: test_cli <cowtopo-exe> <scratch-dir> [doctest args]\n");
    return 2;
  }
  g_exe = argv[1];
  g_root = argv[2];
  fs::remove_all(g_root);
  cli::make_inputs(g_root);
  doctest::Context ctx;
  ctx.applyCommandLine(argc - 2, argv + 2);
  return ctx.run();
}
