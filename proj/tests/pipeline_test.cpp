#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sys/wait.h>
#include <unistd.h>

#include "textimpact/error.hpp"
#include "textimpact/pipeline.hpp"
#include "textimpact/synth.hpp"
#include "textimpact/textio.hpp"

using namespace textimpact;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("textimpact_pipeline_test_" + std::to_string(getpid()) + "_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small corpus and fast grids so a whole run takes well under a second.
const fs::path& small_corpus() {
  static const fs::path dir = [] {
    const auto d = scratch("corpus");
    SyntheticSpec spec;
    spec.high = 24;
    spec.moderate = 24;
    spec.sentences_min = 12;
    spec.sentences_max = 18;
    spec.seed = 5;
    write_synthetic(generate_synthetic(spec, Lexicon::load(TEXTIMPACT_DATA_DIR "/lexicon.tsv")), d);
    return d;
  }();
  return dir;
}

nlohmann::json small_config_json(const fs::path& out) {
  return {
      {"paths", {{"manifest", (small_corpus() / "manifest.csv").string()}, {"out", out.string()}}},
      {"seed", 11},
      {"features", {{"registry", "extended"}, {"lsa_k", 20}}},
      {"selection", {{"top_k", 12}}},
      {"split", {{"ratio", 0.75}, {"folds", 3}}},
      {"models",
       {{"ridge", {{{"lambda", 1.0}}}},
        {"lasso", {{{"lambda", 0.01}}}},
        {"tree", {{{"max_depth", 2}}, {{"max_depth", 4}}}},
        {"forest", {{{"n_trees", 6}}}}}},
  };
}

RunConfig small_config(const fs::path& out, unsigned workers = 1) {
  auto c = RunConfig::from_json(small_config_json(out), fs::current_path());
  c.workers = workers;
  return c;
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files[fs::relative(entry.path(), root).string()] = textio::read_file(entry.path());
  }
  return files;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::DataError;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TEXTIMPACT_CLI) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesDemoConfig) {
  const auto c = RunConfig::load(TEXTIMPACT_SOURCE_DIR "/configs/demo.json");
  EXPECT_EQ(c.seed.value_or(0), 7u);
  EXPECT_EQ(c.folds, 10u);
  EXPECT_EQ(c.mode, TrainMode::BootstrapCv);
  ASSERT_EQ(c.grids.size(), 4u);
  EXPECT_EQ(c.grids[3].family, ModelFamily::Forest);
  EXPECT_EQ(c.grids[3].points[0].forest.n_trees, 20u);
  EXPECT_EQ(c.registry().features.size(), extended_registry().size());
  EXPECT_TRUE(c.paths.manifest.is_absolute());
}

TEST(Config, RejectsBadInput) {
  const auto base = small_config_json("out");
  auto j = base;
  j["colour"] = "blue";
  EXPECT_EQ(kind_of([&] { RunConfig::from_json(j, "."); }), ErrorKind::ConfigInvalid);
  j = base;
  j["split"]["mode"] = "nested";
  EXPECT_EQ(kind_of([&] { RunConfig::from_json(j, "."); }), ErrorKind::ConfigInvalid);
  j = base;
  j["split"]["folds"] = 1;
  EXPECT_EQ(kind_of([&] { RunConfig::from_json(j, "."); }), ErrorKind::ConfigInvalid);
  j = base;
  j["models"]["tree"] = {{{"depth", 3}}};
  EXPECT_EQ(kind_of([&] { RunConfig::from_json(j, "."); }), ErrorKind::ConfigInvalid);
  j = base;
  j["features"]["registry"] = "huge";
  EXPECT_EQ(kind_of([&] { RunConfig::from_json(j, "."); }), ErrorKind::ConfigInvalid);
  j = base;
  j.erase("seed");
  const auto unseeded = RunConfig::from_json(j, ".");
  EXPECT_EQ(kind_of([&] { unseeded.validate(); }), ErrorKind::ConfigInvalid);
  j = base;
  j["paths"]["manifest"] = "/nonexistent/manifest.csv";
  const auto missing = RunConfig::from_json(j, ".");
  EXPECT_EQ(kind_of([&] { missing.validate(); }), ErrorKind::ConfigInvalid);
}

TEST(Config, HashIgnoresOutputAndWorkers) {
  const auto a = small_config("/tmp/a", 1);
  const auto b = small_config("/tmp/b", 8);
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  auto c = a;
  c.seed = 12;
  EXPECT_NE(a.hash(), c.hash());
  auto d = a;
  d.grids[0].points[0].lambda = 2.0;
  EXPECT_NE(a.hash(), d.hash());
  EXPECT_EQ(a.seeds()["master"], 11u);
  EXPECT_EQ(a.seeds()["split"], stage_seed(11, "split"));
}

TEST(Stages, MissingPredecessorIsMissingArtifact) {
  const auto out = scratch("missing");
  const auto c = small_config(out);
  EXPECT_EQ(kind_of([&] { stage_select(c); }), ErrorKind::MissingArtifact);
  EXPECT_EQ(kind_of([&] { stage_extract(c); }), ErrorKind::MissingArtifact);
  EXPECT_EQ(kind_of([&] { stage_report(c, "t"); }), ErrorKind::MissingArtifact);
}

TEST(Stages, StaleArtifactIsRejected) {
  const auto out = scratch("stale");
  auto c = small_config(out);
  stage_prepare(c);
  c.seed = 99;
  EXPECT_EQ(kind_of([&] { stage_extract(c); }), ErrorKind::MissingArtifact);
}

TEST(Stages, PipelineMatchesStagesAcrossWorkerCounts) {
  const auto staged = scratch("staged");
  const auto piped = scratch("piped");
  const auto s = small_config(staged, 1);
  stage_prepare(s);
  stage_extract(s);
  stage_select(s);
  stage_train(s);
  stage_evaluate(s);
  stage_report(s, "2026-01-01T00:00:00Z");
  run_pipeline(small_config(piped, 3), "2026-01-01T00:00:00Z");

  const auto a = tree_contents(staged);
  const auto b = tree_contents(piped);
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [name, content] : a) {
    ASSERT_TRUE(b.count(name)) << name;
    EXPECT_TRUE(content == b.at(name)) << name;
  }
  for (const auto* name : {"corpus.json", "features.csv", "features_meta.json", "split.json", "selection.json", "tuning.json",
                           "models/forest.json", "evaluation/tree.json", "comparison.csv", "importances.csv", "rules.txt",
                           "forest.svg", "best_tree.svg", "report.json"}) {
    EXPECT_TRUE(a.count(name)) << name;
  }
}

TEST(Stages, ArtifactsEmbedHashAndSeeds) {
  const auto out = scratch("embed");
  const auto c = small_config(out);
  run_pipeline(c, "t0");
  for (const auto* name : {"corpus.json", "features_meta.json", "split.json", "selection.json", "tuning.json", "models/ridge.json",
                           "report.json"}) {
    const auto j = nlohmann::json::parse(textio::read_file(out / name));
    EXPECT_EQ(j.at("config_hash"), c.hash()) << name;
    EXPECT_EQ(j.at("seeds").at("master"), 11u) << name;
  }
  const auto eval = nlohmann::json::parse(textio::read_file(out / "evaluation/forest.json"));
  EXPECT_EQ(eval.at("provenance").at("config_hash"), c.hash());
  const auto report = nlohmann::json::parse(textio::read_file(out / "report.json"));
  const auto selection = nlohmann::json::parse(textio::read_file(out / "selection.json"));
  EXPECT_EQ(report.at("selection").at("selected"), selection.at("report").at("selected"));
  EXPECT_EQ(report.at("generated_at"), "t0");
}

TEST(Cli, ExitCodesAndSynth) {
  const auto dir = scratch("cli");
  EXPECT_EQ(run_cli("synth --docs 100,100 --seed 7 --out " + (dir / "synthetic").string()), 0);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "synthetic" / "docs")) files += entry.is_regular_file() ? 1 : 0;
  EXPECT_EQ(files, 200u);
  EXPECT_TRUE(fs::exists(dir / "synthetic" / "manifest.csv"));

  auto j = small_config_json(dir / "out");
  textio::write_file_atomic(dir / "config.json", j.dump());
  EXPECT_EQ(run_cli("select --config " + (dir / "config.json").string()), 3);
  EXPECT_EQ(run_cli("prepare --config " + (dir / "missing.json").string()), 2);
  j["seed"] = "seven";
  textio::write_file_atomic(dir / "bad.json", j.dump());
  EXPECT_EQ(run_cli("prepare --config " + (dir / "bad.json").string()), 2);
  EXPECT_EQ(run_cli("bogus"), 2);
  EXPECT_EQ(run_cli("pipeline --config " + (dir / "config.json").string() + " --workers 2"), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "report.json"));

  // A corrupt matrix is a data error.
  textio::write_file_atomic(dir / "out" / "features.csv", "not,a\nmatrix");
  EXPECT_EQ(run_cli("select --config " + (dir / "config.json").string()), 4);
}
