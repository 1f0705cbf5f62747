// Command-line front end: one subcommand per pipeline stage plus the
// synthetic corpus generator.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "textimpact/error.hpp"
#include "textimpact/lexicon.hpp"
#include "textimpact/pipeline.hpp"
#include "textimpact/synth.hpp"

namespace ti = textimpact;

namespace {

int report_error(const std::string& kind, const std::string& code, const std::string& message, int exit_code) {
  nlohmann::ordered_json j;
  j["error"] = {{"kind", kind}, {"code", code}, {"message", message}, {"exit_code", exit_code}};
  std::cerr << j.dump() << std::endl;
  return exit_code;
}

struct StageOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> manifest;
  std::optional<unsigned> workers;
};

void add_stage_options(CLI::App* cmd, StageOptions& o) {
  cmd->add_option("--config", o.config, "Run configuration (JSON)")->required();
  cmd->add_option("--seed", o.seed, "Master seed; overrides the config");
  cmd->add_option("--out", o.out, "Output directory; overrides the config");
  cmd->add_option("--manifest", o.manifest, "Corpus manifest; overrides the config");
  cmd->add_option("--workers", o.workers, "Worker threads (0: all cores); never changes the output");
}

ti::RunConfig load_config(const StageOptions& o) {
  auto config = ti::RunConfig::load(o.config);
  if (o.seed) config.seed = *o.seed;
  if (o.out) config.paths.out = std::filesystem::absolute(*o.out).lexically_normal();
  if (o.manifest) config.paths.manifest = std::filesystem::absolute(*o.manifest).lexically_normal();
  if (o.workers) config.workers = *o.workers;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classify research articles into HIGH and MODERATE impact from linguistic features"};
  app.require_subcommand(1);

  StageOptions opts;
  auto* prepare = app.add_subcommand("prepare", "Clean and segment the corpus listed in the manifest");
  auto* extract = app.add_subcommand("extract", "Compute the feature matrix");
  auto* select = app.add_subcommand("select", "Split the data and rank features with four filters");
  auto* train = app.add_subcommand("train", "Tune and fit every configured model family");
  auto* evaluate = app.add_subcommand("evaluate", "Score the fitted models on the held-out split");
  auto* report = app.add_subcommand("report", "Write importances, rules, SVG drawings and the run report");
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage in order");
  for (auto* cmd : {prepare, extract, select, train, evaluate, report, pipeline}) add_stage_options(cmd, opts);

  auto* synth = app.add_subcommand("synth", "Generate the synthetic labeled corpus");
  std::string docs = "100,100";
  std::string synth_out = "synthetic";
  std::uint64_t synth_seed = 7;
  std::string lexicon_path = std::string(TEXTIMPACT_DATA_DIR) + "/lexicon.tsv";
  synth->add_option("--docs", docs, "Documents per class as HIGH,MODERATE")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->capture_default_str();
  synth->add_option("--lexicon", lexicon_path, "Lexicon supplying the category words")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("ConfigInvalid", "BadArguments", e.what(), 2);
  }

  try {
    if (synth->parsed()) {
      ti::SyntheticSpec spec;
      const auto comma = docs.find(',');
      if (comma == std::string::npos) throw ti::config_error("ConfigInvalid", "--docs must look like HIGH,MODERATE");
      try {
        spec.high = std::stoul(docs.substr(0, comma));
        spec.moderate = std::stoul(docs.substr(comma + 1));
      } catch (const std::exception&) {
        throw ti::config_error("ConfigInvalid", "--docs must look like HIGH,MODERATE");
      }
      spec.seed = synth_seed;
      const auto generated = ti::generate_synthetic(spec, ti::load_lexicon(lexicon_path));
      ti::write_synthetic(generated, synth_out);
      return 0;
    }

    const auto config = load_config(opts);
    if (prepare->parsed()) ti::stage_prepare(config);
    if (extract->parsed()) ti::stage_extract(config);
    if (select->parsed()) ti::stage_select(config);
    if (train->parsed()) ti::stage_train(config);
    if (evaluate->parsed()) ti::stage_evaluate(config);
    if (report->parsed()) ti::stage_report(config, ti::utc_timestamp());
    if (pipeline->parsed()) ti::run_pipeline(config, ti::utc_timestamp());
  } catch (const ti::Error& e) {
    return report_error(ti::kind_name(e.kind()), e.code(), e.what(), e.exit_code());
  } catch (const std::exception& e) {
    return report_error("Internal", "Unexpected", e.what(), 1);
  }
  return 0;
}
