#include "textimpact/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <set>

#include "textimpact/corpus.hpp"
#include "textimpact/error.hpp"
#include "textimpact/evaluation.hpp"
#include "textimpact/lexicon.hpp"
#include "textimpact/parallel.hpp"
#include "textimpact/random.hpp"
#include "textimpact/reporting.hpp"
#include "textimpact/textio.hpp"

namespace textimpact {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

const char* const kDataDir = TEXTIMPACT_DATA_DIR;

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw config_error("ConfigInvalid", where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw config_error("ConfigInvalid", "unknown key '" + key + "' in " + where);
  }
}

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  if (p.is_relative()) p = base / p;
  return p.lexically_normal();
}

std::vector<ModelGrid> default_grids() {
  std::vector<ModelGrid> grids;
  auto point = [](ModelFamily family, const nlohmann::json& params) { return ModelSpec::from_json(family, params); };
  grids.push_back({ModelFamily::Ridge,
                   {point(ModelFamily::Ridge, {{"lambda", 0.01}}), point(ModelFamily::Ridge, {{"lambda", 1.0}}),
                    point(ModelFamily::Ridge, {{"lambda", 100.0}})}});
  grids.push_back({ModelFamily::Lasso,
                   {point(ModelFamily::Lasso, {{"lambda", 0.001}}), point(ModelFamily::Lasso, {{"lambda", 0.01}}),
                    point(ModelFamily::Lasso, {{"lambda", 0.1}})}});
  grids.push_back({ModelFamily::Tree,
                   {point(ModelFamily::Tree, {{"max_depth", 2}}), point(ModelFamily::Tree, {{"max_depth", 4}}),
                    point(ModelFamily::Tree, {{"max_depth", 7}})}});
  grids.push_back({ModelFamily::Forest, {point(ModelFamily::Forest, {{"n_trees", 20}})}});
  return grids;
}

std::string_view mode_name(TrainMode mode) { return mode == TrainMode::BootstrapCv ? "bootstrap_cv" : "cv"; }
std::string_view aggregation_name(Aggregation mode) { return mode == Aggregation::Borda ? "borda" : "vote"; }

fs::path artifact(const RunConfig& config, std::string_view name) { return config.paths.out / std::string(name); }
fs::path model_path(const RunConfig& config, ModelFamily family) {
  return config.paths.out / std::string(artifacts::kModelsDir) / (std::string(family_name(family)) + ".json");
}
fs::path evaluation_path(const RunConfig& config, ModelFamily family) {
  return config.paths.out / std::string(artifacts::kEvaluationDir) / (std::string(family_name(family)) + ".json");
}

ojson envelope(const RunConfig& config) {
  ojson j;
  j["format_version"] = 1;
  j["config_hash"] = config.hash();
  j["seeds"] = config.seeds();
  return j;
}

void write_json(const fs::path& path, const ojson& j) { textio::write_file_atomic(path, j.dump(2) + "\n"); }

// Reads an artifact written under the same configuration.
ojson read_artifact(const RunConfig& config, const fs::path& path) {
  if (!fs::exists(path)) {
    throw Error(ErrorKind::MissingArtifact, "MissingArtifact", "required artifact not found: " + path.string());
  }
  ojson j;
  try {
    j = ojson::parse(textio::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw data_error("Malformed", path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("config_hash") || j["config_hash"] != config.hash()) {
    throw Error(ErrorKind::MissingArtifact, "StaleArtifact",
                path.string() + " was produced by a different configuration; rerun the earlier stages");
  }
  return j;
}

FeatureMatrix read_matrix(const RunConfig& config) {
  read_artifact(config, artifact(config, artifacts::kMatrixMeta));
  const auto path = artifact(config, artifacts::kMatrix);
  if (!fs::exists(path)) {
    throw Error(ErrorKind::MissingArtifact, "MissingArtifact", "required artifact not found: " + path.string());
  }
  return load_matrix(path);
}

struct SplitRows {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

SplitRows read_split(const RunConfig& config, const FeatureMatrix& matrix) {
  const auto j = read_artifact(config, artifact(config, artifacts::kSplit));
  SplitRows rows;
  try {
    rows.train = j.at("train_rows").get<std::vector<std::size_t>>();
    rows.test = j.at("test_rows").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw data_error("Malformed", std::string("split artifact: ") + e.what());
  }
  for (auto r : rows.train) {
    if (r >= matrix.rows()) throw data_error("Malformed", "split row out of range");
  }
  for (auto r : rows.test) {
    if (r >= matrix.rows()) throw data_error("Malformed", "split row out of range");
  }
  return rows;
}

SelectionReport read_selection(const RunConfig& config) {
  const auto j = read_artifact(config, artifact(config, artifacts::kSelection));
  if (!j.contains("report")) throw data_error("Malformed", "selection artifact has no report");
  return SelectionReport::from_json_text(j["report"].dump());
}

Model read_model(const RunConfig& config, ModelFamily family) {
  const auto j = read_artifact(config, model_path(config, family));
  if (!j.contains("model")) throw data_error("Malformed", "model artifact has no model");
  return model_from_json_text(j["model"].dump());
}

std::vector<Label> labels_of(const FeatureMatrix& m) { return m.labels; }

}  // namespace

std::uint64_t stage_seed(std::uint64_t master, std::string_view stage) { return derive_seed(master, stage); }

RunConfig RunConfig::from_json(const nlohmann::json& j, const fs::path& base_dir) {
  reject_unknown(j, {"paths", "seed", "workers", "features", "selection", "split", "models", "report"}, "config");
  RunConfig c;
  try {
    const auto paths = j.value("paths", nlohmann::json::object());
    reject_unknown(paths, {"manifest", "lexicon", "norms", "frequencies", "clean_rules", "out"}, "paths");
    if (!paths.contains("manifest")) throw config_error("ConfigInvalid", "paths.manifest is required");
    c.paths.manifest = resolve(base_dir, paths.at("manifest").get<std::string>());
    c.paths.lexicon = resolve(base_dir, paths.value("lexicon", std::string(kDataDir) + "/lexicon.tsv"));
    c.paths.norms = resolve(base_dir, paths.value("norms", std::string(kDataDir) + "/norms.csv"));
    c.paths.frequencies = resolve(base_dir, paths.value("frequencies", std::string(kDataDir) + "/frequencies.csv"));
    if (paths.contains("clean_rules")) c.paths.clean_rules = resolve(base_dir, paths.at("clean_rules").get<std::string>());
    c.paths.out = resolve(base_dir, paths.value("out", std::string("out")));

    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    c.workers = j.value("workers", 1u);

    if (j.contains("features")) {
      c.features = j.at("features");
      reject_unknown(c.features, {"registry", "features", "lsa_k", "svd_exact_max_dim"}, "features");
    }
    RegistryConfig::from_json_text(c.features.dump());

    const auto sel = j.value("selection", nlohmann::json::object());
    reject_unknown(sel, {"bins", "relieff_k", "relieff_m", "top_k", "mode", "min_votes"}, "selection");
    c.selection.bins = sel.value("bins", c.selection.bins);
    c.selection.relieff_k = sel.value("relieff_k", c.selection.relieff_k);
    c.selection.relieff_m = sel.value("relieff_m", c.selection.relieff_m);
    c.selection.top_k = sel.value("top_k", c.selection.top_k);
    c.selection.min_votes = sel.value("min_votes", c.selection.min_votes);
    const auto agg = sel.value("mode", std::string("borda"));
    if (agg == "borda") {
      c.selection.mode = Aggregation::Borda;
    } else if (agg == "vote") {
      c.selection.mode = Aggregation::Vote;
    } else {
      throw config_error("ConfigInvalid", "selection.mode must be \"borda\" or \"vote\"");
    }
    if (c.selection.bins < 2 || c.selection.relieff_k < 1 || c.selection.top_k < 1) {
      throw config_error("ConfigInvalid", "selection needs bins >= 2, relieff_k >= 1 and top_k >= 1");
    }

    const auto split = j.value("split", nlohmann::json::object());
    reject_unknown(split, {"ratio", "folds", "mode"}, "split");
    c.split_ratio = split.value("ratio", c.split_ratio);
    c.folds = split.value("folds", c.folds);
    const auto mode = split.value("mode", std::string("bootstrap_cv"));
    if (mode == "bootstrap_cv") {
      c.mode = TrainMode::BootstrapCv;
    } else if (mode == "cv") {
      c.mode = TrainMode::Cv;
    } else {
      throw config_error("ConfigInvalid", "split.mode must be \"bootstrap_cv\" or \"cv\"");
    }
    if (!(c.split_ratio > 0.0 && c.split_ratio < 1.0)) throw config_error("ConfigInvalid", "split.ratio must be in (0, 1)");
    if (c.folds < 2) throw config_error("ConfigInvalid", "split.folds must be at least 2");

    if (j.contains("models")) {
      const auto& models = j.at("models");
      std::set<std::string> allowed;
      for (auto f : all_families()) allowed.insert(std::string(family_name(f)));
      reject_unknown(models, allowed, "models");
      for (auto f : all_families()) {
        const std::string name(family_name(f));
        if (!models.contains(name)) continue;
        const auto& list = models.at(name);
        if (!list.is_array() || list.empty()) throw config_error("ConfigInvalid", "models." + name + " must be a non-empty array");
        ModelGrid grid{f, {}};
        for (const auto& params : list) grid.points.push_back(ModelSpec::from_json(f, params));
        c.grids.push_back(std::move(grid));
      }
      if (c.grids.empty()) throw config_error("ConfigInvalid", "models must name at least one family");
    } else {
      c.grids = default_grids();
    }

    const auto report = j.value("report", nlohmann::json::object());
    reject_unknown(report, {"svg", "log_scale", "columns", "rule_digits"}, "report");
    c.render_svg = report.value("svg", c.render_svg);
    c.log_scale = report.value("log_scale", c.log_scale);
    c.svg_columns = report.value("columns", c.svg_columns);
    c.rule_digits = report.value("rule_digits", c.rule_digits);
    if (c.svg_columns < 1 || c.rule_digits < 0 || c.rule_digits > 12) {
      throw config_error("ConfigInvalid", "report needs columns >= 1 and 0 <= rule_digits <= 12");
    }
  } catch (const nlohmann::json::exception& e) {
    throw config_error("ConfigInvalid", std::string("bad config value: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  if (!fs::exists(path)) throw config_error("ConfigInvalid", "config file not found: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(textio::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw config_error("ConfigInvalid", path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j, fs::absolute(path).parent_path());
}

void RunConfig::validate() const {
  if (!seed) throw config_error("ConfigInvalid", "a seed is required (config \"seed\" or --seed)");
  std::vector<fs::path> inputs = {paths.manifest, paths.lexicon, paths.norms, paths.frequencies};
  if (paths.clean_rules) inputs.push_back(*paths.clean_rules);
  for (const auto& p : inputs) {
    if (!fs::exists(p)) throw config_error("ConfigInvalid", "configured input file not found: " + p.string());
  }
}

std::uint64_t RunConfig::master_seed() const {
  if (!seed) throw config_error("ConfigInvalid", "a seed is required (config \"seed\" or --seed)");
  return *seed;
}

RegistryConfig RunConfig::registry() const {
  auto r = RegistryConfig::from_json_text(features.dump());
  r.workers = workers;
  return r;
}

ojson RunConfig::echo() const {
  ojson j;
  j["seed"] = seed ? ojson(*seed) : ojson(nullptr);
  j["paths"] = {{"manifest", paths.manifest.string()},
                {"lexicon", paths.lexicon.string()},
                {"norms", paths.norms.string()},
                {"frequencies", paths.frequencies.string()},
                {"clean_rules", paths.clean_rules ? ojson(paths.clean_rules->string()) : ojson(nullptr)}};
  j["features"] = ojson::parse(features.dump());
  j["selection"] = {{"bins", selection.bins},     {"relieff_k", selection.relieff_k}, {"relieff_m", selection.relieff_m},
                    {"top_k", selection.top_k},   {"mode", aggregation_name(selection.mode)},
                    {"min_votes", selection.min_votes}};
  j["split"] = {{"ratio", split_ratio}, {"folds", folds}, {"mode", mode_name(mode)}};
  ojson models = ojson::object();
  for (const auto& grid : grids) {
    ojson list = ojson::array();
    for (const auto& p : grid.points) list.push_back(p.params_json());
    models[std::string(family_name(grid.family))] = std::move(list);
  }
  j["models"] = std::move(models);
  j["report"] = {{"svg", render_svg}, {"log_scale", log_scale}, {"columns", svg_columns}, {"rule_digits", rule_digits}};
  return j;
}

std::string RunConfig::hash() const {
  const auto h = fnv1a(echo().dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ojson RunConfig::seeds() const {
  const auto m = master_seed();
  ojson j;
  j["master"] = m;
  for (auto stage : {"split", "lsa", "selection", "folds", "bootstrap"}) j[stage] = stage_seed(m, stage);
  ojson tune = ojson::object();
  for (const auto& grid : grids) {
    const std::string name(family_name(grid.family));
    tune[name] = stage_seed(m, "tune." + name);
  }
  j["tune"] = std::move(tune);
  return j;
}

void stage_prepare(const RunConfig& config) {
  config.validate();
  const auto rules = config.paths.clean_rules ? CleanRuleSet::load(*config.paths.clean_rules) : CleanRuleSet::defaults();
  const auto raw = load_corpus(config.paths.manifest);
  if (raw.empty()) throw data_error("EmptyCorpus", "manifest lists no documents");
  std::vector<PreparedDocument> prepared(raw.size());
  parallel_for(raw.size(), config.workers, [&](std::size_t i) { prepared[i] = prepare(raw[i], rules); });

  auto j = envelope(config);
  j["documents"] = ojson::array();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    ojson doc;
    doc["id"] = prepared[i].id;
    doc["label"] = label_name(prepared[i].label);
    doc["source"] = fs::path(raw[i].source_path).lexically_normal().string();
    doc["sentences"] = ojson::array();
    for (const auto& s : prepared[i].sentences) doc["sentences"].push_back(s.text);
    j["documents"].push_back(std::move(doc));
  }
  write_json(artifact(config, artifacts::kCorpus), j);
}

void stage_extract(const RunConfig& config) {
  config.validate();
  const auto bundle = read_artifact(config, artifact(config, artifacts::kCorpus));
  const auto lexicon = load_lexicon(config.paths.lexicon);
  const auto norms = load_norms(config.paths.norms);
  const auto freqs = load_frequencies(config.paths.frequencies);

  std::vector<PreparedDocument> corpus;
  try {
    for (const auto& doc : bundle.at("documents")) {
      const auto label = parse_label(doc.at("label").get<std::string>());
      if (!label) throw data_error("BadLabel", "corpus bundle has an unknown label");
      corpus.push_back(prepare_sentences(doc.at("id").get<std::string>(), *label, doc.at("sentences").get<std::vector<std::string>>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw data_error("Malformed", std::string("corpus bundle: ") + e.what());
  }
  parallel_for(corpus.size(), config.workers, [&](std::size_t i) { corpus[i] = annotate(std::move(corpus[i]), lexicon); });

  const auto registry = config.registry();
  const auto result = extract_matrix(corpus, registry, norms, freqs, stage_seed(config.master_seed(), "lsa"));
  save_matrix(result.matrix, artifact(config, artifacts::kMatrix));
  auto meta = envelope(config);
  meta["extraction"] = ojson::parse(result.meta_json());
  write_json(artifact(config, artifacts::kMatrixMeta), meta);
}

void stage_select(const RunConfig& config) {
  config.validate();
  const auto matrix = read_matrix(config);
  const auto plan = stratified_holdout(labels_of(matrix), config.split_ratio, stage_seed(config.master_seed(), "split"));
  if (plan.single_class) throw data_error("SingleClass", "the corpus holds a single class");

  auto split = envelope(config);
  split["ratio"] = config.split_ratio;
  split["train_rows"] = plan.train;
  split["test_rows"] = plan.test;
  split["train"] = ojson::array();
  split["test"] = ojson::array();
  for (auto r : plan.train) split["train"].push_back(matrix.doc_ids[r]);
  for (auto r : plan.test) split["test"].push_back(matrix.doc_ids[r]);

  const auto report = select_features(matrix.select_rows(plan.train), config.selection, stage_seed(config.master_seed(), "selection"));
  auto selection = envelope(config);
  selection["rows"] = "train";
  selection["report"] = ojson::parse(report.to_json_text());

  write_json(artifact(config, artifacts::kSplit), split);
  write_json(artifact(config, artifacts::kSelection), selection);
}

void stage_train(const RunConfig& config) {
  config.validate();
  const auto matrix = read_matrix(config);
  const auto rows = read_split(config, matrix);
  const auto selection = read_selection(config);
  const auto train = matrix.select_rows(rows.train).select_columns(selection.selected);
  const auto master = config.master_seed();
  const auto folds = stratified_kfold(train.labels, config.folds, stage_seed(master, "folds"));
  std::vector<std::size_t> refit;
  if (config.mode == TrainMode::BootstrapCv) refit = bootstrap_indices(train.rows(), stage_seed(master, "bootstrap"));

  auto tuning = envelope(config);
  tuning["mode"] = mode_name(config.mode);
  tuning["folds"] = folds.k();
  tuning["train_rows"] = train.rows();
  tuning["families"] = ojson::array();
  for (const auto& grid : config.grids) {
    auto points = grid.points;
    for (auto& p : points) p.forest.workers = config.workers;
    const std::string name(family_name(grid.family));
    const auto result = grid_tune(points, train, folds, stage_seed(master, "tune." + name), config.workers, refit);

    ojson fam;
    fam["family"] = name;
    fam["best"] = result.best;
    fam["best_params"] = points[result.best].params_json();
    fam["table"] = ojson::array();
    for (const auto& row : result.table) {
      fam["table"].push_back({{"params", row.spec.params_json()},
                              {"fold_accuracy", row.fold_accuracy},
                              {"fold_auc", row.fold_auc},
                              {"mean_accuracy", row.mean_accuracy},
                              {"mean_auc", row.mean_auc}});
    }
    tuning["families"].push_back(std::move(fam));

    auto model = envelope(config);
    model["family"] = name;
    model["params"] = points[result.best].params_json();
    model["model"] = ojson::parse(model_to_json_text(result.model));
    write_json(model_path(config, grid.family), model);
  }
  write_json(artifact(config, artifacts::kTuning), tuning);
}

void stage_evaluate(const RunConfig& config) {
  config.validate();
  const auto matrix = read_matrix(config);
  const auto rows = read_split(config, matrix);
  // The selection artifact must match even though predict() picks columns
  // by id from the model.
  read_selection(config);
  const auto test = matrix.select_rows(rows.test);

  std::vector<ComparisonRow> table;
  for (const auto& grid : config.grids) {
    const auto model = read_model(config, grid.family);
    auto report = evaluate(predict(model, test), test.labels);
    report.model = std::string(family_name(grid.family));
    report.seed = config.master_seed();
    report.provenance = {{"config_hash", config.hash()}, {"seeds", config.seeds()}, {"rows", "test"}, {"n_test", test.rows()}};
    write_json(evaluation_path(config, grid.family), report.to_json());
    table.push_back({report.model, report});
  }
  textio::write_file_atomic(artifact(config, artifacts::kComparison), comparison_csv(table));
}

void stage_report(const RunConfig& config, const std::string& generated_at) {
  config.validate();
  const auto selection_json = read_artifact(config, artifact(config, artifacts::kSelection));
  const auto tuning_json = read_artifact(config, artifact(config, artifacts::kTuning));

  RunSummary run;
  run.config = config.echo();
  run.config_hash = config.hash();
  run.seeds = config.seeds();
  run.selection = selection_json.at("report");
  run.tuning = tuning_json.at("families");
  run.generated_at = generated_at;

  std::optional<ForestModel> forest;
  std::optional<TreeModel> tree;
  for (const auto& grid : config.grids) {
    const auto path = evaluation_path(config, grid.family);
    if (!fs::exists(path)) {
      throw Error(ErrorKind::MissingArtifact, "MissingArtifact", "required artifact not found: " + path.string());
    }
    const auto j = nlohmann::json::parse(textio::read_file(path));
    if (!j.contains("provenance") || j["provenance"].value("config_hash", std::string()) != config.hash()) {
      throw Error(ErrorKind::MissingArtifact, "StaleArtifact", path.string() + " was produced by a different configuration");
    }
    run.evaluations.push_back({std::string(family_name(grid.family)), EvalReport::from_json(j)});
    auto model = read_model(config, grid.family);
    if (auto* f = std::get_if<ForestModel>(&model)) forest = std::move(*f);
    if (auto* t = std::get_if<TreeModel>(&model)) tree = std::move(*t);
  }

  const TreeModel* best_tree = nullptr;
  if (forest && !forest->trees.empty()) {
    std::vector<std::vector<PythagoreanSquare>> layouts(forest->trees.size());
    parallel_for(layouts.size(), config.workers, [&](std::size_t i) { layouts[i] = layout_tree(forest->trees[i], config.log_scale); });
    best_tree = &forest->trees[order_trees_by_quality(*forest).front()];
    if (config.render_svg) {
      textio::write_file_atomic(artifact(config, artifacts::kForestSvg), render_forest_svg(*forest, layouts, config.svg_columns));
    }
    run.importances = importance_table(gini_importance(*forest));
    std::string csv = "feature,label,importance\n";
    for (const auto& [id, value] : run.importances) {
      csv += textio::csv_escape(id) + "," + textio::csv_escape(feature_label(id)) + "," + textio::format_double(value) + "\n";
    }
    textio::write_file_atomic(artifact(config, artifacts::kImportances), csv);
  } else if (tree) {
    best_tree = &*tree;
  }
  if (best_tree) {
    run.rules = decision_rules(*best_tree, config.rule_digits);
    std::string text;
    for (const auto& rule : run.rules) text += rule + "\n";
    textio::write_file_atomic(artifact(config, artifacts::kRules), text);
    if (config.render_svg) {
      textio::write_file_atomic(artifact(config, artifacts::kTreeSvg),
                                render_tree_svg(*best_tree, layout_tree(*best_tree, config.log_scale)));
    }
  }
  write_json(artifact(config, artifacts::kReport), run_json(run));
}

void run_pipeline(const RunConfig& config, const std::string& generated_at) {
  stage_prepare(config);
  stage_extract(config);
  stage_select(config);
  stage_train(config);
  stage_evaluate(config);
  stage_report(config, generated_at);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace textimpact
