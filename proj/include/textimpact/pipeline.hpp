#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "textimpact/features.hpp"
#include "textimpact/learners.hpp"
#include "textimpact/selection.hpp"

namespace textimpact {

enum class TrainMode {
  BootstrapCv,  // tune by k-fold CV on the training split, refit on a bootstrap of it
  Cv,           // tune by k-fold CV, refit on the whole training split
};

struct RunPaths {
  std::filesystem::path manifest;
  std::filesystem::path lexicon;
  std::filesystem::path norms;
  std::filesystem::path frequencies;
  std::optional<std::filesystem::path> clean_rules;
  std::filesystem::path out;
};

struct ModelGrid {
  ModelFamily family;
  std::vector<ModelSpec> points;
};

struct RunConfig {
  RunPaths paths;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  nlohmann::json features = nlohmann::json{{"registry", "extended"}};  // registry section as given
  SelectionParams selection;
  double split_ratio = 0.8;
  std::size_t folds = 10;
  TrainMode mode = TrainMode::BootstrapCv;
  std::vector<ModelGrid> grids;  // ridge, lasso, tree, forest order
  bool render_svg = true;
  bool log_scale = true;
  std::size_t svg_columns = 5;
  int rule_digits = 3;

  // Relative paths resolve against base_dir. Unknown keys, bad values and
  // missing input files are ConfigInvalid.
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);

  // Throws ConfigInvalid unless a seed is set and every input file exists.
  void validate() const;
  std::uint64_t master_seed() const;
  RegistryConfig registry() const;

  // Normalized configuration without the output directory and worker count,
  // so neither changes any artifact.
  nlohmann::ordered_json echo() const;
  // 16 hex digits of FNV-1a over echo().dump().
  std::string hash() const;
  nlohmann::ordered_json seeds() const;
};

std::uint64_t stage_seed(std::uint64_t master, std::string_view stage);

// Artifact names under the output directory.
namespace artifacts {
inline constexpr std::string_view kCorpus = "corpus.json";
inline constexpr std::string_view kMatrix = "features.csv";
inline constexpr std::string_view kMatrixMeta = "features_meta.json";
inline constexpr std::string_view kSplit = "split.json";
inline constexpr std::string_view kSelection = "selection.json";
inline constexpr std::string_view kTuning = "tuning.json";
inline constexpr std::string_view kModelsDir = "models";
inline constexpr std::string_view kEvaluationDir = "evaluation";
inline constexpr std::string_view kComparison = "comparison.csv";
inline constexpr std::string_view kImportances = "importances.csv";
inline constexpr std::string_view kRules = "rules.txt";
inline constexpr std::string_view kForestSvg = "forest.svg";
inline constexpr std::string_view kTreeSvg = "best_tree.svg";
inline constexpr std::string_view kReport = "report.json";
}  // namespace artifacts

// Each stage reads its predecessor's artifact from paths.out (MissingArtifact
// when absent or written under a different config hash) and writes its own
// atomically.
void stage_prepare(const RunConfig& config);
void stage_extract(const RunConfig& config);
void stage_select(const RunConfig& config);
void stage_train(const RunConfig& config);
void stage_evaluate(const RunConfig& config);
// generated_at is the only time-dependent field of report.json.
void stage_report(const RunConfig& config, const std::string& generated_at);
void run_pipeline(const RunConfig& config, const std::string& generated_at);

// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace textimpact
