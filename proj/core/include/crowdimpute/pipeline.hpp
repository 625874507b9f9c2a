#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "crowdimpute/crowd.hpp"
#include "crowdimpute/imputation.hpp"
#include "crowdimpute/mice.hpp"
#include "crowdimpute/pooling.hpp"
#include "crowdimpute/questionnaire.hpp"

namespace crowdimpute {

/// Streams split from the master seed, one per randomized stage.
enum class Stage : std::uint64_t { ampute = 1, crowd = 2, mice = 3 };
std::uint64_t stage_seed(std::uint64_t master, Stage stage) noexcept;

/// Fixed file names inside a run directory.
namespace run_files {
inline constexpr const char* manifest = "manifest.json";
inline constexpr const char* schema = "schema.json";
inline constexpr const char* amputed = "amputed.csv";
inline constexpr const char* ground_truth = "ground_truth.json";
inline constexpr const char* summary = "summary.json";
inline constexpr const char* questionnaires = "questionnaires";
inline constexpr const char* judgments = "judgments.jsonl";
inline constexpr const char* crowd_set = "crowd";
inline constexpr const char* mice_set = "mice";
}  // namespace run_files

struct SurveyOptions {
  std::size_t top_m = 3;
  std::size_t k = 30;
  std::optional<std::string> prior_blurb;
  BlurbPlacement placement = BlurbPlacement::end;
  std::string context_sentence;
  std::optional<std::filesystem::path> template_file;
};

struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path schema;
  std::vector<std::string> targets;
  std::size_t n_missing = 10;
  std::size_t k = 30;
  std::size_t m = 30;
  std::uint64_t seed = 1;
  /// Persona mix file; the "experienced" preset when unset.
  std::optional<std::filesystem::path> personas;
  std::filesystem::path out_dir;
  std::size_t top_m = 3;
  std::size_t cycles = 10;
  std::size_t donors = 5;
  std::optional<std::string> prior_blurb;
  std::size_t threads = 1;

  /// Throws ConfigError when a count is zero or a path or target is missing.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
/// Relative paths are resolved against `base`.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Everything a stage reads from a run directory. Each stage function takes
/// the run directory and writes its artifacts there; run_pipeline is these
/// calls in order.
Schema load_run_schema(const std::filesystem::path& dir);
Dataset load_run_dataset(const std::filesystem::path& dir);

/// Copies the schema, masks `n` cells of every target (target i uses
/// split_seed(ampute seed, i)) and writes amputed.csv and ground_truth.json.
/// The input must have no missing cells.
void stage_ampute(const std::filesystem::path& dataset, const std::filesystem::path& schema,
                  const std::vector<std::string>& targets, std::size_t n, std::uint64_t seed,
                  const std::filesystem::path& dir);

/// summary.json from amputed.csv.
SummaryStats stage_describe(const std::filesystem::path& dir);

/// Questionnaires for the missing cells of `target`, ids "<target>-001", ...,
/// written to questionnaires/<id>.json.
std::vector<Questionnaire> stage_gen_survey(const std::filesystem::path& dir, const std::string& target,
                                            const SurveyOptions& options);

/// Simulated judgments for every questionnaire, written to judgments.jsonl.
JudgmentSet stage_simulate_crowd(const std::filesystem::path& dir, const PersonaMix& mix,
                                 std::uint64_t seed, const CrowdOptions& options = {});

/// m MICE copies of amputed.csv written to mice/.
ImputationSet stage_impute_mice(const std::filesystem::path& dir, std::size_t m,
                                const MiceOptions& options, std::uint64_t seed, std::size_t threads = 1);

/// Summaries of one imputation set, written to pooled_<provenance>.json. For
/// crowd provenance the set is first built from judgments.jsonl and saved to
/// crowd/.
std::vector<PooledCellSummary> stage_pool(const std::filesystem::path& dir, Provenance provenance);

/// Compares crowd/ and mice/ against ground_truth.json; writes report.<ext>.
EvaluationReport stage_report(const std::filesystem::path& dir, ReportFormat format);

struct PipelineResult {
  EvaluationReport report;
  std::vector<std::string> warnings;
};

/// ampute, describe, gen-survey, simulate-crowd, impute-mice, pool (both
/// provenances) and report, writing every artifact plus manifest.json. A
/// failing stage rethrows with the stage name prefixed; ConfigError keeps its
/// type.
PipelineResult run_pipeline(const RunConfig& config);

}  // namespace crowdimpute
