#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "crowdimpute/dataset.hpp"
#include "crowdimpute/imputation.hpp"

namespace crowdimpute {

/// Arithmetic mean of m point estimates. The values are summed in sorted
/// order with compensation, so the result does not depend on input order.
/// Throws PreconditionError on an empty list.
double pool_point(std::span<const double> values);

struct ContinuousSummary {
  double mean = 0.0;
  double median = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
  /// Sample variance of the m values (0 when m = 1).
  double between_variance = 0.0;
  /// (1 + 1/m) * between_variance; the between part of Rubin's total
  /// variance. Informational only.
  double rubin_between = 0.0;
  std::vector<double> values;

  bool operator==(const ContinuousSummary&) const = default;
};

struct CategoricalSummary {
  std::vector<std::string> categories;
  std::vector<std::size_t> votes;
  /// Empty on a tie for the most votes.
  std::optional<std::string> winner;
  /// Votes of the winner minus the runner-up (0 on a tie).
  std::size_t margin = 0;

  bool operator==(const CategoricalSummary&) const = default;
};

struct PooledCellSummary {
  CellRef cell;
  std::size_t m = 0;
  std::variant<ContinuousSummary, CategoricalSummary> body;

  bool continuous() const noexcept { return std::holds_alternative<ContinuousSummary>(body); }
  const ContinuousSummary& numbers() const { return std::get<ContinuousSummary>(body); }
  const CategoricalSummary& votes() const { return std::get<CategoricalSummary>(body); }

  bool operator==(const PooledCellSummary&) const = default;
};

ContinuousSummary summarize_continuous(std::span<const double> values);
/// Votes are counted per entry of `categories`, in that order; a label outside
/// it is an error.
CategoricalSummary summarize_categorical(std::span<const std::string> labels,
                                         const std::vector<std::string>& categories);

using CellValue = std::variant<double, std::string>;

/// Summary of one cell's imputations. All values must be of one kind. For
/// labels, `categories` fixes the vote order; when empty, labels are counted
/// in order of first appearance.
PooledCellSummary summarize_cell(const std::vector<CellValue>& values,
                                 const std::vector<std::string>& categories = {});

/// One summary per imputed cell of the set, in the set's cell order.
std::vector<PooledCellSummary> pool_set(const ImputationSet& set);

/// "6.0(5.0,7.0)" for continuous cells, "13 - 17" for votes.
std::string format_summary(const PooledCellSummary& s);

nlohmann::json to_json(const PooledCellSummary& s, const Schema& schema);
nlohmann::json to_json(const std::vector<PooledCellSummary>& list, const Schema& schema);

struct ReportRow {
  CellRef cell;
  double original = 0.0;
  PooledCellSummary a;
  PooledCellSummary b;
};

struct MethodMetrics {
  /// Share of continuous cells whose original value is in [p25, p75].
  std::optional<double> iqr_coverage;
  std::size_t covered = 0;
  /// Median over continuous cells of |median - original|.
  std::optional<double> median_abs_error;
  /// Share of categorical cells whose majority label is the original; ties
  /// count as wrong.
  std::optional<double> winner_accuracy;
  std::size_t correct = 0;
};

struct EvaluationReport {
  std::string label_a = "Crowd";
  std::string label_b = "MICE";
  Schema schema;
  std::vector<ReportRow> rows;
  std::size_t continuous_cells = 0;
  std::size_t categorical_cells = 0;
  MethodMetrics metrics_a;
  MethodMetrics metrics_b;
  /// Cells where the methods coincide: same winner (a tie matches a tie) for
  /// categorical cells, same median for continuous ones.
  std::size_t agreement = 0;
  double agreement_rate = 0.0;
};

/// Both sets must impute exactly the ground-truth cells (m may differ).
/// Rows follow the ground-truth order.
EvaluationReport compare(const GroundTruth& gt, const ImputationSet& a, const ImputationSet& b,
                         std::string label_a = "Crowd", std::string label_b = "MICE");

enum class ReportFormat { json, md, txt };
/// Throws ConfigError for an unknown name.
ReportFormat report_format_from_string(std::string_view text);

nlohmann::json to_json(const EvaluationReport& r);
/// One table per imputed column: original value, then each method's summary.
std::string render_report(const EvaluationReport& r, ReportFormat format);

}  // namespace crowdimpute
