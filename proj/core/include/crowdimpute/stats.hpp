#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "crowdimpute/dataset.hpp"

namespace crowdimpute {

/// Type-7 quantile (linear interpolation between order statistics) of an
/// ascending-sorted, non-empty sample.
double quantile_sorted(std::span<const double> sorted, double prob);

/// Two-pass Pearson correlation; empty when fewer than two pairs or either
/// side has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

struct ColumnStats {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  std::size_t observed = 0;
  /// No observed cells; excluded from associations.
  bool flagged = false;

  // Continuous columns.
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
  double sd = 0.0;
  /// Decimal places needed to represent every observed value (capped at 6).
  int decimals = 0;

  // Categorical columns, in schema category order.
  std::vector<std::size_t> counts;
  std::vector<double> proportions;
};

struct GroupStat {
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;
};

/// Mean of a continuous column within each category of a categorical column.
struct GroupedMeans {
  std::size_t target = 0;
  std::size_t by = 0;
  std::vector<GroupStat> groups;
};

/// Bucket of a continuous stratifier: (lo, hi], except the first which is
/// closed on both ends.
struct Stratum {
  double lo = 0.0;
  double hi = 0.0;
  GroupStat stat;
};

/// Mean of a continuous column within quartile buckets of another continuous
/// column. Bucket edges are the stratifier's quartiles rounded to its
/// observed precision.
struct StratifiedMeans {
  std::size_t target = 0;
  std::size_t by = 0;
  std::vector<Stratum> strata;

  /// Bucket holding `x`; values outside every bucket map to the nearest
  /// one, and a value on an edge goes to the lower bucket.
  const Stratum& lookup(double x) const;
};

struct SummaryStats {
  Schema schema;
  std::size_t rows = 0;
  std::vector<ColumnStats> columns;
  /// p x p; empty entries are undefined (constant, unobserved or id columns).
  std::vector<std::vector<std::optional<double>>> association;
  std::vector<GroupedMeans> grouped;
  std::vector<StratifiedMeans> stratified;

  std::size_t index_of(std::string_view name) const { return schema.index_of(name); }
  const ColumnStats& column(std::string_view name) const { return columns[index_of(name)]; }
  const GroupedMeans* grouped_means(std::size_t target, std::size_t by) const;
  const StratifiedMeans* stratified_means(std::size_t target, std::size_t by) const;
};

/// Descriptive statistics over observed cells only.
///
/// Associations: Pearson r for two continuous columns; for a continuous and a
/// categorical column, r against each category indicator (the point-biserial
/// coefficient for binary columns), keeping the one of largest magnitude; two
/// categorical columns use the same rule over indicator pairs (phi for two
/// binary columns).
SummaryStats summarize(const Dataset& d);

struct RankedColumn {
  std::string column;
  double score = 0.0;  ///< |association| with the target
};

/// Other columns by descending |association| with `target`; columns with no
/// defined association are left out. Ties keep schema order.
std::vector<RankedColumn> correlation_rank(const SummaryStats& s, std::string_view target);

nlohmann::json summary_to_json(const SummaryStats& s);

}  // namespace crowdimpute
