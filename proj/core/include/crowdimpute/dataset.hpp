#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace crowdimpute {

enum class ColumnKind { continuous, categorical };

struct ValueRange {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
  bool operator==(const ValueRange&) const = default;
};

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  /// Ordered labels; categorical only. Cells store the label's index.
  std::vector<std::string> categories;
  /// Inclusive bounds; continuous only.
  std::optional<ValueRange> valid_range;
  std::string unit;

  bool categorical() const noexcept { return kind == ColumnKind::categorical; }
  std::optional<std::size_t> category_index(std::string_view label) const;

  /// Throws ConfigError when the invariants do not hold.
  void validate() const;

  bool operator==(const ColumnSpec&) const = default;
};

struct Schema {
  std::vector<ColumnSpec> columns;
  /// Name of a row-identifier column; it is never imputed, ranked or used as
  /// a predictor.
  std::optional<std::string> id_column;

  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws PreconditionError when `name` is not a column.
  std::size_t index_of(std::string_view name) const;
  void validate() const;

  bool operator==(const Schema&) const = default;
};

Schema schema_from_json(const nlohmann::json& j);
nlohmann::json schema_to_json(const Schema& schema);
Schema load_schema(const std::filesystem::path& path);

struct CellRef {
  std::size_t row = 0;
  std::size_t column = 0;

  auto operator<=>(const CellRef&) const = default;
};

/// n x p grid of cells with an explicit missingness mask. Continuous cells
/// hold their value; categorical cells hold the category index.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Schema schema, std::size_t rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return schema_.columns.size(); }
  const Schema& schema() const noexcept { return schema_; }
  const ColumnSpec& column(std::size_t c) const { return schema_.columns.at(c); }
  std::size_t column_index(std::string_view name) const { return schema_.index_of(name); }
  std::optional<std::size_t> id_column_index() const;

  bool missing(std::size_t r, std::size_t c) const { return mask_[offset(r, c)] != 0; }
  /// Stored value; meaningless for a missing cell.
  double value(std::size_t r, std::size_t c) const { return cells_[offset(r, c)]; }
  /// Label for categorical cells, shortest number text otherwise.
  std::string format_cell(std::size_t r, std::size_t c) const;

  /// Stores an observed value. Throws PreconditionError when it does not
  /// conform to the column spec.
  void set(std::size_t r, std::size_t c, double v);
  void set_label(std::size_t r, std::size_t c, std::string_view label);
  void set_missing(std::size_t r, std::size_t c);

  std::size_t observed_count(std::size_t c) const;
  std::vector<std::size_t> observed_rows(std::size_t c) const;
  std::vector<double> observed_values(std::size_t c) const;
  /// Missing cells in row-major order.
  std::vector<CellRef> missing_cells() const;
  bool complete() const;

  bool operator==(const Dataset&) const = default;

 private:
  std::size_t offset(std::size_t r, std::size_t c) const { return r * cols() + c; }

  Schema schema_;
  std::size_t rows_ = 0;
  std::vector<double> cells_;
  std::vector<std::uint8_t> mask_;
};

/// Checks that `v` is a legal observed value for `spec`.
bool conforms(const ColumnSpec& spec, double v);

/// Parse one cell of text per the spec (label or number). Throws
/// PreconditionError with a readable reason on failure.
double parse_cell(const ColumnSpec& spec, std::string_view text);

struct CsvOptions {
  std::string missing_token = "?";
};

/// Reads a header-first CSV whose header names match the schema, in order.
Dataset read_csv(std::istream& in, const Schema& schema, const CsvOptions& options = {});
Dataset load_csv(const std::filesystem::path& path, const Schema& schema,
                 const CsvOptions& options = {});
void write_csv(std::ostream& out, const Dataset& d, const CsvOptions& options = {});
void save_csv(const std::filesystem::path& path, const Dataset& d, const CsvOptions& options = {});

struct TruthEntry {
  CellRef cell;
  double value = 0.0;

  bool operator==(const TruthEntry&) const = default;
};

struct GroundTruth {
  std::vector<TruthEntry> entries;

  bool operator==(const GroundTruth&) const = default;
};

/// JSON list of {row, column, value}; column by name, categorical values by
/// label.
nlohmann::json ground_truth_to_json(const GroundTruth& gt, const Schema& schema);
GroundTruth ground_truth_from_json(const nlohmann::json& j, const Schema& schema);

/// Masks exactly `n` uniformly chosen observed cells of `column`. Entries are
/// returned in ascending row order.
std::pair<Dataset, GroundTruth> ampute(const Dataset& d, std::string_view column, std::size_t n,
                                       std::uint64_t seed);

/// Writes the ground-truth values back into `d`.
Dataset restore(const Dataset& d, const GroundTruth& gt);

}  // namespace crowdimpute
