#include "crowdimpute/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "crowdimpute/csv.hpp"
#include "crowdimpute/error.hpp"
#include "crowdimpute/random.hpp"
#include "crowdimpute/text.hpp"

namespace crowdimpute {

using nlohmann::json;

std::optional<std::size_t> ColumnSpec::category_index(std::string_view label) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == label) return i;
  }
  return std::nullopt;
}

void ColumnSpec::validate() const {
  if (name.empty()) throw ConfigError("column with empty name");
  if (categorical()) {
    std::set<std::string> distinct(categories.begin(), categories.end());
    if (distinct.size() < 2 || distinct.size() != categories.size()) {
      throw ConfigError("categorical column '" + name + "' needs at least 2 distinct labels");
    }
    if (valid_range) throw ConfigError("categorical column '" + name + "' cannot have a range");
  } else {
    if (!categories.empty()) {
      throw ConfigError("continuous column '" + name + "' cannot list categories");
    }
    if (valid_range && !(valid_range->lo < valid_range->hi)) {
      throw ConfigError("column '" + name + "': valid_range needs lo < hi");
    }
  }
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw PreconditionError("unknown column '" + std::string(name) + "'");
}

void Schema::validate() const {
  if (columns.empty()) throw ConfigError("schema has no columns");
  std::set<std::string> names;
  for (const auto& c : columns) {
    c.validate();
    if (!names.insert(c.name).second) throw ConfigError("duplicate column '" + c.name + "'");
  }
  if (id_column && !find(*id_column)) {
    throw ConfigError("id_column '" + *id_column + "' is not a column");
  }
}

Schema schema_from_json(const json& j) {
  Schema schema;
  try {
    for (const auto& jc : j.at("columns")) {
      ColumnSpec c;
      c.name = jc.at("name").get<std::string>();
      const auto kind = jc.value("kind", std::string("continuous"));
      if (kind == "categorical") {
        c.kind = ColumnKind::categorical;
        c.categories = jc.at("categories").get<std::vector<std::string>>();
      } else if (kind == "continuous") {
        if (jc.contains("range") && !jc["range"].is_null()) {
          const auto r = jc["range"].get<std::vector<double>>();
          if (r.size() != 2) throw ConfigError("column '" + c.name + "': range needs [lo, hi]");
          c.valid_range = ValueRange{r[0], r[1]};
        }
      } else {
        throw ConfigError("column '" + c.name + "': unknown kind '" + kind + "'");
      }
      c.unit = jc.value("unit", std::string());
      schema.columns.push_back(std::move(c));
    }
    if (j.contains("id_column") && !j["id_column"].is_null()) {
      schema.id_column = j["id_column"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed schema: ") + e.what());
  }
  schema.validate();
  return schema;
}

json schema_to_json(const Schema& schema) {
  json cols = json::array();
  for (const auto& c : schema.columns) {
    json jc{{"name", c.name}, {"kind", c.categorical() ? "categorical" : "continuous"}};
    if (c.categorical()) jc["categories"] = c.categories;
    if (c.valid_range) jc["range"] = {c.valid_range->lo, c.valid_range->hi};
    if (!c.unit.empty()) jc["unit"] = c.unit;
    cols.push_back(std::move(jc));
  }
  json j{{"columns", std::move(cols)}};
  if (schema.id_column) j["id_column"] = *schema.id_column;
  return j;
}

Schema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("schema " + path.string() + ": " + e.what());
  }
  return schema_from_json(j);
}

Dataset::Dataset(Schema schema, std::size_t rows)
    : schema_(std::move(schema)),
      rows_(rows),
      cells_(rows * schema_.columns.size(), 0.0),
      mask_(rows * schema_.columns.size(), 1) {
  schema_.validate();
}

std::optional<std::size_t> Dataset::id_column_index() const {
  if (!schema_.id_column) return std::nullopt;
  return schema_.find(*schema_.id_column);
}

std::string Dataset::format_cell(std::size_t r, std::size_t c) const {
  const double v = value(r, c);
  const auto& spec = column(c);
  if (spec.categorical()) return spec.categories.at(static_cast<std::size_t>(v));
  return format_number(v);
}

bool conforms(const ColumnSpec& spec, double v) {
  if (!std::isfinite(v)) return false;
  if (spec.categorical()) {
    return v >= 0.0 && v == std::floor(v) && v < static_cast<double>(spec.categories.size());
  }
  return !spec.valid_range || spec.valid_range->contains(v);
}

void Dataset::set(std::size_t r, std::size_t c, double v) {
  if (r >= rows_ || c >= cols()) throw PreconditionError("cell out of bounds");
  if (!conforms(column(c), v)) {
    throw PreconditionError("value " + format_number(v) + " does not conform to column '" +
                            column(c).name + "'");
  }
  cells_[offset(r, c)] = v;
  mask_[offset(r, c)] = 0;
}

void Dataset::set_label(std::size_t r, std::size_t c, std::string_view label) {
  auto idx = column(c).category_index(label);
  if (!idx) {
    throw PreconditionError("unknown category '" + std::string(label) + "' for column '" +
                            column(c).name + "'");
  }
  set(r, c, static_cast<double>(*idx));
}

void Dataset::set_missing(std::size_t r, std::size_t c) {
  if (r >= rows_ || c >= cols()) throw PreconditionError("cell out of bounds");
  cells_[offset(r, c)] = 0.0;
  mask_[offset(r, c)] = 1;
}

std::size_t Dataset::observed_count(std::size_t c) const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < rows_; ++r) n += missing(r, c) ? 0 : 1;
  return n;
}

std::vector<std::size_t> Dataset::observed_rows(std::size_t c) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < rows_; ++r) {
    if (!missing(r, c)) out.push_back(r);
  }
  return out;
}

std::vector<double> Dataset::observed_values(std::size_t c) const {
  std::vector<double> out;
  for (std::size_t r = 0; r < rows_; ++r) {
    if (!missing(r, c)) out.push_back(value(r, c));
  }
  return out;
}

std::vector<CellRef> Dataset::missing_cells() const {
  std::vector<CellRef> out;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols(); ++c) {
      if (missing(r, c)) out.push_back({r, c});
    }
  }
  return out;
}

bool Dataset::complete() const {
  return std::none_of(mask_.begin(), mask_.end(), [](std::uint8_t m) { return m != 0; });
}

double parse_cell(const ColumnSpec& spec, std::string_view text) {
  const auto t = trim(text);
  if (spec.categorical()) {
    if (auto idx = spec.category_index(t)) return static_cast<double>(*idx);
    throw PreconditionError("unknown category '" + std::string(t) + "'");
  }
  double v = 0.0;
  if (!parse_number(t, v)) throw PreconditionError("not a number: '" + std::string(t) + "'");
  if (spec.valid_range && !spec.valid_range->contains(v)) {
    throw PreconditionError("value " + std::string(t) + " outside range [" +
                            format_number(spec.valid_range->lo) + ", " +
                            format_number(spec.valid_range->hi) + "]");
  }
  return v;
}

Dataset read_csv(std::istream& in, const Schema& schema, const CsvOptions& options) {
  schema.validate();
  csv::Reader reader(in);
  csv::Record header;
  if (!reader.next(header)) throw ParseError(0, 0, "missing header row");
  if (header.size() != schema.columns.size()) {
    throw ParseError(0, header.size(), "header has " + std::to_string(header.size()) +
                                           " fields, schema has " +
                                           std::to_string(schema.columns.size()));
  }
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (trim(header[c]) != schema.columns[c].name) {
      throw ParseError(0, c, "header '" + header[c] + "' does not match schema column '" +
                                 schema.columns[c].name + "'");
    }
  }

  std::vector<csv::Record> records;
  csv::Record rec;
  while (reader.next(rec)) {
    if (rec.size() != schema.columns.size()) {
      throw ParseError(records.size(), rec.size(),
                       "expected " + std::to_string(schema.columns.size()) + " fields");
    }
    records.push_back(rec);
  }

  Dataset d(schema, records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      const auto field = trim(records[r][c]);
      if (field == options.missing_token) continue;
      try {
        d.set(r, c, parse_cell(schema.columns[c], field));
      } catch (const PreconditionError& e) {
        throw ParseError(r, c, e.what());
      }
    }
  }
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema,
                 const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file " + path.string());
  return read_csv(in, schema, options);
}

void write_csv(std::ostream& out, const Dataset& d, const CsvOptions& options) {
  csv::Record rec;
  for (const auto& c : d.schema().columns) rec.push_back(c.name);
  csv::write_record(out, rec);
  for (std::size_t r = 0; r < d.rows(); ++r) {
    rec.clear();
    for (std::size_t c = 0; c < d.cols(); ++c) {
      rec.push_back(d.missing(r, c) ? options.missing_token : d.format_cell(r, c));
    }
    csv::write_record(out, rec);
  }
}

void save_csv(const std::filesystem::path& path, const Dataset& d, const CsvOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_csv(out, d, options);
}

json ground_truth_to_json(const GroundTruth& gt, const Schema& schema) {
  json arr = json::array();
  for (const auto& e : gt.entries) {
    const auto& spec = schema.columns.at(e.cell.column);
    json v = spec.categorical() ? json(spec.categories.at(static_cast<std::size_t>(e.value)))
                                : json(e.value);
    arr.push_back({{"row", e.cell.row}, {"column", spec.name}, {"value", std::move(v)}});
  }
  return arr;
}

GroundTruth ground_truth_from_json(const json& j, const Schema& schema) {
  GroundTruth gt;
  try {
    for (const auto& je : j) {
      TruthEntry e;
      e.cell.row = je.at("row").get<std::size_t>();
      e.cell.column = schema.index_of(je.at("column").get<std::string>());
      const auto& spec = schema.columns[e.cell.column];
      if (spec.categorical()) {
        auto idx = spec.category_index(je.at("value").get<std::string>());
        if (!idx) throw ConfigError("ground truth: unknown label for '" + spec.name + "'");
        e.value = static_cast<double>(*idx);
      } else {
        e.value = je.at("value").get<double>();
      }
      gt.entries.push_back(e);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed ground truth: ") + e.what());
  }
  return gt;
}

std::pair<Dataset, GroundTruth> ampute(const Dataset& d, std::string_view column, std::size_t n,
                                       std::uint64_t seed) {
  const auto c = d.column_index(column);
  auto rows = d.observed_rows(c);
  if (n > rows.size()) {
    throw PreconditionError("cannot ampute " + std::to_string(n) + " cells of '" +
                            std::string(column) + "': only " + std::to_string(rows.size()) +
                            " observed");
  }
  Rng rng(seed);
  // Partial Fisher-Yates: the first n slots become a uniform sample.
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + rng.index(rows.size() - i);
    std::swap(rows[i], rows[j]);
  }
  rows.resize(n);
  std::sort(rows.begin(), rows.end());

  Dataset out = d;
  GroundTruth gt;
  for (auto r : rows) {
    gt.entries.push_back({{r, c}, d.value(r, c)});
    out.set_missing(r, c);
  }
  return {std::move(out), std::move(gt)};
}

Dataset restore(const Dataset& d, const GroundTruth& gt) {
  Dataset out = d;
  for (const auto& e : gt.entries) out.set(e.cell.row, e.cell.column, e.value);
  return out;
}

}  // namespace crowdimpute
