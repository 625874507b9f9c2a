#include <doctest.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "crowdimpute/dataset.hpp"
#include "crowdimpute/error.hpp"

using namespace crowdimpute;
using nlohmann::json;

namespace {

Schema small_schema() {
  return schema_from_json(json::parse(R"({
    "columns": [
      {"name": "id", "kind": "continuous"},
      {"name": "age", "kind": "continuous", "range": [3, 19], "unit": "years"},
      {"name": "gender", "kind": "categorical", "categories": ["Male", "Female"]}
    ],
    "id_column": "id"
  })"));
}

}  // namespace

TEST_CASE("schema JSON round-trips") {
  const auto s = small_schema();
  CHECK(s.columns.size() == 3);
  CHECK(s.columns[1].valid_range == ValueRange{3, 19});
  CHECK(s.columns[1].unit == "years");
  CHECK(s.id_column == "id");
  CHECK(schema_from_json(schema_to_json(s)) == s);
}

TEST_CASE("invalid schemas are configuration errors") {
  CHECK_THROWS_AS(schema_from_json(json::parse(R"({"columns": []})")), ConfigError);
  CHECK_THROWS_AS(schema_from_json(json::parse(R"({"columns": [{"name": "a"}, {"name": "a"}]})")), ConfigError);
  CHECK_THROWS_AS(schema_from_json(json::parse(R"({"columns": [{"name": "g", "kind": "categorical",
                                                   "categories": ["x"]}]})")),
                  ConfigError);
  CHECK_THROWS_AS(schema_from_json(json::parse(R"({"columns": [{"name": "a", "range": [5, 1]}]})")),
                  ConfigError);
  CHECK_THROWS_AS(schema_from_json(json::parse(R"({"columns": [{"name": "a", "kind": "ordinal"}]})")),
                  ConfigError);
  CHECK_THROWS_AS(schema_from_json(json::parse(R"({"columns": [{"name": "a"}], "id_column": "b"})")),
                  ConfigError);
  CHECK_THROWS_AS(schema_from_json(json::parse(R"({"cols": []})")), ConfigError);
}

TEST_CASE("cells start missing and reject values outside the schema") {
  Dataset d(small_schema(), 2);
  CHECK(d.missing(0, 1));
  d.set(0, 1, 10);
  CHECK_FALSE(d.missing(0, 1));
  CHECK_THROWS_AS(d.set(0, 1, 20), PreconditionError);
  CHECK_THROWS_AS(d.set(0, 2, 2), PreconditionError);
  CHECK_THROWS_AS(d.set(0, 2, 0.5), PreconditionError);
  CHECK_THROWS_AS(d.set(5, 0, 1), PreconditionError);
  CHECK_THROWS_AS(d.set_label(0, 2, "Other"), PreconditionError);
  d.set_label(1, 2, "Female");
  CHECK(d.value(1, 2) == 1.0);
  CHECK(d.format_cell(1, 2) == "Female");
}

TEST_CASE("csv read and write round-trip with the missing token") {
  std::istringstream in("id,age,gender\n1,10,Male\n2,?,Female\n3,7.5,?\n");
  const auto d = read_csv(in, small_schema());
  CHECK(d.rows() == 3);
  CHECK(d.missing(1, 1));
  CHECK(d.missing(2, 2));
  CHECK(d.value(2, 1) == 7.5);
  CHECK(d.missing_cells() == std::vector<CellRef>{{1, 1}, {2, 2}});
  CHECK(d.observed_values(1) == std::vector<double>{10, 7.5});
  std::ostringstream out;
  write_csv(out, d);
  CHECK(out.str() == "id,age,gender\n1,10,Male\n2,?,Female\n3,7.5,?\n");
}

TEST_CASE("csv errors carry data coordinates") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_csv(in, small_schema());
  };
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("id,age\n"), ParseError);
  CHECK_THROWS_AS(parse("id,years,gender\n"), ParseError);
  try {
    parse("id,age,gender\n1,10,Male\n2,40,Male\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 1);
    CHECK(e.column() == 1);
  }
  try {
    parse("id,age,gender\n1,10,Male\n2,11,Robot\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 1);
    CHECK(e.column() == 2);
  }
  CHECK_THROWS_AS(parse("id,age,gender\n1,10\n"), ParseError);
}

TEST_CASE("ampute masks exactly n observed cells and records them") {
  Schema s;
  s.columns = {ColumnSpec{"x"}};
  Dataset d(s, 50);
  for (std::size_t r = 0; r < 50; ++r) d.set(r, 0, static_cast<double>(r));
  const auto [masked, truth] = ampute(d, "x", 10, 7);
  CHECK(masked.missing_cells().size() == 10);
  REQUIRE(truth.entries.size() == 10);
  for (std::size_t i = 0; i < truth.entries.size(); ++i) {
    const auto& e = truth.entries[i];
    CHECK(masked.missing(e.cell.row, 0));
    CHECK(e.value == static_cast<double>(e.cell.row));
    if (i) CHECK(truth.entries[i - 1].cell.row < e.cell.row);
  }
  CHECK(restore(masked, truth) == d);
  CHECK(ampute(d, "x", 10, 7).second == truth);
  CHECK(ampute(d, "x", 10, 8).second != truth);
  CHECK_THROWS_AS(ampute(d, "x", 51, 7), PreconditionError);
  CHECK_THROWS_AS(ampute(d, "y", 1, 7), PreconditionError);
}

TEST_CASE("ground truth JSON uses labels for categorical cells") {
  const auto s = small_schema();
  GroundTruth gt;
  gt.entries = {{{0, 1}, 12.0}, {{3, 2}, 1.0}};
  const auto j = ground_truth_to_json(gt, s);
  CHECK(j[1]["value"] == "Female");
  CHECK(j[1]["column"] == "gender");
  CHECK(ground_truth_from_json(j, s) == gt);
  CHECK_THROWS_AS(ground_truth_from_json(json::parse(R"([{"row": 0, "column": "gender", "value": "X"}])"), s),
                  ConfigError);
}
