#include "crowdimpute/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "crowdimpute/error.hpp"
#include "crowdimpute/stats.hpp"
#include "crowdimpute/text.hpp"

namespace crowdimpute {

using nlohmann::json;

double pool_point(std::span<const double> values) {
  if (values.empty()) throw PreconditionError("cannot pool an empty list of estimates");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  // Neumaier summation.
  double sum = 0.0;
  double carry = 0.0;
  for (double v : sorted) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return (sum + carry) / static_cast<double>(sorted.size());
}

ContinuousSummary summarize_continuous(std::span<const double> values) {
  if (values.empty()) throw PreconditionError("cannot summarize an empty list of imputations");
  ContinuousSummary s;
  s.values.assign(values.begin(), values.end());
  std::vector<double> sorted = s.values;
  std::sort(sorted.begin(), sorted.end());
  s.mean = pool_point(sorted);
  s.median = quantile_sorted(sorted, 0.5);
  s.p25 = quantile_sorted(sorted, 0.25);
  s.p75 = quantile_sorted(sorted, 0.75);
  const auto m = static_cast<double>(sorted.size());
  if (sorted.size() > 1) {
    double ss = 0.0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.between_variance = ss / (m - 1.0);
  }
  s.rubin_between = (1.0 + 1.0 / m) * s.between_variance;
  return s;
}

CategoricalSummary summarize_categorical(std::span<const std::string> labels,
                                         const std::vector<std::string>& categories) {
  if (labels.empty()) throw PreconditionError("cannot summarize an empty list of imputations");
  CategoricalSummary s;
  s.categories = categories;
  s.votes.assign(categories.size(), 0);
  for (const auto& l : labels) {
    const auto it = std::find(categories.begin(), categories.end(), l);
    if (it == categories.end()) throw PreconditionError("label '" + l + "' is not a known category");
    ++s.votes[static_cast<std::size_t>(it - categories.begin())];
  }
  std::vector<std::size_t> ranked = s.votes;
  std::sort(ranked.begin(), ranked.end(), std::greater<>());
  const std::size_t top = ranked.front();
  const std::size_t second = ranked.size() > 1 ? ranked[1] : 0;
  if (top != second || ranked.size() == 1) {
    s.winner = categories[static_cast<std::size_t>(
        std::find(s.votes.begin(), s.votes.end(), top) - s.votes.begin())];
    s.margin = top - second;
  }
  return s;
}

PooledCellSummary summarize_cell(const std::vector<CellValue>& values,
                                 const std::vector<std::string>& categories) {
  if (values.empty()) throw PreconditionError("cannot summarize an empty list of imputations");
  const bool numeric = std::holds_alternative<double>(values.front());
  PooledCellSummary out;
  out.m = values.size();
  if (numeric) {
    std::vector<double> nums;
    for (const auto& v : values) {
      if (!std::holds_alternative<double>(v)) throw PreconditionError("imputations mix numbers and labels");
      nums.push_back(std::get<double>(v));
    }
    out.body = summarize_continuous(nums);
  } else {
    std::vector<std::string> labels;
    for (const auto& v : values) {
      if (!std::holds_alternative<std::string>(v)) throw PreconditionError("imputations mix numbers and labels");
      labels.push_back(std::get<std::string>(v));
    }
    auto order = categories;
    if (order.empty()) {
      for (const auto& l : labels) {
        if (std::find(order.begin(), order.end(), l) == order.end()) order.push_back(l);
      }
    }
    out.body = summarize_categorical(labels, order);
  }
  return out;
}

std::vector<PooledCellSummary> pool_set(const ImputationSet& set) {
  if (set.completed.empty()) throw PreconditionError("imputation set has no copies");
  const auto& schema = set.completed.front().schema();
  std::vector<PooledCellSummary> out;
  for (std::size_t i = 0; i < set.cells.size(); ++i) {
    const auto& spec = schema.columns.at(set.cells[i].column);
    PooledCellSummary s;
    s.cell = set.cells[i];
    s.m = set.values[i].size();
    if (spec.categorical()) {
      std::vector<std::string> labels;
      for (double v : set.values[i]) labels.push_back(spec.categories.at(static_cast<std::size_t>(v)));
      s.body = summarize_categorical(labels, spec.categories);
    } else {
      s.body = summarize_continuous(set.values[i]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string format_summary(const PooledCellSummary& s) {
  if (s.continuous()) {
    const auto& n = s.numbers();
    return format_1dp(n.median) + "(" + format_1dp(n.p25) + "," + format_1dp(n.p75) + ")";
  }
  std::vector<std::string> parts;
  for (auto v : s.votes().votes) parts.push_back(std::to_string(v));
  return join(parts, " - ");
}

json to_json(const PooledCellSummary& s, const Schema& schema) {
  json j{{"row", s.cell.row}, {"column", schema.columns.at(s.cell.column).name}, {"m", s.m},
         {"text", format_summary(s)}};
  if (s.continuous()) {
    const auto& n = s.numbers();
    j["kind"] = "continuous";
    j["mean"] = n.mean;
    j["median"] = n.median;
    j["p25"] = n.p25;
    j["p75"] = n.p75;
    j["between_variance"] = n.between_variance;
    j["rubin_between"] = n.rubin_between;
    j["values"] = n.values;
  } else {
    const auto& c = s.votes();
    j["kind"] = "categorical";
    json votes = json::object();
    for (std::size_t i = 0; i < c.categories.size(); ++i) votes[c.categories[i]] = c.votes[i];
    j["categories"] = c.categories;
    j["votes"] = std::move(votes);
    j["winner"] = c.winner ? json(*c.winner) : json("tie");
    j["margin"] = c.margin;
  }
  return j;
}

json to_json(const std::vector<PooledCellSummary>& list, const Schema& schema) {
  json arr = json::array();
  for (const auto& s : list) arr.push_back(to_json(s, schema));
  return arr;
}

namespace {

std::optional<double> median_of(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, 0.5);
}

bool same_outcome(const PooledCellSummary& a, const PooledCellSummary& b) {
  if (a.continuous() != b.continuous()) return false;
  if (a.continuous()) return a.numbers().median == b.numbers().median;
  return a.votes().winner == b.votes().winner;
}

void finish_metrics(MethodMetrics& m, std::size_t continuous, std::size_t categorical,
                    std::vector<double> errors) {
  if (continuous > 0) {
    m.iqr_coverage = static_cast<double>(m.covered) / static_cast<double>(continuous);
    m.median_abs_error = median_of(std::move(errors));
  }
  if (categorical > 0) {
    m.winner_accuracy = static_cast<double>(m.correct) / static_cast<double>(categorical);
  }
}

void score(MethodMetrics& m, std::vector<double>& errors, const PooledCellSummary& s,
           const ColumnSpec& spec, double original) {
  if (s.continuous()) {
    const auto& n = s.numbers();
    if (original >= n.p25 && original <= n.p75) ++m.covered;
    errors.push_back(std::abs(n.median - original));
  } else {
    const auto& w = s.votes().winner;
    if (w && *w == spec.categories.at(static_cast<std::size_t>(original))) ++m.correct;
  }
}

}  // namespace

EvaluationReport compare(const GroundTruth& gt, const ImputationSet& a, const ImputationSet& b,
                         std::string label_a, std::string label_b) {
  if (a.completed.empty() || b.completed.empty()) throw PreconditionError("imputation set has no copies");
  if (a.completed.front().schema() != b.completed.front().schema()) {
    throw PreconditionError("imputation sets have different schemas");
  }
  std::vector<CellRef> truth_cells;
  for (const auto& e : gt.entries) truth_cells.push_back(e.cell);
  std::sort(truth_cells.begin(), truth_cells.end());
  if (truth_cells != a.cells || truth_cells != b.cells) {
    throw PreconditionError("imputation sets do not cover exactly the ground-truth cells");
  }

  EvaluationReport r;
  r.label_a = std::move(label_a);
  r.label_b = std::move(label_b);
  r.schema = a.completed.front().schema();
  const auto pooled_a = pool_set(a);
  const auto pooled_b = pool_set(b);
  std::vector<double> errors_a, errors_b;
  for (const auto& e : gt.entries) {
    const auto ia = *a.find(e.cell);
    const auto ib = *b.find(e.cell);
    ReportRow row{e.cell, e.value, pooled_a[ia], pooled_b[ib]};
    const auto& spec = r.schema.columns.at(e.cell.column);
    (spec.categorical() ? r.categorical_cells : r.continuous_cells) += 1;
    score(r.metrics_a, errors_a, row.a, spec, e.value);
    score(r.metrics_b, errors_b, row.b, spec, e.value);
    if (same_outcome(row.a, row.b)) ++r.agreement;
    r.rows.push_back(std::move(row));
  }
  finish_metrics(r.metrics_a, r.continuous_cells, r.categorical_cells, std::move(errors_a));
  finish_metrics(r.metrics_b, r.continuous_cells, r.categorical_cells, std::move(errors_b));
  r.agreement_rate = r.rows.empty() ? 0.0 : static_cast<double>(r.agreement) / static_cast<double>(r.rows.size());
  return r;
}

ReportFormat report_format_from_string(std::string_view text) {
  if (text == "json") return ReportFormat::json;
  if (text == "md") return ReportFormat::md;
  if (text == "txt") return ReportFormat::txt;
  throw ConfigError("format must be json, md or txt, got '" + std::string(text) + "'");
}

namespace {

json metrics_json(const MethodMetrics& m) {
  json j = json::object();
  if (m.iqr_coverage) {
    j["iqr_coverage"] = *m.iqr_coverage;
    j["covered"] = m.covered;
  }
  if (m.median_abs_error) j["median_abs_error"] = *m.median_abs_error;
  if (m.winner_accuracy) {
    j["winner_accuracy"] = *m.winner_accuracy;
    j["correct"] = m.correct;
  }
  return j;
}

std::string original_text(const ColumnSpec& spec, double v) {
  return spec.categorical() ? spec.categories.at(static_cast<std::size_t>(v)) : format_number(v);
}

struct Table {
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> body;
};

// Rows grouped by column, columns in order of first appearance.
std::vector<Table> build_tables(const EvaluationReport& r) {
  std::vector<std::size_t> order;
  for (const auto& row : r.rows) {
    if (std::find(order.begin(), order.end(), row.cell.column) == order.end()) order.push_back(row.cell.column);
  }
  std::vector<Table> tables;
  for (auto c : order) {
    const auto& spec = r.schema.columns[c];
    Table t;
    if (spec.categorical()) {
      const auto cats = "(" + join(spec.categories, " - ") + ")";
      t.title = spec.name + ": votes per category";
      t.header = {"Original", r.label_a + " " + cats, r.label_b + " " + cats};
    } else {
      t.title = spec.name + ": median(p25,p75) of imputations";
      t.header = {"Original", r.label_a, r.label_b};
    }
    for (const auto& row : r.rows) {
      if (row.cell.column != c) continue;
      t.body.push_back({original_text(spec, row.original), format_summary(row.a), format_summary(row.b)});
    }
    tables.push_back(std::move(t));
  }
  return tables;
}

std::string percent(double share) { return fmt::format("{:.0f}%", share * 100.0); }

std::vector<std::string> metric_lines(const EvaluationReport& r) {
  std::vector<std::string> lines;
  const auto& a = r.metrics_a;
  const auto& b = r.metrics_b;
  if (r.continuous_cells > 0) {
    lines.push_back(fmt::format("IQR coverage: {} {} ({}/{}), {} {} ({}/{})", r.label_a,
                                percent(*a.iqr_coverage), a.covered, r.continuous_cells, r.label_b,
                                percent(*b.iqr_coverage), b.covered, r.continuous_cells));
    lines.push_back(fmt::format("Median absolute error of medians: {} {}, {} {}", r.label_a,
                                format_1dp(*a.median_abs_error), r.label_b, format_1dp(*b.median_abs_error)));
  }
  if (r.categorical_cells > 0) {
    lines.push_back(fmt::format("Winner accuracy: {} {} ({}/{}), {} {} ({}/{})", r.label_a,
                                percent(*a.winner_accuracy), a.correct, r.categorical_cells, r.label_b,
                                percent(*b.winner_accuracy), b.correct, r.categorical_cells));
  }
  lines.push_back(fmt::format("Agreement: {}/{} cells", r.agreement, r.rows.size()));
  return lines;
}

std::string render_txt(const EvaluationReport& r) {
  std::ostringstream out;
  bool first = true;
  for (const auto& t : build_tables(r)) {
    if (!first) out << '\n';
    first = false;
    std::vector<std::size_t> width(t.header.size(), 0);
    for (std::size_t i = 0; i < t.header.size(); ++i) width[i] = t.header[i].size();
    for (const auto& row : t.body) {
      for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    auto emit = [&](const std::vector<std::string>& cells) {
      std::string line;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        line += cells[i];
        if (i + 1 < cells.size()) line += std::string(width[i] - cells[i].size() + 2, ' ');
      }
      out << line << '\n';
    };
    out << t.title << '\n';
    emit(t.header);
    for (const auto& row : t.body) emit(row);
  }
  out << '\n';
  for (const auto& l : metric_lines(r)) out << l << '\n';
  return out.str();
}

std::string render_md(const EvaluationReport& r) {
  std::ostringstream out;
  for (const auto& t : build_tables(r)) {
    out << "### " << t.title << "\n\n";
    out << "| " << join(t.header, " | ") << " |\n";
    out << "|";
    for (std::size_t i = 0; i < t.header.size(); ++i) out << "---|";
    out << '\n';
    for (const auto& row : t.body) out << "| " << join(row, " | ") << " |\n";
    out << '\n';
  }
  for (const auto& l : metric_lines(r)) out << "- " << l << '\n';
  return out.str();
}

}  // namespace

json to_json(const EvaluationReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    const auto& spec = r.schema.columns.at(row.cell.column);
    json original = spec.categorical() ? json(spec.categories.at(static_cast<std::size_t>(row.original)))
                                       : json(row.original);
    rows.push_back({{"row", row.cell.row},
                    {"column", spec.name},
                    {"original", std::move(original)},
                    {"a", to_json(row.a, r.schema)},
                    {"b", to_json(row.b, r.schema)}});
  }
  return {{"labels", {r.label_a, r.label_b}},
          {"rows", std::move(rows)},
          {"continuous_cells", r.continuous_cells},
          {"categorical_cells", r.categorical_cells},
          {"metrics", {{"a", metrics_json(r.metrics_a)}, {"b", metrics_json(r.metrics_b)}}},
          {"agreement", r.agreement},
          {"agreement_rate", r.agreement_rate}};
}

std::string render_report(const EvaluationReport& r, ReportFormat format) {
  switch (format) {
    case ReportFormat::json:
      return to_json(r).dump(2) + "\n";
    case ReportFormat::md:
      return render_md(r);
    case ReportFormat::txt:
      return render_txt(r);
  }
  return {};
}

}  // namespace crowdimpute
