#include "crowdimpute/questionnaire.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "crowdimpute/error.hpp"
#include "crowdimpute/text.hpp"

namespace crowdimpute {

using nlohmann::json;

AnswerConstraint AnswerConstraint::numeric(double lo, double hi) {
  AnswerConstraint c;
  c.kind = ConstraintKind::numeric_range;
  c.lo = lo;
  c.hi = hi;
  c.hint = "valid range " + format_number(lo) + "–" + format_number(hi);
  c.validate();
  return c;
}

AnswerConstraint AnswerConstraint::choice(std::vector<std::string> choices) {
  AnswerConstraint c;
  c.kind = ConstraintKind::categorical_choice;
  c.choices = std::move(choices);
  c.hint = "choose one of " + join(c.choices, ", ");
  c.validate();
  return c;
}

void AnswerConstraint::validate() const {
  if (kind == ConstraintKind::numeric_range) {
    if (!(lo < hi)) throw PreconditionError("numeric constraint needs lo < hi");
  } else if (choices.size() < 2) {
    throw PreconditionError("choice constraint needs at least 2 choices");
  }
}

AnswerConstraint default_constraint(const SummaryStats& stats, std::size_t column) {
  const auto& spec = stats.schema.columns.at(column);
  if (spec.categorical()) return AnswerConstraint::choice(spec.categories);
  if (spec.valid_range) return AnswerConstraint::numeric(spec.valid_range->lo, spec.valid_range->hi);
  const auto& cs = stats.columns.at(column);
  if (cs.flagged || !(cs.min < cs.max)) {
    throw PreconditionError("column '" + spec.name + "' has no usable range for a constraint");
  }
  return AnswerConstraint::numeric(cs.min, cs.max);
}

const Question* Questionnaire::find_question(std::string_view qid) const {
  for (const auto& q : questions) {
    if (q.id == qid) return &q;
  }
  return nullptr;
}

void Questionnaire::validate() const {
  if (questions.empty() || questions.size() > kMaxQuestionsPerQuestionnaire) {
    throw PreconditionError("questionnaire '" + id + "' must hold 1 to 10 questions");
  }
  if (k < 1) throw PreconditionError("questionnaire '" + id + "' needs k >= 1");
  for (const auto& q : questions) q.constraint.validate();
}

namespace {

std::string with_unit(const ColumnSpec& spec, const std::string& value) {
  return spec.unit.empty() ? value : value + " " + spec.unit;
}

std::string value_1dp(const ColumnSpec& spec, double v) { return with_unit(spec, format_1dp(v)); }

std::string strata_bullet(const SummaryStats& s, const StratifiedMeans& st) {
  const auto& by = s.schema.columns[st.by];
  const auto& target = s.schema.columns[st.target];
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < st.strata.size(); ++i) {
    const auto& b = st.strata[i];
    std::string where;
    if (st.strata.size() == 1) {
      where = "for " + by.name + " from " + value_1dp(by, b.lo) + " to " + value_1dp(by, b.hi);
    } else if (i == 0) {
      where = "for " + by.name + " up to " + value_1dp(by, b.hi);
    } else if (i + 1 == st.strata.size()) {
      where = "for " + by.name + " above " + value_1dp(by, b.lo);
    } else {
      where = "for " + by.name + " between " + value_1dp(by, b.lo) + " and " + value_1dp(by, b.hi);
    }
    parts.push_back(where + ", average " + target.name + " is " + value_1dp(target, b.stat.mean));
  }
  auto text = join(parts, "; ");
  text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  return text;
}

std::string grouped_bullet(const SummaryStats& s, const GroupedMeans& g) {
  const auto& by = s.schema.columns[g.by];
  const auto& target = s.schema.columns[g.target];
  std::vector<std::string> parts;
  for (std::size_t k = 0; k < g.groups.size(); ++k) {
    if (g.groups[k].count == 0) continue;
    parts.push_back(value_1dp(target, g.groups[k].mean) + " for " + by.categories[k]);
  }
  return "By " + by.name + ", " + target.name + " averages at " + join_phrase(parts);
}

BoxGroup box_group(std::string label, std::vector<double> values) {
  std::sort(values.begin(), values.end());
  BoxGroup g;
  g.label = std::move(label);
  g.count = values.size();
  if (values.empty()) return g;
  g.min = values.front();
  g.max = values.back();
  g.p25 = quantile_sorted(values, 0.25);
  g.median = quantile_sorted(values, 0.5);
  g.p75 = quantile_sorted(values, 0.75);
  return g;
}

// Box plot of continuous column `y` grouped by categorical column `x`.
PlotSpec box_plot(const Dataset& d, std::size_t x, std::size_t y) {
  PlotSpec p;
  p.kind = PlotKind::box;
  p.x_column = d.column(x).name;
  p.y_column = d.column(y).name;
  p.caption = "Box plot of " + p.y_column + " by " + p.x_column;
  const auto& cats = d.column(x).categories;
  std::vector<std::vector<double>> members(cats.size());
  for (std::size_t r = 0; r < d.rows(); ++r) {
    if (d.missing(r, x) || d.missing(r, y)) continue;
    members[static_cast<std::size_t>(d.value(r, x))].push_back(d.value(r, y));
  }
  for (std::size_t k = 0; k < cats.size(); ++k) p.groups.push_back(box_group(cats[k], members[k]));
  return p;
}

PlotSpec scatter_plot(const Dataset& d, std::size_t x, std::size_t y) {
  PlotSpec p;
  p.kind = PlotKind::scatter;
  p.x_column = d.column(x).name;
  p.y_column = d.column(y).name;
  p.caption = "Scatter plot of " + p.y_column + " against " + p.x_column;
  for (std::size_t r = 0; r < d.rows(); ++r) {
    if (d.missing(r, x) || d.missing(r, y)) continue;
    p.points.emplace_back(d.value(r, x), d.value(r, y));
  }
  return p;
}

std::string percent(double share) { return fmt::format("{:.0f}%", share * 100.0); }

}  // namespace

Intro build_intro(const Dataset& d, const SummaryStats& s, std::string_view target,
                  const IntroOptions& options) {
  if (options.top_m == 0) throw PreconditionError("build_intro: top_m must be at least 1");
  const auto t = s.index_of(target);
  const auto& tspec = s.schema.columns[t];
  const auto ranked = correlation_rank(s, target);
  if (ranked.empty()) {
    throw PreconditionError("build_intro: no associations computed for '" + tspec.name + "'");
  }
  const std::size_t m = std::min(options.top_m, ranked.size());

  std::vector<std::size_t> top_cont;
  std::vector<std::size_t> top_cat;
  for (std::size_t i = 0; i < m; ++i) {
    const auto c = s.index_of(ranked[i].column);
    (s.schema.columns[c].categorical() ? top_cat : top_cont).push_back(c);
  }

  std::vector<std::string> bullets;
  const auto& ts = s.columns[t];
  if (!tspec.categorical()) {
    std::vector<std::string> up;
    std::vector<std::string> down;
    for (auto c : top_cont) {
      const double r = s.association[t][c].value_or(0.0);
      (r >= 0 ? up : down).push_back(s.schema.columns[c].name);
    }
    if (!up.empty()) bullets.push_back(tspec.name + " increases with " + join_phrase(up));
    if (!down.empty()) bullets.push_back(tspec.name + " decreases with " + join_phrase(down));
    bullets.push_back("Minimum and maximum " + tspec.name + " in our case is " +
                      value_1dp(tspec, ts.min) + " and " + value_1dp(tspec, ts.max));
    for (auto c : top_cont) {
      if (const auto* st = s.stratified_means(t, c)) bullets.push_back(strata_bullet(s, *st));
    }
    for (auto c : top_cat) {
      if (const auto* g = s.grouped_means(t, c)) bullets.push_back(grouped_bullet(s, *g));
    }
  } else {
    std::vector<std::string> shares;
    for (std::size_t k = 0; k < tspec.categories.size(); ++k) {
      shares.push_back(percent(ts.proportions[k]) + " " + tspec.categories[k]);
    }
    bullets.push_back("We have about " + join_phrase(shares));
    for (auto c : top_cont) {
      if (const auto* g = s.grouped_means(c, t)) bullets.push_back(grouped_bullet(s, *g));
    }
  }

  std::string opening = options.context_sentence;
  if (opening.empty()) {
    std::vector<std::string> names;
    for (std::size_t c = 0; c < s.schema.columns.size(); ++c) {
      if (d.id_column_index() != c) names.push_back(s.schema.columns[c].name);
    }
    opening = "This data has " + std::to_string(s.rows) + " records with information on " +
              join_phrase(names) + ".";
  }

  std::string body = opening + " We know that:\n";
  for (const auto& b : bullets) body += "- " + b + "\n";

  Intro intro;
  if (options.prior_blurb && options.placement == BlurbPlacement::start) {
    intro.text = *options.prior_blurb + "\n" + body;
  } else if (options.prior_blurb) {
    intro.text = body + *options.prior_blurb + "\n";
  } else {
    intro.text = body;
  }

  if (!tspec.categorical()) {
    for (auto c : top_cont) intro.plots.push_back(scatter_plot(d, c, t));
    for (auto c : top_cat) intro.plots.push_back(box_plot(d, c, t));
  } else {
    for (auto c : top_cont) intro.plots.push_back(box_plot(d, t, c));
  }
  return intro;
}

PromptTemplates PromptTemplates::defaults() {
  return {
      "We have a data record with missing {target} information.{given} What do you think is the "
      "most probable {target}?",
      "What is the {target}{given_clause}?",
  };
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open template file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto head = trim(text);
  if (!head.empty() && head.front() == '{') {
    try {
      const auto j = json::parse(text);
      auto t = defaults();
      t.continuous = j.value("continuous", t.continuous);
      t.categorical = j.value("categorical", t.categorical);
      return t;
    } catch (const json::exception& e) {
      throw ConfigError("template file " + path.string() + ": " + e.what());
    }
  }
  return {std::string(head), std::string(head)};
}

std::string question_id(const Dataset& d, CellRef cell) {
  return "r" + std::to_string(cell.row) + "-" + d.column(cell.column).name;
}

Question render_question(const Dataset& d, CellRef cell, const AnswerConstraint& constraint,
                         std::string_view tmpl) {
  if (cell.row >= d.rows() || cell.column >= d.cols()) {
    throw PreconditionError("render_question: cell out of bounds");
  }
  if (!d.missing(cell.row, cell.column)) {
    throw PreconditionError("render_question: cell (" + std::to_string(cell.row) + ", " +
                            d.column(cell.column).name + ") is not missing");
  }
  constraint.validate();
  const auto& tspec = d.column(cell.column);

  std::vector<ContextField> all;
  std::vector<std::string> phrases;
  for (std::size_t c = 0; c < d.cols(); ++c) {
    if (c == cell.column || d.id_column_index() == c || d.missing(cell.row, c)) continue;
    const auto& spec = d.column(c);
    all.push_back({spec.name, d.format_cell(cell.row, c)});
    phrases.push_back(spec.name + " is " + with_unit(spec, all.back().value));
  }
  const auto context = join_phrase(phrases);

  Question q;
  q.id = question_id(d, cell);
  q.target = cell;
  q.target_column = tspec.name;
  q.constraint = constraint;

  bool uses_all_context = false;
  std::vector<std::string> referenced;
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] != '{') {
      out += tmpl[i++];
      continue;
    }
    const auto close = tmpl.find('}', i);
    if (close == std::string_view::npos) throw ConfigError("template: unterminated placeholder");
    const auto name = tmpl.substr(i + 1, close - i - 1);
    i = close + 1;
    if (name == "target") {
      out += tspec.name;
    } else if (name == "hint") {
      out += constraint.hint;
    } else if (name == "context") {
      out += context;
      uses_all_context = true;
    } else if (name == "given") {
      if (!context.empty()) out += " Given that " + context + ".";
      uses_all_context = true;
    } else if (name == "given_clause") {
      if (!context.empty()) out += " given that " + context;
      uses_all_context = true;
    } else if (name.starts_with("col:") || name.starts_with("col?:")) {
      const bool optional = name.starts_with("col?:");
      const auto col_name = name.substr(optional ? 5 : 4);
      const auto c = d.schema().find(col_name);
      if (!c) throw ConfigError("template refers to unknown column '" + std::string(col_name) + "'");
      if (*c == cell.column) throw ConfigError("template cannot show the target column");
      if (d.missing(cell.row, *c)) {
        if (!optional) {
          throw PreconditionError("template needs '" + std::string(col_name) + "' but row " +
                                  std::to_string(cell.row) + " is missing it (use {col?:" +
                                  std::string(col_name) + "} to omit)");
        }
        continue;
      }
      out += with_unit(d.column(*c), d.format_cell(cell.row, *c));
      referenced.emplace_back(col_name);
    } else {
      throw ConfigError("template: unknown placeholder {" + std::string(name) + "}");
    }
  }
  q.prompt = std::move(out);

  for (auto& f : all) {
    if (uses_all_context || std::find(referenced.begin(), referenced.end(), f.column) != referenced.end()) {
      q.context.push_back(std::move(f));
    }
  }
  return q;
}

std::vector<Question> render_questions(const Dataset& d, const SummaryStats& s,
                                       std::string_view target,
                                       const PromptTemplates& templates) {
  const auto t = d.column_index(target);
  const auto constraint = default_constraint(s, t);
  const auto& tmpl = templates.for_column(d.column(t));
  std::vector<Question> out;
  for (std::size_t r = 0; r < d.rows(); ++r) {
    if (d.missing(r, t)) out.push_back(render_question(d, {r, t}, constraint, tmpl));
  }
  return out;
}

std::vector<Questionnaire> batch(const std::vector<Question>& questions, const Intro& intro,
                                 std::size_t k, const std::optional<std::string>& prior_blurb,
                                 std::string_view id_prefix) {
  if (questions.empty()) throw PreconditionError("batch: no questions");
  if (k < 1) throw PreconditionError("batch: k must be at least 1");
  std::vector<Questionnaire> out;
  for (std::size_t start = 0; start < questions.size(); start += kMaxQuestionsPerQuestionnaire) {
    Questionnaire qn;
    qn.id = fmt::format("{}-{:03}", id_prefix, out.size() + 1);
    qn.intro = intro.text;
    qn.prior_blurb = prior_blurb;
    qn.plots = intro.plots;
    qn.k = k;
    const auto stop = std::min(questions.size(), start + kMaxQuestionsPerQuestionnaire);
    qn.questions.assign(questions.begin() + static_cast<std::ptrdiff_t>(start),
                        questions.begin() + static_cast<std::ptrdiff_t>(stop));
    out.push_back(std::move(qn));
  }
  return out;
}

json to_json(const AnswerConstraint& c) {
  if (c.kind == ConstraintKind::numeric_range) {
    return {{"kind", "numeric_range"}, {"lo", c.lo}, {"hi", c.hi}, {"hint", c.hint}};
  }
  return {{"kind", "categorical_choice"}, {"choices", c.choices}, {"hint", c.hint}};
}

AnswerConstraint constraint_from_json(const json& j) {
  AnswerConstraint c;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "numeric_range") {
    c.kind = ConstraintKind::numeric_range;
    c.lo = j.at("lo").get<double>();
    c.hi = j.at("hi").get<double>();
  } else if (kind == "categorical_choice") {
    c.kind = ConstraintKind::categorical_choice;
    c.choices = j.at("choices").get<std::vector<std::string>>();
  } else {
    throw ConfigError("unknown constraint kind '" + kind + "'");
  }
  c.hint = j.value("hint", std::string());
  c.validate();
  return c;
}

json to_json(const Questionnaire& q) {
  json plots = json::array();
  for (const auto& p : q.plots) {
    json jp{{"kind", p.kind == PlotKind::scatter ? "scatter" : "box"},
            {"x", p.x_column},
            {"y", p.y_column},
            {"caption", p.caption}};
    if (p.kind == PlotKind::scatter) {
      json pts = json::array();
      for (const auto& [x, y] : p.points) pts.push_back({x, y});
      jp["points"] = std::move(pts);
    } else {
      json groups = json::array();
      for (const auto& g : p.groups) {
        groups.push_back({{"label", g.label}, {"count", g.count}, {"min", g.min}, {"p25", g.p25},
                          {"median", g.median}, {"p75", g.p75}, {"max", g.max}});
      }
      jp["groups"] = std::move(groups);
    }
    plots.push_back(std::move(jp));
  }
  json questions = json::array();
  for (const auto& qu : q.questions) {
    json ctx = json::array();
    for (const auto& f : qu.context) ctx.push_back({{"column", f.column}, {"value", f.value}});
    questions.push_back({{"id", qu.id},
                         {"row", qu.target.row},
                         {"column", qu.target_column},
                         {"column_index", qu.target.column},
                         {"prompt", qu.prompt},
                         {"constraint", to_json(qu.constraint)},
                         {"context", std::move(ctx)}});
  }
  return {{"id", q.id},
          {"intro", q.intro},
          {"prior_blurb", q.prior_blurb ? json(*q.prior_blurb) : json(nullptr)},
          {"plots", std::move(plots)},
          {"questions", std::move(questions)},
          {"k", q.k}};
}

Questionnaire questionnaire_from_json(const json& j) {
  Questionnaire q;
  try {
    q.id = j.at("id").get<std::string>();
    q.intro = j.at("intro").get<std::string>();
    if (j.contains("prior_blurb") && !j["prior_blurb"].is_null()) {
      q.prior_blurb = j["prior_blurb"].get<std::string>();
    }
    q.k = j.at("k").get<std::size_t>();
    for (const auto& jp : j.at("plots")) {
      PlotSpec p;
      p.kind = jp.at("kind").get<std::string>() == "box" ? PlotKind::box : PlotKind::scatter;
      p.x_column = jp.at("x").get<std::string>();
      p.y_column = jp.at("y").get<std::string>();
      p.caption = jp.value("caption", std::string());
      if (jp.contains("points")) {
        for (const auto& pt : jp["points"]) p.points.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
      }
      if (jp.contains("groups")) {
        for (const auto& jg : jp["groups"]) {
          p.groups.push_back({jg.at("label").get<std::string>(), jg.at("count").get<std::size_t>(),
                              jg.at("min").get<double>(), jg.at("p25").get<double>(),
                              jg.at("median").get<double>(), jg.at("p75").get<double>(),
                              jg.at("max").get<double>()});
        }
      }
      q.plots.push_back(std::move(p));
    }
    for (const auto& jq : j.at("questions")) {
      Question qu;
      qu.id = jq.at("id").get<std::string>();
      qu.target.row = jq.at("row").get<std::size_t>();
      qu.target.column = jq.at("column_index").get<std::size_t>();
      qu.target_column = jq.at("column").get<std::string>();
      qu.prompt = jq.at("prompt").get<std::string>();
      qu.constraint = constraint_from_json(jq.at("constraint"));
      for (const auto& f : jq.at("context")) {
        qu.context.push_back({f.at("column").get<std::string>(), f.at("value").get<std::string>()});
      }
      q.questions.push_back(std::move(qu));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed questionnaire: ") + e.what());
  }
  q.validate();
  return q;
}

void save_questionnaire(const std::filesystem::path& path, const Questionnaire& q) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(q).dump(2) << '\n';
}

Questionnaire load_questionnaire(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open questionnaire " + path.string());
  try {
    return questionnaire_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigError("questionnaire " + path.string() + ": " + e.what());
  }
}

std::vector<Questionnaire> load_questionnaires(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("questionnaire directory " + dir.string() + " does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Questionnaire> out;
  for (const auto& f : files) out.push_back(load_questionnaire(f));
  return out;
}

}  // namespace crowdimpute
