#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "crowdimpute/dataset.hpp"
#include "crowdimpute/stats.hpp"

namespace crowdimpute {

/// Largest number of questions one questionnaire may carry.
inline constexpr std::size_t kMaxQuestionsPerQuestionnaire = 10;

enum class ConstraintKind { numeric_range, categorical_choice };

struct AnswerConstraint {
  ConstraintKind kind = ConstraintKind::numeric_range;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::string> choices;
  std::string hint;

  static AnswerConstraint numeric(double lo, double hi);
  static AnswerConstraint choice(std::vector<std::string> choices);

  void validate() const;
  bool operator==(const AnswerConstraint&) const = default;
};

/// Range from the column's valid_range, else its observed [min, max]; the
/// category list for categorical columns.
AnswerConstraint default_constraint(const SummaryStats& stats, std::size_t column);

struct ContextField {
  std::string column;
  std::string value;  ///< rendered text, unit excluded

  bool operator==(const ContextField&) const = default;
};

struct Question {
  std::string id;
  CellRef target;
  std::string target_column;
  std::string prompt;
  AnswerConstraint constraint;
  std::vector<ContextField> context;

  bool operator==(const Question&) const = default;
};

enum class PlotKind { scatter, box };

struct BoxGroup {
  std::string label;
  std::size_t count = 0;
  double min = 0.0;
  double p25 = 0.0;
  double median = 0.0;
  double p75 = 0.0;
  double max = 0.0;

  bool operator==(const BoxGroup&) const = default;
};

/// Data payload for a client-rendered plot. Scatter plots carry (x, y)
/// points; box plots carry one five-number summary per category of x.
struct PlotSpec {
  PlotKind kind = PlotKind::scatter;
  std::string x_column;
  std::string y_column;
  std::vector<std::pair<double, double>> points;
  std::vector<BoxGroup> groups;
  std::string caption;

  bool operator==(const PlotSpec&) const = default;
};

struct Questionnaire {
  std::string id;
  std::string intro;
  std::optional<std::string> prior_blurb;
  std::vector<PlotSpec> plots;
  std::vector<Question> questions;
  std::size_t k = 1;

  std::size_t required_judgments() const { return questions.size() * k; }
  const Question* find_question(std::string_view id) const;
  void validate() const;

  bool operator==(const Questionnaire&) const = default;
};

enum class BlurbPlacement { end, start };

struct IntroOptions {
  std::size_t top_m = 3;
  std::optional<std::string> prior_blurb;
  BlurbPlacement placement = BlurbPlacement::end;
  /// Opening sentence; a generic one naming the columns is used when empty.
  std::string context_sentence;
};

struct Intro {
  std::string text;
  std::vector<PlotSpec> plots;
};

/// Survey introduction for imputing `target`: context sentence, then
/// plain-language bullets about the top-ranked attributes, then the optional
/// prior blurb. Numbers are shown with one decimal.
Intro build_intro(const Dataset& d, const SummaryStats& s, std::string_view target,
                  const IntroOptions& options = {});

/// Prompt templates with named placeholders:
///   {target}        target column name
///   {context}       "a is 1, b is 2 and c is 3" over observed context fields
///   {given}         " Given that <context>." or empty
///   {given_clause}  " given that <context>" or empty
///   {hint}          constraint hint text
///   {col:NAME}      value (and unit) of column NAME; error if it is missing
///   {col?:NAME}     same, but renders empty when NAME is missing
struct PromptTemplates {
  std::string continuous;
  std::string categorical;

  static PromptTemplates defaults();
  /// A JSON object {"continuous": ..., "categorical": ...} or plain text
  /// used for both kinds.
  static PromptTemplates load(const std::filesystem::path& path);
  const std::string& for_column(const ColumnSpec& spec) const {
    return spec.categorical() ? categorical : continuous;
  }
};

std::string question_id(const Dataset& d, CellRef cell);

/// One question for a missing cell. Missing and id columns never appear in
/// the context.
Question render_question(const Dataset& d, CellRef cell, const AnswerConstraint& constraint,
                         std::string_view tmpl);

/// One question per missing cell of `target`, in row order.
std::vector<Question> render_questions(const Dataset& d, const SummaryStats& s,
                                       std::string_view target,
                                       const PromptTemplates& templates = PromptTemplates::defaults());

/// Splits questions into questionnaires of at most ten, in input order. Ids
/// are "<prefix>-001", "<prefix>-002", ...
std::vector<Questionnaire> batch(const std::vector<Question>& questions, const Intro& intro,
                                 std::size_t k, const std::optional<std::string>& prior_blurb = {},
                                 std::string_view id_prefix = "q");

nlohmann::json to_json(const AnswerConstraint& c);
nlohmann::json to_json(const Questionnaire& q);
Questionnaire questionnaire_from_json(const nlohmann::json& j);
AnswerConstraint constraint_from_json(const nlohmann::json& j);

void save_questionnaire(const std::filesystem::path& path, const Questionnaire& q);
Questionnaire load_questionnaire(const std::filesystem::path& path);
/// All *.json questionnaires in `dir`, sorted by file name.
std::vector<Questionnaire> load_questionnaires(const std::filesystem::path& dir);

}  // namespace crowdimpute
