#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "crowdimpute/dataset.hpp"
#include "crowdimpute/questionnaire.hpp"
#include "crowdimpute/random.hpp"
#include "crowdimpute/stats.hpp"

namespace crowdimpute {

struct PersonaBias {
  /// Log-odds offset per category label.
  std::map<std::string, double> category_log_odds;
  /// Additive shift per continuous column, in the column's units.
  std::map<std::string, double> shift;
  /// Shift for columns not listed above, in units of the column's sd.
  double shift_sd = 0.0;

  double log_odds(const std::string& label) const;
  double shift_for(const std::string& column, double column_sd) const;
};

/// Simulated respondent. With probability `attention` it answers from the
/// survey statistics; otherwise it guesses.
struct Persona {
  std::string name;
  double attention = 1.0;
  double noise_sd_scale = 1.0;
  PersonaBias bias;
  bool respects_constraints = true;

  void validate() const;
};

struct WeightedPersona {
  Persona persona;
  double weight = 1.0;
};

using PersonaMix = std::vector<WeightedPersona>;

/// Shipped presets: "novice-unconstrained", "novice-constrained",
/// "experienced".
std::vector<Persona> persona_presets();
Persona persona_preset(std::string_view name);
PersonaMix single_persona(Persona p);

/// {"personas": [...], "mix": [{"persona": name, "weight": w}]}. Mix entries
/// may name presets or personas defined in the same file.
PersonaMix persona_mix_from_json(const nlohmann::json& j);
PersonaMix load_persona_mix(const std::filesystem::path& path);
nlohmann::json to_json(const Persona& p);

/// Probability of each choice for a categorical question, mixing the
/// attentive model (category shares + bias + context evidence) with the
/// inattentive one (softmax of bias alone).
std::vector<double> choice_probabilities(const Persona& p, const Question& q,
                                         const SummaryStats& stats);

/// Raw text answer of one respondent.
std::string answer(const Persona& p, const Question& q, const SummaryStats& stats, Rng& rng);

struct Judgment {
  std::string questionnaire_id;
  std::string question_id;
  std::string worker_id;
  std::string raw_answer;
  bool accepted = false;
  std::string reason;
  std::int64_t timestamp = 0;
  std::string persona;

  bool operator==(const Judgment&) const = default;
};

struct JudgmentSet {
  std::map<std::string, std::vector<Judgment>> by_question;

  void add(Judgment j) { by_question[j.question_id].push_back(std::move(j)); }
  std::vector<const Judgment*> accepted(const std::string& question_id) const;
  std::size_t accepted_count() const;
  std::size_t total_count() const;
  /// Merge another set; question ids must not overlap.
  void merge(JudgmentSet other);

  bool operator==(const JudgmentSet&) const = default;
};

struct CrowdOptions {
  /// Attempts per question are capped at cap_factor * k.
  std::size_t cap_factor = 10;
  std::size_t threads = 1;
};

/// Collects exactly k accepted judgments per question. Every attempt is a
/// fresh worker whose persona is drawn from the mix; rejected answers are
/// kept with accepted = false. Each question draws from its own stream split
/// from `seed`, so results do not depend on thread count.
JudgmentSet run_crowd(const Questionnaire& qn, const PersonaMix& mix, const SummaryStats& stats,
                      std::uint64_t seed, const CrowdOptions& options = {});

/// Copy of `d` with the observed values of a continuous column shifted by
/// `delta` and clamped to its valid range.
Dataset perturb_scenario(const Dataset& d, std::string_view column, double delta);

nlohmann::json to_json(const Judgment& j);
Judgment judgment_from_json(const nlohmann::json& j);
/// One judgment per line, questions in key order.
void write_jsonl(std::ostream& out, const JudgmentSet& set);
JudgmentSet read_jsonl(std::istream& in);
void save_judgments(const std::filesystem::path& path, const JudgmentSet& set);
JudgmentSet load_judgments(const std::filesystem::path& path);

}  // namespace crowdimpute
