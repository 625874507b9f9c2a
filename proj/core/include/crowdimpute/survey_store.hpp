#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "crowdimpute/crowd.hpp"
#include "crowdimpute/questionnaire.hpp"

namespace crowdimpute {

struct Job {
  std::string id;
  std::vector<std::string> questionnaire_ids;
  std::size_t k = 30;
  std::int64_t created = 0;  ///< ms since epoch
};

nlohmann::json to_json(const Job& job);
Job job_from_json(const nlohmann::json& j);

struct Submission {
  std::string questionnaire_id;
  std::string worker_id;
  /// (question id, raw answer) pairs.
  std::vector<std::pair<std::string, std::string>> answers;
};

/// Parses {"worker_id": "...", "answers": {"<question id>": "<raw>" | number}}.
/// Throws PreconditionError when malformed.
Submission submission_from_json(std::string questionnaire_id, const nlohmann::json& body);

struct Outcome {
  std::string question_id;
  bool accepted = false;
  std::string reason;

  bool operator==(const Outcome&) const = default;
};

struct QuestionStatus {
  std::string questionnaire_id;
  std::string question_id;
  std::size_t accepted = 0;
  bool filled = false;

  bool operator==(const QuestionStatus&) const = default;
};

struct JobStatus {
  std::string job_id;
  std::size_t k = 0;
  std::vector<QuestionStatus> questions;
  std::size_t accepted_total = 0;
  std::size_t required_total = 0;
  double progress = 0.0;  ///< accepted_total / required_total

  bool operator==(const JobStatus&) const = default;
};

nlohmann::json to_json(const JobStatus& s);
nlohmann::json to_json(const std::vector<Outcome>& outcomes);

/// Judgment store behind the survey service. Every write goes through one
/// mutex: validate, check the worker and the k quota, append to the log,
/// then publish a fresh status snapshot. A question never holds more than k
/// accepted judgments and never an accepted judgment that violates its
/// constraint.
class SurveyStore {
 public:
  /// `log_path`, when set, receives one JSON line per judgment (accepted and
  /// rejected) and is flushed after every write.
  SurveyStore(Job job, std::vector<Questionnaire> questionnaires,
              std::optional<std::filesystem::path> log_path = std::nullopt);

  /// Opens a data directory: questionnaires/*.json, job.json (created when
  /// absent) and judgments.jsonl, which is replayed.
  static std::unique_ptr<SurveyStore> open(const std::filesystem::path& data_dir,
                                           std::optional<std::size_t> k_override = std::nullopt);

  SurveyStore(const SurveyStore&) = delete;
  SurveyStore& operator=(const SurveyStore&) = delete;

  const Job& job() const noexcept { return job_; }
  /// Null when unknown.
  const Questionnaire* questionnaire(std::string_view id) const;
  std::vector<std::string> questionnaire_ids() const;

  /// Throws NotFoundError for an unknown questionnaire and PreconditionError
  /// for a malformed submission (empty worker id, foreign question ids).
  std::vector<Outcome> submit(const Submission& s);

  JobStatus status() const;
  /// Throws NotFoundError when `job_id` is not this store's job.
  JobStatus status(std::string_view job_id) const;
  JudgmentSet judgments() const;

  /// Re-applies logged judgments (used on open).
  void replay(const std::vector<Judgment>& log);

 private:
  struct QuestionState {
    const Questionnaire* questionnaire = nullptr;
    const Question* question = nullptr;
    std::set<std::string> workers;
    std::size_t accepted = 0;
  };

  Outcome apply_locked(QuestionState& state, const std::string& worker, const std::string& raw);
  void publish_locked();
  void append_locked(const Judgment& j);

  Job job_;
  std::vector<Questionnaire> questionnaires_;
  std::map<std::string, QuestionState> questions_;
  std::vector<Judgment> log_;
  std::optional<std::ofstream> log_file_;
  mutable std::mutex write_mutex_;

  mutable std::shared_mutex snapshot_mutex_;
  std::shared_ptr<const JobStatus> snapshot_;
};

}  // namespace crowdimpute
