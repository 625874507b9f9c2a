#include "crowdimpute/survey_store.hpp"

#include <algorithm>
#include <chrono>

#include <nlohmann/json.hpp>

#include "crowdimpute/error.hpp"
#include "crowdimpute/validation.hpp"

namespace crowdimpute {

using nlohmann::json;

namespace {

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace

json to_json(const Job& job) {
  return {{"id", job.id}, {"questionnaires", job.questionnaire_ids}, {"k", job.k}, {"created", job.created}};
}

Job job_from_json(const json& j) {
  Job job;
  try {
    job.id = j.at("id").get<std::string>();
    job.questionnaire_ids = j.at("questionnaires").get<std::vector<std::string>>();
    job.k = j.at("k").get<std::size_t>();
    job.created = j.value("created", std::int64_t{0});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed job file: ") + e.what());
  }
  if (job.k < 1) throw ConfigError("job k must be at least 1");
  return job;
}

Submission submission_from_json(std::string questionnaire_id, const json& body) {
  Submission s;
  s.questionnaire_id = std::move(questionnaire_id);
  if (!body.is_object()) throw PreconditionError("submission must be a JSON object");
  if (!body.contains("worker_id") || !body["worker_id"].is_string()) {
    throw PreconditionError("submission needs a string worker_id");
  }
  s.worker_id = body["worker_id"].get<std::string>();
  if (!body.contains("answers") || !body["answers"].is_object()) {
    throw PreconditionError("submission needs an answers object");
  }
  for (const auto& [qid, v] : body["answers"].items()) {
    if (v.is_string()) {
      s.answers.emplace_back(qid, v.get<std::string>());
    } else if (v.is_number()) {
      s.answers.emplace_back(qid, v.dump());
    } else {
      throw PreconditionError("answer for '" + qid + "' must be a string or number");
    }
  }
  return s;
}

json to_json(const JobStatus& s) {
  json qs = json::array();
  for (const auto& q : s.questions) {
    qs.push_back({{"questionnaire_id", q.questionnaire_id},
                  {"question_id", q.question_id},
                  {"accepted", q.accepted},
                  {"status", q.filled ? "filled" : "open"}});
  }
  return {{"job_id", s.job_id},
          {"k", s.k},
          {"questions", std::move(qs)},
          {"accepted_total", s.accepted_total},
          {"required_total", s.required_total},
          {"progress", s.progress}};
}

json to_json(const std::vector<Outcome>& outcomes) {
  json arr = json::array();
  for (const auto& o : outcomes) {
    json jo{{"question_id", o.question_id}, {"status", o.accepted ? "accepted" : "rejected"}};
    if (!o.accepted) jo["reason"] = o.reason;
    arr.push_back(std::move(jo));
  }
  return arr;
}

SurveyStore::SurveyStore(Job job, std::vector<Questionnaire> questionnaires,
                         std::optional<std::filesystem::path> log_path)
    : job_(std::move(job)), questionnaires_(std::move(questionnaires)) {
  if (job_.k < 1) throw ConfigError("job k must be at least 1");
  for (const auto& qn : questionnaires_) {
    qn.validate();
    for (const auto& q : qn.questions) {
      QuestionState st;
      st.questionnaire = &qn;
      st.question = &q;
      if (!questions_.emplace(q.id, std::move(st)).second) {
        throw ConfigError("question id '" + q.id + "' appears in more than one questionnaire");
      }
    }
  }
  if (log_path) {
    log_file_.emplace(*log_path, std::ios::app | std::ios::binary);
    if (!*log_file_) throw Error("cannot open judgment log " + log_path->string());
  }
  std::lock_guard lock(write_mutex_);
  publish_locked();
}

std::unique_ptr<SurveyStore> SurveyStore::open(const std::filesystem::path& data_dir,
                                               std::optional<std::size_t> k_override) {
  namespace fs = std::filesystem;
  auto questionnaires = load_questionnaires(data_dir / "questionnaires");
  if (questionnaires.empty()) throw ConfigError("no questionnaires under " + data_dir.string());

  const auto job_path = data_dir / "job.json";
  Job job;
  if (fs::exists(job_path)) {
    std::ifstream in(job_path);
    try {
      job = job_from_json(json::parse(in));
    } catch (const json::exception& e) {
      throw ConfigError("job file " + job_path.string() + ": " + e.what());
    }
  } else {
    job.id = "job-1";
    job.k = questionnaires.front().k;
    job.created = now_ms();
    for (const auto& qn : questionnaires) job.questionnaire_ids.push_back(qn.id);
  }
  if (k_override) job.k = *k_override;
  {
    std::ofstream out(job_path, std::ios::binary);
    out << to_json(job).dump(2) << '\n';
  }

  // Only questionnaires named by the job are served.
  std::vector<Questionnaire> served;
  for (auto& qn : questionnaires) {
    if (std::find(job.questionnaire_ids.begin(), job.questionnaire_ids.end(), qn.id) !=
        job.questionnaire_ids.end()) {
      served.push_back(std::move(qn));
    }
  }

  const auto log_path = data_dir / "judgments.jsonl";
  std::vector<Judgment> log;
  if (fs::exists(log_path)) {
    // File order is write order.
    std::ifstream in(log_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        log.push_back(judgment_from_json(json::parse(line)));
      } catch (const json::exception& e) {
        throw ConfigError("judgment log " + log_path.string() + ": " + e.what());
      }
    }
  }
  auto store = std::make_unique<SurveyStore>(std::move(job), std::move(served), std::nullopt);
  store->replay(log);
  store->log_file_.emplace(log_path, std::ios::app | std::ios::binary);
  if (!*store->log_file_) throw Error("cannot open judgment log " + log_path.string());
  return store;
}

const Questionnaire* SurveyStore::questionnaire(std::string_view id) const {
  for (const auto& qn : questionnaires_) {
    if (qn.id == id) return &qn;
  }
  return nullptr;
}

std::vector<std::string> SurveyStore::questionnaire_ids() const {
  std::vector<std::string> out;
  for (const auto& qn : questionnaires_) out.push_back(qn.id);
  return out;
}

Outcome SurveyStore::apply_locked(QuestionState& state, const std::string& worker,
                                  const std::string& raw) {
  const auto& q = *state.question;
  Judgment j;
  j.questionnaire_id = state.questionnaire->id;
  j.question_id = q.id;
  j.worker_id = worker;
  j.raw_answer = raw;
  j.timestamp = now_ms();

  if (state.workers.count(worker)) {
    j.reason = "duplicate worker";
  } else if (state.accepted >= job_.k) {
    j.reason = "filled";
  } else {
    const auto verdict = validate(raw, q.constraint);
    j.accepted = verdict.accepted;
    j.reason = verdict.reason;
  }
  // Reserve before the append so a failed write cannot overfill.
  if (j.accepted) {
    state.workers.insert(worker);
    ++state.accepted;
  }
  append_locked(j);
  return {q.id, j.accepted, j.reason};
}

std::vector<Outcome> SurveyStore::submit(const Submission& s) {
  const auto* qn = questionnaire(s.questionnaire_id);
  if (!qn) throw NotFoundError("unknown questionnaire '" + s.questionnaire_id + "'");
  if (s.worker_id.empty()) throw PreconditionError("worker_id must not be empty");
  for (const auto& [qid, _] : s.answers) {
    if (!qn->find_question(qid)) {
      throw PreconditionError("question '" + qid + "' is not part of questionnaire '" + qn->id + "'");
    }
  }

  std::vector<Outcome> outcomes;
  std::lock_guard lock(write_mutex_);
  // Outcomes follow the questionnaire's question order.
  for (const auto& q : qn->questions) {
    for (const auto& [qid, raw] : s.answers) {
      if (qid != q.id) continue;
      auto& state = questions_.at(qid);
      outcomes.push_back(apply_locked(state, s.worker_id, raw));
    }
  }
  publish_locked();
  return outcomes;
}

void SurveyStore::replay(const std::vector<Judgment>& log) {
  std::lock_guard lock(write_mutex_);
  for (const auto& j : log) {
    auto it = questions_.find(j.question_id);
    if (it == questions_.end()) throw ConfigError("judgment log names unknown question '" + j.question_id + "'");
    auto& st = it->second;
    if (j.accepted) {
      if (!validate(j.raw_answer, st.question->constraint).accepted) {
        throw ConfigError("judgment log holds an invalid accepted answer for '" + j.question_id + "'");
      }
      if (st.workers.count(j.worker_id) || st.accepted >= job_.k) {
        throw ConfigError("judgment log overfills '" + j.question_id + "'");
      }
      st.workers.insert(j.worker_id);
      ++st.accepted;
    }
    log_.push_back(j);
  }
  publish_locked();
}

void SurveyStore::append_locked(const Judgment& j) {
  if (log_file_) {
    *log_file_ << to_json(j).dump() << '\n';
    log_file_->flush();
    if (!*log_file_) throw Error("failed to append to judgment log");
  }
  log_.push_back(j);
}

void SurveyStore::publish_locked() {
  auto s = std::make_shared<JobStatus>();
  s->job_id = job_.id;
  s->k = job_.k;
  for (const auto& qn : questionnaires_) {
    for (const auto& q : qn.questions) {
      const auto& st = questions_.at(q.id);
      s->questions.push_back({qn.id, q.id, st.accepted, st.accepted >= job_.k});
      s->accepted_total += st.accepted;
    }
  }
  s->required_total = s->questions.size() * job_.k;
  s->progress = s->required_total == 0
                    ? 0.0
                    : static_cast<double>(s->accepted_total) / static_cast<double>(s->required_total);
  std::unique_lock lock(snapshot_mutex_);
  snapshot_ = std::move(s);
}

JobStatus SurveyStore::status() const {
  std::shared_lock lock(snapshot_mutex_);
  return *snapshot_;
}

JobStatus SurveyStore::status(std::string_view job_id) const {
  if (job_id != job_.id) throw NotFoundError("unknown job '" + std::string(job_id) + "'");
  return status();
}

JudgmentSet SurveyStore::judgments() const {
  std::lock_guard lock(write_mutex_);
  JudgmentSet set;
  for (const auto& j : log_) set.add(j);
  return set;
}

}  // namespace crowdimpute
