#include "crowdimpute/crowd.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "crowdimpute/error.hpp"
#include "crowdimpute/text.hpp"
#include "crowdimpute/validation.hpp"

namespace crowdimpute {

using nlohmann::json;

double PersonaBias::log_odds(const std::string& label) const {
  auto it = category_log_odds.find(label);
  return it == category_log_odds.end() ? 0.0 : it->second;
}

double PersonaBias::shift_for(const std::string& column, double column_sd) const {
  auto it = shift.find(column);
  return it == shift.end() ? shift_sd * column_sd : it->second;
}

void Persona::validate() const {
  if (!(attention >= 0.0 && attention <= 1.0)) {
    throw ConfigError("persona '" + name + "': attention must lie in [0, 1]");
  }
  if (!(noise_sd_scale > 0.0)) throw ConfigError("persona '" + name + "': noise_sd_scale must be > 0");
}

std::vector<Persona> persona_presets() {
  // Operating points follow the three calibration runs: a mostly
  // inattentive, male-leaning crowd with no input checks; the same crowd
  // held to the answer range; and the most experienced tier.
  Persona novice;
  novice.name = "novice-unconstrained";
  novice.attention = 0.1;
  novice.noise_sd_scale = 1.5;
  novice.bias.category_log_odds = {{"M", 1.6}, {"Male", 1.6}, {"male", 1.6}};
  novice.respects_constraints = false;

  Persona constrained;
  constrained.name = "novice-constrained";
  constrained.attention = 0.3;
  constrained.noise_sd_scale = 1.5;
  constrained.bias.category_log_odds = {{"M", 1.1}, {"Male", 1.1}, {"male", 1.1}};
  constrained.bias.shift_sd = 2.5;
  constrained.respects_constraints = true;

  Persona experienced;
  experienced.name = "experienced";
  experienced.attention = 0.95;
  experienced.noise_sd_scale = 1.0;
  experienced.bias.category_log_odds = {{"M", 0.7}, {"Male", 0.7}, {"male", 0.7}};
  experienced.bias.shift_sd = 0.65;
  experienced.respects_constraints = true;

  return {novice, constrained, experienced};
}

Persona persona_preset(std::string_view name) {
  for (auto& p : persona_presets()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown persona preset '" + std::string(name) + "'");
}

PersonaMix single_persona(Persona p) { return {{std::move(p), 1.0}}; }

namespace {

Persona persona_from_json(const json& j) {
  Persona p;
  p.name = j.at("name").get<std::string>();
  p.attention = j.value("attention", 1.0);
  p.noise_sd_scale = j.value("noise_sd_scale", 1.0);
  p.respects_constraints = j.value("respects_constraints", true);
  if (j.contains("bias")) {
    const auto& b = j["bias"];
    if (b.contains("categories")) {
      p.bias.category_log_odds = b["categories"].get<std::map<std::string, double>>();
    }
    if (b.contains("shift")) p.bias.shift = b["shift"].get<std::map<std::string, double>>();
    p.bias.shift_sd = b.value("shift_sd", 0.0);
  }
  p.validate();
  return p;
}

void validate_mix(const PersonaMix& mix) {
  if (mix.empty()) throw ConfigError("persona mix is empty");
  double total = 0.0;
  for (const auto& w : mix) {
    if (!(w.weight >= 0.0)) throw ConfigError("persona weights must be non-negative");
    w.persona.validate();
    total += w.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("persona mix weights must sum to 1");
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const Persona& pick(const PersonaMix& mix, Rng& rng) {
  if (mix.size() == 1) return mix.front().persona;
  double u = rng.uniform();
  for (const auto& w : mix) {
    if (u < w.weight) return w.persona;
    u -= w.weight;
  }
  return mix.back().persona;
}

std::size_t sample_index(const std::vector<double>& probs, Rng& rng) {
  double u = rng.uniform();
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    if (u < probs[i]) return i;
    u -= probs[i];
  }
  return probs.size() - 1;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::isfinite(logits[i]) ? std::exp(logits[i] - mx) : 0.0;
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return out;
}

struct ContextValue {
  std::size_t column;
  double value;
};

std::vector<ContextValue> context_values(const Question& q, const SummaryStats& stats) {
  std::vector<ContextValue> out;
  for (const auto& f : q.context) {
    const auto c = stats.schema.find(f.column);
    if (!c) continue;
    try {
      out.push_back({*c, parse_cell(stats.schema.columns[*c], f.value)});
    } catch (const PreconditionError&) {
      // Context outside the schema's range still informs nothing.
    }
  }
  return out;
}

// Discriminant evidence per category from the continuous context values:
// class means come from the grouped means, covariance from the pairwise
// correlations and column sds.
std::vector<double> context_evidence(const Question& q, const SummaryStats& stats,
                                     std::size_t target, double noise_scale) {
  const auto& cats = stats.schema.columns[target].categories;
  std::vector<double> evidence(cats.size(), 0.0);
  std::vector<ContextValue> used;
  std::vector<const GroupedMeans*> means;
  for (const auto& cv : context_values(q, stats)) {
    if (stats.schema.columns[cv.column].categorical()) continue;
    const auto* g = stats.grouped_means(cv.column, target);
    if (!g || stats.columns[cv.column].sd <= 0.0) continue;
    if (std::any_of(g->groups.begin(), g->groups.end(), [](const GroupStat& s) { return s.count == 0; })) {
      continue;
    }
    used.push_back(cv);
    means.push_back(g);
  }
  if (used.empty()) return evidence;

  const auto n = static_cast<Eigen::Index>(used.size());
  Eigen::MatrixXd cov(n, n);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ci = used[static_cast<std::size_t>(i)].column;
    x(i) = used[static_cast<std::size_t>(i)].value;
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto cj = used[static_cast<std::size_t>(j)].column;
      const double r = i == j ? 1.0 : stats.association[ci][cj].value_or(0.0);
      cov(i, j) = r * stats.columns[ci].sd * stats.columns[cj].sd;
    }
  }
  cov *= noise_scale * noise_scale;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return evidence;

  for (std::size_t k = 0; k < cats.size(); ++k) {
    Eigen::VectorXd mu(n);
    for (Eigen::Index i = 0; i < n; ++i) mu(i) = means[static_cast<std::size_t>(i)]->groups[k].mean;
    const Eigen::VectorXd w = ldlt.solve(mu);
    evidence[k] = w.dot(x) - 0.5 * w.dot(mu);
  }
  return evidence;
}

struct Conditional {
  double mean;
  double sd;
};

// Grouped mean of the nearest stratum of the context attribute most
// associated with the target; the marginal when nothing applies.
Conditional conditional_estimate(const Question& q, const SummaryStats& stats, std::size_t target) {
  const auto& ts = stats.columns[target];
  Conditional best{ts.mean, ts.sd};
  double best_score = -1.0;
  for (const auto& cv : context_values(q, stats)) {
    const auto r = stats.association[target][cv.column];
    if (!r || std::abs(*r) <= best_score) continue;
    if (stats.schema.columns[cv.column].categorical()) {
      const auto* g = stats.grouped_means(target, cv.column);
      if (!g) continue;
      const auto& gs = g->groups.at(static_cast<std::size_t>(cv.value));
      if (gs.count == 0) continue;
      best = {gs.mean, gs.sd};
    } else {
      const auto* st = stats.stratified_means(target, cv.column);
      if (!st) continue;
      const auto& s = st->lookup(cv.value).stat;
      best = {s.mean, s.sd};
    }
    best_score = std::abs(*r);
  }
  return best;
}

}  // namespace

PersonaMix persona_mix_from_json(const json& j) {
  PersonaMix mix;
  try {
    std::vector<Persona> defined;
    if (j.contains("personas")) {
      for (const auto& jp : j["personas"]) defined.push_back(persona_from_json(jp));
    }
    auto find = [&](const std::string& name) {
      for (const auto& p : defined) {
        if (p.name == name) return p;
      }
      return persona_preset(name);
    };
    for (const auto& jm : j.at("mix")) {
      mix.push_back({find(jm.at("persona").get<std::string>()), jm.value("weight", 1.0)});
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed persona config: ") + e.what());
  }
  validate_mix(mix);
  return mix;
}

PersonaMix load_persona_mix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open persona config " + path.string());
  try {
    return persona_mix_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigError("persona config " + path.string() + ": " + e.what());
  }
}

json to_json(const Persona& p) {
  return {{"name", p.name},
          {"attention", p.attention},
          {"noise_sd_scale", p.noise_sd_scale},
          {"respects_constraints", p.respects_constraints},
          {"bias",
           {{"categories", p.bias.category_log_odds},
            {"shift", p.bias.shift},
            {"shift_sd", p.bias.shift_sd}}}};
}

std::vector<double> choice_probabilities(const Persona& p, const Question& q,
                                         const SummaryStats& stats) {
  const auto& choices = q.constraint.choices;
  if (q.constraint.kind != ConstraintKind::categorical_choice) {
    throw PreconditionError("choice_probabilities: question is not categorical");
  }
  const auto t = stats.schema.index_of(q.target_column);
  const auto& ts = stats.columns[t];
  std::vector<double> guess_logits(choices.size());
  for (std::size_t i = 0; i < choices.size(); ++i) guess_logits[i] = p.bias.log_odds(choices[i]);
  const auto guess = softmax(guess_logits);

  const auto evidence = context_evidence(q, stats, t, p.noise_sd_scale);
  std::vector<double> informed_logits(choices.size());
  for (std::size_t i = 0; i < choices.size(); ++i) {
    const auto k = stats.schema.columns[t].category_index(choices[i]);
    double share = (k && !ts.proportions.empty()) ? ts.proportions[*k] : 1.0 / choices.size();
    if (share <= 0.0) share = 1e-6;
    informed_logits[i] = std::log(share) + p.bias.log_odds(choices[i]) + (k ? evidence[*k] : 0.0);
  }
  const auto informed = softmax(informed_logits);

  std::vector<double> out(choices.size());
  for (std::size_t i = 0; i < choices.size(); ++i) {
    out[i] = p.attention * informed[i] + (1.0 - p.attention) * guess[i];
  }
  return out;
}

std::string answer(const Persona& p, const Question& q, const SummaryStats& stats, Rng& rng) {
  const bool attentive = rng.bernoulli(p.attention);
  const auto t = stats.schema.index_of(q.target_column);
  const auto& tspec = stats.schema.columns[t];

  if (q.constraint.kind == ConstraintKind::categorical_choice) {
    // Same mixture as choice_probabilities, sampled branch by branch.
    Persona branch = p;
    branch.attention = attentive ? 1.0 : 0.0;
    return q.constraint.choices[sample_index(choice_probabilities(branch, q, stats), rng)];
  }

  const auto& ts = stats.columns[t];
  const double shift = p.bias.shift_for(tspec.name, ts.sd);
  double x = 0.0;
  if (attentive) {
    const auto est = conditional_estimate(q, stats, t);
    x = rng.normal(est.mean + shift, est.sd * p.noise_sd_scale);
  } else {
    const double span = ts.max - ts.min;
    x = rng.uniform(ts.min - span, ts.max + span) + shift;
  }
  const int places = std::min(ts.decimals, 1);
  x = round_to(x, places);
  if (p.respects_constraints) {
    // Bounds may carry more decimals than the answer; pull them inward.
    const double scale = std::pow(10.0, places);
    const double lo = std::ceil(q.constraint.lo * scale - 1e-9) / scale;
    const double hi = std::floor(q.constraint.hi * scale + 1e-9) / scale;
    x = lo <= hi ? std::clamp(x, lo, hi) : std::clamp(x, q.constraint.lo, q.constraint.hi);
  }
  return format_number(x);
}

std::vector<const Judgment*> JudgmentSet::accepted(const std::string& question_id) const {
  std::vector<const Judgment*> out;
  auto it = by_question.find(question_id);
  if (it == by_question.end()) return out;
  for (const auto& j : it->second) {
    if (j.accepted) out.push_back(&j);
  }
  return out;
}

std::size_t JudgmentSet::accepted_count() const {
  std::size_t n = 0;
  for (const auto& [_, list] : by_question) {
    n += static_cast<std::size_t>(std::count_if(list.begin(), list.end(), [](const Judgment& j) { return j.accepted; }));
  }
  return n;
}

std::size_t JudgmentSet::total_count() const {
  std::size_t n = 0;
  for (const auto& [_, list] : by_question) n += list.size();
  return n;
}

void JudgmentSet::merge(JudgmentSet other) {
  for (auto& [qid, list] : other.by_question) {
    if (by_question.count(qid)) throw PreconditionError("merge: question '" + qid + "' appears twice");
    by_question.emplace(qid, std::move(list));
  }
}

JudgmentSet run_crowd(const Questionnaire& qn, const PersonaMix& mix, const SummaryStats& stats,
                      std::uint64_t seed, const CrowdOptions& options) {
  validate_mix(mix);
  qn.validate();
  const auto cap = options.cap_factor * qn.k;
  std::vector<std::vector<Judgment>> results(qn.questions.size());
  std::vector<std::string> failures(qn.questions.size());

  auto work = [&](std::size_t i) {
    const auto& q = qn.questions[i];
    Rng rng(split_seed(seed, fnv1a(q.id)));
    auto& out = results[i];
    std::size_t accepted = 0;
    for (std::size_t attempt = 0; accepted < qn.k; ++attempt) {
      if (attempt == cap) {
        failures[i] = "question '" + q.id + "': only " + std::to_string(accepted) + " of " +
                      std::to_string(qn.k) + " accepted after " + std::to_string(cap) + " attempts";
        return;
      }
      const auto& persona = pick(mix, rng);
      Judgment j;
      j.questionnaire_id = qn.id;
      j.question_id = q.id;
      j.worker_id = "sim-" + q.id + "-" + std::to_string(attempt + 1);
      j.raw_answer = answer(persona, q, stats, rng);
      const auto verdict = validate(j.raw_answer, q.constraint);
      j.accepted = verdict.accepted;
      j.reason = verdict.reason;
      j.timestamp = static_cast<std::int64_t>(attempt);
      j.persona = persona.name;
      accepted += j.accepted ? 1 : 0;
      out.push_back(std::move(j));
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, results.size()));
  if (threads == 1) {
    for (std::size_t i = 0; i < results.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < results.size(); i = next++) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (const auto& f : failures) {
    if (!f.empty()) throw SolicitationCapError(f);
  }
  JudgmentSet set;
  for (auto& list : results) {
    for (auto& j : list) set.add(std::move(j));
  }
  return set;
}

Dataset perturb_scenario(const Dataset& d, std::string_view column, double delta) {
  const auto c = d.column_index(column);
  const auto& spec = d.column(c);
  if (spec.categorical()) {
    throw PreconditionError("perturb_scenario: column '" + spec.name + "' is categorical");
  }
  Dataset out = d;
  for (std::size_t r = 0; r < d.rows(); ++r) {
    if (d.missing(r, c)) continue;
    double v = d.value(r, c) + delta;
    if (spec.valid_range) v = std::clamp(v, spec.valid_range->lo, spec.valid_range->hi);
    out.set(r, c, v);
  }
  return out;
}

json to_json(const Judgment& j) {
  json out{{"questionnaire_id", j.questionnaire_id},
           {"question_id", j.question_id},
           {"worker_id", j.worker_id},
           {"answer", j.raw_answer},
           {"accepted", j.accepted},
           {"reason", j.reason},
           {"timestamp", j.timestamp}};
  if (!j.persona.empty()) out["persona"] = j.persona;
  return out;
}

Judgment judgment_from_json(const json& j) {
  Judgment out;
  out.questionnaire_id = j.value("questionnaire_id", std::string());
  out.question_id = j.at("question_id").get<std::string>();
  out.worker_id = j.at("worker_id").get<std::string>();
  out.raw_answer = j.at("answer").get<std::string>();
  out.accepted = j.at("accepted").get<bool>();
  out.reason = j.value("reason", std::string());
  out.timestamp = j.value("timestamp", std::int64_t{0});
  out.persona = j.value("persona", std::string());
  return out;
}

void write_jsonl(std::ostream& out, const JudgmentSet& set) {
  for (const auto& [_, list] : set.by_question) {
    for (const auto& j : list) out << to_json(j).dump() << '\n';
  }
}

JudgmentSet read_jsonl(std::istream& in) {
  JudgmentSet set;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      set.add(judgment_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(n - 1, 0, std::string("bad judgment line: ") + e.what());
    }
  }
  return set;
}

void save_judgments(const std::filesystem::path& path, const JudgmentSet& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_jsonl(out, set);
}

JudgmentSet load_judgments(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open judgment log " + path.string());
  return read_jsonl(in);
}

}  // namespace crowdimpute
