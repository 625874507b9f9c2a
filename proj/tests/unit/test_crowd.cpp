#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <set>
#include <sstream>

#include "crowdimpute/crowd.hpp"
#include "crowdimpute/error.hpp"
#include "crowdimpute/synthetic.hpp"
#include "crowdimpute/text.hpp"
#include "crowdimpute/validation.hpp"
#include "fixtures.hpp"

using namespace crowdimpute;
using nlohmann::json;

namespace {

struct Scenario {
  Dataset data;
  SummaryStats stats;
  std::vector<Questionnaire> questionnaires;
};

Scenario scenario(const std::string& target, std::size_t k = 30) {
  Scenario s{fev_like(300, 9), {}, {}};
  const auto c = s.data.column_index(target);
  for (std::size_t r = 0; r < 12; ++r) s.data.set_missing(r * 7, c);
  s.stats = summarize(s.data);
  s.questionnaires = batch(render_questions(s.data, s.stats, target), build_intro(s.data, s.stats, target), k);
  return s;
}

}  // namespace

TEST_CASE("presets exist and unknown names are configuration errors") {
  CHECK(persona_presets().size() == 3);
  CHECK(persona_preset("experienced").attention > persona_preset("novice-constrained").attention);
  CHECK_FALSE(persona_preset("novice-unconstrained").respects_constraints);
  CHECK_THROWS_AS(persona_preset("expert"), ConfigError);
}

TEST_CASE("persona mixes from JSON") {
  const auto mix = persona_mix_from_json(json::parse(R"({
    "personas": [{"name": "skeptic", "attention": 0.5, "bias": {"categories": {"F": 2.0}, "shift": {"age": -1}}}],
    "mix": [{"persona": "skeptic", "weight": 0.25}, {"persona": "experienced", "weight": 0.75}]
  })"));
  REQUIRE(mix.size() == 2);
  CHECK(mix[0].persona.bias.log_odds("F") == 2.0);
  CHECK(mix[0].persona.bias.log_odds("M") == 0.0);
  CHECK(mix[0].persona.bias.shift_for("age", 3.0) == -1.0);
  CHECK(mix[0].persona.bias.shift_for("fev", 3.0) == 0.0);
  CHECK(mix[1].persona.name == "experienced");

  CHECK_THROWS_AS(persona_mix_from_json(json::parse(R"({"mix": []})")), ConfigError);
  CHECK_THROWS_AS(persona_mix_from_json(json::parse(R"({"mix": [{"persona": "experienced", "weight": 0.5}]})")),
                  ConfigError);
  CHECK_THROWS_AS(persona_mix_from_json(json::parse(R"({"personas": [{"name": "x", "attention": 2}],
                                                        "mix": [{"persona": "x"}]})")),
                  ConfigError);
  CHECK_THROWS_AS(persona_mix_from_json(json::parse(R"({"mix": [{"weight": 1}]})")), ConfigError);
}

TEST_CASE("choice probabilities mix the guess and the informed answer") {
  const auto s = scenario("gender");
  const auto& q = s.questionnaires.front().questions.front();
  Persona flat;
  flat.name = "flat";
  flat.attention = 0.0;
  const auto p0 = choice_probabilities(flat, q, s.stats);
  CHECK(p0[0] == doctest::Approx(0.5));

  flat.bias.category_log_odds = {{"M", std::log(3.0)}};
  const auto p1 = choice_probabilities(flat, q, s.stats);
  CHECK(p1[0] == doctest::Approx(0.75));

  for (const auto& p : persona_presets()) {
    const auto probs = choice_probabilities(p, q, s.stats);
    CHECK(std::accumulate(probs.begin(), probs.end(), 0.0) == doctest::Approx(1.0));
  }
  const auto age_q = scenario("age").questionnaires.front().questions.front();
  CHECK_THROWS_AS(choice_probabilities(flat, age_q, s.stats), PreconditionError);
}

TEST_CASE("simulated judgments reach k accepted per question") {
  const auto s = scenario("age", 20);
  const auto mix = single_persona(persona_preset("novice-unconstrained"));
  const auto set = run_crowd(s.questionnaires.front(), mix, s.stats, 5);
  CHECK(set.by_question.size() == s.questionnaires.front().questions.size());
  for (const auto& [qid, list] : set.by_question) {
    CHECK(set.accepted(qid).size() == 20);
    CHECK(list.back().accepted);
    std::set<std::string> workers;
    for (const auto& j : list) {
      workers.insert(j.worker_id);
      CHECK(j.accepted == validate(j.raw_answer, s.questionnaires.front().find_question(qid)->constraint).accepted);
    }
    CHECK(workers.size() == list.size());
  }
  CHECK(set.total_count() > set.accepted_count());
}

TEST_CASE("simulation is deterministic and independent of thread count") {
  const auto s = scenario("age");
  const auto mix = single_persona(persona_preset("experienced"));
  const auto a = run_crowd(s.questionnaires.front(), mix, s.stats, 17);
  CrowdOptions four;
  four.threads = 4;
  CHECK(run_crowd(s.questionnaires.front(), mix, s.stats, 17, four) == a);
  CHECK_FALSE(run_crowd(s.questionnaires.front(), mix, s.stats, 18) == a);
}

TEST_CASE("the re-solicitation cap raises when answers never validate") {
  const auto s = scenario("age", 5);
  Persona wild;
  wild.name = "wild";
  wild.attention = 0.0;
  wild.respects_constraints = false;
  wild.bias.shift = {{"age", 500.0}};
  try {
    run_crowd(s.questionnaires.front(), single_persona(wild), s.stats, 1);
    FAIL("expected the cap to trigger");
  } catch (const SolicitationCapError& e) {
    CHECK(std::string(e.what()).find("after 50 attempts") != std::string::npos);
  }
}

TEST_CASE("answers follow the precision of the observed column") {
  const auto s = scenario("fev");
  Rng rng(4);
  const auto& q = s.questionnaires.front().questions.front();
  for (int i = 0; i < 50; ++i) {
    double v = 0.0;
    REQUIRE(parse_number(answer(persona_preset("experienced"), q, s.stats, rng), v));
    CHECK(v * 10.0 == doctest::Approx(std::round(v * 10.0)));
  }
}

TEST_CASE("perturbing a column shifts and clamps observed values only") {
  Dataset d = fixtures::age_gender(40, 2);
  d.set_missing(3, 0);
  const auto p = perturb_scenario(d, "age", -3.0);
  CHECK(p.missing(3, 0));
  for (std::size_t r = 0; r < d.rows(); ++r) {
    if (d.missing(r, 0)) continue;
    CHECK(p.value(r, 0) == std::max(3.0, d.value(r, 0) - 3.0));
    CHECK(p.value(r, 1) == d.value(r, 1));
  }
  CHECK_THROWS_AS(perturb_scenario(d, "gender", 1.0), PreconditionError);
}

TEST_CASE("judgment logs round-trip as JSON lines") {
  const auto s = scenario("gender", 3);
  const auto set = run_crowd(s.questionnaires.front(), single_persona(persona_preset("experienced")), s.stats, 2);
  std::stringstream io;
  write_jsonl(io, set);
  CHECK(read_jsonl(io) == set);

  std::istringstream bad("{\"question_id\": \"q\"}\n");
  CHECK_THROWS_AS(read_jsonl(bad), ParseError);

  JudgmentSet twice = set;
  CHECK_THROWS_AS(twice.merge(set), PreconditionError);
}
