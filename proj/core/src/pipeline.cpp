#include "crowdimpute/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "crowdimpute/error.hpp"
#include "crowdimpute/random.hpp"
#include "crowdimpute/stats.hpp"

namespace crowdimpute {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t stage_seed(std::uint64_t master, Stage stage) noexcept {
  return split_seed(master, static_cast<std::uint64_t>(stage));
}

void RunConfig::validate() const {
  if (dataset.empty()) throw ConfigError("run config needs a dataset path");
  if (schema.empty()) throw ConfigError("run config needs a schema path");
  if (out_dir.empty()) throw ConfigError("run config needs an output directory");
  if (targets.empty()) throw ConfigError("run config needs at least one target column");
  if (n_missing < 1) throw ConfigError("n must be at least 1");
  if (k < 1) throw ConfigError("k must be at least 1");
  if (m < 1) throw ConfigError("m must be at least 1");
  if (top_m < 1) throw ConfigError("top_m must be at least 1");
  if (donors < 1) throw ConfigError("donors must be at least 1");
}

json to_json(const RunConfig& c) {
  json j{{"dataset", c.dataset.string()},
         {"schema", c.schema.string()},
         {"targets", c.targets},
         {"n", c.n_missing},
         {"k", c.k},
         {"m", c.m},
         {"seed", c.seed},
         {"out", c.out_dir.string()},
         {"top_m", c.top_m},
         {"cycles", c.cycles},
         {"donors", c.donors},
         {"threads", c.threads}};
  j["personas"] = c.personas ? json(c.personas->string()) : json(nullptr);
  j["prior_blurb"] = c.prior_blurb ? json(*c.prior_blurb) : json(nullptr);
  return j;
}

RunConfig run_config_from_json(const json& j, const fs::path& base) {
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
  };
  RunConfig c;
  try {
    c.dataset = resolve(j.at("dataset").get<std::string>());
    c.schema = resolve(j.at("schema").get<std::string>());
    c.targets = j.at("targets").get<std::vector<std::string>>();
    c.out_dir = resolve(j.at("out").get<std::string>());
    c.n_missing = j.value("n", c.n_missing);
    c.k = j.value("k", c.k);
    c.m = j.value("m", c.m);
    c.seed = j.value("seed", c.seed);
    c.top_m = j.value("top_m", c.top_m);
    c.cycles = j.value("cycles", c.cycles);
    c.donors = j.value("donors", c.donors);
    c.threads = j.value("threads", c.threads);
    if (j.contains("personas") && !j["personas"].is_null()) {
      c.personas = resolve(j["personas"].get<std::string>());
    }
    if (j.contains("prior_blurb") && !j["prior_blurb"].is_null()) {
      c.prior_blurb = j["prior_blurb"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed run config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open run config " + path.string());
  try {
    return run_config_from_json(json::parse(in), path.parent_path());
  } catch (const json::parse_error& e) {
    throw ConfigError("run config " + path.string() + ": " + e.what());
  }
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing artifact " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed artifact " + path.string() + ": " + e.what());
  }
}

std::string id_prefix(const std::string& target) {
  std::string out;
  for (char ch : target) {
    const auto c = static_cast<unsigned char>(ch);
    out += std::isalnum(c) ? static_cast<char>(std::tolower(c)) : '_';
  }
  return out;
}

GroundTruth load_ground_truth(const fs::path& dir, const Schema& schema) {
  return ground_truth_from_json(read_json(dir / run_files::ground_truth), schema);
}

std::vector<Questionnaire> load_run_questionnaires(const fs::path& dir) {
  const auto qdir = dir / run_files::questionnaires;
  if (!fs::is_directory(qdir)) throw ConfigError("missing artifact " + qdir.string());
  return load_questionnaires(qdir);
}

template <typename F>
auto in_stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError("stage " + name + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error("stage " + name + ": " + e.what());
  }
}

}  // namespace

Schema load_run_schema(const fs::path& dir) { return load_schema(dir / run_files::schema); }

Dataset load_run_dataset(const fs::path& dir) {
  const auto path = dir / run_files::amputed;
  if (!fs::exists(path)) throw ConfigError("missing artifact " + path.string());
  return load_csv(path, load_run_schema(dir));
}

void stage_ampute(const fs::path& dataset, const fs::path& schema_path,
                  const std::vector<std::string>& targets, std::size_t n, std::uint64_t seed,
                  const fs::path& dir) {
  if (targets.empty()) throw ConfigError("ampute needs at least one target");
  const auto schema = load_schema(schema_path);
  Dataset d = load_csv(dataset, schema);
  if (!d.complete()) throw PreconditionError("the input dataset already has missing cells");
  for (const auto& t : targets) {
    if (!schema.find(t)) throw ConfigError("unknown target column '" + t + "'");
  }

  GroundTruth truth;
  const auto s = stage_seed(seed, Stage::ampute);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    auto [masked, gt] = ampute(d, targets[i], n, split_seed(s, i));
    d = std::move(masked);
    truth.entries.insert(truth.entries.end(), gt.entries.begin(), gt.entries.end());
  }
  std::sort(truth.entries.begin(), truth.entries.end(),
            [](const TruthEntry& a, const TruthEntry& b) { return a.cell < b.cell; });

  fs::create_directories(dir);
  write_json(dir / run_files::schema, schema_to_json(schema));
  save_csv(dir / run_files::amputed, d);
  write_json(dir / run_files::ground_truth, ground_truth_to_json(truth, schema));
}

SummaryStats stage_describe(const fs::path& dir) {
  auto stats = summarize(load_run_dataset(dir));
  write_json(dir / run_files::summary, summary_to_json(stats));
  return stats;
}

std::vector<Questionnaire> stage_gen_survey(const fs::path& dir, const std::string& target,
                                            const SurveyOptions& options) {
  const Dataset d = load_run_dataset(dir);
  const auto stats = summarize(d);
  IntroOptions intro_options;
  intro_options.top_m = options.top_m;
  intro_options.prior_blurb = options.prior_blurb;
  intro_options.placement = options.placement;
  intro_options.context_sentence = options.context_sentence;
  const auto intro = build_intro(d, stats, target, intro_options);
  const auto templates =
      options.template_file ? PromptTemplates::load(*options.template_file) : PromptTemplates::defaults();
  const auto questions = render_questions(d, stats, target, templates);
  if (questions.empty()) throw PreconditionError("column '" + target + "' has no missing cells to ask about");
  auto batches = batch(questions, intro, options.k, options.prior_blurb, id_prefix(target));
  const auto qdir = dir / run_files::questionnaires;
  fs::create_directories(qdir);
  for (const auto& qn : batches) save_questionnaire(qdir / (qn.id + ".json"), qn);
  return batches;
}

JudgmentSet stage_simulate_crowd(const fs::path& dir, const PersonaMix& mix, std::uint64_t seed,
                                 const CrowdOptions& options) {
  const auto stats = summarize(load_run_dataset(dir));
  const auto questionnaires = load_run_questionnaires(dir);
  if (questionnaires.empty()) throw ConfigError("no questionnaires in " + dir.string());
  JudgmentSet all;
  const auto s = stage_seed(seed, Stage::crowd);
  for (const auto& qn : questionnaires) all.merge(run_crowd(qn, mix, stats, s, options));
  save_judgments(dir / run_files::judgments, all);
  return all;
}

ImputationSet stage_impute_mice(const fs::path& dir, std::size_t m, const MiceOptions& options,
                                std::uint64_t seed, std::size_t threads) {
  const Dataset d = load_run_dataset(dir);
  auto set = multiple_impute(d, m, options, stage_seed(seed, Stage::mice), threads);
  const auto out = dir / run_files::mice_set;
  fs::remove_all(out);
  save_imputation_set(out, set);
  return set;
}

std::vector<PooledCellSummary> stage_pool(const fs::path& dir, Provenance provenance) {
  const auto schema = load_run_schema(dir);
  ImputationSet set;
  if (provenance == Provenance::crowd) {
    const auto log = dir / run_files::judgments;
    if (!fs::exists(log)) throw ConfigError("missing artifact " + log.string());
    set = crowd_imputation_set(load_run_dataset(dir), load_run_questionnaires(dir), load_judgments(log));
    const auto out = dir / run_files::crowd_set;
    fs::remove_all(out);
    save_imputation_set(out, set);
  } else {
    set = load_imputation_set(dir / run_files::mice_set, schema);
  }
  auto pooled = pool_set(set);
  write_json(dir / fmt::format("pooled_{}.json", to_string(provenance)), to_json(pooled, schema));
  return pooled;
}

EvaluationReport stage_report(const fs::path& dir, ReportFormat format) {
  const auto schema = load_run_schema(dir);
  const auto truth = load_ground_truth(dir, schema);
  const auto crowd = load_imputation_set(dir / run_files::crowd_set, schema);
  const auto mice = load_imputation_set(dir / run_files::mice_set, schema);
  auto report = compare(truth, crowd, mice);
  const char* ext = format == ReportFormat::json ? "json" : format == ReportFormat::md ? "md" : "txt";
  write_text(dir / fmt::format("report.{}", ext), render_report(report, format));
  return report;
}

PipelineResult run_pipeline(const RunConfig& config) {
  config.validate();
  PipelineResult result;
  const auto& dir = config.out_dir;
  fs::create_directories(dir);
  write_json(dir / run_files::manifest, to_json(config));

  in_stage("ampute", [&] {
    stage_ampute(config.dataset, config.schema, config.targets, config.n_missing, config.seed, dir);
    return 0;
  });
  in_stage("describe", [&] { return stage_describe(dir); });
  in_stage("gen-survey", [&] {
    fs::remove_all(dir / run_files::questionnaires);
    SurveyOptions options;
    options.top_m = config.top_m;
    options.k = config.k;
    options.prior_blurb = config.prior_blurb;
    for (const auto& t : config.targets) stage_gen_survey(dir, t, options);
    return 0;
  });
  in_stage("simulate-crowd", [&] {
    const auto mix = config.personas ? load_persona_mix(*config.personas)
                                     : single_persona(persona_preset("experienced"));
    CrowdOptions options;
    options.threads = config.threads;
    return stage_simulate_crowd(dir, mix, config.seed, options);
  });
  in_stage("impute-mice", [&] {
    MiceOptions options;
    options.cycles = config.cycles;
    options.donors = config.donors;
    return stage_impute_mice(dir, config.m, options, config.seed, config.threads);
  });
  in_stage("pool", [&] {
    stage_pool(dir, Provenance::crowd);
    return stage_pool(dir, Provenance::machine);
  });
  result.report = in_stage("report", [&] {
    for (auto f : {ReportFormat::json, ReportFormat::md}) stage_report(dir, f);
    return stage_report(dir, ReportFormat::txt);
  });

  if (config.k == 1) result.warnings.push_back("k = 1: crowd imputations have no between-imputation variance");
  if (config.m == 1) result.warnings.push_back("m = 1: MICE imputations have no between-imputation variance");
  return result;
}

}  // namespace crowdimpute
