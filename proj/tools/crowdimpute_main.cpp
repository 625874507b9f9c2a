// Command-line driver: every stage of the crowd-vs-MICE imputation loop as a
// subcommand over a run directory, plus `run` for the whole loop.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "crowdimpute/crowd.hpp"
#include "crowdimpute/error.hpp"
#include "crowdimpute/pipeline.hpp"
#include "crowdimpute/stats.hpp"
#include "crowdimpute/survey_server.hpp"
#include "crowdimpute/synthetic.hpp"

namespace fs = std::filesystem;
using namespace crowdimpute;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

void save_schema(const fs::path& path, const Schema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << schema_to_json(schema).dump(2) << '\n';
}

PersonaMix resolve_mix(const std::optional<fs::path>& file, const std::string& preset) {
  if (file) return load_persona_mix(*file);
  try {
    return single_persona(persona_preset(preset));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

// The bundle installs next to the binary as ../share/crowdimpute/ui.
std::optional<fs::path> installed_bundle() {
  std::error_code ec;
  const auto exe = fs::read_symlink("/proc/self/exe", ec);
  if (ec) return std::nullopt;
  const auto dir = exe.parent_path().parent_path() / "share" / "crowdimpute" / "ui";
  if (fs::exists(dir / "index.html", ec)) return dir;
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crowd-sourced multiple imputation workbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  // synth
  std::string synth_kind = "fev";
  std::size_t synth_rows = 654;
  std::size_t synth_predictors = 2;
  double synth_noise = 1.0;
  std::uint64_t synth_seed = 1;
  fs::path synth_out, synth_schema_out;
  auto* synth = app.add_subcommand("synth", "Write a seeded synthetic dataset and its schema");
  synth->add_option("--kind", synth_kind, "fev or linear")->check(CLI::IsMember({"fev", "linear"}));
  synth->add_option("--rows", synth_rows, "Row count")->check(CLI::PositiveNumber);
  synth->add_option("--predictors", synth_predictors, "Predictor count (linear)")->check(CLI::PositiveNumber);
  synth->add_option("--noise", synth_noise, "Residual sd (linear)");
  synth->add_option("--seed", synth_seed, "Seed");
  synth->add_option("--out", synth_out, "CSV output")->required();
  synth->add_option("--schema-out", synth_schema_out, "Schema JSON output")->required();

  // ampute
  fs::path data_path, schema_path, dir;
  std::vector<std::string> targets;
  std::size_t n_missing = 10;
  std::uint64_t seed = 1;
  auto* amp = app.add_subcommand("ampute", "Mask cells of complete data and record the ground truth");
  amp->add_option("--data", data_path, "Complete CSV dataset")->required();
  amp->add_option("--schema", schema_path, "Schema JSON")->required();
  amp->add_option("--target", targets, "Column to mask (repeatable)")->required();
  amp->add_option("--n", n_missing, "Cells to mask per target")->check(CLI::PositiveNumber);
  amp->add_option("--seed", seed, "Master seed");
  amp->add_option("--dir", dir, "Run directory")->required();

  // describe
  bool describe_print = false;
  auto* desc = app.add_subcommand("describe", "Summary statistics of the amputed data");
  desc->add_option("--dir", dir, "Run directory")->required();
  desc->add_flag("--print", describe_print, "Also print the summary JSON");

  // gen-survey
  std::string target;
  SurveyOptions survey;
  std::string placement = "end";
  std::string prior_blurb;
  fs::path template_file;
  auto* gen = app.add_subcommand("gen-survey", "Write questionnaires for the missing cells of a column");
  gen->add_option("--dir", dir, "Run directory")->required();
  gen->add_option("--target", target, "Column to ask about")->required();
  gen->add_option("--top-m", survey.top_m, "Attributes described in the introduction")->check(CLI::PositiveNumber);
  gen->add_option("--k", survey.k, "Judgments per question")->check(CLI::PositiveNumber);
  gen->add_option("--prior-blurb", prior_blurb, "Extra background paragraph");
  gen->add_option("--prior-placement", placement, "start or end")->check(CLI::IsMember({"start", "end"}));
  gen->add_option("--template-file", template_file, "Prompt template (JSON or text)")->check(CLI::ExistingFile);
  gen->add_option("--context", survey.context_sentence, "Opening sentence of the introduction");

  // simulate-crowd
  std::optional<fs::path> personas;
  std::string persona = "experienced";
  CrowdOptions crowd;
  auto* sim = app.add_subcommand("simulate-crowd", "Answer the questionnaires with simulated workers");
  sim->add_option("--dir", dir, "Run directory")->required();
  sim->add_option("--personas", personas, "Persona mix JSON")->check(CLI::ExistingFile);
  sim->add_option("--persona", persona, "Preset used when no mix file is given");
  sim->add_option("--seed", seed, "Master seed");
  sim->add_option("--threads", crowd.threads, "Worker threads")->check(CLI::PositiveNumber);
  sim->add_option("--cap-factor", crowd.cap_factor, "Attempts per question are capped at this times k")
      ->check(CLI::PositiveNumber);

  // serve
  fs::path data_dir;
  ServerOptions server;
  std::optional<std::size_t> k_override;
  std::optional<fs::path> static_dir;
  auto* serve = app.add_subcommand("serve", "Host the questionnaires of a run directory over HTTP");
  serve->add_option("--data-dir", data_dir, "Run directory")->envname("CROWDIMPUTE_DATA_DIR")->required();
  serve->add_option("--port", server.port, "TCP port (0 picks one)")->envname("CROWDIMPUTE_PORT");
  serve->add_option("--host", server.host, "Bind address")->envname("CROWDIMPUTE_HOST");
  serve->add_option("--k-override", k_override, "Replace the job's k")->envname("CROWDIMPUTE_K_OVERRIDE");
  serve->add_option("--static-dir", static_dir, "Survey client bundle")->envname("CROWDIMPUTE_STATIC_DIR");

  // impute-mice
  std::size_t m = 30;
  MiceOptions mice;
  std::size_t threads = 1;
  auto* imp = app.add_subcommand("impute-mice", "Multiple imputation by chained equations with PMM");
  imp->add_option("--dir", dir, "Run directory")->required();
  imp->add_option("--m", m, "Completed copies")->check(CLI::PositiveNumber);
  imp->add_option("--cycles", mice.cycles, "Chained-equation sweeps");
  imp->add_option("--donors", mice.donors, "PMM donor pool size")->check(CLI::PositiveNumber);
  imp->add_option("--seed", seed, "Master seed");
  imp->add_option("--threads", threads, "Copies imputed in parallel")->check(CLI::PositiveNumber);

  // pool
  std::string provenance = "crowd";
  auto* pool = app.add_subcommand("pool", "Summarize one imputation source per cell");
  pool->add_option("--dir", dir, "Run directory")->required();
  pool->add_option("--provenance", provenance, "crowd or machine")->check(CLI::IsMember({"crowd", "machine"}));

  // report
  std::string format = "txt";
  auto* rep = app.add_subcommand("report", "Compare crowd and MICE imputations with the ground truth");
  rep->add_option("--dir", dir, "Run directory")->required();
  rep->add_option("--format", format, "json, md or txt")->check(CLI::IsMember({"json", "md", "txt"}));

  // run
  std::optional<fs::path> config_path;
  RunConfig cfg;
  std::string run_blurb;
  auto* run = app.add_subcommand("run", "Whole loop: ampute through report");
  run->add_option("--config", config_path, "Run config JSON (other flags are then ignored)")
      ->check(CLI::ExistingFile);
  run->add_option("--data", cfg.dataset, "Complete CSV dataset");
  run->add_option("--schema", cfg.schema, "Schema JSON");
  run->add_option("--target", cfg.targets, "Column to mask (repeatable)");
  run->add_option("--n", cfg.n_missing, "Cells to mask per target");
  run->add_option("--k", cfg.k, "Judgments per question");
  run->add_option("--m", cfg.m, "MICE copies");
  run->add_option("--seed", cfg.seed, "Master seed");
  run->add_option("--personas", cfg.personas, "Persona mix JSON")->check(CLI::ExistingFile);
  run->add_option("--out", cfg.out_dir, "Run directory");
  run->add_option("--top-m", cfg.top_m, "Attributes described in the introduction");
  run->add_option("--cycles", cfg.cycles, "Chained-equation sweeps");
  run->add_option("--donors", cfg.donors, "PMM donor pool size");
  run->add_option("--prior-blurb", run_blurb, "Extra background paragraph");
  run->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*synth) {
      const Dataset d = synth_kind == "fev" ? fev_like(synth_rows, synth_seed)
                                            : linear_gaussian(synth_rows, synth_predictors, synth_noise, synth_seed);
      save_csv(synth_out, d);
      save_schema(synth_schema_out, d.schema());
    } else if (*amp) {
      stage_ampute(data_path, schema_path, targets, n_missing, seed, dir);
      std::cout << fmt::format("masked {} cell(s) per target in {}\n", n_missing, dir.string());
    } else if (*desc) {
      const auto stats = stage_describe(dir);
      if (describe_print) std::cout << summary_to_json(stats).dump(2) << '\n';
    } else if (*gen) {
      if (!prior_blurb.empty()) survey.prior_blurb = prior_blurb;
      survey.placement = placement == "start" ? BlurbPlacement::start : BlurbPlacement::end;
      if (!template_file.empty()) survey.template_file = template_file;
      const auto qns = stage_gen_survey(dir, target, survey);
      for (const auto& qn : qns) {
        std::cout << fmt::format("{}: {} question(s), {} judgment(s) required\n", qn.id, qn.questions.size(),
                                 qn.required_judgments());
      }
    } else if (*sim) {
      const auto set = stage_simulate_crowd(dir, resolve_mix(personas, persona), seed, crowd);
      std::cout << fmt::format("{} accepted of {} judgments\n", set.accepted_count(), set.total_count());
    } else if (*serve) {
      auto store = SurveyStore::open(data_dir, k_override);
      server.static_dir = static_dir ? static_dir : installed_bundle();
      SurveyServer http(*store, server);
      const int port = http.bind();
      std::cout << fmt::format("serving job {} on http://{}:{}/\n", store->job().id, server.host, port)
                << std::flush;
      http.listen();
    } else if (*imp) {
      const auto set = stage_impute_mice(dir, m, mice, seed, threads);
      std::cout << fmt::format("{} completed copies, {} imputed cell(s)\n", set.m(), set.cells.size());
    } else if (*pool) {
      const auto pooled = stage_pool(dir, provenance_from_string(provenance));
      std::cout << fmt::format("pooled {} cell(s)\n", pooled.size());
    } else if (*rep) {
      const auto f = report_format_from_string(format);
      std::cout << render_report(stage_report(dir, f), f);
    } else if (*run) {
      if (config_path) {
        cfg = load_run_config(*config_path);
      } else if (!run_blurb.empty()) {
        cfg.prior_blurb = run_blurb;
      }
      const auto result = run_pipeline(cfg);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << render_report(result.report, ReportFormat::txt);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return EXIT_SUCCESS;
}
