#include "crowdimpute/imputation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "crowdimpute/error.hpp"
#include "crowdimpute/random.hpp"
#include "crowdimpute/text.hpp"

namespace crowdimpute {

using nlohmann::json;

std::string_view to_string(Provenance p) { return p == Provenance::crowd ? "crowd" : "machine"; }

Provenance provenance_from_string(std::string_view text) {
  if (text == "crowd") return Provenance::crowd;
  if (text == "machine") return Provenance::machine;
  throw ConfigError("provenance must be 'crowd' or 'machine', got '" + std::string(text) + "'");
}

std::optional<std::size_t> ImputationSet::find(CellRef cell) const {
  const auto it = std::lower_bound(cells.begin(), cells.end(), cell);
  if (it == cells.end() || *it != cell) return std::nullopt;
  return static_cast<std::size_t>(it - cells.begin());
}

void ImputationSet::validate() const {
  if (completed.empty()) throw PreconditionError("imputation set has no copies");
  if (!std::is_sorted(cells.begin(), cells.end()) ||
      std::adjacent_find(cells.begin(), cells.end()) != cells.end()) {
    throw PreconditionError("imputed cells must be unique and in row-major order");
  }
  if (values.size() != cells.size()) throw PreconditionError("one value list per imputed cell expected");
  const auto& first = completed.front();
  for (std::size_t j = 0; j < completed.size(); ++j) {
    const auto& copy = completed[j];
    if (!copy.complete()) throw PreconditionError(fmt::format("copy {} still has missing cells", j + 1));
    if (copy.schema() != first.schema() || copy.rows() != first.rows()) {
      throw PreconditionError(fmt::format("copy {} has a different shape", j + 1));
    }
  }
  for (std::size_t r = 0; r < first.rows(); ++r) {
    for (std::size_t c = 0; c < first.cols(); ++c) {
      if (find({r, c})) continue;
      for (const auto& copy : completed) {
        if (copy.value(r, c) != first.value(r, c)) {
          throw PreconditionError(fmt::format("copies disagree on observed cell ({}, {})", r, c));
        }
      }
    }
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (values[i].size() != completed.size()) throw PreconditionError("value list length differs from m");
    for (std::size_t j = 0; j < completed.size(); ++j) {
      if (completed[j].value(cells[i].row, cells[i].column) != values[i][j]) {
        throw PreconditionError("value list disagrees with completed copy");
      }
    }
  }
}

namespace {

void collect_values(ImputationSet& set) {
  set.values.assign(set.cells.size(), {});
  for (std::size_t i = 0; i < set.cells.size(); ++i) {
    for (const auto& copy : set.completed) {
      set.values[i].push_back(copy.value(set.cells[i].row, set.cells[i].column));
    }
  }
}

}  // namespace

ImputationSet multiple_impute(const Dataset& d, std::size_t m, const MiceOptions& options,
                              std::uint64_t seed, std::size_t threads) {
  if (m < 1) throw PreconditionError("m must be at least 1");
  ImputationSet set;
  set.provenance = Provenance::machine;
  set.seed = seed;
  set.cycles = options.cycles;
  set.donors = options.donors;
  set.cells = d.missing_cells();
  set.completed.resize(m);

  std::vector<std::exception_ptr> errors(m);
  auto work = [&](std::size_t i) {
    try {
      Rng rng(split_seed(seed, i));
      set.completed[i] = mice_cycle(d, options, rng);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, m));
  if (threads == 1) {
    for (std::size_t i = 0; i < m; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < m; i = next++) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  collect_values(set);
  return set;
}

ImputationSet crowd_imputation_set(const Dataset& d, const std::vector<Questionnaire>& questionnaires,
                                   const JudgmentSet& judgments) {
  std::map<CellRef, const Question*> asked;
  for (const auto& qn : questionnaires) {
    for (const auto& q : qn.questions) {
      if (q.target.row >= d.rows() || q.target.column >= d.cols() ||
          d.column(q.target.column).name != q.target_column) {
        throw PreconditionError("question '" + q.id + "' does not match the dataset");
      }
      asked[q.target] = &q;
    }
  }

  ImputationSet set;
  set.provenance = Provenance::crowd;
  set.cells = d.missing_cells();
  if (set.cells.empty()) throw PreconditionError("dataset has no missing cells");

  std::size_t m = 0;
  bool first = true;
  std::vector<std::vector<const Judgment*>> answers;
  for (const auto& cell : set.cells) {
    const auto it = asked.find(cell);
    if (it == asked.end()) {
      throw PreconditionError(fmt::format("missing cell ({}, {}) has no question", cell.row,
                                          d.column(cell.column).name));
    }
    auto accepted = judgments.accepted(it->second->id);
    m = first ? accepted.size() : std::min(m, accepted.size());
    first = false;
    answers.push_back(std::move(accepted));
  }
  if (m == 0) throw PreconditionError("some question has no accepted judgments");

  set.completed.assign(m, d);
  for (std::size_t i = 0; i < set.cells.size(); ++i) {
    const auto& cell = set.cells[i];
    const auto& spec = d.column(cell.column);
    for (std::size_t j = 0; j < m; ++j) {
      const auto& raw = answers[i][j]->raw_answer;
      double v = 0.0;
      try {
        v = parse_cell(spec, trim(raw));
        set.completed[j].set(cell.row, cell.column, v);
      } catch (const PreconditionError& e) {
        throw PreconditionError("accepted answer '" + raw + "' to '" + answers[i][j]->question_id +
                                "' is not a valid cell: " + e.what());
      }
    }
  }
  collect_values(set);
  return set;
}

void save_imputation_set(const std::filesystem::path& dir, const ImputationSet& set) {
  std::filesystem::create_directories(dir);
  json cells = json::array();
  for (const auto& c : set.cells) {
    cells.push_back({{"row", c.row}, {"column", set.completed.front().column(c.column).name}});
  }
  const json manifest{{"seed", set.seed},
                      {"m", set.m()},
                      {"cycles", set.cycles},
                      {"k_d", set.donors},
                      {"provenance", to_string(set.provenance)},
                      {"cells", std::move(cells)}};
  for (std::size_t j = 0; j < set.m(); ++j) {
    save_csv(dir / fmt::format("imputation_{:03}.csv", j + 1), set.completed[j]);
  }
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

ImputationSet load_imputation_set(const std::filesystem::path& dir, const Schema& schema) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw ConfigError("no imputation manifest at " + manifest_path.string());
  ImputationSet set;
  std::size_t m = 0;
  try {
    const json manifest = json::parse(in);
    set.seed = manifest.at("seed").get<std::uint64_t>();
    m = manifest.at("m").get<std::size_t>();
    set.cycles = manifest.value("cycles", std::size_t{0});
    set.donors = manifest.value("k_d", std::size_t{0});
    set.provenance = provenance_from_string(manifest.at("provenance").get<std::string>());
    for (const auto& c : manifest.at("cells")) {
      set.cells.push_back({c.at("row").get<std::size_t>(), schema.index_of(c.at("column").get<std::string>())});
    }
  } catch (const json::exception& e) {
    throw ConfigError("malformed imputation manifest " + manifest_path.string() + ": " + e.what());
  }
  if (m < 1) throw ConfigError("imputation manifest declares m = 0");
  for (std::size_t j = 0; j < m; ++j) {
    set.completed.push_back(load_csv(dir / fmt::format("imputation_{:03}.csv", j + 1), schema));
  }
  collect_values(set);
  set.validate();
  return set;
}

}  // namespace crowdimpute
