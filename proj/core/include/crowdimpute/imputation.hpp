#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crowdimpute/crowd.hpp"
#include "crowdimpute/dataset.hpp"
#include "crowdimpute/mice.hpp"
#include "crowdimpute/questionnaire.hpp"

namespace crowdimpute {

enum class Provenance { crowd, machine };

std::string_view to_string(Provenance p);
/// Throws ConfigError for anything but "crowd" or "machine".
Provenance provenance_from_string(std::string_view text);

/// m completed copies of one incomplete dataset plus, for each originally
/// missing cell, its m imputed values.
struct ImputationSet {
  Provenance provenance = Provenance::machine;
  std::uint64_t seed = 0;
  std::size_t cycles = 0;
  std::size_t donors = 0;
  /// Imputed cells in row-major order.
  std::vector<CellRef> cells;
  /// values[i][j] is copy j's value for cells[i].
  std::vector<std::vector<double>> values;
  std::vector<Dataset> completed;

  std::size_t m() const noexcept { return completed.size(); }
  std::optional<std::size_t> find(CellRef cell) const;
  /// Every copy complete, copies equal off the imputed cells, values
  /// consistent with the copies. Throws PreconditionError otherwise.
  void validate() const;
};

/// m independent mice_cycle runs; copy i uses split_seed(seed, i). Copies
/// may run on `threads` threads without changing the result.
ImputationSet multiple_impute(const Dataset& d, std::size_t m, const MiceOptions& options,
                              std::uint64_t seed, std::size_t threads = 1);

/// Crowd answers as an imputation set: copy j fills every asked cell with the
/// j-th accepted judgment of its question. m is the smallest accepted count
/// over the questions. Every missing cell of `d` must be asked.
ImputationSet crowd_imputation_set(const Dataset& d, const std::vector<Questionnaire>& questionnaires,
                                   const JudgmentSet& judgments);

/// Directory of imputation_001.csv ... plus manifest.json.
void save_imputation_set(const std::filesystem::path& dir, const ImputationSet& set);
ImputationSet load_imputation_set(const std::filesystem::path& dir, const Schema& schema);

}  // namespace crowdimpute
