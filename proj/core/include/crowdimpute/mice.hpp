#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "crowdimpute/dataset.hpp"
#include "crowdimpute/random.hpp"

namespace crowdimpute {

/// Linear regression of one column on others over the target's observed
/// rows. The design matrix has an intercept column followed by the encoded
/// predictors (continuous as-is, categorical as indicators for every category
/// but the first).
struct RegressionTask {
  std::size_t target = 0;
  std::vector<std::size_t> predictors;
  std::vector<std::size_t> observed_rows;
  Eigen::MatrixXd design;
  Eigen::VectorXd response;
};

/// Builds a task from the observed rows of `target`. Predictors default to
/// every other non-id column with no missing cells; explicitly named
/// predictors must be complete too. A categorical target is coded as the
/// indicator of its second category.
RegressionTask regression_task(const Dataset& d, std::string_view target,
                               const std::vector<std::string>& predictors = {});

struct PosteriorDraw {
  /// Least-squares coefficients; zero at dropped columns.
  Eigen::VectorXd beta_hat;
  /// Coefficients drawn around beta_hat; zero at dropped columns.
  Eigen::VectorXd beta_star;
  double sigma_star = 0.0;
  /// Design columns removed as collinear.
  std::vector<Eigen::Index> dropped;
};

enum class DrawMode {
  /// sigma*^2 = RSS / chi2(nu), beta* ~ N(beta_hat, sigma*^2 (X'X)^-1).
  posterior,
  /// beta* = beta_hat and sigma* = 0; for checks against exact fits.
  point_estimate,
};

/// Bayesian linear-regression draw. Collinear design columns are removed
/// with a column-pivoted QR (trailing pivots go first). Throws
/// NumericalError when nu = rows - kept columns is not positive.
PosteriorDraw bayes_draw(const RegressionTask& task, Rng& rng, DrawMode mode = DrawMode::posterior);

/// Predictive mean matching for the missing cells of `column`, in row order.
/// Predictions for every row use beta*; each missing row takes the observed
/// value of a donor drawn uniformly from the `donors` observed rows whose
/// predictions are closest (ties by row order). Categorical columns match on
/// predicted category indicators and return category indices. Predictors are
/// as in regression_task's default.
std::vector<double> pmm_impute_column(const Dataset& d, std::string_view column, std::size_t donors,
                                      Rng& rng, DrawMode mode = DrawMode::posterior);

struct MiceOptions {
  /// Visit order of incomplete columns; empty means schema order.
  std::vector<std::string> order;
  std::size_t cycles = 10;
  std::size_t donors = 5;
  DrawMode mode = DrawMode::posterior;
};

/// Per-cycle means of each visited column, after its update.
struct MiceTrace {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> means;
  /// E.g. collinear predictors dropped from a fit.
  std::vector<std::string> warnings;
};

/// Chained-equation PMM. Missing cells start as random draws from their
/// column's observed values (from a stream forked off `rng`), then every
/// incomplete column is re-imputed each cycle using all other non-id columns
/// as predictors. Returns a dataset with no missing cells.
Dataset mice_cycle(const Dataset& d, const MiceOptions& options, Rng& rng,
                   MiceTrace* trace = nullptr);

}  // namespace crowdimpute
