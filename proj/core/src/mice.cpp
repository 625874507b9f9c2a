#include "crowdimpute/mice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "crowdimpute/error.hpp"

namespace crowdimpute {

namespace {

// Row-major working copy of the cell values; missing cells hold whatever the
// current imputation put there.
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> cells;

  double at(std::size_t r, std::size_t c) const { return cells[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return cells[r * cols + c]; }
};

Grid grid_of(const Dataset& d) {
  Grid g{d.rows(), d.cols(), std::vector<double>(d.rows() * d.cols(), 0.0)};
  for (std::size_t r = 0; r < d.rows(); ++r) {
    for (std::size_t c = 0; c < d.cols(); ++c) g.at(r, c) = d.value(r, c);
  }
  return g;
}

std::size_t encoded_width(const ColumnSpec& spec) {
  return spec.categorical() ? (spec.categories.empty() ? 0 : spec.categories.size() - 1) : 1;
}

Eigen::MatrixXd design_matrix(const Grid& g, const Schema& schema,
                              const std::vector<std::size_t>& predictors,
                              const std::vector<std::size_t>& rows) {
  std::size_t width = 1;
  for (auto p : predictors) width += encoded_width(schema.columns[p]);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                                            static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto ri = static_cast<Eigen::Index>(i);
    x(ri, 0) = 1.0;
    Eigen::Index col = 1;
    for (auto p : predictors) {
      const auto& spec = schema.columns[p];
      const double v = g.at(rows[i], p);
      if (spec.categorical()) {
        const auto level = static_cast<std::size_t>(v);
        if (level > 0) x(ri, col + static_cast<Eigen::Index>(level) - 1) = 1.0;
        col += static_cast<Eigen::Index>(encoded_width(spec));
      } else {
        x(ri, col++) = v;
      }
    }
  }
  return x;
}

// Response vectors for the target: the value itself, the indicator of the
// second category for a binary column, or one indicator per category.
std::vector<std::vector<double>> response_codes(const Grid& g, const ColumnSpec& spec,
                                                std::size_t target,
                                                const std::vector<std::size_t>& rows) {
  std::vector<std::vector<double>> out;
  if (!spec.categorical()) {
    auto& y = out.emplace_back();
    for (auto r : rows) y.push_back(g.at(r, target));
    return out;
  }
  const std::size_t levels = spec.categories.size();
  std::vector<std::size_t> coded;
  if (levels <= 2) {
    coded.push_back(levels - 1);
  } else {
    coded.resize(levels);
    std::iota(coded.begin(), coded.end(), std::size_t{0});
  }
  for (auto level : coded) {
    auto& y = out.emplace_back();
    for (auto r : rows) y.push_back(static_cast<std::size_t>(g.at(r, target)) == level ? 1.0 : 0.0);
  }
  return out;
}

std::vector<std::size_t> complete_predictors(const Dataset& d, std::size_t target) {
  const auto id = d.id_column_index();
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < d.cols(); ++c) {
    if (c == target || (id && *id == c)) continue;
    if (d.observed_count(c) == d.rows()) out.push_back(c);
  }
  return out;
}

std::vector<std::size_t> missing_rows(const Dataset& d, std::size_t c) {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < d.rows(); ++r) {
    if (d.missing(r, c)) out.push_back(r);
  }
  return out;
}

std::vector<double> pmm(const Grid& g, const Schema& schema, std::size_t target,
                        const std::vector<std::size_t>& predictors,
                        const std::vector<std::size_t>& observed,
                        const std::vector<std::size_t>& missing, std::size_t donors, Rng& rng,
                        DrawMode mode, std::set<std::string>* warnings) {
  if (observed.empty()) {
    throw PreconditionError("column '" + schema.columns[target].name + "' has no observed values");
  }
  if (donors == 0) throw PreconditionError("donor pool size must be at least 1");
  if (observed.size() < donors) {
    throw PreconditionError("column '" + schema.columns[target].name + "' has " +
                            std::to_string(observed.size()) + " observed rows, fewer than " +
                            std::to_string(donors) + " donors");
  }

  std::vector<std::size_t> all(g.rows);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const Eigen::MatrixXd x_all = design_matrix(g, schema, predictors, all);

  RegressionTask task;
  task.target = target;
  task.predictors = predictors;
  task.observed_rows = observed;
  task.design = design_matrix(g, schema, predictors, observed);

  const auto responses = response_codes(g, schema.columns[target], target, observed);
  // prediction[row][response]
  std::vector<std::vector<double>> prediction(g.rows, std::vector<double>(responses.size()));
  for (std::size_t k = 0; k < responses.size(); ++k) {
    task.response = Eigen::Map<const Eigen::VectorXd>(responses[k].data(),
                                                     static_cast<Eigen::Index>(responses[k].size()));
    const auto draw = bayes_draw(task, rng, mode);
    if (warnings && !draw.dropped.empty()) {
      warnings->insert("collinear predictors dropped while imputing '" +
                       schema.columns[target].name + "'");
    }
    const Eigen::VectorXd pred = x_all * draw.beta_star;
    for (std::size_t r = 0; r < g.rows; ++r) prediction[r][k] = pred(static_cast<Eigen::Index>(r));
  }

  std::vector<double> out;
  out.reserve(missing.size());
  std::vector<std::pair<double, std::size_t>> dist(observed.size());
  for (auto r : missing) {
    for (std::size_t i = 0; i < observed.size(); ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < responses.size(); ++k) {
        const double diff = prediction[r][k] - prediction[observed[i]][k];
        s += diff * diff;
      }
      dist[i] = {s, observed[i]};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(donors), dist.end());
    const auto donor = dist[rng.index(donors)].second;
    out.push_back(g.at(donor, target));
  }
  return out;
}

}  // namespace

RegressionTask regression_task(const Dataset& d, std::string_view target,
                               const std::vector<std::string>& predictors) {
  RegressionTask task;
  task.target = d.column_index(target);
  const auto id = d.id_column_index();
  if (id && *id == task.target) throw PreconditionError("the id column cannot be a regression target");
  if (predictors.empty()) {
    task.predictors = complete_predictors(d, task.target);
  } else {
    for (const auto& name : predictors) {
      const auto c = d.column_index(name);
      if (c == task.target) throw PreconditionError("target '" + name + "' listed as its own predictor");
      if (id && *id == c) throw PreconditionError("the id column cannot be a predictor");
      if (d.observed_count(c) != d.rows()) {
        throw PreconditionError("predictor '" + name + "' has missing cells");
      }
      task.predictors.push_back(c);
    }
  }
  task.observed_rows = d.observed_rows(task.target);
  const Grid g = grid_of(d);
  task.design = design_matrix(g, d.schema(), task.predictors, task.observed_rows);
  const auto y = response_codes(g, d.column(task.target), task.target, task.observed_rows).front();
  task.response = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  return task;
}

PosteriorDraw bayes_draw(const RegressionTask& task, Rng& rng, DrawMode mode) {
  const Eigen::MatrixXd& x = task.design;
  const Eigen::Index n = x.rows();
  const Eigen::Index q = x.cols();
  if (q == 0) throw PreconditionError("design matrix has no columns");
  if (task.response.size() != n) throw PreconditionError("response length does not match design rows");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pivoted(x);
  const Eigen::Index rank = pivoted.rank();
  if (rank == 0) throw NumericalError("design matrix has rank 0");

  std::vector<Eigen::Index> kept;
  const auto& perm = pivoted.colsPermutation().indices();
  for (Eigen::Index i = 0; i < rank; ++i) kept.push_back(perm(i));
  std::sort(kept.begin(), kept.end());

  PosteriorDraw out;
  for (Eigen::Index c = 0; c < q; ++c) {
    if (!std::binary_search(kept.begin(), kept.end(), c)) out.dropped.push_back(c);
  }

  const Eigen::Index nu = n - rank;
  if (nu <= 0) {
    throw NumericalError("no residual degrees of freedom (" + std::to_string(n) + " rows, " +
                         std::to_string(rank) + " coefficients)");
  }

  Eigen::MatrixXd xk(n, rank);
  for (Eigen::Index i = 0; i < rank; ++i) xk.col(i) = x.col(kept[static_cast<std::size_t>(i)]);

  const Eigen::VectorXd beta_k = xk.colPivHouseholderQr().solve(task.response);
  const double rss = std::max((task.response - xk * beta_k).squaredNorm(),
                              std::numeric_limits<double>::min());

  Eigen::VectorXd star_k = beta_k;
  if (mode == DrawMode::posterior) {
    out.sigma_star = std::sqrt(rss / rng.chi_squared(static_cast<double>(nu)));
    const Eigen::MatrixXd xtx = xk.transpose() * xk;
    const Eigen::LLT<Eigen::MatrixXd> xtx_llt(xtx);
    if (xtx_llt.info() != Eigen::Success) throw NumericalError("X'X is not positive definite");
    const Eigen::MatrixXd v = xtx_llt.solve(Eigen::MatrixXd::Identity(rank, rank));
    const Eigen::LLT<Eigen::MatrixXd> v_llt(v);
    if (v_llt.info() != Eigen::Success) throw NumericalError("(X'X)^-1 is not positive definite");
    Eigen::VectorXd z(rank);
    for (Eigen::Index i = 0; i < rank; ++i) z(i) = rng.normal(0.0, 1.0);
    const Eigen::VectorXd lz = v_llt.matrixL() * z;
    star_k += out.sigma_star * lz;
  }

  out.beta_hat = Eigen::VectorXd::Zero(q);
  out.beta_star = Eigen::VectorXd::Zero(q);
  for (Eigen::Index i = 0; i < rank; ++i) {
    out.beta_hat(kept[static_cast<std::size_t>(i)]) = beta_k(i);
    out.beta_star(kept[static_cast<std::size_t>(i)]) = star_k(i);
  }
  return out;
}

std::vector<double> pmm_impute_column(const Dataset& d, std::string_view column, std::size_t donors,
                                      Rng& rng, DrawMode mode) {
  const auto target = d.column_index(column);
  const auto id = d.id_column_index();
  if (id && *id == target) throw PreconditionError("the id column is never imputed");
  const auto missing = missing_rows(d, target);
  if (missing.empty()) return {};
  return pmm(grid_of(d), d.schema(), target, complete_predictors(d, target), d.observed_rows(target),
             missing, donors, rng, mode, nullptr);
}

Dataset mice_cycle(const Dataset& d, const MiceOptions& options, Rng& rng, MiceTrace* trace) {
  const auto id = d.id_column_index();
  std::vector<std::size_t> incomplete;
  for (std::size_t c = 0; c < d.cols(); ++c) {
    const auto observed = d.observed_count(c);
    if (observed == d.rows()) continue;
    if (id && *id == c) throw PreconditionError("the id column has missing cells");
    if (observed == 0) throw PreconditionError("column '" + d.column(c).name + "' is entirely missing");
    incomplete.push_back(c);
  }

  std::vector<std::size_t> order;
  if (options.order.empty()) {
    order = incomplete;
  } else {
    for (const auto& name : options.order) {
      const auto c = d.column_index(name);
      if (std::find(incomplete.begin(), incomplete.end(), c) == incomplete.end()) continue;
      if (std::find(order.begin(), order.end(), c) != order.end()) {
        throw PreconditionError("column '" + name + "' appears twice in the visit order");
      }
      order.push_back(c);
    }
    if (order.size() != incomplete.size()) {
      throw PreconditionError("visit order does not name every incomplete column");
    }
  }

  if (trace) {
    trace->columns.clear();
    trace->means.clear();
    for (auto c : order) trace->columns.push_back(d.column(c).name);
  }
  if (incomplete.empty()) return d;

  Grid g = grid_of(d);
  std::vector<std::vector<std::size_t>> observed(d.cols()), missing(d.cols());
  for (auto c : incomplete) {
    observed[c] = d.observed_rows(c);
    missing[c] = missing_rows(d, c);
  }

  Rng init = rng.fork();
  for (auto c : incomplete) {
    for (auto r : missing[c]) g.at(r, c) = g.at(observed[c][init.index(observed[c].size())], c);
  }

  std::set<std::string> warnings;
  for (std::size_t cycle = 0; cycle < options.cycles; ++cycle) {
    std::vector<double> means;
    for (auto c : order) {
      std::vector<std::size_t> predictors;
      for (std::size_t p = 0; p < d.cols(); ++p) {
        if (p != c && !(id && *id == p)) predictors.push_back(p);
      }
      const std::size_t donors = std::min(options.donors, observed[c].size());
      const auto values =
          pmm(g, d.schema(), c, predictors, observed[c], missing[c], donors, rng, options.mode, &warnings);
      for (std::size_t i = 0; i < values.size(); ++i) g.at(missing[c][i], c) = values[i];
      if (trace) {
        double sum = 0.0;
        for (std::size_t r = 0; r < g.rows; ++r) sum += g.at(r, c);
        means.push_back(sum / static_cast<double>(g.rows));
      }
    }
    if (trace) trace->means.push_back(std::move(means));
  }
  if (trace) trace->warnings.assign(warnings.begin(), warnings.end());

  Dataset out = d;
  for (auto c : incomplete) {
    for (auto r : missing[c]) out.set(r, c, g.at(r, c));
  }
  return out;
}

}  // namespace crowdimpute
