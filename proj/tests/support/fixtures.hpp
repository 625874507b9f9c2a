#pragma once

// Shared helpers for the unit and acceptance suites: independent reference
// computations and small dataset builders.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "crowdimpute/dataset.hpp"
#include "crowdimpute/imputation.hpp"
#include "crowdimpute/synthetic.hpp"

namespace fixtures {

namespace ci = crowdimpute;

/// Solves (X'X) b = X'y by Gauss-Jordan elimination with partial pivoting in
/// long double. X is row-major, rows x cols.
inline std::vector<double> normal_equations(const std::vector<std::vector<double>>& x,
                                            const std::vector<double>& y) {
  const std::size_t p = x.front().size();
  std::vector<std::vector<long double>> a(p, std::vector<long double>(p + 1, 0.0L));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = 0; c < p; ++c) a[r][c] += static_cast<long double>(x[i][r]) * x[i][c];
      a[r][p] += static_cast<long double>(x[i][r]) * y[i];
    }
  }
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < p; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const long double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= p; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> b(p);
  for (std::size_t r = 0; r < p; ++r) b[r] = static_cast<double>(a[r][p] / a[r][r]);
  return b;
}

/// Type-7 quantile straight from its definition: h = (n - 1) p,
/// x[floor(h)] + (h - floor(h)) (x[floor(h) + 1] - x[floor(h)]).
inline double type7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - std::floor(h)) * (v[hi] - v[lo]);
}

/// Observed row whose prediction is nearest to `target`; lowest row on ties.
inline std::size_t nearest_row(const std::vector<double>& predictions, const std::vector<std::size_t>& rows,
                               double target) {
  std::size_t best = rows.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (auto r : rows) {
    const double d = std::fabs(predictions[r] - target);
    if (d < best_d) {
      best_d = d;
      best = r;
    }
  }
  return best;
}

/// Builds an imputation set over `base` (whose missing cells are `cells`, in
/// row-major order) from explicit per-cell value lists.
inline ci::ImputationSet make_set(const ci::Dataset& base, const std::vector<std::vector<double>>& values,
                                  ci::Provenance provenance) {
  ci::ImputationSet set;
  set.provenance = provenance;
  set.cells = base.missing_cells();
  const std::size_t m = values.front().size();
  set.completed.assign(m, base);
  for (std::size_t i = 0; i < set.cells.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) set.completed[j].set(set.cells[i].row, set.cells[i].column, values[i][j]);
  }
  set.values = values;
  return set;
}

/// 30 values whose type-7 p25, median and p75 are exactly lo, med and hi.
inline std::vector<double> thirty_with_quartiles(double lo, double med, double hi) {
  std::vector<double> v(30);
  for (std::size_t i = 0; i < 30; ++i) v[i] = i <= 8 ? lo : (i <= 15 ? med : hi);
  return v;
}

/// `a` votes for the first category (index 0) and `b` for the second.
inline std::vector<double> votes(std::size_t a, std::size_t b) {
  std::vector<double> v(a, 0.0);
  v.insert(v.end(), b, 1.0);
  return v;
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::uint64_t counter = 0;
  std::random_device rd;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("crowdimpute-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(++counter));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// age (3-19) and gender (M/F) columns of the lung-function stand-in.
inline ci::Dataset age_gender(std::size_t rows, std::uint64_t seed) {
  const auto full = ci::fev_like(rows, seed);
  ci::Schema s;
  s.columns = {full.column(0), full.column(3)};
  ci::Dataset d(s, rows);
  for (std::size_t r = 0; r < rows; ++r) {
    d.set(r, 0, full.value(r, 0));
    d.set(r, 1, full.value(r, 3));
  }
  return d;
}

}  // namespace fixtures
