#include "crowdimpute/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "crowdimpute/error.hpp"
#include "crowdimpute/random.hpp"
#include "crowdimpute/text.hpp"

namespace crowdimpute {

namespace {

ColumnSpec continuous(std::string name, std::string unit, std::optional<ValueRange> range = std::nullopt) {
  ColumnSpec c;
  c.name = std::move(name);
  c.unit = std::move(unit);
  c.valid_range = range;
  return c;
}

ColumnSpec categorical(std::string name, std::vector<std::string> labels) {
  ColumnSpec c;
  c.name = std::move(name);
  c.kind = ColumnKind::categorical;
  c.categories = std::move(labels);
  return c;
}

}  // namespace

Schema fev_schema() {
  Schema s;
  s.columns = {continuous("age", "years", ValueRange{3, 19}), continuous("fev", "litres"),
               continuous("height", "inches"), categorical("gender", {"M", "F"}),
               categorical("smoke", {"No", "Yes"})};
  return s;
}

Dataset fev_like(std::size_t rows, std::uint64_t seed) {
  if (rows < 4) throw PreconditionError("fev_like needs at least 4 rows");
  Rng rng(seed);
  Dataset d(fev_schema(), rows);

  // 51.4% males, in shuffled order.
  const auto males = static_cast<std::size_t>(std::lround(0.514 * static_cast<double>(rows)));
  std::vector<std::size_t> gender(rows, 1);
  std::fill_n(gender.begin(), males, 0);
  for (std::size_t i = rows - 1; i > 0; --i) std::swap(gender[i], gender[rng.index(i + 1)]);

  std::vector<double> fev(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const bool male = gender[r] == 0;
    const double age = std::clamp(std::round(rng.normal(9.9, 3.0)), 3.0, 19.0);
    const double growth_stop = male ? 16.0 : 13.5;
    double height = 38.0 + 2.1 * std::min(age, growth_stop) + (male ? 0.8 : 0.0) + rng.normal(0.0, 2.3);
    height = std::clamp(round_to(height * 2.0, 0) / 2.0, 45.0, 74.0);
    const double smoke_p = age >= 12 ? 0.28 : 0.03;
    const bool smokes = rng.bernoulli(smoke_p);
    fev[r] = std::exp(-2.3 + 0.0525 * height + 0.015 * age + (male ? 0.03 : 0.0) -
                      (smokes ? 0.05 : 0.0) + rng.normal(0.0, 0.13));
    d.set(r, 0, age);
    d.set(r, 2, height);
    d.set(r, 3, static_cast<double>(gender[r]));
    d.set(r, 4, smokes ? 1.0 : 0.0);
  }

  // Shift each gender's FEV onto its target average, then pin the extremes.
  for (std::size_t g = 0; g < 2; ++g) {
    const double target = g == 0 ? 2.81 : 2.47;
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (gender[r] == g) {
        sum += fev[r];
        ++n;
      }
    }
    if (n == 0) continue;
    const double shift = target - sum / static_cast<double>(n);
    for (std::size_t r = 0; r < rows; ++r) {
      if (gender[r] == g) fev[r] += shift;
    }
  }
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return fev[a] < fev[b]; });
  for (auto& v : fev) v = std::clamp(v, 0.85, 5.7);
  fev[order.front()] = 0.791;
  fev[order.back()] = 5.793;
  for (std::size_t r = 0; r < rows; ++r) d.set(r, 1, round_to(fev[r], 3));
  return d;
}

Dataset linear_gaussian(std::size_t rows, std::size_t predictors, double noise_sd, std::uint64_t seed) {
  if (predictors < 1) throw PreconditionError("linear_gaussian needs at least one predictor");
  Schema s;
  for (std::size_t j = 1; j <= predictors; ++j) s.columns.push_back(continuous("x" + std::to_string(j), ""));
  s.columns.push_back(continuous("y", ""));
  Dataset d(s, rows);
  Rng rng(seed);
  for (std::size_t r = 0; r < rows; ++r) {
    double y = 1.0;
    for (std::size_t j = 0; j < predictors; ++j) {
      const double x = rng.normal(0.0, 1.0);
      d.set(r, j, x);
      y += 0.5 * static_cast<double>(j + 1) * x;
    }
    d.set(r, predictors, y + rng.normal(0.0, noise_sd));
  }
  return d;
}

}  // namespace crowdimpute
