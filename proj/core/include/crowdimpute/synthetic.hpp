#pragma once

#include <cstddef>
#include <cstdint>

#include "crowdimpute/dataset.hpp"

namespace crowdimpute {

/// Schema of the lung-function table: age (years, 3-19), fev (litres),
/// height (inches), gender (M/F) and smoke (No/Yes).
Schema fev_schema();

/// Seeded stand-in for the 654-row lung-function study: integer ages 3-19
/// with median 10, 51% males, height growing with age, FEV rising with
/// height, smokers mostly among teenagers. FEV spans 0.791-5.793 and averages
/// about 2.5 for females and 2.8 for males.
Dataset fev_like(std::size_t rows, std::uint64_t seed);

/// x1..xp ~ N(0, 1) and y = 1 + sum_j (j * 0.5) x_j + N(0, noise_sd^2).
Dataset linear_gaussian(std::size_t rows, std::size_t predictors, double noise_sd, std::uint64_t seed);

}  // namespace crowdimpute
