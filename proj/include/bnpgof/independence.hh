// Apache License, Version 2.0, refer to LICENSE.txt

// Chi-squared test of independence on an r x s grid, with the posterior
// Dirichlet process over paired data.

#pragma once

#include <span>
#include <vector>

#include "bnpgof/chisq.hh"
#include "bnpgof/dp_sim.hh"
#include "bnpgof/measures.hh"

namespace bnpgof {

struct GridProbabilities {
  Table cell;
  std::vector<double> row;  // row[j] = sum_k cell(j, k)
  std::vector<double> col;  // col[k] = sum_j cell(j, k)
};

GridProbabilities grid_probabilities(const Table& cell);
GridProbabilities grid_probabilities(const DiscreteRandomMeasure<Point2>& realization,
                                     const Grid& grid);

// Margins of the realization computed atom by atom, without the cells.
std::vector<double> row_margin_direct(const DiscreteRandomMeasure<Point2>& realization,
                                      const Partition& x);
std::vector<double> col_margin_direct(const DiscreteRandomMeasure<Point2>& realization,
                                      const Partition& y);

enum class ZeroMarginPolicy {
  kThrow,  // ZeroMargin error
  kLimit,  // a zero row or column contributes nothing, its terms being 0/0
           // with a numerator that vanishes faster
};

// alpha * sum_jk (cell - row_j col_k)^2 / (row_j col_k).
double independence_statistic(double alpha, const GridProbabilities& g,
                              ZeroMarginPolicy policy = ZeroMarginPolicy::kThrow);

// N draws of the statistic with P ~ DP(params).
DistanceDraws independence_draws(const DpParams2& params, const Grid& grid,
                                 const McSettings& mc, Table* mean_cells = nullptr);

CalibrationResult calibrate_independence(const CalibrationSpec& spec,
                                         const BivariateMeasure& base, const Grid& grid,
                                         const McSettings& mc);

TestReport independence_test(std::span<const Point2> data, const Grid& grid,
                             const BivariateMeasure& base, const TestSettings& settings);

}  // namespace bnpgof
