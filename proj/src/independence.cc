// Apache License, Version 2.0, refer to LICENSE.txt

#include "bnpgof/independence.hh"

#include <cmath>

#include "bnpgof/error.hh"
#include "bnpgof/mc_engine.hh"

namespace bnpgof {

GridProbabilities grid_probabilities(const Table& cell) {
  GridProbabilities g{cell, std::vector<double>(cell.rows, 0.0),
                      std::vector<double>(cell.cols, 0.0)};
  for (std::size_t j = 0; j < cell.rows; ++j) {
    for (std::size_t k = 0; k < cell.cols; ++k) {
      g.row[j] += cell(j, k);
      g.col[k] += cell(j, k);
    }
  }
  return g;
}

GridProbabilities grid_probabilities(const DiscreteRandomMeasure<Point2>& realization,
                                     const Grid& grid) {
  return grid_probabilities(measure_on_partition(realization, grid));
}

std::vector<double> row_margin_direct(const DiscreteRandomMeasure<Point2>& realization,
                                      const Partition& x) {
  std::vector<double> out(x.bins(), 0.0);
  for (std::size_t i = 0; i < realization.size(); ++i) {
    out[x.bin_of(realization.atoms[i].x)] += realization.weights[i];
  }
  return out;
}

std::vector<double> col_margin_direct(const DiscreteRandomMeasure<Point2>& realization,
                                      const Partition& y) {
  std::vector<double> out(y.bins(), 0.0);
  for (std::size_t i = 0; i < realization.size(); ++i) {
    out[y.bin_of(realization.atoms[i].y)] += realization.weights[i];
  }
  return out;
}

double independence_statistic(double alpha, const GridProbabilities& g,
                              ZeroMarginPolicy policy) {
  if (g.row.size() != g.cell.rows || g.col.size() != g.cell.cols) {
    throw InvalidParameter("margins do not match the grid");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < g.cell.rows; ++j) {
    for (std::size_t k = 0; k < g.cell.cols; ++k) {
      const double e = g.row[j] * g.col[k];
      if (!(e > 0.0)) {
        if (policy == ZeroMarginPolicy::kThrow) {
          throw ZeroMargin("row " + std::to_string(j) + " or column " + std::to_string(k) +
                           " has zero margin");
        }
        continue;
      }
      const double d = g.cell(j, k) - e;
      sum += d * d / e;
    }
  }
  return alpha * sum;
}

DistanceDraws independence_draws(const DpParams2& params, const Grid& grid,
                                 const McSettings& mc, Table* mean_cells) {
  Table base_cells;
  if (mc.bin_masses) base_cells = bin_probabilities(params.base, grid);

  const auto cells = run_replicates<Table>(
      mc.replicates, mc.seed, mc.workers, [&](std::size_t, RngStream& rng) {
        if (mc.bin_masses) {
          Table t(grid.x.bins(), grid.y.bins());
          t.values = sample_bin_masses(params.alpha, base_cells.values, mc.n_atoms, rng);
          return t;
        }
        return measure_on_partition(sample_dp(params, mc.n_atoms, mc.repr, rng), grid);
      });

  DistanceDraws out;
  out.values.reserve(cells.size());
  Table mean(grid.x.bins(), grid.y.bins());
  for (const Table& t : cells) {
    out.values.push_back(
        independence_statistic(params.alpha, grid_probabilities(t), ZeroMarginPolicy::kLimit));
    for (std::size_t i = 0; i < t.values.size(); ++i) mean.values[i] += t.values[i];
  }
  for (double& v : mean.values) v /= static_cast<double>(cells.size());
  const GridProbabilities g = grid_probabilities(mean);
  out.mean_bins = g.row;
  if (mean_cells) *mean_cells = mean;
  return out;
}

CalibrationResult calibrate_independence(const CalibrationSpec& spec,
                                         const BivariateMeasure& base, const Grid& grid,
                                         const McSettings& mc) {
  return calibrate(spec, [&](double alpha) {
    const DistanceDraws d = independence_draws({alpha, base}, grid, mc);
    return empirical_probability(EmpiricalSample(d.values), spec.c);
  });
}

TestReport independence_test(std::span<const Point2> data, const Grid& grid,
                             const BivariateMeasure& base, const TestSettings& settings) {
  if (data.empty()) throw InvalidParameter("data must be nonempty");
  if (!(settings.c > 0.0)) throw InvalidParameter("c must be > 0");
  if (settings.q && !(*settings.q > 0.0 && *settings.q < 1.0)) {
    throw InvalidParameter("q must lie in (0, 1)");
  }
  const GridProbabilities base_grid = grid_probabilities(bin_probabilities(base, grid));
  for (double v : base_grid.row) {
    if (!(v > 0.0)) throw ZeroMargin("a row of the grid has zero probability under the base");
  }
  for (double v : base_grid.col) {
    if (!(v > 0.0)) {
      throw ZeroMargin("a column of the grid has zero probability under the base");
    }
  }
  const McSettings& mc = settings.mc;

  TestReport report;
  report.test = "indep";
  McSettings cal_mc = mc;
  cal_mc.seed = purpose_seed(mc.seed, SeedPurpose::kCalibration);
  auto prior_probability = [&](double alpha) {
    const DistanceDraws d = independence_draws({alpha, base}, grid, cal_mc);
    return empirical_probability(EmpiricalSample(d.values), settings.c);
  };
  resolve_alpha(settings, prior_probability, report);

  const DpParams2 posterior = posterior_params({report.alpha, base}, data);
  McSettings post_mc = mc;
  post_mc.seed = purpose_seed(mc.seed, SeedPurpose::kPosterior);
  Table mean_cells;
  const DistanceDraws draws = independence_draws(posterior, grid, post_mc, &mean_cells);

  const GridProbabilities mean = grid_probabilities(mean_cells);
  report.alpha_star = posterior.alpha;
  report.probability = empirical_probability(EmpiricalSample(draws.values), settings.c);
  report.standard_error =
      std::sqrt(report.probability * (1.0 - report.probability) /
                static_cast<double>(mc.replicates));
  report.reject = report.probability < report.q;
  report.replicates = mc.replicates;
  report.seed = mc.seed;
  report.n_atoms = mc.n_atoms;
  report.m = data.size();
  report.edges.assign(grid.x.edges().begin(), grid.x.edges().end());
  report.y_edges.assign(grid.y.edges().begin(), grid.y.edges().end());
  report.posterior_grid = mean.cell;
  report.row_margin = mean.row;
  report.col_margin = mean.col;
  report.dof = (grid.x.bins() - 1) * (grid.y.bins() - 1);
  return report;
}

}  // namespace bnpgof
