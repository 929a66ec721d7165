// Apache License, Version 2.0, refer to LICENSE.txt

// Command-line front end. parse_config turns argv (plus an optional JSON
// config file) into a RunConfig; run executes it and writes the report.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bnpgof/measures.hh"

namespace bnpgof {

inline constexpr const char* kToolVersion = "1.0.0";

struct RunConfig {
  std::string command;

  // Distributions.
  std::string null_spec = "normal:0,1";
  std::optional<std::string> base_spec;  // defaults to the null
  std::optional<std::string> f_spec;     // kl-moments comparison law
  std::string prior_spec = "gamma:1.7,2550";
  std::string family = "exp";
  std::string bivariate_base = "bvnormal:0,0,1,0,1";

  // Bins.
  std::vector<double> edges;
  std::vector<double> x_edges;
  std::vector<double> y_edges;
  std::optional<std::size_t> k;

  // Calibration.
  std::optional<double> c;
  std::optional<double> q;
  std::optional<double> alpha;
  double alpha_lo = 1e-2;
  double alpha_hi = 1e4;
  double tolerance = 0.01;
  std::size_t max_iterations = 40;

  // Monte Carlo.
  std::size_t n_atoms = 2000;
  std::size_t replicates = 2000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string repr = "decreasing";
  bool bin_masses = false;

  // Composite test.
  std::size_t m_theta = 1000;
  std::string sampler = "conjugate";
  double mh_step = 0.0;
  std::size_t burn_in = 500;

  // Data: a CSV file, or a simulated sample of size m.
  std::optional<std::string> data_path;
  bool header = false;
  std::optional<std::string> simulate_spec;
  std::size_t m = 0;

  // table1 grid.
  std::vector<double> alphas = {1, 10, 50, 100, 200, 300, 500};
  std::vector<double> cs = {1, 2, 3, 4, 5, 6};

  // Output.
  std::optional<std::string> output_path;
  std::string format = "json";
};

// Throws UsageError naming the offending field. Flags override keys of the
// JSON object given with --config.
RunConfig parse_config(const std::vector<std::string>& args);

// Executes the command and writes the report to out (or to
// config.output_path). Returns the process exit status.
int run(const RunConfig& config, std::ostream& out);

// parse_config + run with error reporting on err. Exit status 0 on
// completion, 2 on usage errors, 1 on any other failure.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Data CSV readers; errors carry the file name and line number.
std::vector<double> read_column(const std::string& path, bool header);
std::vector<Point2> read_pairs(const std::string& path, bool header);

}  // namespace bnpgof
