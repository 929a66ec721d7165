// Apache License, Version 2.0, refer to LICENSE.txt

#include "bnpgof/cli.hh"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "bnpgof/chisq.hh"
#include "bnpgof/dp_sim.hh"
#include "bnpgof/error.hh"
#include "bnpgof/independence.hh"
#include "bnpgof/kl.hh"
#include "bnpgof/mc_engine.hh"
#include "bnpgof/report_json.hh"
#include "json.hpp"

namespace bnpgof {

namespace {

using json = nlohmann::ordered_json;

// Seed path tag for --simulate data, kept apart from the test sub-seeds.
constexpr std::uint64_t kDataSeedTag = 99;

const std::vector<std::string> kCommands = {"calibrate", "gof", "gof-composite",
                                            "indep",     "dp-sample", "kl-moments",
                                            "asymptotics", "table1"};

class HelpRequest : public UsageError {
 public:
  using UsageError::UsageError;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_double(const std::string& text, double& out) {
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, out);
  return !text.empty() && res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const auto comma = line.find(',', pos);
    out.push_back(trim(std::string_view(line).substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos)));
    if (comma == std::string::npos) return out;
    pos = comma + 1;
  }
}

// Calls row(fields, line_number) for every data line of a CSV file.
template <class Row>
void for_each_record(const std::string& path, bool header, std::size_t columns, Row row) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open data file '" + path + "'");
  std::string line;
  std::size_t line_number = 0;
  bool skipped_header = !header;
  while (std::getline(in, line)) {
    ++line_number;
    if (line_number == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != columns) {
      throw UsageError(path + ":" + std::to_string(line_number) + ": expected " +
                       std::to_string(columns) + " column(s), found " +
                       std::to_string(fields.size()));
    }
    std::vector<double> values(columns);
    for (std::size_t i = 0; i < columns; ++i) {
      if (!parse_double(fields[i], values[i])) {
        throw UsageError(path + ":" + std::to_string(line_number) +
                         ": malformed number '" + fields[i] + "'");
      }
    }
    row(values);
  }
}

void require_increasing(const std::vector<double>& edges, const std::string& flag) {
  if (edges.empty()) throw UsageError(flag + " needs at least one cut point");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i - 1] < edges[i])) {
      throw UsageError(flag + " must be strictly increasing");
    }
  }
}

template <class Parse>
void require_spec(const std::string& text, const std::string& flag, Parse parse) {
  try {
    parse(text);
  } catch (const Error& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

// Appends flags for keys of the JSON config that the command line lacks.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return args;

  std::ifstream in(*path);
  if (!in) throw UsageError("cannot open config file '" + *path + "'");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config file '" + *path + "': " + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");

  auto present = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  auto scalar = [&](const json& v, const std::string& key) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number()) {
      std::ostringstream s;
      s.precision(17);
      s << v.get<double>();
      return s.str();
    }
    throw UsageError("config key '" + key + "' has an unsupported value");
  };

  const bool has_command =
      !args.empty() && std::find(kCommands.begin(), kCommands.end(), args[0]) != kCommands.end();
  for (const auto& [key, value] : cfg.items()) {
    if (key == "command") {
      if (!has_command) args.insert(args.begin(), scalar(value, key));
      continue;
    }
    const std::string flag = "--" + key;
    if (present(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ",";
        joined += scalar(v, key);
      }
      args.push_back(flag + "=" + joined);
    } else if (!value.is_null()) {
      args.push_back(flag + "=" + scalar(value, key));
    }
  }
  return args;
}

// ---------------------------------------------------------------- helpers

Representation representation(const RunConfig& cfg) {
  return cfg.repr == "finite" ? Representation::kFinite : Representation::kDecreasing;
}

McSettings mc_settings(const RunConfig& cfg) {
  McSettings mc;
  mc.n_atoms = cfg.n_atoms;
  mc.replicates = cfg.replicates;
  mc.seed = cfg.seed;
  mc.workers = cfg.workers;
  mc.repr = representation(cfg);
  mc.bin_masses = cfg.bin_masses;
  return mc;
}

TestSettings test_settings(const RunConfig& cfg) {
  TestSettings s;
  s.c = cfg.c.value_or(0.0);
  s.q = cfg.q;
  s.alpha = cfg.alpha;
  s.search.alpha_lo = cfg.alpha_lo;
  s.search.alpha_hi = cfg.alpha_hi;
  s.search.tolerance = cfg.tolerance;
  s.search.max_iterations = cfg.max_iterations;
  s.mc = mc_settings(cfg);
  return s;
}

std::vector<double> load_column(const RunConfig& cfg) {
  if (cfg.data_path) return read_column(*cfg.data_path, cfg.header);
  RngStream rng(derive_seed(cfg.seed, {kDataSeedTag}));
  return parse_measure(*cfg.simulate_spec).sample(cfg.m, rng);
}

std::vector<Point2> load_pairs(const RunConfig& cfg) {
  if (cfg.data_path) return read_pairs(*cfg.data_path, cfg.header);
  RngStream rng(derive_seed(cfg.seed, {kDataSeedTag}));
  return parse_bivariate_measure(*cfg.simulate_spec).sample(cfg.m, rng);
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_csv(double v) {
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

json config_json(const RunConfig& cfg) {
  // --workers and --output are left out: neither changes any result.
  json j;
  j["command"] = cfg.command;
  j["seed"] = cfg.seed;
  j["replicates"] = cfg.replicates;
  j["n_atoms"] = cfg.n_atoms;
  j["repr"] = cfg.repr;
  j["bin_masses"] = cfg.bin_masses;
  const std::string& c = cfg.command;
  if (c == "calibrate" || c == "gof" || c == "table1" || c == "asymptotics") {
    j["null"] = cfg.null_spec;
    j["base"] = cfg.base_spec.value_or(cfg.null_spec);
  }
  if (c == "dp-sample" || c == "kl-moments") j["base"] = cfg.base_spec.value_or(cfg.null_spec);
  if (c == "kl-moments") j["f"] = cfg.f_spec.value_or(cfg.null_spec);
  if (c == "indep") j["base"] = cfg.bivariate_base;
  if (c == "gof-composite") {
    j["family"] = cfg.family;
    j["prior"] = cfg.prior_spec;
    j["k"] = cfg.k.value_or(4);
    j["m_theta"] = cfg.m_theta;
    j["sampler"] = cfg.sampler;
    if (cfg.sampler == "mh") {
      j["mh_step"] = round_sig(cfg.mh_step);
      j["burn_in"] = cfg.burn_in;
    }
  }
  if (!cfg.edges.empty()) j["edges"] = round_sig(cfg.edges);
  if (c == "indep") {
    j["x_edges"] = round_sig(cfg.x_edges);
    j["y_edges"] = round_sig(cfg.y_edges);
  }
  if (cfg.c) j["c"] = round_sig(*cfg.c);
  if (cfg.q) j["q"] = round_sig(*cfg.q);
  if (cfg.alpha) j["alpha"] = round_sig(*cfg.alpha);
  if (c == "calibrate" || ((c == "gof" || c == "gof-composite" || c == "indep") && !cfg.alpha)) {
    j["alpha_lo"] = round_sig(cfg.alpha_lo);
    j["alpha_hi"] = round_sig(cfg.alpha_hi);
    j["tolerance"] = round_sig(cfg.tolerance);
    j["max_iterations"] = cfg.max_iterations;
  }
  if (cfg.data_path) {
    j["data"] = *cfg.data_path;
    j["header"] = cfg.header;
  }
  if (cfg.simulate_spec) j["simulate"] = *cfg.simulate_spec;
  if (cfg.simulate_spec || c == "asymptotics") j["m"] = cfg.m;
  if (c == "table1") {
    j["alphas"] = round_sig(cfg.alphas);
    j["cs"] = round_sig(cfg.cs);
  }
  j["format"] = cfg.format;
  return j;
}

json envelope(const RunConfig& cfg, json result) {
  json j;
  j["tool"] = "bnpgof";
  j["version"] = kToolVersion;
  j["generated_at"] = timestamp();
  j["config"] = config_json(cfg);
  j["result"] = std::move(result);
  return j;
}

// ---------------------------------------------------------------- commands

void emit_json(const RunConfig& cfg, json result, std::ostream& out) {
  out << envelope(cfg, std::move(result)).dump(2) << "\n";
}

void cmd_calibrate(const RunConfig& cfg, std::ostream& out) {
  const Measure f0 = parse_measure(cfg.null_spec);
  const Measure h = parse_measure(cfg.base_spec.value_or(cfg.null_spec));
  CalibrationSpec spec;
  spec.c = *cfg.c;
  spec.q = *cfg.q;
  spec.alpha_lo = cfg.alpha_lo;
  spec.alpha_hi = cfg.alpha_hi;
  spec.tolerance = cfg.tolerance;
  spec.max_iterations = cfg.max_iterations;
  const CalibrationResult r =
      calibrate_alpha(spec, h, f0, Partition(cfg.edges), mc_settings(cfg));
  if (cfg.format == "csv") {
    out << "alpha,probability\n";
    for (const auto& s : r.trace) {
      out << format_csv(s.alpha) << "," << format_csv(s.probability) << "\n";
    }
    return;
  }
  json j = calibration_json(r);
  j["achieved_prob"] = j["probability"];
  emit_json(cfg, std::move(j), out);
}

void emit_report(const RunConfig& cfg, const TestReport& report, std::ostream& out) {
  if (cfg.format == "csv") {
    out << "bin,lower,upper,observed,posterior,null\n";
    const Partition p(report.edges);
    for (std::size_t i = 0; i < p.bins(); ++i) {
      out << i << "," << format_csv(p.lower(i)) << "," << format_csv(p.upper(i)) << ","
          << format_csv(report.observed_bins.at(i)) << ","
          << format_csv(report.posterior_bins.at(i)) << "," << format_csv(report.null_bins.at(i))
          << "\n";
    }
    return;
  }
  emit_json(cfg, report_to_json(report), out);
}

void cmd_gof(const RunConfig& cfg, std::ostream& out) {
  const std::vector<double> data = load_column(cfg);
  const Measure f0 = parse_measure(cfg.null_spec);
  TestReport report = gof_simple(data, f0, Partition(cfg.edges), test_settings(cfg));
  emit_report(cfg, report, out);
}

void cmd_composite(const RunConfig& cfg, std::ostream& out) {
  const std::vector<double> data = load_column(cfg);
  CompositeSpec spec;
  spec.family = cfg.family == "normal-mean" ? Family::kNormalMean : Family::kExponential;
  spec.prior = parse_measure(cfg.prior_spec);
  spec.m_theta = cfg.m_theta;
  spec.sampler = cfg.sampler == "mh" ? ThetaSampler::kMetropolis : ThetaSampler::kConjugate;
  spec.mh_step = cfg.mh_step;
  spec.burn_in = cfg.burn_in;
  spec.k = cfg.k.value_or(4);
  std::optional<Partition> partition;
  if (!cfg.edges.empty()) partition = Partition(cfg.edges);
  emit_report(cfg, gof_composite(data, spec, partition, test_settings(cfg)), out);
}

void cmd_indep(const RunConfig& cfg, std::ostream& out) {
  const std::vector<Point2> data = load_pairs(cfg);
  const Grid grid{Partition(cfg.x_edges), Partition(cfg.y_edges)};
  const TestReport report = independence_test(
      data, grid, parse_bivariate_measure(cfg.bivariate_base), test_settings(cfg));
  if (cfg.format == "csv") {
    const Table& t = *report.posterior_grid;
    out << "row,col,posterior\n";
    for (std::size_t j = 0; j < t.rows; ++j) {
      for (std::size_t k = 0; k < t.cols; ++k) {
        out << j << "," << k << "," << format_csv(t(j, k)) << "\n";
      }
    }
    return;
  }
  emit_json(cfg, report_to_json(report), out);
}

void cmd_dp_sample(const RunConfig& cfg, std::ostream& out) {
  const Measure base = parse_measure(cfg.base_spec.value_or(cfg.null_spec));
  DpParams1 params{*cfg.alpha, base};
  if (cfg.data_path || cfg.simulate_spec) params = posterior_params(params, load_column(cfg));
  RngStream rng(cfg.seed, {0});
  const auto r = sample_dp(params, cfg.n_atoms, representation(cfg), rng);
  if (cfg.format == "json") {
    json j;
    j["alpha"] = round_sig(params.alpha);
    j["base"] = params.base.spec();
    j["atoms"] = round_sig(r.atoms);
    j["weights"] = round_sig(r.weights);
    emit_json(cfg, std::move(j), out);
    return;
  }
  out << "atom,weight\n";
  for (std::size_t i = 0; i < r.size(); ++i) {
    out << format_csv(r.atoms[i]) << "," << format_csv(r.weights[i]) << "\n";
  }
}

json moment_json(double analytic_mean, double analytic_var, const EmpiricalSample& s) {
  json j;
  j["analytic_mean"] = round_sig(analytic_mean);
  j["mc_mean"] = round_sig(s.mean());
  j["mc_mean_se"] = round_sig(std::sqrt(s.variance() / static_cast<double>(s.size())));
  j["analytic_variance"] = round_sig(analytic_var);
  j["mc_variance"] = round_sig(s.variance());
  return j;
}

void cmd_kl_moments(const RunConfig& cfg, std::ostream& out) {
  const Measure base = parse_measure(cfg.base_spec.value_or(cfg.null_spec));
  const Measure f = parse_measure(cfg.f_spec.value_or(cfg.null_spec));
  const double alpha = *cfg.alpha;
  const std::size_t n = cfg.n_atoms;
  // One atom set, held fixed; the moments are over the weights only.
  RngStream atom_rng(derive_seed(cfg.seed, {kDataSeedTag}));
  const std::vector<double> atoms = base.sample(n, atom_rng);
  const InterleavedPartition ip = interleave(atoms, f);
  const auto pairs = run_replicates<std::pair<double, double>>(
      cfg.replicates, cfg.seed, cfg.workers, [&](std::size_t, RngStream& rng) {
        DiscreteRandomMeasure<double> r;
        r.atoms = atoms;
        Weights w = sample_dirichlet_log_weights(alpha, n, rng);
        r.weights = std::move(w.weights);
        r.log_weights = std::move(w.log_weights);
        return std::make_pair(kl_p_to_f(r, ip), kl_f_to_p(r, ip));
      });
  std::vector<double> a, b;
  for (const auto& [x, y] : pairs) {
    a.push_back(x);
    b.push_back(y);
  }
  json j;
  j["alpha"] = round_sig(alpha);
  j["n"] = n;
  j["ties_perturbed"] = ip.ties_perturbed;
  j["kl_p_to_f"] = moment_json(mean_kl_p_to_f(alpha, n, ip.q), var_kl_p_to_f(alpha, n, ip.q),
                               EmpiricalSample(a));
  j["kl_f_to_p"] = moment_json(mean_kl_f_to_p(alpha, n, ip.q), var_kl_f_to_p(alpha, n, ip.q),
                               EmpiricalSample(b));
  emit_json(cfg, std::move(j), out);
}

void cmd_asymptotics(const RunConfig& cfg, std::ostream& out) {
  const Measure base = parse_measure(cfg.base_spec.value_or(cfg.null_spec));
  const Partition partition(cfg.edges);
  DpParams1 params{*cfg.alpha, base};
  if (cfg.m > 0) {
    RngStream rng(derive_seed(cfg.seed, {kDataSeedTag}));
    const Measure law = cfg.simulate_spec ? parse_measure(*cfg.simulate_spec) : base;
    params = posterior_params(params, law.sample(cfg.m, rng));
  }
  // D(P, H) under the prior, D(P*_m, H*_m) under the posterior.
  const std::vector<double> ref = bin_probabilities(params.base, partition);
  const DistanceDraws d = distance_draws(params, ref, partition, mc_settings(cfg));
  const EmpiricalSample sample(d.values);
  const double dof = static_cast<double>(partition.bins() - 1);
  const auto sorted = sample.sorted();
  const double count = static_cast<double>(sorted.size());

  if (cfg.format == "csv") {
    out << "draw,chisq_ref_quantile\n";
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      const double u = (static_cast<double>(i) + 0.5) / count;
      out << format_csv(sorted[i]) << "," << format_csv(chi_squared_quantile(u, dof)) << "\n";
    }
    return;
  }
  json j;
  j["alpha_star"] = round_sig(params.alpha);
  j["dof"] = partition.bins() - 1;
  j["ks_distance"] =
      round_sig(ks_distance(sample, [&](double x) { return chi_squared_cdf(x, dof); }));
  j["mean"] = round_sig(sample.mean());
  j["variance"] = round_sig(sample.variance());
  j["reference_mean"] = round_sig(dof);
  j["reference_variance"] = round_sig(2.0 * dof);
  emit_json(cfg, std::move(j), out);
}

void cmd_table1(const RunConfig& cfg, std::ostream& out) {
  const Measure f0 = parse_measure(cfg.null_spec);
  const Measure h = parse_measure(cfg.base_spec.value_or(cfg.null_spec));
  const Partition partition(cfg.edges);
  std::vector<std::vector<double>> grid;
  for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
    McSettings mc = mc_settings(cfg);
    mc.seed = derive_seed(cfg.seed, {a});
    const EmpiricalSample s(prior_distance_draws({cfg.alphas[a], h}, f0, partition, mc).values);
    std::vector<double> row;
    for (double c : cfg.cs) row.push_back(empirical_probability(s, c));
    grid.push_back(std::move(row));
  }
  if (cfg.format == "csv") {
    out << "alpha";
    for (double c : cfg.cs) out << ",c=" << format_csv(c);
    out << "\n";
    for (std::size_t a = 0; a < grid.size(); ++a) {
      out << format_csv(cfg.alphas[a]);
      for (double v : grid[a]) out << "," << format_csv(v);
      out << "\n";
    }
    return;
  }
  json j;
  j["alphas"] = round_sig(cfg.alphas);
  j["cs"] = round_sig(cfg.cs);
  json rows = json::array();
  for (const auto& row : grid) rows.push_back(round_sig(row));
  j["probabilities"] = std::move(rows);
  emit_json(cfg, std::move(j), out);
}

void add_mc_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--seed", cfg.seed, "Master seed");
  sub->add_option("--replicates", cfg.replicates, "Monte Carlo replicates N")
      ->check(CLI::PositiveNumber);
  sub->add_option("--workers", cfg.workers, "Worker threads; never changes results")
      ->check(CLI::PositiveNumber);
  sub->add_option("--n-atoms", cfg.n_atoms, "Atoms per realization")->check(CLI::PositiveNumber);
  sub->add_option("--repr", cfg.repr, "Weight representation")
      ->check(CLI::IsMember({"decreasing", "finite"}));
  sub->add_flag("--bin-masses", cfg.bin_masses,
                "Draw bin masses directly (same law, for large --n-atoms)");
  sub->add_option("--output", cfg.output_path, "Write the report here instead of stdout");
  sub->add_option("--format", cfg.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
}

void add_search_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--alpha-lo", cfg.alpha_lo, "Lower end of the alpha search bracket");
  sub->add_option("--alpha-hi", cfg.alpha_hi, "Upper end of the alpha search bracket");
  sub->add_option("--tolerance", cfg.tolerance, "Calibration tolerance on the probability");
  sub->add_option("--max-iterations", cfg.max_iterations, "Bisection iteration cap");
}

void add_data_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--data", cfg.data_path, "CSV data file");
  sub->add_flag("--header", cfg.header, "Skip the first row of the data file");
  sub->add_option("--simulate", cfg.simulate_spec, "Simulate the data from this law instead");
  sub->add_option("--m", cfg.m, "Size of the simulated sample");
}

void add_test_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--c", cfg.c, "Distance threshold c")->check(CLI::PositiveNumber);
  sub->add_option("--q", cfg.q, "Prior probability level q")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--alpha", cfg.alpha, "Fixed concentration parameter")
      ->check(CLI::PositiveNumber);
}

void validate(RunConfig& cfg, bool format_given) {
  const std::string& c = cfg.command;
  if (!format_given && (c == "dp-sample" || c == "asymptotics")) cfg.format = "csv";

  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw UsageError(what);
  };
  const bool is_test = c == "gof" || c == "gof-composite" || c == "indep";
  if (is_test) {
    need(cfg.c.has_value(), "--c is required");
    need(cfg.alpha || cfg.q, "--q is required unless --alpha is given");
    need(cfg.data_path.has_value() != cfg.simulate_spec.has_value(),
         "give exactly one of --data and --simulate");
  }
  if (c == "calibrate") {
    need(cfg.c && cfg.q, "--c and --q are required");
    need(!cfg.alpha, "--alpha is not accepted by calibrate");
  }
  if (c == "dp-sample" || c == "kl-moments" || c == "asymptotics") {
    need(cfg.alpha.has_value(), "--alpha is required");
    need(!(cfg.data_path && cfg.simulate_spec), "give at most one of --data and --simulate");
  }
  if (cfg.simulate_spec && c != "asymptotics") need(cfg.m > 0, "--simulate needs --m >= 1");
  if (c == "table1" && cfg.edges.empty()) cfg.edges = {-2, -1, 0, 1, 2, 3};

  if (c == "calibrate" || c == "gof" || c == "asymptotics" || c == "table1") {
    require_increasing(cfg.edges, "--edges");
  }
  if (c == "gof-composite" && !cfg.edges.empty()) require_increasing(cfg.edges, "--edges");
  if (c == "indep") {
    require_increasing(cfg.x_edges, "--x-edges");
    require_increasing(cfg.y_edges, "--y-edges");
  }
  if (c == "gof-composite") {
    need(cfg.family == "exp" || cfg.family == "normal-mean",
         "--family must be exp or normal-mean");
    need(cfg.sampler == "conjugate" || cfg.sampler == "mh", "--sampler must be conjugate or mh");
    need(!cfg.k || *cfg.k >= 2, "--k must be >= 2");
    need(cfg.m_theta >= 1, "--m-theta must be >= 1");
    require_spec(cfg.prior_spec, "--prior", parse_measure);
  }
  if (c == "table1") {
    need(!cfg.alphas.empty() && !cfg.cs.empty(), "--alphas and --cs must be nonempty");
  }

  if (c == "indep") {
    require_spec(cfg.bivariate_base, "--base", parse_bivariate_measure);
    if (cfg.simulate_spec) require_spec(*cfg.simulate_spec, "--simulate", parse_bivariate_measure);
  } else {
    require_spec(cfg.null_spec, "--null", parse_measure);
    if (cfg.base_spec) require_spec(*cfg.base_spec, "--base", parse_measure);
    if (cfg.f_spec) require_spec(*cfg.f_spec, "--f", parse_measure);
    if (cfg.simulate_spec) require_spec(*cfg.simulate_spec, "--simulate", parse_measure);
  }
}

}  // namespace

std::vector<double> read_column(const std::string& path, bool header) {
  std::vector<double> out;
  for_each_record(path, header, 1, [&](const std::vector<double>& v) { out.push_back(v[0]); });
  if (out.empty()) throw UsageError("data file '" + path + "' holds no values");
  return out;
}

std::vector<Point2> read_pairs(const std::string& path, bool header) {
  std::vector<Point2> out;
  for_each_record(path, header, 2,
                  [&](const std::vector<double>& v) { out.push_back({v[0], v[1]}); });
  if (out.empty()) throw UsageError("data file '" + path + "' holds no values");
  return out;
}

RunConfig parse_config(const std::vector<std::string>& raw_args) {
  std::vector<std::string> args = merge_config(raw_args);
  RunConfig cfg;
  CLI::App app{"Bayesian nonparametric chi-squared goodness-of-fit and independence tests",
               "bnpgof"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  auto* calibrate = app.add_subcommand("calibrate", "Find alpha with Pr(D <= c) = q");
  calibrate->add_option("--null", cfg.null_spec, "Hypothesized distribution F0");
  calibrate->add_option("--base", cfg.base_spec, "Base measure H (default: the null)");
  calibrate->add_option("--c", cfg.c, "Distance threshold c")->check(CLI::PositiveNumber);
  calibrate->add_option("--q", cfg.q, "Target probability q")->check(CLI::Range(0.0, 1.0));
  calibrate->add_option("--alpha", cfg.alpha, "Not accepted; listed for a clear error");
  calibrate->add_option("--edges", cfg.edges, "Bin cut points")->delimiter(',');
  add_search_options(calibrate, cfg);
  add_mc_options(calibrate, cfg);

  auto* gof = app.add_subcommand("gof", "Simple goodness-of-fit test");
  gof->add_option("--null", cfg.null_spec, "Hypothesized distribution F0 (also the base H)");
  gof->add_option("--edges", cfg.edges, "Bin cut points")->delimiter(',');
  add_test_options(gof, cfg);
  add_data_options(gof, cfg);
  add_search_options(gof, cfg);
  add_mc_options(gof, cfg);

  auto* composite = app.add_subcommand("gof-composite", "Composite goodness-of-fit test");
  composite->add_option("--family", cfg.family, "exp or normal-mean");
  composite->add_option("--prior", cfg.prior_spec, "Prior on theta");
  composite->add_option("--k", cfg.k, "Number of equiprobable bins when --edges is absent");
  composite->add_option("--edges", cfg.edges, "Bin cut points")->delimiter(',');
  composite->add_option("--m-theta", cfg.m_theta, "Posterior draws of theta (M)");
  composite->add_option("--sampler", cfg.sampler, "conjugate or mh");
  composite->add_option("--mh-step", cfg.mh_step, "Initial random-walk step (0: automatic)");
  composite->add_option("--burn-in", cfg.burn_in, "Metropolis burn-in iterations");
  add_test_options(composite, cfg);
  add_data_options(composite, cfg);
  add_search_options(composite, cfg);
  add_mc_options(composite, cfg);

  auto* indep = app.add_subcommand("indep", "Test of independence on an r x s grid");
  indep->add_option("--x-edges", cfg.x_edges, "Cut points for X")->delimiter(',');
  indep->add_option("--y-edges", cfg.y_edges, "Cut points for Y")->delimiter(',');
  indep->add_option("--base", cfg.bivariate_base, "Bivariate base measure H");
  add_test_options(indep, cfg);
  add_data_options(indep, cfg);
  add_search_options(indep, cfg);
  add_mc_options(indep, cfg);

  auto* dp = app.add_subcommand("dp-sample", "Draw one Dirichlet process realization");
  dp->add_option("--alpha", cfg.alpha, "Concentration parameter")->check(CLI::PositiveNumber);
  dp->add_option("--base", cfg.base_spec, "Base measure H");
  add_data_options(dp, cfg);
  add_mc_options(dp, cfg);

  auto* kl = app.add_subcommand("kl-moments", "Closed-form vs Monte Carlo KL moments");
  kl->add_option("--alpha", cfg.alpha, "Concentration parameter")->check(CLI::PositiveNumber);
  kl->add_option("--n", cfg.n_atoms, "Number of atoms n")->check(CLI::PositiveNumber);
  kl->add_option("--f", cfg.f_spec, "Continuous distribution F");
  kl->add_option("--base", cfg.base_spec, "Law of the fixed atoms");
  add_mc_options(kl, cfg);

  auto* asym = app.add_subcommand("asymptotics", "Draws of D against the chi-squared law");
  asym->add_option("--alpha", cfg.alpha, "Concentration parameter")->check(CLI::PositiveNumber);
  asym->add_option("--m", cfg.m, "Sample size (0: prior draws)");
  asym->add_option("--base", cfg.base_spec, "Base measure H");
  asym->add_option("--simulate", cfg.simulate_spec, "Law of the data (default: the base)");
  asym->add_option("--edges", cfg.edges, "Bin cut points")->delimiter(',');
  add_mc_options(asym, cfg);

  auto* table1 = app.add_subcommand("table1", "Grid of Pr(D <= c) over alpha and c");
  table1->add_option("--null", cfg.null_spec, "F0, also the base H");
  table1->add_option("--edges", cfg.edges, "Bin cut points")->delimiter(',');
  table1->add_option("--alphas", cfg.alphas, "Concentration values")->delimiter(',');
  table1->add_option("--cs", cfg.cs, "Thresholds c")->delimiter(',');
  add_mc_options(table1, cfg);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  auto help_target = [&]() -> const CLI::App* {
    for (const CLI::App* sub : app.get_subcommands()) return sub;
    return &app;
  };
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequest(help_target()->help());
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequest(app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::CallForVersion&) {
    throw HelpRequest(std::string(kToolVersion) + "\n");
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  const CLI::App* chosen = app.get_subcommands().front();
  cfg.command = chosen->get_name();
  const bool format_given = chosen->get_option("--format")->count() > 0;
  validate(cfg, format_given);
  return cfg;
}

int run(const RunConfig& cfg, std::ostream& out) {
  std::ofstream file;
  std::ostream* sink = &out;
  if (cfg.output_path) {
    file.open(*cfg.output_path);
    if (!file) throw Error("cannot open output file '" + *cfg.output_path + "'");
    sink = &file;
  }
  const std::string& c = cfg.command;
  if (c == "calibrate") {
    cmd_calibrate(cfg, *sink);
  } else if (c == "gof") {
    cmd_gof(cfg, *sink);
  } else if (c == "gof-composite") {
    cmd_composite(cfg, *sink);
  } else if (c == "indep") {
    cmd_indep(cfg, *sink);
  } else if (c == "dp-sample") {
    cmd_dp_sample(cfg, *sink);
  } else if (c == "kl-moments") {
    cmd_kl_moments(cfg, *sink);
  } else if (c == "asymptotics") {
    cmd_asymptotics(cfg, *sink);
  } else if (c == "table1") {
    cmd_table1(cfg, *sink);
  } else {
    throw UsageError("unknown command '" + c + "'");
  }
  sink->flush();
  if (!*sink) {
    throw Error("failed writing the report" +
                (cfg.output_path ? " to '" + *cfg.output_path + "'" : std::string()));
  }
  return 0;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run(parse_config(args), out);
  } catch (const HelpRequest& h) {
    out << h.what();
    return 0;
  } catch (const UsageError& e) {
    err << "bnpgof: usage error: " << e.what() << "\n"
        << "Run 'bnpgof --help' or 'bnpgof COMMAND --help' for the options.\n";
    return 2;
  } catch (const std::exception& e) {
    err << "bnpgof: error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace bnpgof
