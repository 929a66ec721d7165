// Apache License, Version 2.0, refer to LICENSE.txt

#include "bnpgof/report_json.hh"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace bnpgof {

using json = nlohmann::ordered_json;

namespace {

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_sig(v);
}

double to_double(const json& j) {
  return j.is_null() ? std::nan("") : j.get<double>();
}

std::vector<double> to_vector(const json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(to_double(v));
  return out;
}

template <class T>
void optional_field(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

}  // namespace

double round_sig(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

json round_sig(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

json calibration_json(const CalibrationResult& r) {
  json j;
  j["alpha"] = number(r.alpha);
  j["probability"] = number(r.probability);
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  json trace = json::array();
  for (const auto& s : r.trace) trace.push_back({number(s.alpha), number(s.probability)});
  j["trace"] = std::move(trace);
  return j;
}

CalibrationResult calibration_from_json(const json& j) {
  CalibrationResult r;
  r.alpha = to_double(j.at("alpha"));
  r.probability = to_double(j.at("probability"));
  r.iterations = j.at("iterations").get<std::size_t>();
  r.converged = j.at("converged").get<bool>();
  for (const auto& s : j.at("trace")) r.trace.push_back({to_double(s[0]), to_double(s[1])});
  return r;
}

json report_to_json(const TestReport& r) {
  json j;
  j["test"] = r.test;
  j["decision"] = r.decision();
  j["reject"] = r.reject;
  j["alpha"] = number(r.alpha);
  j["alpha_star"] = number(r.alpha_star);
  j["c"] = number(r.c);
  j["q"] = number(r.q);
  j["q_source"] = r.q_source;
  j["probability"] = number(r.probability);
  j["standard_error"] = number(r.standard_error);
  j["replicates"] = r.replicates;
  j["seed"] = r.seed;
  j["n_atoms"] = r.n_atoms;
  j["m"] = r.m;
  j["edges"] = round_sig(r.edges);
  j["observed_bins"] = round_sig(r.observed_bins);
  j["posterior_bins"] = round_sig(r.posterior_bins);
  j["null_bins"] = round_sig(r.null_bins);
  j["calibration"] = r.calibration ? calibration_json(*r.calibration) : json(nullptr);
  j["warnings"] = r.warnings;
  if (r.test == "gof-composite") {
    j["theta_hat"] = r.theta_hat ? number(*r.theta_hat) : json(nullptr);
    j["theta_min"] = r.theta_min ? number(*r.theta_min) : json(nullptr);
    j["acceptance_rate"] = r.acceptance_rate ? number(*r.acceptance_rate) : json(nullptr);
    j["theta_posterior"] =
        r.theta_posterior
            ? json::array({number(r.theta_posterior->first), number(r.theta_posterior->second)})
            : json(nullptr);
  }
  if (r.test == "indep") {
    json grid = json::array();
    if (r.posterior_grid) {
      const Table& t = *r.posterior_grid;
      for (std::size_t a = 0; a < t.rows; ++a) {
        std::vector<double> row(t.values.begin() + static_cast<std::ptrdiff_t>(a * t.cols),
                                t.values.begin() + static_cast<std::ptrdiff_t>((a + 1) * t.cols));
        grid.push_back(round_sig(row));
      }
    }
    j["posterior_grid"] = std::move(grid);
    j["row_margin"] = round_sig(r.row_margin);
    j["col_margin"] = round_sig(r.col_margin);
    j["y_edges"] = round_sig(r.y_edges);
    j["dof"] = r.dof;
  }
  return j;
}

TestReport report_from_json(const json& j) {
  TestReport r;
  r.test = j.at("test").get<std::string>();
  r.reject = j.at("reject").get<bool>();
  r.alpha = to_double(j.at("alpha"));
  r.alpha_star = to_double(j.at("alpha_star"));
  r.c = to_double(j.at("c"));
  r.q = to_double(j.at("q"));
  r.q_source = j.at("q_source").get<std::string>();
  r.probability = to_double(j.at("probability"));
  r.standard_error = to_double(j.at("standard_error"));
  r.replicates = j.at("replicates").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.n_atoms = j.at("n_atoms").get<std::size_t>();
  r.m = j.at("m").get<std::size_t>();
  r.edges = to_vector(j.at("edges"));
  r.observed_bins = to_vector(j.at("observed_bins"));
  r.posterior_bins = to_vector(j.at("posterior_bins"));
  r.null_bins = to_vector(j.at("null_bins"));
  if (!j.at("calibration").is_null()) r.calibration = calibration_from_json(j["calibration"]);
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  optional_field(j, "theta_hat", r.theta_hat);
  optional_field(j, "theta_min", r.theta_min);
  optional_field(j, "acceptance_rate", r.acceptance_rate);
  if (j.contains("theta_posterior") && !j["theta_posterior"].is_null()) {
    r.theta_posterior = {to_double(j["theta_posterior"][0]), to_double(j["theta_posterior"][1])};
  }
  if (j.contains("posterior_grid")) {
    const json& g = j["posterior_grid"];
    if (!g.empty()) {
      Table t(g.size(), g[0].size());
      for (std::size_t a = 0; a < t.rows; ++a) {
        for (std::size_t b = 0; b < t.cols; ++b) t.values[a * t.cols + b] = to_double(g[a][b]);
      }
      r.posterior_grid = std::move(t);
    }
    r.row_margin = to_vector(j.at("row_margin"));
    r.col_margin = to_vector(j.at("col_margin"));
    r.y_edges = to_vector(j.at("y_edges"));
    r.dof = j.at("dof").get<std::size_t>();
  }
  return r;
}

}  // namespace bnpgof
