// Apache License, Version 2.0, refer to LICENSE.txt

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. `acceptance N [N ...]` runs a subset.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bnpgof/chisq.hh"
#include "bnpgof/cli.hh"
#include "bnpgof/independence.hh"
#include "bnpgof/kl.hh"
#include "bnpgof/mc_engine.hh"
#include "bnpgof/special.hh"
#include "json.hpp"

using namespace bnpgof;
using json = nlohmann::ordered_json;

namespace {

const unsigned kWorkers = std::max(1u, std::thread::hardware_concurrency());
const std::vector<double> kGridEdges = {-2, -1, 0, 1, 2, 3};

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Cli {
  int status;
  std::string out, err;
};

Cli cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bnpgof");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

McSettings mc(std::uint64_t seed, std::size_t n_atoms = 2000, std::size_t replicates = 2000,
              bool bin_masses = false) {
  McSettings s;
  s.n_atoms = n_atoms;
  s.replicates = replicates;
  s.seed = seed;
  s.workers = kWorkers;
  s.bin_masses = bin_masses;
  return s;
}

// ------------------------------------------------------------------ 1

Outcome probability_grid() {
  const double expected[7][6] = {
      {.298, .745, .812, .857, .893, .933}, {.068, .273, .480, .624, .717, .781},
      {.029, .143, .311, .474, .612, .696}, {.027, .116, .258, .409, .540, .648},
      {.020, .094, .219, .353, .492, .595}, {.011, .073, .179, .297, .432, .542},
      {.009, .057, .150, .263, .368, .484}};
  const Cli r = cli({"table1", "--n-atoms", "2000", "--replicates", "10000", "--seed", "2024",
                     "--workers", std::to_string(kWorkers)});
  if (r.status != 0) return {false, "table1 failed: " + r.err};
  const json grid = json::parse(r.out)["result"]["probabilities"];
  double worst = 0.0;
  int misses = 0;
  for (int a = 0; a < 7; ++a) {
    for (int c = 0; c < 6; ++c) {
      const double diff = std::abs(grid[a][c].get<double>() - expected[a][c]);
      worst = std::max(worst, diff);
      misses += diff > 0.05;
    }
  }
  return {misses == 0, std::to_string(42 - misses) + "/42 cells within 0.05, max |diff| " +
                           fmt("%.3f", worst)};
}

// ------------------------------------------------------------------ 2

Outcome calibration_anchor() {
  CalibrationSpec spec;
  spec.c = 3.0;
  spec.q = 0.48;
  const Measure n01 = Measure::normal(0, 1);
  const CalibrationResult r = calibrate_alpha(spec, n01, n01, Partition(kGridEdges), mc(7));
  return {r.alpha >= 5.0 && r.alpha <= 20.0,
          "alpha " + fmt("%.3f", r.alpha) + " (Pr " + fmt("%.3f", r.probability) + ")"};
}

// ------------------------------------------------------------------ 3, 4

TestSettings cauchy_settings(std::uint64_t seed, bool bin_masses) {
  TestSettings s;
  s.alpha = 100.0;
  s.c = 5.0;
  s.q = 0.54;
  s.mc = mc(seed, 2000, 2000, bin_masses);
  return s;
}

Outcome cauchy_rejected() {
  int ok = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream data_rng(seed, {62});
    const auto data = Measure::cauchy(0, 1).sample(150, data_rng);
    const TestReport r = gof_simple(data, Measure::normal(0, 1), Partition(kGridEdges),
                                    cauchy_settings(seed, false));
    worst = std::max(worst, r.probability);
    ok += r.probability < 0.01 && r.reject;
  }
  return {ok >= 9, std::to_string(ok) + "/10 seeds with Pr < 0.01 and reject, max Pr " +
                       fmt("%.4f", worst)};
}

Outcome normal_not_rejected() {
  int ok = 0;
  std::vector<double> probs;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    RngStream data_rng(seed, {63});
    const auto data = Measure::normal(0, 1).sample(150, data_rng);
    const TestReport r = gof_simple(data, Measure::normal(0, 1), Partition(kGridEdges),
                                    cauchy_settings(seed, true));
    probs.push_back(r.probability);
    ok += !r.reject;
  }
  std::sort(probs.begin(), probs.end());
  return {ok >= 45, std::to_string(ok) + "/50 seeds not rejected (need 45), median Pr " +
                        fmt("%.3f", probs[25]) + " vs q 0.54"};
}

// ------------------------------------------------------------------ 5, 6

struct PosteriorBins {
  double alpha_star;
  std::vector<double> h_star;
  std::vector<std::vector<double>> p;
};

// Posterior bin masses for data from N(0,1) with H = N(0,1). Atoms are
// far more numerous than alpha*, so the n-atom law is close to the DP.
PosteriorBins posterior_bins(double alpha, std::size_t m, const Partition& part,
                             std::uint64_t seed, std::size_t reps) {
  RngStream data_rng(seed, {5});
  const auto data = Measure::normal(0, 1).sample(m, data_rng);
  const DpParams1 post = posterior_params({alpha, Measure::normal(0, 1)}, data);
  PosteriorBins out;
  out.alpha_star = post.alpha;
  out.h_star = bin_probabilities(post.base, part);
  const std::size_t n = 10'000'000;
  out.p = run_replicates<std::vector<double>>(
      reps, seed, kWorkers, [&](std::size_t, RngStream& rng) {
        return sample_bin_masses(post.alpha, out.h_star, n, rng);
      });
  return out;
}

Outcome posterior_limit(const PosteriorBins& b) {
  std::vector<double> d;
  for (const auto& p : b.p) d.push_back(chisq_distance(b.alpha_star, p, b.h_star));
  const EmpiricalSample s(d);
  const double ks = ks_distance(s, [](double x) { return chi_squared_cdf(x, 6.0); });
  const bool pass = ks < 0.05 && std::abs(s.mean() - 6.0) <= 0.3 &&
                    std::abs(s.variance() - 12.0) <= 1.5;
  return {pass, "KS " + fmt("%.4f", ks) + ", mean " + fmt("%.3f", s.mean()) + ", var " +
                    fmt("%.3f", s.variance())};
}

Outcome kl_equivalence(const PosteriorBins& b) {
  double sum = 0.0;
  for (const auto& p : b.p) {
    const double d = chisq_distance(b.alpha_star, p, b.h_star);
    sum += std::abs(2.0 * b.alpha_star * discrete_kl(p, b.h_star) - d) / d;
  }
  const double mean = sum / static_cast<double>(b.p.size());
  return {mean < 0.05, "mean relative gap " + fmt("%.4f", mean)};
}

// ------------------------------------------------------------------ 7

Outcome brownian_bridge() {
  const Partition part({0.0, 1.0});  // A = (-inf, 0], B = (1, inf)
  const std::size_t m = 10'000, reps = 2000;
  const PosteriorBins b = posterior_bins(10.0, m, part, 77, reps);
  std::vector<double> za, zb;
  const double rm = std::sqrt(static_cast<double>(m));
  for (const auto& p : b.p) {
    za.push_back(rm * (p[0] - b.h_star[0]));
    zb.push_back(rm * (p[2] - b.h_star[2]));
  }
  const EmpiricalSample a(za), bb(zb);
  double cov = 0.0;
  for (std::size_t i = 0; i < reps; ++i) cov += (za[i] - a.mean()) * (zb[i] - bb.mean());
  cov /= static_cast<double>(reps - 1);
  const double fa = normal_cdf(0.0), fb = 1.0 - normal_cdf(1.0);
  const double target = -fa * fb;
  const double sd = std::sqrt(a.variance());
  const bool mean_ok = std::abs(a.mean()) <= 3.0 * sd / std::sqrt(static_cast<double>(reps));
  const bool var_ok = std::abs(a.variance() - 0.25) <= 0.025;
  const bool cov_ok = std::abs(cov - target) <= 0.1 * std::abs(target);
  return {mean_ok && var_ok && cov_ok, "mean " + fmt("%.4f", a.mean()) + ", var " +
                                           fmt("%.4f", a.variance()) + ", cov " +
                                           fmt("%.4f", cov) + " vs " + fmt("%.4f", target)};
}

// ------------------------------------------------------------------ 8

Outcome kl_moments() {
  int ok = 0, total = 0;
  std::string worst;
  double worst_score = 0.0;
  for (double alpha : {1.0, 5.0, 100.0}) {
    for (std::size_t n : {2u, 10u, 50u}) {
      RngStream atom_rng(8, {n});
      const auto atoms = Measure::normal(0, 1).sample(n, atom_rng);
      const InterleavedPartition ip = interleave(atoms, Measure::normal(0, 1));
      const auto pairs = run_replicates<std::pair<double, double>>(
          100'000, 800 + n + static_cast<std::uint64_t>(alpha), kWorkers,
          [&](std::size_t, RngStream& rng) {
            const Weights w = sample_dirichlet_log_weights(alpha, n, rng);
            return std::make_pair(kl_p_to_f(w.weights, ip.q), kl_f_to_p(ip.q, w.log_weights));
          });
      std::vector<double> x, y;
      for (const auto& [a, b] : pairs) {
        x.push_back(a);
        y.push_back(b);
      }
      const EmpiricalSample sx(x), sy(y);
      const double se_x = std::sqrt(sx.variance() / 1e5), se_y = std::sqrt(sy.variance() / 1e5);
      const double zx = std::abs(mean_kl_p_to_f(alpha, n, ip.q) - sx.mean()) / se_x;
      const double zy = std::abs(mean_kl_f_to_p(alpha, n, ip.q) - sy.mean()) / se_y;
      const double rx = std::abs(var_kl_p_to_f(alpha, n, ip.q) / sx.variance() - 1.0);
      const double ry = std::abs(var_kl_f_to_p(alpha, n, ip.q) / sy.variance() - 1.0);
      total += 4;
      ok += (zx <= 4) + (zy <= 4) + (rx <= 0.1) + (ry <= 0.1);
      const double score = std::max({zx / 4, zy / 4, rx / 0.1, ry / 0.1});
      if (score > worst_score) {
        worst_score = score;
        worst = "(" + fmt("%g", alpha) + "," + std::to_string(n) + "): z " + fmt("%.2f", zx) +
                "/" + fmt("%.2f", zy) + ", var err " + fmt("%.3f", rx) + "/" + fmt("%.3f", ry);
      }
    }
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) +
                           " checks within bounds; tightest " + worst};
}

// ------------------------------------------------------------------ 9

Outcome composite() {
  const std::vector<double> x(31, 17907.0 / 31);
  const auto [shape, rate] = exponential_gamma_posterior(1.7, 2550, x);
  const bool conj = std::abs(shape - 32.7) < 1e-9 && std::abs(rate - 20457) < 1e-6;

  CompositeSpec spec;
  spec.prior = Measure::gamma(1.7, 2550);
  spec.k = 4;
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    RngStream data_rng(seed, {9});
    const auto data = Measure::exponential(0.00136).sample(31, data_rng);
    TestSettings s;
    s.c = 3.0;
    s.q = 0.51;
    s.mc = mc(seed, 2000, 2000, true);
    ok += !gof_composite(data, spec, std::nullopt, s).reject;
  }
  return {conj && ok >= 45, std::string("posterior (") + fmt("%g", shape) + ", " +
                                fmt("%g", rate) + "); " + std::to_string(ok) +
                                "/50 seeds not rejected (need 45)"};
}

// ------------------------------------------------------------------ 10

Outcome independence() {
  const Grid grid{Partition({-1, 0, 1, 2}), Partition({-1, 0, 1})};
  const BivariateMeasure base = BivariateMeasure::normal({0, 0}, 1, 0, 1);
  auto settings = [](std::uint64_t seed, bool bin_masses) {
    TestSettings s;
    s.alpha = 100.0;
    s.c = 20.0;
    s.q = 0.5;
    s.mc = mc(seed, 2000, 2000, bin_masses);
    return s;
  };
  int dependent_ok = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream data_rng(seed, {64});
    const auto data = BivariateMeasure::normal({0, 0}, 10, 3, 2).sample(150, data_rng);
    const TestReport r = independence_test(data, grid, base, settings(seed, false));
    worst = std::max(worst, r.probability);
    dependent_ok += r.probability < 0.01 && r.reject;
  }
  int null_ok = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    RngStream data_rng(seed, {65});
    const auto data = BivariateMeasure::normal({0, 0}, 10, 0, 2).sample(150, data_rng);
    null_ok += !independence_test(data, grid, base, settings(seed, true)).reject;
  }
  return {dependent_ok >= 9 && null_ok >= 45,
          "dependent: " + std::to_string(dependent_ok) + "/10 rejected (max Pr " +
              fmt("%.4f", worst) + "); independent: " + std::to_string(null_ok) +
              "/50 not rejected (need 45)"};
}

// ------------------------------------------------------------------ 11

Outcome prior_limit() {
  std::string edges;
  for (double u : {0.2, 0.4, 0.6, 0.8}) {
    if (!edges.empty()) edges += ",";
    edges += fmt("%.17g", normal_quantile(u));
  }
  const Cli r = cli({"asymptotics", "--alpha", "100", "--edges", edges, "--n-atoms", "3000",
                     "--replicates", "2000", "--seed", "11", "--format", "json", "--workers",
                     std::to_string(kWorkers)});
  if (r.status != 0) return {false, "asymptotics failed: " + r.err};
  const double ks = json::parse(r.out)["result"]["ks_distance"].get<double>();
  return {ks < 0.06, "KS " + fmt("%.4f", ks)};
}

// ------------------------------------------------------------------ 12

Outcome determinism() {
  const std::vector<std::vector<std::string>> commands = {
      {"calibrate", "--c", "3", "--q", "0.48", "--edges", "-2,-1,0,1,2,3", "--replicates", "300",
       "--n-atoms", "300"},
      {"gof", "--simulate", "cauchy:0,1", "--m", "150", "--alpha", "100", "--q", "0.54", "--c",
       "5", "--edges", "-2,-1,0,1,2,3", "--replicates", "300", "--n-atoms", "300"},
      {"gof-composite", "--simulate", "exp:0.00136", "--m", "31", "--prior", "gamma:1.7,2550",
       "--k", "4", "--c", "3", "--q", "0.51", "--m-theta", "200", "--replicates", "300",
       "--n-atoms", "300"},
      {"gof-composite", "--simulate", "exp:0.00136", "--m", "31", "--prior", "gamma:1.7,2550",
       "--sampler", "mh", "--c", "3", "--q", "0.51", "--m-theta", "200", "--replicates", "200",
       "--n-atoms", "200"},
      {"indep", "--simulate", "bvnormal:0,0,10,3,2", "--m", "150", "--x-edges", "-1,0,1,2",
       "--y-edges", "-1,0,1", "--alpha", "100", "--c", "20", "--q", "0.5", "--replicates", "300",
       "--n-atoms", "300"},
      {"dp-sample", "--alpha", "5", "--n-atoms", "100"},
      {"dp-sample", "--alpha", "5", "--n-atoms", "100", "--simulate", "normal:1,1", "--m", "20",
       "--format", "json"},
      {"kl-moments", "--alpha", "5", "--n", "10", "--replicates", "2000"},
      {"asymptotics", "--alpha", "10", "--edges", "-1,0,1", "--replicates", "300", "--n-atoms",
       "300"},
      {"asymptotics", "--alpha", "10", "--m", "100", "--edges", "-1,0,1", "--replicates", "300",
       "--n-atoms", "300", "--format", "json"},
      {"table1", "--alphas", "1,10", "--cs", "1,3", "--replicates", "200", "--n-atoms", "200"},
  };
  int same = 0;
  std::string first_bad;
  for (const auto& base : commands) {
    std::string a_out, b_out;
    bool ok = true;
    for (const char* workers : {"1", "3"}) {
      auto args = base;
      args.insert(args.end(), {"--seed", "31", "--workers", workers});
      const Cli r = cli(args);
      ok = ok && r.status == 0;
      std::string out = r.out;
      if (out.rfind("{", 0) == 0) {
        json j = json::parse(out);
        j.erase("generated_at");
        out = j.dump(2);
      }
      (std::string(workers) == "1" ? a_out : b_out) = out;
    }
    if (ok && a_out == b_out && !a_out.empty()) {
      ++same;
    } else if (first_bad.empty()) {
      first_bad = base[0];
    }
  }
  const int total = static_cast<int>(commands.size());
  return {same == total, std::to_string(same) + "/" + std::to_string(total) +
                             " invocations byte-identical across --workers 1 and 3" +
                             (first_bad.empty() ? "" : ", first mismatch: " + first_bad)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto wanted = [&](int id) { return only.empty() || only.count(id) > 0; };

  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& run) {
    if (!wanted(id)) return;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s  %2d  %-40s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "probability grid over alpha and c", probability_grid);
  report(2, "calibration anchor q=0.48 c=3", calibration_anchor);
  report(3, "Cauchy data rejected under normal null", cauchy_rejected);
  report(4, "normal data not rejected", normal_not_rejected);
  if (wanted(5) || wanted(6)) {
    const PosteriorBins b = posterior_bins(10.0, 5000, Partition(kGridEdges), 55, 2000);
    report(5, "posterior D converges to chi-squared(6)", [&] { return posterior_limit(b); });
    report(6, "2 alpha* KL matches D", [&] { return kl_equivalence(b); });
  }
  report(7, "Brownian bridge limit", brownian_bridge);
  report(8, "closed-form KL moments", kl_moments);
  report(9, "conjugacy and composite test", composite);
  report(10, "independence test", independence);
  report(11, "prior D against chi-squared(4)", prior_limit);
  report(12, "determinism across worker counts", determinism);

  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
