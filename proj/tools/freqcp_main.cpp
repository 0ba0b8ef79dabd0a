#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "freqcp/errors.hpp"
#include "freqcp/experiments.hpp"
#include "freqcp/inference.hpp"
#include "freqcp/io.hpp"
#include "freqcp/sa_refine.hpp"
#include "freqcp/synthetic.hpp"

namespace {

using namespace freqcp;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  double alpha = 0.05;
  std::string output;
};

struct DetectFlags {
  std::string input;
  double sampling_rate = 1.0;
  std::optional<int> window_size;
  std::optional<double> sigma2;
  std::optional<double> kappa;
};

void add_detect_flags(CLI::App* cmd, DetectFlags& f) {
  cmd->add_option("input", f.input, "CSV file with one sample per line")->required();
  cmd->add_option("--sampling-rate", f.sampling_rate, "Sampling rate (metadata only)");
  cmd->add_option("-M,--window-size", f.window_size, "Samples per window");
  cmd->add_option("--sigma2", f.sigma2, "Noise variance used by the penalties");
  cmd->add_option("--kappa", f.kappa, "Weight of the location-count penalty");
}

DetectConfig resolve(const Globals& g, const DetectFlags& f) {
  DetectConfig c;
  if (!g.config_path.empty()) c = load_detect_config(g.config_path, c);
  if (f.window_size) c.window_size = *f.window_size;
  if (f.sigma2) c.sigma2 = *f.sigma2;
  if (f.kappa) c.kappa = *f.kappa;
  if (g.seed) c.sa.seed = *g.seed;
  return c;
}

void emit(const Globals& g, const nlohmann::json& j) {
  if (g.output.empty() || g.output == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(g.output);
  if (!out) throw std::runtime_error("cannot write " + g.output);
  out << j.dump(2) << '\n';
}

int cmd_detect(const Globals& g, const DetectFlags& f) {
  const auto cfg = resolve(g, f);
  const auto x = read_series_csv(f.input, f.sampling_rate);
  auto j = to_json(detect(x, cfg));
  j["config"] = to_json(cfg);
  emit(g, j);
  return 0;
}

int cmd_test(const Globals& g, const DetectFlags& f, std::optional<double> sigma, bool estimate,
             bool dp_only) {
  const auto cfg = resolve(g, f);
  const auto x = read_series_csv(f.input, f.sampling_rate);
  const auto det = detect(x, cfg);
  InferenceConfig ic;
  ic.detect = cfg;
  ic.dp_only = dp_only;
  if (estimate) {
    ic.sigma = estimate_variance(stft(x, cfg.window_size), det.config);
  } else {
    ic.sigma = sigma ? *sigma : std::sqrt(cfg.sigma2);
  }
  const auto locs = det.config.union_locations();
  const double level = locs.empty() ? g.alpha : g.alpha / static_cast<double>(locs.size());
  nlohmann::json tests = nlohmann::json::array();
  std::vector<int> significant;
  for (int tau : locs) {
    const auto r = selective_p(x.samples, det, tau, ic);
    if (r.valid && r.p_selective <= level) significant.push_back(tau);
    tests.push_back(to_json(r));
  }
  auto j = to_json(det);
  j["config"] = to_json(cfg);
  j["sigma"] = ic.sigma;
  j["alpha"] = g.alpha;
  j["per_location_level"] = level;
  j["tests"] = tests;
  j["significant"] = significant;
  emit(g, j);
  return 0;
}

int cmd_estimate(const Globals& g, const DetectFlags& f) {
  const auto cfg = resolve(g, f);
  const auto x = read_series_csv(f.input, f.sampling_rate);
  emit(g, {{"schema_version", kSchemaVersion},
           {"sigma_hat", estimate_variance(x.samples, cfg)},
           {"config", to_json(cfg)}});
  return 0;
}

struct SimFlags {
  int trials = 200;
  int target_tests = 0;
  int max_trials = 0;
  int window_size = 8;
  int windows = 30;
  double sigma = 1.0;
  std::vector<double> kappas;
  std::vector<double> deltas{0.3, 0.6, 0.9};
  std::vector<int> t1;
  std::vector<int> t2;
  double rho = 0.0;
  bool estimate_sigma = false;
  bool no_dp_only = false;
  int threads = 1;
  std::string csv;
};

void add_sim_flags(CLI::App* cmd, SimFlags& s) {
  cmd->add_option("--trials", s.trials, "Number of trials")->check(CLI::NonNegativeNumber);
  cmd->add_option("--target-tests", s.target_tests, "Run until this many locations are tested");
  cmd->add_option("--max-trials", s.max_trials, "Trial cap when --target-tests is set");
  cmd->add_option("-M,--window-size", s.window_size, "Samples per window");
  cmd->add_option("-T,--windows", s.windows, "Windows per series");
  cmd->add_option("--sigma", s.sigma, "Noise standard deviation");
  cmd->add_option("--kappa", s.kappas, "Location-count penalty weight(s)")->delimiter(',');
  cmd->add_option("--t1", s.t1, "First change windows (three values)")->delimiter(',');
  cmd->add_option("--t2", s.t2, "Second change windows (three values)")->delimiter(',');
  cmd->add_option("--rho", s.rho, "AR(1) noise correlation (0 = iid)");
  cmd->add_flag("--estimate-sigma", s.estimate_sigma, "Test with the estimated noise level");
  cmd->add_flag("--no-dp-only", s.no_dp_only, "Skip the DP-only baselines");
  cmd->add_option("-j,--threads", s.threads, "Worker threads");
  cmd->add_option("--csv", s.csv, "Per-trial CSV path (default: output path with .csv)");
}

ExperimentConfig experiment(const Globals& g, const SimFlags& s, ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  if (!g.config_path.empty()) {
    DetectConfig d;
    d.window_size = s.window_size;
    d = load_detect_config(g.config_path, d);
    c.sa = d.sa;
    c.seed = d.sa.seed;
    c.kappa = d.kappa;
  }
  c.window_size = s.window_size;
  c.windows = s.windows;
  c.sigma = s.sigma;
  c.trials = s.trials;
  c.target_tests = s.target_tests;
  c.max_trials = s.max_trials;
  c.alpha = g.alpha;
  if (g.seed) c.seed = *g.seed;
  if (s.kappas.size() == 1) {
    c.kappa = s.kappas.front();
  } else {
    c.kappas = s.kappas;
  }
  c.deltas = s.deltas;
  const auto triple = [](const std::vector<int>& v, std::array<int, 3>& out, const char* name) {
    if (v.empty()) return;
    if (v.size() != 3) throw DomainError(std::string(name) + " needs three values");
    std::copy(v.begin(), v.end(), out.begin());
  };
  triple(s.t1, c.t1, "--t1");
  triple(s.t2, c.t2, "--t2");
  c.noise = s.rho > 0.0 ? NoiseKind::Ar1 : NoiseKind::Gaussian;
  c.rho = s.rho;
  c.estimate_sigma = s.estimate_sigma;
  c.dp_only = !s.no_dp_only;
  c.threads = s.threads;
  return c;
}

int cmd_simulate(const Globals& g, const SimFlags& s, ExperimentKind kind) {
  const auto report = run_experiment(experiment(g, s, kind));
  emit(g, to_json(report));
  std::string csv = s.csv;
  if (csv.empty() && !g.output.empty() && g.output != "-") {
    csv = g.output;
    const auto dot = csv.rfind('.');
    if (dot != std::string::npos && csv.find('/', dot) == std::string::npos) csv.resize(dot);
    csv += ".csv";
  }
  if (!csv.empty()) {
    std::ofstream out(csv);
    if (!out) throw std::runtime_error("cannot write " + csv);
    write_trials_csv(out, report);
  }
  for (const auto& grp : report.groups) {
    std::cerr << grp.label << ": " << grp.tests << " tests";
    for (const auto& m : grp.rates) std::cerr << "  " << m.method << "=" << m.rate;
    std::cerr << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-domain change point detection with selective inference"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON file with detector settings")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for annealing / master seed for simulations");
  app.add_option("--alpha", g.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  app.add_option("-o,--output", g.output, "Output JSON path (default stdout)");

  DetectFlags df;
  auto* detect_cmd = app.add_subcommand("detect", "Detect change points in a CSV series");
  add_detect_flags(detect_cmd, df);

  auto* test_cmd = app.add_subcommand("test", "Detect and test every detected location");
  add_detect_flags(test_cmd, df);
  std::optional<double> sigma;
  bool estimate = false;
  bool no_dp_only = false;
  test_cmd->add_option("--sigma", sigma, "Noise standard deviation for the test statistic");
  test_cmd->add_flag("--estimate-sigma", estimate, "Estimate the noise level from the data");
  test_cmd->add_flag("--no-dp-only", no_dp_only, "Skip the DP-only baselines");

  auto* est_cmd = app.add_subcommand("estimate-variance", "Estimate the noise level of a series");
  add_detect_flags(est_cmd, df);

  SimFlags sf;
  auto* type1_cmd = app.add_subcommand("simulate-type1", "Type I error experiment on null data");
  add_sim_flags(type1_cmd, sf);
  auto* power_cmd = app.add_subcommand("simulate-power", "Power experiment on planted changes");
  add_sim_flags(power_cmd, sf);
  power_cmd->add_option("--deltas", sf.deltas, "Change intensities")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*detect_cmd) return cmd_detect(g, df);
    if (*test_cmd) return cmd_test(g, df, sigma, estimate, !no_dp_only);
    if (*est_cmd) return cmd_estimate(g, df);
    if (*type1_cmd) return cmd_simulate(g, sf, ExperimentKind::TypeI);
    if (*power_cmd) return cmd_simulate(g, sf, ExperimentKind::Power);
  } catch (const ParseError& e) {
    std::cerr << "error: " << df.input << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
