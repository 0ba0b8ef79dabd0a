#include "freqcp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "freqcp/errors.hpp"

namespace freqcp {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

TimeSeries read_series_csv(std::istream& in, double sampling_rate) {
  if (!(sampling_rate > 0.0)) throw DomainError("sampling rate must be positive");
  TimeSeries out;
  out.sampling_rate = sampling_rate;
  std::string line;
  int line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto cell = trim(line);
    if (cell.empty()) continue;
    if (cell.find(',') != std::string_view::npos || cell.find(';') != std::string_view::npos) {
      throw ParseError("expected a single column", line_no);
    }
    double v = 0.0;
    if (!parse_double(cell, v)) {
      if (!seen_content) {
        seen_content = true;  // header
        continue;
      }
      throw ParseError("not a number: '" + std::string(cell) + "'", line_no);
    }
    if (!std::isfinite(v)) throw ParseError("non-finite sample", line_no);
    seen_content = true;
    out.samples.push_back(v);
  }
  if (out.samples.empty()) throw ParseError("no samples", line_no);
  return out;
}

TimeSeries read_series_csv(const std::string& path, double sampling_rate) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_series_csv(in, sampling_rate);
}

void write_series_csv(std::ostream& out, std::span<const double> x) {
  out << "x\n" << std::setprecision(17);
  for (double v : x) out << v << '\n';
}

DetectConfig detect_config_from_json(const nlohmann::json& j, DetectConfig c) {
  if (!j.is_object()) throw DomainError("configuration must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "window_size") {
      c.window_size = value.get<int>();
    } else if (key == "sigma2") {
      c.sigma2 = value.get<double>();
    } else if (key == "kappa") {
      c.kappa = value.get<double>();
    } else if (key == "c0_plus") {
      c.sa.c0_plus = value.get<double>();
    } else if (key == "lambda_plus") {
      c.sa.lambda_plus = value.get<double>();
    } else if (key == "target_eta") {
      c.sa.target_eta = value.get<double>();
    } else if (key == "lambda") {
      c.sa.lambda = value.get<double>();
    } else if (key == "seed") {
      c.sa.seed = value.get<std::uint64_t>();
    } else if (key == "max_temperature_levels") {
      c.sa.max_temperature_levels = value.get<int>();
    } else {
      throw DomainError("unknown configuration key '" + key + "'");
    }
  }
  if (c.window_size < 2) throw DomainError("window_size must be at least 2");
  if (!(c.sigma2 > 0.0)) throw DomainError("sigma2 must be positive");
  c.sa.validate();
  return c;
}

DetectConfig load_detect_config(const std::string& path, DetectConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(path + ": " + e.what());
  }
  return detect_config_from_json(j, base);
}

nlohmann::json to_json(const DetectConfig& c) {
  return {{"window_size", c.window_size},
          {"sigma2", c.sigma2},
          {"kappa", c.kappa},
          {"c0_plus", c.sa.c0_plus},
          {"lambda_plus", c.sa.lambda_plus},
          {"target_eta", c.sa.target_eta},
          {"lambda", c.sa.lambda},
          {"seed", c.sa.seed},
          {"max_temperature_levels", c.sa.max_temperature_levels}};
}

nlohmann::json to_json(const CpConfiguration& cfg) {
  nlohmann::json per = nlohmann::json::array();
  for (int d = 0; d < cfg.frequencies(); ++d) per.push_back(cfg.at(d));
  return {{"frequencies", cfg.frequencies()},
          {"windows", cfg.windows()},
          {"per_frequency", per},
          {"union", cfg.union_locations()}};
}

nlohmann::json to_json(const Detection& det) {
  int proposals = 0;
  int accepted = 0;
  for (const auto& r : det.sa.records) {
    if (r.phase != Phase::Anneal || r.skipped) continue;
    ++proposals;
    accepted += r.accepted ? 1 : 0;
  }
  return {{"schema_version", kSchemaVersion},
          {"detection", to_json(det.config)},
          {"initial", to_json(det.initial.config)},
          {"annealing",
           {{"initial_temperature", det.sa.initial_temperature},
            {"preliminary_levels", det.sa.preliminary_levels},
            {"levels", det.sa.anneal_levels},
            {"proposals", proposals},
            {"accepted", accepted}}},
          {"warnings", det.warnings}};
}

nlohmann::json to_json(const IntervalUnion& region) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& iv : region.intervals()) {
    out.push_back({iv.lo, std::isinf(iv.hi) ? nlohmann::json("inf") : nlohmann::json(iv.hi)});
  }
  return out;
}

namespace {

nlohmann::json optional_p(const std::optional<double>& p) {
  return p ? nlohmann::json(*p) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const TestResult& r) {
  return {{"tau", r.tau},
          {"frequencies", r.freqs},
          {"df", r.df},
          {"z_obs", r.z_obs},
          {"region", to_json(r.region)},
          {"oc_region", to_json(r.oc_region)},
          {"p_selective", r.p_selective},
          {"p_oc", r.p_oc},
          {"p_naive", r.p_naive},
          {"p_bonferroni", r.p_bonferroni},
          {"p_dp_only", optional_p(r.p_dp_only)},
          {"p_dp_only_oc", optional_p(r.p_dp_only_oc)},
          {"valid", r.valid},
          {"replays", r.replays},
          {"warnings", r.warnings}};
}

nlohmann::json to_json(const ExperimentConfig& c) {
  const char* noise = c.noise == NoiseKind::Gaussian ? "gaussian" : "ar1";
  return {{"kind", c.kind == ExperimentKind::TypeI ? "type1" : "power"},
          {"window_size", c.window_size},
          {"windows", c.windows},
          {"sigma", c.sigma},
          {"kappa", c.kappa},
          {"kappas", c.kappas},
          {"c0_plus", c.sa.c0_plus},
          {"lambda_plus", c.sa.lambda_plus},
          {"target_eta", c.sa.target_eta},
          {"lambda", c.sa.lambda},
          {"max_temperature_levels", c.sa.max_temperature_levels},
          {"seed", c.seed},
          {"trials", c.trials},
          {"target_tests", c.target_tests},
          {"max_trials", c.max_trials},
          {"alpha", c.alpha},
          {"deltas", c.deltas},
          {"t1", c.t1},
          {"t2", c.t2},
          {"noise", noise},
          {"rho", c.rho},
          {"estimate_sigma", c.estimate_sigma},
          {"dp_only", c.dp_only}};
}

nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : report.groups) {
    nlohmann::json rates = nlohmann::json::object();
    for (const auto& m : g.rates) {
      rates[m.method] = {{"rejections", m.rejections},
                         {"n", m.n},
                         {"rate", m.rate},
                         {"ci95", {m.ci_lo, m.ci_hi}}};
    }
    groups.push_back({{"label", g.label},
                      {"delta", g.delta},
                      {"kappa", g.kappa},
                      {"trials", g.trials},
                      {"detections", g.detections},
                      {"tests", g.tests},
                      {"rates", rates},
                      {"ks_statistic", g.ks_statistic},
                      {"ks_pvalue", g.ks_pvalue}});
  }
  nlohmann::json trials = nlohmann::json::array();
  nlohmann::json timing = nlohmann::json::array();
  for (const auto& r : report.records) {
    trials.push_back({{"group", r.group},
                      {"trial", r.trial},
                      {"seed", r.seed},
                      {"detected", r.detected},
                      {"tested", r.tested},
                      {"correct", r.correct},
                      {"valid", r.valid},
                      {"tau", r.tau},
                      {"frequencies", r.freqs},
                      {"sigma_used", r.sigma_used},
                      {"z_obs", r.z_obs},
                      {"p_selective", r.p_selective},
                      {"p_oc", r.p_oc},
                      {"p_naive", r.p_naive},
                      {"p_bonferroni", r.p_bonferroni},
                      {"p_dp_only", optional_p(r.p_dp_only)},
                      {"p_dp_only_oc", optional_p(r.p_dp_only_oc)},
                      {"replays", r.replays},
                      {"note", r.note}});
    timing.push_back(r.wall_ms);
  }
  return {{"schema_version", kSchemaVersion},
          {"config", to_json(report.config)},
          {"groups", groups},
          {"trials", trials},
          {"timing", {{"elapsed_s", report.elapsed_s}, {"trial_wall_ms", timing}}}};
}

void write_trials_csv(std::ostream& out, const ExperimentReport& report) {
  out << "group,trial,seed,detected,tested,correct,valid,tau,frequencies,sigma_used,z_obs,"
         "p_selective,p_oc,p_naive,p_bonferroni,p_dp_only,p_dp_only_oc,replays,wall_ms\n";
  out << std::setprecision(12);
  const auto opt = [](const std::optional<double>& p) {
    std::ostringstream s;
    s << std::setprecision(12);
    if (p) s << *p;
    return s.str();
  };
  for (const auto& r : report.records) {
    std::string freqs;
    for (std::size_t i = 0; i < r.freqs.size(); ++i) {
      if (i) freqs += ' ';
      freqs += std::to_string(r.freqs[i]);
    }
    out << r.group << ',' << r.trial << ',' << r.seed << ',' << r.detected << ',' << r.tested << ','
        << r.correct << ',' << r.valid << ',' << r.tau << ',' << freqs << ',' << r.sigma_used << ','
        << r.z_obs << ',' << r.p_selective << ',' << r.p_oc << ',' << r.p_naive << ','
        << r.p_bonferroni << ',' << opt(r.p_dp_only) << ',' << opt(r.p_dp_only_oc) << ','
        << r.replays << ',' << r.wall_ms << '\n';
  }
}

}  // namespace freqcp
