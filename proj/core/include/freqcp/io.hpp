#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "freqcp/experiments.hpp"
#include "freqcp/inference.hpp"
#include "freqcp/sa_refine.hpp"
#include "freqcp/spectral.hpp"

namespace freqcp {

inline constexpr int kSchemaVersion = 1;

/// Single-column CSV of samples with an optional header line. Blank lines are
/// ignored. Errors carry the 1-based line number.
TimeSeries read_series_csv(std::istream& in, double sampling_rate = 1.0);
TimeSeries read_series_csv(const std::string& path, double sampling_rate = 1.0);
void write_series_csv(std::ostream& out, std::span<const double> x);

/// Detector settings from a JSON object using the keys window_size, sigma2,
/// kappa, c0_plus, lambda_plus, target_eta, lambda, seed,
/// max_temperature_levels. Missing keys keep `base`; unknown keys throw.
DetectConfig detect_config_from_json(const nlohmann::json& j, DetectConfig base = {});
DetectConfig load_detect_config(const std::string& path, DetectConfig base = {});
nlohmann::json to_json(const DetectConfig& c);

nlohmann::json to_json(const CpConfiguration& cfg);
nlohmann::json to_json(const Detection& det);
nlohmann::json to_json(const IntervalUnion& region);
nlohmann::json to_json(const TestResult& r);
nlohmann::json to_json(const ExperimentConfig& c);
/// Timing lives under "timing" keys only, so reports differ across runs only there.
nlohmann::json to_json(const ExperimentReport& report);

void write_trials_csv(std::ostream& out, const ExperimentReport& report);

}  // namespace freqcp
