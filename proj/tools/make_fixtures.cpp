// Regenerates the seeded CSV fixtures under tests/data.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "freqcp/inference.hpp"
#include "freqcp/io.hpp"
#include "freqcp/synthetic.hpp"

namespace {

using namespace freqcp;

SyntheticSpec demo_spec() {
  SyntheticSpec spec;
  spec.window_size = 8;
  spec.windows = 30;
  spec.delta = 0.8;
  return spec;
}

// Two shifts shared by three frequencies, at windows 10 and 20.
SyntheticSpec two_shift_spec() {
  SyntheticSpec spec;
  spec.window_size = 8;
  spec.windows = 30;
  spec.freqs = {1, 2, 3};
  spec.amplitude = {0.3, 0.6, 0.2};
  spec.delta = 1.2;
  spec.t1 = {10, 10, 10};
  spec.t2 = {20, 20, 20};
  return spec;
}

void write_csv(const std::filesystem::path& path, const std::vector<double>& x) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_series_csv(out, x);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regenerate test fixtures"};
  std::string out_dir = "tests/data";
  std::uint64_t first_seed = 0;
  int max_seeds = 5000;
  double alpha = 0.05;
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--first-seed", first_seed, "First seed of the search");
  app.add_option("--max-seeds", max_seeds, "Number of seeds to try");
  CLI11_PARSE(app, argc, argv);

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);

  {
    auto spec = demo_spec();
    Rng rng(20240601);
    draw_planted(spec, rng);
    write_csv(dir / "demo.csv", generate(spec, rng).samples);
    std::cerr << "demo.csv: planted bins " << spec.freqs[0] << ',' << spec.freqs[1] << ','
              << spec.freqs[2] << '\n';
  }

  const auto spec = two_shift_spec();
  for (int i = 0; i < max_seeds; ++i) {
    const std::uint64_t seed = first_seed + static_cast<std::uint64_t>(i);
    Rng rng(seed);
    const auto x = generate(spec, rng);
    InferenceConfig ic;
    ic.detect.sa.seed = seed;
    ic.dp_only = false;
    const auto det = detect(x, ic.detect);
    const auto locs = det.config.union_locations();
    if (locs.size() < 3) continue;
    bool genuine_ok = true;
    int spurious = -1;
    int genuine = 0;
    const double level = alpha / static_cast<double>(locs.size());
    nlohmann::json results = nlohmann::json::array();
    for (int tau : locs) {
      const bool real = tau == spec.t1[0] || tau == spec.t2[0];
      const auto r = selective_p(x.samples, det, tau, ic);
      results.push_back(to_json(r));
      if (real) {
        ++genuine;
        genuine_ok = genuine_ok && r.valid && r.p_selective < level &&
                     det.config.frequencies_at(tau).size() >= 2;
      } else if (r.valid && r.p_selective > 0.1 && r.p_naive < alpha) {
        spurious = tau;
      }
    }
    if (genuine != 2 || !genuine_ok || spurious < 0) continue;

    write_csv(dir / "two_shifts.csv", x.samples);
    nlohmann::json meta{{"seed", seed},
                        {"window_size", spec.window_size},
                        {"sigma", spec.sigma},
                        {"alpha", alpha},
                        {"genuine", {spec.t1[0], spec.t2[0]}},
                        {"spurious", spurious},
                        {"detection", to_json(det.config)},
                        {"tests", results}};
    std::ofstream(dir / "two_shifts.json") << meta.dump(2) << '\n';
    std::cerr << "two_shifts.csv: seed " << seed << ", spurious location " << spurious << '\n';
    return 0;
  }
  std::cerr << "no seed in range produced the requested pattern\n";
  return 1;
}
