#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "freqcp/dp_partition.hpp"
#include "freqcp/interval_union.hpp"
#include "freqcp/objective.hpp"
#include "freqcp/rng.hpp"
#include "freqcp/spectral.hpp"

namespace freqcp {

struct SaParams {
  double c0_plus = 1000.0;    // first temperature tried by the preliminary run
  double lambda_plus = 1.5;   // heating factor of the preliminary run
  double target_eta = 0.5;    // acceptance ratio the starting temperature must reach
  double lambda = 0.8;        // geometric cooling factor
  std::uint64_t seed = 0;
  int max_temperature_levels = 500;
  int max_preliminary_levels = 200;

  void validate() const;
};

enum class Phase : std::uint8_t { Preliminary, Anneal };
enum class OpKind : std::uint8_t { Add, Remove, Move, Merge };

const char* to_string(OpKind kind);

/// A concrete neighbourhood step. For Merge, `from`/`to` are the adjacent
/// union locations and `merge_at` the common target; `d` is unused (-1).
struct Move {
  OpKind kind = OpKind::Add;
  int d = -1;
  int from = 0;
  int to = 0;
  int merge_at = 0;
};

struct Segment {
  int d = 0;
  int first = 0;
  int last = 0;
};

/// Objective change of a move as segments dropped, segments created and a
/// constant penalty change.
struct EnergyDelta {
  std::vector<Segment> removed;
  std::vector<Segment> added;
  double penalty = 0.0;
};

/// Draws an add/remove/move step on frequency d. Returns nullopt (skip) when
/// the step is impossible: remove/move on an empty set or add on a full set.
/// A move draws its target among all positions strictly between the
/// neighbours; drawing the current position is reported as a skip.
std::optional<Move> propose(const CpConfiguration& cfg, OpKind kind, int d, Rng& rng);
/// Draws a merge of two adjacent union locations; nullopt when K < 2.
std::optional<Move> propose_merge(const CpConfiguration& cfg, Rng& rng);

void apply(CpConfiguration& cfg, const Move& move);
EnergyDelta energy_delta(const CpConfiguration& cfg, const Move& move, const PenaltyParams& pen);

/// Accept iff delta_e + c ln(xi) < 0. xi == 0 is replaced by 2^-53.
bool metropolis(double delta_e, double temperature, double xi);

struct SaRecord {
  Phase phase = Phase::Anneal;
  OpKind kind = OpKind::Add;
  bool skipped = false;
  bool accepted = false;
  int level = 0;
  double temperature = 0.0;
  double xi = 0.0;  // 0 for skipped records (no draw consumed)
  Move move;
  std::uint32_t segment_offset = 0;
  std::uint16_t removed = 0;
  std::uint16_t added = 0;
  double penalty_delta = 0.0;
};

/// Every Metropolis decision of one run, with the segment-level energy delta
/// of each proposal stored in `segments`.
struct SaTrace {
  std::vector<SaRecord> records;
  std::vector<Segment> segments;
  double initial_temperature = 0.0;
  int preliminary_levels = 0;
  int anneal_levels = 0;
  bool hit_level_cap = false;
};

/// Preliminary experiment: heat from c0_plus by lambda_plus until one sweep
/// from `init` reaches the target acceptance ratio. Sweeps never change `init`.
double initial_temperature(const SegmentCostCache& cache, const CpConfiguration& init,
                           const std::vector<int>& active, const PenaltyParams& pen,
                           const SaParams& params, Rng& rng, SaTrace& trace);

/// Geometric-cooling annealing from `init` at temperature c0 until a level
/// with no accepted proposal (or the level cap).
CpConfiguration anneal(const SegmentCostCache& cache, const CpConfiguration& init,
                       const std::vector<int>& active, const PenaltyParams& pen,
                       const SaParams& params, double c0, Rng& rng, SaTrace& trace);

/// Re-applies accepted moves of the trace starting from `init`.
CpConfiguration replay(const CpConfiguration& init, const SaTrace& trace);

/// Metropolis decisions as inequalities along `line`. `only` restricts to one phase.
void sa_inequalities(const SaTrace& trace, const LineCostCache& line, const InequalitySink& sink,
                     std::optional<Phase> only = std::nullopt);
std::vector<QuadInequality> sa_inequalities(const SaTrace& trace, const LineCostCache& line,
                                            std::optional<Phase> only = std::nullopt);

struct DetectConfig {
  int window_size = 8;
  double sigma2 = 1.0;
  double kappa = 0.5;
  SaParams sa;

  PenaltyParams penalties(int windows) const {
    return bic_penalties(window_size, sigma2, windows, kappa);
  }
};

struct Detection {
  CpConfiguration config;
  InitialSolution initial;
  SaTrace sa;
  std::vector<std::string> warnings;
};

/// Full detector: STFT, per-frequency Optimal Partitioning, preliminary
/// temperature search and annealing. Deterministic in (x, config).
Detection detect(const TimeSeries& x, const DetectConfig& config);
Detection detect(const SpectralSequences& f, const DetectConfig& config);
Detection detect(const SegmentCostCache& cache, const PenaltyParams& pen, const SaParams& params);

}  // namespace freqcp
