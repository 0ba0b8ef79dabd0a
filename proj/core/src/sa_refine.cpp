#include "freqcp/sa_refine.hpp"

#include <algorithm>
#include <cmath>

#include "freqcp/errors.hpp"

namespace freqcp {

void SaParams::validate() const {
  if (!(c0_plus > 0.0)) throw DomainError("c0_plus must be positive");
  if (!(lambda_plus > 1.0)) throw DomainError("lambda_plus must exceed 1");
  if (!(target_eta >= 0.0 && target_eta < 1.0)) throw DomainError("target_eta must lie in [0, 1)");
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("lambda must lie in (0, 1)");
  if (max_temperature_levels < 1 || max_preliminary_levels < 1) {
    throw DomainError("level caps must be positive");
  }
}

const char* to_string(OpKind kind) {
  switch (kind) {
    case OpKind::Add:
      return "add";
    case OpKind::Remove:
      return "remove";
    case OpKind::Move:
      return "move";
    case OpKind::Merge:
      return "merge";
  }
  return "?";
}

namespace {

// Neighbours of position t in the set (sentinels 0 and T), ignoring t itself.
std::pair<int, int> neighbours(const std::vector<int>& set, int t, int windows) {
  auto lo = std::lower_bound(set.begin(), set.end(), t);
  const int prev = lo == set.begin() ? 0 : *std::prev(lo);
  auto hi = std::upper_bound(set.begin(), set.end(), t);
  const int next = hi == set.end() ? windows : *hi;
  return {prev, next};
}

struct DeltaSink {
  std::vector<Segment>& removed;
  std::vector<Segment>& added;
  double& penalty;
};

void move_delta(int d, int p, int n, int from, int to, DeltaSink out) {
  if (from == to) return;
  out.removed.push_back({d, p + 1, from});
  out.removed.push_back({d, from + 1, n});
  out.added.push_back({d, p + 1, to});
  out.added.push_back({d, to + 1, n});
}

void collect_delta(const CpConfiguration& cfg, const Move& mv, const PenaltyParams& pen,
                   DeltaSink out) {
  const int t_count = cfg.windows();
  const auto beta = [&](int d) { return pen.beta[static_cast<std::size_t>(d)]; };
  switch (mv.kind) {
    case OpKind::Add: {
      const auto [p, n] = neighbours(cfg.at(mv.d), mv.to, t_count);
      out.removed.push_back({mv.d, p + 1, n});
      out.added.push_back({mv.d, p + 1, mv.to});
      out.added.push_back({mv.d, mv.to + 1, n});
      out.penalty += beta(mv.d) + (cfg.multiplicity(mv.to) == 0 ? pen.gamma : 0.0);
      return;
    }
    case OpKind::Remove: {
      const auto [p, n] = neighbours(cfg.at(mv.d), mv.from, t_count);
      out.removed.push_back({mv.d, p + 1, mv.from});
      out.removed.push_back({mv.d, mv.from + 1, n});
      out.added.push_back({mv.d, p + 1, n});
      out.penalty -= beta(mv.d) + (cfg.multiplicity(mv.from) == 1 ? pen.gamma : 0.0);
      return;
    }
    case OpKind::Move: {
      const auto [p, n] = neighbours(cfg.at(mv.d), mv.from, t_count);
      move_delta(mv.d, p, n, mv.from, mv.to, out);
      if (cfg.multiplicity(mv.from) == 1) out.penalty -= pen.gamma;
      if (cfg.multiplicity(mv.to) == 0) out.penalty += pen.gamma;
      return;
    }
    case OpKind::Merge: {
      const int a = mv.from;
      const int b = mv.to;
      const int u = mv.merge_at;
      for (int d = 0; d < cfg.frequencies(); ++d) {
        const auto& set = cfg.at(d);
        const bool has_a = std::binary_search(set.begin(), set.end(), a);
        const bool has_b = std::binary_search(set.begin(), set.end(), b);
        if (has_a && has_b) {
          const int p = neighbours(set, a, t_count).first;
          const int n = neighbours(set, b, t_count).second;
          out.removed.push_back({d, p + 1, a});
          out.removed.push_back({d, a + 1, b});
          out.removed.push_back({d, b + 1, n});
          out.added.push_back({d, p + 1, u});
          out.added.push_back({d, u + 1, n});
          out.penalty -= beta(d);
        } else if (has_a || has_b) {
          const int from = has_a ? a : b;
          const auto [p, n] = neighbours(set, from, t_count);
          move_delta(d, p, n, from, u, out);
        }
      }
      out.penalty -= pen.gamma;
      return;
    }
  }
}

class Annealer {
 public:
  Annealer(const SegmentCostCache& cache, const std::vector<int>& active, const PenaltyParams& pen,
           Rng& rng, SaTrace& trace)
      : cache_(cache), active_(active), pen_(pen), rng_(rng), trace_(trace) {}

  struct Counts {
    int accepted = 0;
    int proposed = 0;
  };

  // One temperature level: |active| * T local steps, then one merge.
  Counts sweep(CpConfiguration& cfg, double c, Phase phase, int level) {
    Counts counts;
    const long steps = static_cast<long>(active_.size()) * cache_.windows();
    for (long l = 0; l < steps; ++l) {
      const int d = active_[rng_.index(active_.size())];
      const auto kind = static_cast<OpKind>(rng_.index(3));
      step(cfg, propose(cfg, kind, d, rng_), kind, d, c, phase, level, counts);
    }
    step(cfg, propose_merge(cfg, rng_), OpKind::Merge, -1, c, phase, level, counts);
    return counts;
  }

 private:
  void step(CpConfiguration& cfg, const std::optional<Move>& mv, OpKind kind, int d, double c,
            Phase phase, int level, Counts& counts) {
    SaRecord rec;
    rec.phase = phase;
    rec.kind = kind;
    rec.level = level;
    rec.temperature = c;
    if (!mv) {
      rec.skipped = true;
      rec.move.kind = kind;
      rec.move.d = d;
      trace_.records.push_back(rec);
      return;
    }
    rec.move = *mv;
    removed_.clear();
    added_.clear();
    double pen_delta = 0.0;
    collect_delta(cfg, *mv, pen_, {removed_, added_, pen_delta});
    double delta_e = pen_delta;
    for (const auto& s : added_) delta_e += cache_.cost(s.d, s.first, s.last);
    for (const auto& s : removed_) delta_e -= cache_.cost(s.d, s.first, s.last);

    rec.xi = rng_.uniform();
    rec.accepted = metropolis(delta_e, c, rec.xi);
    rec.segment_offset = static_cast<std::uint32_t>(trace_.segments.size());
    rec.removed = static_cast<std::uint16_t>(removed_.size());
    rec.added = static_cast<std::uint16_t>(added_.size());
    rec.penalty_delta = pen_delta;
    trace_.segments.insert(trace_.segments.end(), removed_.begin(), removed_.end());
    trace_.segments.insert(trace_.segments.end(), added_.begin(), added_.end());
    trace_.records.push_back(rec);

    ++counts.proposed;
    if (rec.accepted) {
      ++counts.accepted;
      apply(cfg, *mv);
    }
  }

  const SegmentCostCache& cache_;
  const std::vector<int>& active_;
  const PenaltyParams& pen_;
  Rng& rng_;
  SaTrace& trace_;
  std::vector<Segment> removed_;
  std::vector<Segment> added_;
};

}  // namespace

std::optional<Move> propose(const CpConfiguration& cfg, OpKind kind, int d, Rng& rng) {
  const auto& set = cfg.at(d);
  const int t_count = cfg.windows();
  const int k = static_cast<int>(set.size());
  switch (kind) {
    case OpKind::Add: {
      const int free = t_count - 1 - k;
      if (free <= 0) return std::nullopt;
      // idx-th position of {1..T-1} not in the set
      int idx = static_cast<int>(rng.index(static_cast<std::uint64_t>(free)));
      int t = idx + 1;
      for (int c : set) {
        if (c <= t) {
          ++t;
        } else {
          break;
        }
      }
      return Move{OpKind::Add, d, 0, t, 0};
    }
    case OpKind::Remove: {
      if (k == 0) return std::nullopt;
      const int t = set[rng.index(static_cast<std::uint64_t>(k))];
      return Move{OpKind::Remove, d, t, 0, 0};
    }
    case OpKind::Move: {
      if (k == 0) return std::nullopt;
      const auto i = rng.index(static_cast<std::uint64_t>(k));
      const int t = set[i];
      const int prev = i == 0 ? 0 : set[i - 1];
      const int next = i + 1 == set.size() ? t_count : set[i + 1];
      // any position strictly between the neighbours, t itself included
      const int room = next - prev - 1;
      const int target = prev + 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(room)));
      if (target == t) return std::nullopt;  // identity, not a transition
      return Move{OpKind::Move, d, t, target, 0};
    }
    case OpKind::Merge:
      break;
  }
  throw DomainError("propose() handles add, remove and move only");
}

std::optional<Move> propose_merge(const CpConfiguration& cfg, Rng& rng) {
  if (cfg.total() < 2) return std::nullopt;
  const auto locs = cfg.union_locations();
  const auto i = rng.index(locs.size() - 1);
  const int a = locs[i];
  const int b = locs[i + 1];
  const int u = rng.between(a, b);
  return Move{OpKind::Merge, -1, a, b, u};
}

void apply(CpConfiguration& cfg, const Move& mv) {
  switch (mv.kind) {
    case OpKind::Add:
      cfg.insert(mv.d, mv.to);
      return;
    case OpKind::Remove:
      cfg.erase(mv.d, mv.from);
      return;
    case OpKind::Move:
      cfg.erase(mv.d, mv.from);
      cfg.insert(mv.d, mv.to);
      return;
    case OpKind::Merge:
      for (int d = 0; d < cfg.frequencies(); ++d) {
        const bool has = cfg.contains(d, mv.from) || cfg.contains(d, mv.to);
        if (!has) continue;
        cfg.erase(d, mv.from);
        cfg.erase(d, mv.to);
        cfg.insert(d, mv.merge_at);
      }
      return;
  }
}

EnergyDelta energy_delta(const CpConfiguration& cfg, const Move& move, const PenaltyParams& pen) {
  EnergyDelta out;
  collect_delta(cfg, move, pen, {out.removed, out.added, out.penalty});
  return out;
}

bool metropolis(double delta_e, double temperature, double xi) {
  if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
  const double x = xi > 0.0 ? xi : 0x1.0p-53;
  return delta_e + temperature * std::log(x) < 0.0;
}

double initial_temperature(const SegmentCostCache& cache, const CpConfiguration& init,
                           const std::vector<int>& active, const PenaltyParams& pen,
                           const SaParams& params, Rng& rng, SaTrace& trace) {
  params.validate();
  Annealer annealer(cache, active, pen, rng, trace);
  double c = params.c0_plus;
  for (int level = 0;; ++level) {
    CpConfiguration scratch = init;
    const auto counts = annealer.sweep(scratch, c, Phase::Preliminary, level);
    trace.preliminary_levels = level + 1;
    const double eta =
        counts.proposed > 0 ? static_cast<double>(counts.accepted) / counts.proposed : 1.0;
    if (eta >= params.target_eta || level + 1 >= params.max_preliminary_levels) break;
    c *= params.lambda_plus;
  }
  trace.initial_temperature = c;
  return c;
}

CpConfiguration anneal(const SegmentCostCache& cache, const CpConfiguration& init,
                       const std::vector<int>& active, const PenaltyParams& pen,
                       const SaParams& params, double c0, Rng& rng, SaTrace& trace) {
  params.validate();
  CpConfiguration cfg = init;
  if (active.empty()) return cfg;
  Annealer annealer(cache, active, pen, rng, trace);
  double c = c0;
  for (int level = 0; level < params.max_temperature_levels; ++level) {
    const auto counts = annealer.sweep(cfg, c, Phase::Anneal, level);
    trace.anneal_levels = level + 1;
    if (counts.accepted == 0) return cfg;
    c *= params.lambda;
  }
  trace.hit_level_cap = true;
  return cfg;
}

CpConfiguration replay(const CpConfiguration& init, const SaTrace& trace) {
  CpConfiguration cfg = init;
  int prelim_level = -1;
  bool annealing = false;
  for (const auto& rec : trace.records) {
    if (rec.phase == Phase::Preliminary && rec.level != prelim_level) {
      cfg = init;
      prelim_level = rec.level;
    }
    if (rec.phase == Phase::Anneal && !annealing) {
      cfg = init;
      annealing = true;
    }
    if (!rec.skipped && rec.accepted) apply(cfg, rec.move);
  }
  if (!annealing) return init;
  return cfg;
}

void sa_inequalities(const SaTrace& trace, const LineCostCache& line, const InequalitySink& sink,
                     std::optional<Phase> only) {
  for (const auto& rec : trace.records) {
    if (rec.skipped) continue;
    if (only && rec.phase != *only) continue;
    const Segment* seg = trace.segments.data() + rec.segment_offset;
    QuadCoeffs q;
    for (int i = 0; i < rec.removed; ++i, ++seg) q -= line.segment(seg->d, seg->first, seg->last);
    for (int i = 0; i < rec.added; ++i, ++seg) q += line.segment(seg->d, seg->first, seg->last);
    const double xi = rec.xi > 0.0 ? rec.xi : 0x1.0p-53;
    q.e0 += rec.penalty_delta + rec.temperature * std::log(xi);
    sink({q, rec.accepted ? Relation::Less : Relation::GreaterEqual});
  }
}

std::vector<QuadInequality> sa_inequalities(const SaTrace& trace, const LineCostCache& line,
                                            std::optional<Phase> only) {
  std::vector<QuadInequality> out;
  sa_inequalities(trace, line, [&](const QuadInequality& q) { out.push_back(q); }, only);
  return out;
}

Detection detect(const SegmentCostCache& cache, const PenaltyParams& pen, const SaParams& params) {
  params.validate();
  Detection out;
  out.initial = initial_configuration(cache, pen);
  out.config = out.initial.config;
  if (out.initial.active.empty()) return out;

  Rng rng(params.seed);
  const double c0 = initial_temperature(cache, out.initial.config, out.initial.active, pen, params,
                                        rng, out.sa);
  out.config = anneal(cache, out.initial.config, out.initial.active, pen, params, c0, rng, out.sa);
  if (out.sa.hit_level_cap) {
    out.warnings.push_back("annealing stopped at the temperature level cap (" +
                           std::to_string(params.max_temperature_levels) + ")");
  }
  return out;
}

Detection detect(const SpectralSequences& f, const DetectConfig& config) {
  return detect(SegmentCostCache(f), config.penalties(f.windows()), config.sa);
}

Detection detect(const TimeSeries& x, const DetectConfig& config) {
  return detect(stft(x, config.window_size), config);
}

}  // namespace freqcp
