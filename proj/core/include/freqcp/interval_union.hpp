#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "freqcp/objective.hpp"

namespace freqcp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const noexcept { return hi - lo; }
  bool contains(double z) const noexcept { return lo <= z && z <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite union of disjoint closed intervals, sorted, with endpoints closer
/// than `kMergeTolerance` fused. Endpoints may be infinite.
class IntervalUnion {
 public:
  static constexpr double kMergeTolerance = 1e-10;

  IntervalUnion() = default;
  explicit IntervalUnion(std::vector<Interval> intervals);
  static IntervalUnion real_line() { return IntervalUnion({{-kInf, kInf}}); }
  static IntervalUnion half_line() { return IntervalUnion({{0.0, kInf}}); }

  const std::vector<Interval>& intervals() const noexcept { return intervals_; }
  bool empty() const noexcept { return intervals_.empty(); }
  std::size_t size() const noexcept { return intervals_.size(); }

  bool contains(double z, double tolerance = 0.0) const;
  /// Interval holding z, or nullptr.
  const Interval* find(double z, double tolerance = 0.0) const;

  IntervalUnion unite(const IntervalUnion& other) const;
  IntervalUnion intersect(const IntervalUnion& other) const;
  /// Complement within the real line.
  IntervalUnion complement() const;
  IntervalUnion clip(double lo, double hi) const { return intersect(IntervalUnion({{lo, hi}})); }

  double length() const;
  /// Nearest endpoint to z (z itself if no intervals).
  double nearest_endpoint(double z) const;

  std::string to_string() const;

  friend bool operator==(const IntervalUnion&, const IntervalUnion&) = default;

 private:
  std::vector<Interval> intervals_;
};

/// Sign requirement on a quadratic: q(r) < 0, q(r) <= 0 or q(r) >= 0.
enum class Relation { Less, LessEqual, GreaterEqual };

struct QuadInequality {
  QuadCoeffs q;
  Relation relation = Relation::Less;

  bool holds(double r) const noexcept;
};

/// Exact solution set of one inequality over the real line (closed form;
/// exactly-zero leading coefficients fall back to linear or constant cases).
IntervalUnion solve_quadratic_inequality(const QuadCoeffs& q, Relation relation);

/// Intersection of many inequality solution sets restricted to [lo, hi].
///
/// `anchor` is the line parameter of the run that produced the inequalities.
/// Any violation at the anchor that is within round-off of zero is resolved by
/// moving the offending boundary onto the anchor; a genuine violation throws
/// InconsistencyError.
class RegionBuilder {
 public:
  explicit RegionBuilder(double anchor) : anchor_(anchor) {}

  void add(const QuadInequality& ineq);
  void add(std::span<const QuadInequality> ineqs) {
    for (const auto& i : ineqs) add(i);
  }

  IntervalUnion finish(double lo = 0.0, double hi = kInf);

  std::size_t snapped() const noexcept { return snapped_; }
  std::size_t count() const noexcept { return count_; }

 private:
  double anchor_;
  std::vector<Interval> forbidden_;
  std::size_t snapped_ = 0;
  std::size_t count_ = 0;
};

}  // namespace freqcp
