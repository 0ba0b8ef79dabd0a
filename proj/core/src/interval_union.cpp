#include "freqcp/interval_union.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "freqcp/errors.hpp"

namespace freqcp {

namespace {

std::vector<Interval> normalise(std::vector<Interval> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](const Interval& i) { return !(i.lo <= i.hi); }),
          v.end());
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const auto& i : v) {
    if (!out.empty() && i.lo <= out.back().hi + IntervalUnion::kMergeTolerance) {
      out.back().hi = std::max(out.back().hi, i.hi);
    } else {
      out.push_back(i);
    }
  }
  return out;
}

struct Roots {
  int count = 0;
  double lo = 0.0;
  double hi = 0.0;
};

// Real roots of e2 r^2 + e1 r + e0 with e2 != 0, cancellation-free.
Roots quadratic_roots(const QuadCoeffs& q) {
  const double disc = q.e1 * q.e1 - 4.0 * q.e2 * q.e0;
  if (disc < 0.0) return {};
  const double sq = std::sqrt(disc);
  const double t = -0.5 * (q.e1 + std::copysign(sq, q.e1));
  double r1 = t / q.e2;
  double r2 = t != 0.0 ? q.e0 / t : r1;
  if (r1 > r2) std::swap(r1, r2);
  return {disc == 0.0 ? 1 : 2, r1, r2};
}

// Set where q(r) < 0 (closure taken), as at most two intervals.
void negative_set(const QuadCoeffs& q, std::vector<Interval>& out) {
  if (q.e2 == 0.0) {
    if (q.e1 == 0.0) {
      if (q.e0 < 0.0) out.push_back({-kInf, kInf});
      return;
    }
    const double root = -q.e0 / q.e1;
    if (q.e1 > 0.0) {
      out.push_back({-kInf, root});
    } else {
      out.push_back({root, kInf});
    }
    return;
  }
  const Roots r = quadratic_roots(q);
  if (q.e2 > 0.0) {
    if (r.count == 2) out.push_back({r.lo, r.hi});
    return;
  }
  if (r.count < 2) {
    out.push_back({-kInf, kInf});
    return;
  }
  out.push_back({-kInf, r.lo});
  out.push_back({r.hi, kInf});
}

// Set where q(r) > 0 (closure taken).
void positive_set(const QuadCoeffs& q, std::vector<Interval>& out) {
  negative_set({-q.e2, -q.e1, -q.e0}, out);
}

}  // namespace

IntervalUnion::IntervalUnion(std::vector<Interval> intervals)
    : intervals_(normalise(std::move(intervals))) {}

const Interval* IntervalUnion::find(double z, double tolerance) const {
  for (const auto& i : intervals_) {
    if (i.lo - tolerance <= z && z <= i.hi + tolerance) return &i;
  }
  return nullptr;
}

bool IntervalUnion::contains(double z, double tolerance) const {
  return find(z, tolerance) != nullptr;
}

IntervalUnion IntervalUnion::unite(const IntervalUnion& other) const {
  std::vector<Interval> v = intervals_;
  v.insert(v.end(), other.intervals_.begin(), other.intervals_.end());
  return IntervalUnion(std::move(v));
}

IntervalUnion IntervalUnion::intersect(const IntervalUnion& other) const {
  std::vector<Interval> out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < intervals_.size() && j < other.intervals_.size()) {
    const Interval& a = intervals_[i];
    const Interval& b = other.intervals_[j];
    const double lo = std::max(a.lo, b.lo);
    const double hi = std::min(a.hi, b.hi);
    if (lo <= hi) out.push_back({lo, hi});
    if (a.hi < b.hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return IntervalUnion(std::move(out));
}

IntervalUnion IntervalUnion::complement() const {
  std::vector<Interval> out;
  double cursor = -kInf;
  for (const auto& i : intervals_) {
    if (i.lo > cursor) out.push_back({cursor, i.lo});
    cursor = i.hi;
  }
  if (cursor < kInf) out.push_back({cursor, kInf});
  return IntervalUnion(std::move(out));
}

double IntervalUnion::length() const {
  double total = 0.0;
  for (const auto& i : intervals_) total += i.length();
  return total;
}

double IntervalUnion::nearest_endpoint(double z) const {
  double best = z;
  double dist = kInf;
  for (const auto& i : intervals_) {
    for (double e : {i.lo, i.hi}) {
      if (std::isfinite(e) && std::abs(e - z) < dist) {
        dist = std::abs(e - z);
        best = e;
      }
    }
  }
  return best;
}

std::string IntervalUnion::to_string() const {
  std::ostringstream os;
  os.precision(10);
  if (intervals_.empty()) return "{}";
  for (std::size_t k = 0; k < intervals_.size(); ++k) {
    if (k) os << " U ";
    os << '[' << intervals_[k].lo << ", " << intervals_[k].hi << ']';
  }
  return os.str();
}

bool QuadInequality::holds(double r) const noexcept {
  const double v = q(r);
  switch (relation) {
    case Relation::Less:
      return v < 0.0;
    case Relation::LessEqual:
      return v <= 0.0;
    case Relation::GreaterEqual:
      return v >= 0.0;
  }
  return false;
}

IntervalUnion solve_quadratic_inequality(const QuadCoeffs& q, Relation relation) {
  if (q.e2 == 0.0 && q.e1 == 0.0) {
    return QuadInequality{q, relation}.holds(0.0) ? IntervalUnion::real_line() : IntervalUnion();
  }
  std::vector<Interval> v;
  if (relation == Relation::GreaterEqual) {
    positive_set(q, v);
  } else {
    negative_set(q, v);
  }
  return IntervalUnion(std::move(v));
}

void RegionBuilder::add(const QuadInequality& ineq) {
  ++count_;
  const QuadCoeffs& q = ineq.q;
  const std::size_t first = forbidden_.size();
  if (q.e2 == 0.0 && q.e1 == 0.0) {
    if (ineq.holds(0.0)) return;
    if (std::isfinite(anchor_) && std::abs(q.e0) <= 1e-9) {
      ++snapped_;
      return;
    }
    forbidden_.push_back({-kInf, kInf});
  } else if (ineq.relation == Relation::GreaterEqual) {
    negative_set(q, forbidden_);
  } else {
    positive_set(q, forbidden_);
  }
  if (!std::isfinite(anchor_)) return;

  for (std::size_t k = first; k < forbidden_.size(); ++k) {
    Interval& f = forbidden_[k];
    if (!(f.lo < anchor_ && anchor_ < f.hi)) continue;
    const double a = anchor_;
    const double scale = std::abs(q.e2) * a * a + std::abs(q.e1 * a) + std::abs(q.e0);
    if (std::abs(q(a)) > 1e-9 * (scale + 1.0)) {
      throw InconsistencyError("recorded decision violated at its own line parameter: q(" +
                               std::to_string(a) + ") = " + std::to_string(q(a)));
    }
    // Round-off level tie: put the anchor on the boundary.
    if (a - f.lo < f.hi - a) {
      f.lo = a;
    } else {
      f.hi = a;
    }
    ++snapped_;
  }
}

IntervalUnion RegionBuilder::finish(double lo, double hi) {
  std::sort(forbidden_.begin(), forbidden_.end(),
            [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
  std::vector<Interval> allowed;
  double cursor = lo;
  auto emit = [&](double from, double to) {
    if (from > to) return;
    const bool holds_anchor = from <= anchor_ && anchor_ <= to;
    if (to - from < 1e-12 && !holds_anchor) return;
    allowed.push_back({from, to});
  };
  for (const auto& f : forbidden_) {
    if (f.hi <= cursor) continue;
    if (f.lo >= hi) break;
    emit(cursor, std::min(f.lo, hi));
    cursor = std::max(cursor, f.hi);
    if (cursor >= hi) break;
  }
  if (cursor < hi) emit(cursor, hi);
  forbidden_.clear();
  return IntervalUnion(std::move(allowed));
}

}  // namespace freqcp
