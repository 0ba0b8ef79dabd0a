#include "freqcp/truncated_chi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "freqcp/errors.hpp"

namespace freqcp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_df(double df) {
  if (!(df > 0.0) || !std::isfinite(df)) throw DomainError("degrees of freedom must be positive");
}

// log Q(s, x) by the Legendre continued fraction (modified Lentz), valid for x > s + 1.
double log_gamma_q_cf(double s, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return -x + s * std::log(x) - std::lgamma(s) + std::log(h);
}

double log_gamma_q(double s, double x) {
  if (x <= 0.0) return 0.0;
  const double q = boost::math::gamma_q(s, x);
  if (q > 1e-280) return std::log(q);
  return log_gamma_q_cf(s, x);
}

double log_chi_density(double z, double df) {
  if (z <= 0.0) return df == 1.0 ? std::log(std::sqrt(2.0 / M_PI)) : kNegInf;
  const double s = 0.5 * df;
  return (df - 1.0) * std::log(z) - 0.5 * z * z - (s - 1.0) * std::log(2.0) - std::lgamma(s);
}

// Simpson's rule on the density; used when endpoint differences cancel.
double log_mass_narrow(double lo, double hi, double df) {
  const double mid = 0.5 * (lo + hi);
  const double ref = log_chi_density(mid, df);
  if (ref == kNegInf) return kNegInf;
  const double w = std::exp(log_chi_density(lo, df) - ref) +
                   4.0 * std::exp(log_chi_density(mid, df) - ref) +
                   std::exp(log_chi_density(hi, df) - ref);
  return ref + std::log((hi - lo) / 6.0 * w);
}

double log_sum_exp(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

constexpr double kCancellation = 1e-6;

}  // namespace

double log_chi_sf(double z, double df) {
  check_df(df);
  if (z <= 0.0) return 0.0;
  if (std::isinf(z)) return kNegInf;
  return log_gamma_q(0.5 * df, 0.5 * z * z);
}

double chi_sf(double z, double df) { return std::exp(log_chi_sf(z, df)); }

double chi_upper_quantile(double tail, double df) {
  check_df(df);
  if (!(tail > 0.0 && tail < 1.0)) throw DomainError("tail probability must lie in (0, 1)");
  return std::sqrt(2.0 * boost::math::gamma_q_inv(0.5 * df, tail));
}

double log_chi_mass(double lo, double hi, double df) {
  check_df(df);
  lo = std::max(lo, 0.0);
  if (!(hi > lo)) return kNegInf;
  const double s = 0.5 * df;
  const double x_lo = 0.5 * lo * lo;
  if (x_lo >= s) {
    // upper tail: Q(lo) - Q(hi) in log space
    const double a = log_gamma_q(s, x_lo);
    if (std::isinf(hi)) return a;
    const double b = log_gamma_q(s, 0.5 * hi * hi);
    const double ratio = std::exp(b - a);
    if (1.0 - ratio < kCancellation) return log_mass_narrow(lo, hi, df);
    return a + std::log1p(-ratio);
  }
  if (std::isinf(hi)) return std::log(boost::math::gamma_q(s, x_lo));
  const double p_hi = boost::math::gamma_p(s, 0.5 * hi * hi);
  const double p_lo = boost::math::gamma_p(s, x_lo);
  const double diff = p_hi - p_lo;
  if (diff < kCancellation * p_hi) return log_mass_narrow(lo, hi, df);
  return std::log(diff);
}

double truncated_chi_sf(double z, double df, const IntervalUnion& region) {
  check_df(df);
  std::vector<double> num;
  std::vector<double> den;
  for (const auto& iv : region.intervals()) {
    if (iv.hi <= 0.0) continue;
    den.push_back(log_chi_mass(iv.lo, iv.hi, df));
    if (iv.hi > z) num.push_back(log_chi_mass(std::max(iv.lo, z), iv.hi, df));
  }
  const double log_den = log_sum_exp(den);
  if (log_den == kNegInf) throw NumericalDegeneracyError("truncation region has zero probability");
  const double log_num = log_sum_exp(num);
  if (log_num == kNegInf) return 0.0;
  return std::clamp(std::exp(log_num - log_den), 0.0, 1.0);
}

}  // namespace freqcp
