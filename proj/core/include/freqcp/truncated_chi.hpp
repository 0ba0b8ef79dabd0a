#pragma once

#include "freqcp/interval_union.hpp"

namespace freqcp {

/// log P(chi_df >= z); stays finite far into the tail.
double log_chi_sf(double z, double df);
/// P(chi_df >= z).
double chi_sf(double z, double df);
/// Smallest z with P(chi_df >= z) <= tail.
double chi_upper_quantile(double tail, double df);

/// log of the chi_df probability of [lo, hi] (hi may be infinite); -inf if empty.
double log_chi_mass(double lo, double hi, double df);

/// P(Z >= z | Z in region) for Z ~ chi_df. Throws NumericalDegeneracyError when
/// the region carries no probability.
double truncated_chi_sf(double z, double df, const IntervalUnion& region);

}  // namespace freqcp
