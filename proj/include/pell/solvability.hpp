#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pell/error.hpp"
#include "pell/lame.hpp"
#include "pell/parallel.hpp"

namespace pell {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Interval of exponents p with explicit endpoint closure.
struct PInterval {
  double lo = 2.0;
  double hi = 2.0;
  bool lo_closed = false;
  bool hi_closed = false;
  bool empty = true;

  static PInterval open(double lo, double hi) { return {lo, hi, false, false, !(lo < hi)}; }
  static PInterval closed_open(double lo, double hi) { return {lo, hi, true, false, !(lo < hi)}; }

  bool contains(double p) const {
    if (empty) return false;
    const bool above = lo_closed ? p >= lo : p > lo;
    const bool below = hi_closed ? p <= hi : p < hi;
    return above && below;
  }
};

enum class Theorem { extrapolation, homogenization, lame_corollary };

inline const char* to_string(Theorem t) {
  switch (t) {
    case Theorem::extrapolation: return "extrapolation";
    case Theorem::homogenization: return "homogenization";
    case Theorem::lame_corollary: return "lame-corollary";
  }
  return "?";
}

struct SolvabilityQuery {
  int n = 3;
  double q = 2.0;
  double p0 = kInfinity;
  std::optional<double> drift_bound;  // informational only
};

struct SolvabilityReport {
  PInterval range;
  Theorem theorem = Theorem::extrapolation;
  std::vector<std::pair<std::string, PInterval>> parts;  // named sub-intervals behind `range`
  std::vector<std::string> notes;
};

/// p0 (n-1)/(n-2), or infinity for n = 2 or p0 = infinity.
inline double extrapolation_upper(int n, double p0) {
  if (n == 2 || std::isinf(p0)) return kInfinity;
  return p0 * (n - 1.0) / (n - 2.0);
}

inline SolvabilityReport extrapolation_range(const SolvabilityQuery& query) {
  detail::require(query.n >= 2, "extrapolation_range: n must be >= 2");
  detail::require(query.q > 1.0 && std::isfinite(query.q), "extrapolation_range: q must satisfy 1 < q < infinity");
  detail::require(query.p0 > 1.0, "extrapolation_range: p0 must be > 1");
  if (query.drift_bound) detail::require(*query.drift_bound >= 0.0, "extrapolation_range: drift bound must be >= 0");
  const double upper = extrapolation_upper(query.n, query.p0);
  if (!(query.q < upper)) {
    std::ostringstream msg;
    msg << "extrapolation_range: need q < p0 (n-1)/(n-2) = " << upper << ", got q = " << query.q;
    throw InputError(msg.str());
  }
  SolvabilityReport r;
  r.theorem = Theorem::extrapolation;
  r.range = PInterval::closed_open(query.q, upper);
  r.notes.push_back("left endpoint q is included, right endpoint p0(n-1)/(n-2) is excluded");
  if (query.drift_bound)
    r.notes.push_back("first-order term assumed small: |B| delta <= K with K recorded as given, not verified");
  return r;
}

/// Improvement (2, q_strong (n-1)/(n-2)) combined with the baseline range
/// (2 - delta, infinity) for m = 1 or n in {2,3}, and
/// (2 - delta, 2(n-1)/(n-3) + delta) otherwise. delta is kept symbolic:
/// numerically the baseline is (2, ...) without the + delta.
inline SolvabilityReport homogenization_range(int n, int m, double q_strong) {
  detail::require(n >= 2, "homogenization_range: n must be >= 2");
  detail::require(m >= 1, "homogenization_range: m must be >= 1");
  detail::require(q_strong > 1.0, "homogenization_range: q_strong must be > 1");
  SolvabilityReport r;
  r.theorem = Theorem::homogenization;

  PInterval improvement = q_strong > 2.0 ? PInterval::open(2.0, extrapolation_upper(n, q_strong)) : PInterval{};
  const bool unbounded_baseline = m == 1 || n <= 3;
  PInterval baseline = PInterval::open(2.0, unbounded_baseline ? kInfinity : 2.0 * (n - 1.0) / (n - 3.0));

  r.parts.emplace_back("improvement", improvement);
  r.parts.emplace_back("baseline", baseline);
  r.range = baseline;
  if (!improvement.empty && improvement.hi > baseline.hi) r.range.hi = improvement.hi;

  if (improvement.empty) r.notes.push_back("q_strong <= 2: no improvement interval");
  r.notes.push_back(unbounded_baseline ? "baseline is (2 - delta, inf) for some small unspecified delta > 0"
                                       : "baseline is (2 - delta, 2(n-1)/(n-3) + delta) for some small unspecified "
                                         "delta > 0");
  r.notes.push_back("numeric endpoints drop delta: lower endpoint 2, no + delta on the baseline upper endpoint");
  if (!improvement.empty && improvement.hi <= baseline.hi) r.notes.push_back("improvement subsumed by the baseline");
  return r;
}

/// Open upper solvability endpoint for the Lame system: with C the lower
/// bound on the Lame constant, p0 = 2/(1 - sqrt C) and the endpoint is
/// p0 (n-1)/(n-2). Infinite for n = 2 or C = 1.
inline double lame_dirichlet_upper(int n, double lambda, double mu) {
  LameParams{n, lambda, mu}.validate();
  if (n == 2) return kInfinity;
  const double c = sufficient_constant(n, lambda, mu).C_lower;
  if (c >= 1.0) return kInfinity;
  const double p0 = 2.0 / (1.0 - std::sqrt(c));
  return extrapolation_upper(n, p0);
}

inline constexpr const char* kCorollaryDisplayNote =
    "the displayed corollary exponent 2(n-1)/((n-2)(1-C)^{1/2}) and the chain p0 = 2/(1-sqrt C), "
    "p_up = p0(n-1)/(n-2) disagree; the chain is used since it reproduces the tabulated values "
    "p(3) > 11.50, p(4) > 8.055 and 4.546(n-1)/(n-2)";

inline SolvabilityReport lame_corollary_range(int n, double lambda, double mu) {
  SolvabilityReport r;
  r.theorem = Theorem::lame_corollary;
  r.range = PInterval::open(2.0, lame_dirichlet_upper(n, lambda, mu));
  r.notes.push_back("range is (2 - eps, p_up) for some small unspecified eps > 0; numeric lower endpoint 2");
  r.notes.push_back(kCorollaryDisplayNote);
  return r;
}

/// 2/(1 - sqrt(8 sqrt 2 - 11)).
inline double lame_asymptotic_constant() { return 2.0 / (1.0 - std::sqrt(8.0 * std::sqrt(2.0) - 11.0)); }

struct WorstCase {
  double a_star = 0.0;   // lambda/mu at the minimum
  double C_star = 0.0;   // C_lower there
  double p_up_star = 0.0;
  double asymptotic = 0.0;  // lame_asymptotic_constant() (n-1)/(n-2)
};

/// Minimizes lame_dirichlet_upper(n, a, 1) over the interior grid
/// a_i = a_lo + (i+1)(a_hi - a_lo)/(G+1), i = 0..G-1. Ties go to the smaller a.
inline WorstCase worst_case_over_ratio(int n, double a_lo = 1.0 - std::sqrt(8.0), double a_hi = 1.0 + std::sqrt(8.0),
                                       int grid_points = 10000) {
  detail::require(grid_points >= 100, "worst_case_over_ratio: grid_points must be >= 100");
  detail::require(n >= 2, "worst_case_over_ratio: n must be >= 2");
  detail::require(a_lo < a_hi, "worst_case_over_ratio: need a_lo < a_hi");
  detail::require(a_lo > -2.0, "worst_case_over_ratio: a_lo must exceed -2 (lambda + 2 mu > 0)");
  const auto count = static_cast<std::size_t>(grid_points);
  std::vector<double> values(count);
  auto a_at = [&](std::size_t i) { return a_lo + (static_cast<double>(i) + 1.0) * (a_hi - a_lo) / (grid_points + 1.0); };
  parallel_for(count, [&](std::size_t i) { values[i] = lame_dirichlet_upper(n, a_at(i), 1.0); });
  std::size_t best = 0;
  for (std::size_t i = 1; i < count; ++i)
    if (values[i] < values[best]) best = i;
  WorstCase w;
  w.a_star = a_at(best);
  w.C_star = n == 2 ? necessary_constant(n, w.a_star, 1.0) : sufficient_constant(n, w.a_star, 1.0).C_lower;
  w.p_up_star = values[best];
  w.asymptotic = n == 2 ? kInfinity : lame_asymptotic_constant() * (n - 1.0) / (n - 2.0);
  return w;
}

}  // namespace pell
