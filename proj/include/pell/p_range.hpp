#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pell/conditions.hpp"
#include "pell/error.hpp"
#include "pell/parallel.hpp"
#include "pell/tensor.hpp"

namespace pell {

enum class ConditionKind { strong, legendre_hadamard };

inline double t_of_p(double p) {
  detail::require(p > 1.0, "t_of_p: p must be > 1");
  if (std::isinf(p)) return 1.0;
  return 1.0 - 2.0 / p;
}

inline double p_of_t(double t) {
  detail::require(std::isfinite(t) && std::abs(t) < 1.0, "p_of_t: |t| must be < 1");
  return 2.0 / (1.0 - t);
}

/// Open interval (t_lo, t_hi) of t = 1 - 2/p. t_hi = 1 means p_hi = infinity.
struct PRange {
  double t_lo = 0.0;
  double t_hi = 0.0;
  bool empty = true;

  static PRange none() { return {}; }

  double p_lo() const { return 2.0 / (1.0 - t_lo); }
  double p_hi() const { return t_hi >= 1.0 ? std::numeric_limits<double>::infinity() : 2.0 / (1.0 - t_hi); }
  bool contains_t(double t) const { return !empty && t > t_lo && t < t_hi; }

  PRange intersect(const PRange& o) const {
    if (empty || o.empty) return none();
    PRange r{std::max(t_lo, o.t_lo), std::min(t_hi, o.t_hi), false};
    if (r.t_lo >= r.t_hi) return none();
    return r;
  }
};

/// Bisection tolerance in t and the probe distance from t = +-1.
inline constexpr double kRangeTolerance = 1e-4;
inline constexpr double kEndpointProbe = 1e-6;
inline constexpr double kConcavitySlack = 1e-6;

namespace detail {

inline MarginResult margin_of(ConditionKind kind, const CoefficientTensor& a, const SearchConfig& cfg) {
  return kind == ConditionKind::strong ? strong_margin(a, cfg) : lh_margin(a, cfg);
}

// Evaluates margin(t) with a pool of earlier witnesses as warm starts. The
// curve is continuous in t, so nearby witnesses are good starting points.
class MarginProbe {
 public:
  MarginProbe(const CoefficientTensor& a, ConditionKind kind, SearchConfig cfg)
      : a_(a), kind_(kind), cfg_(std::move(cfg)) {
    pool_ = cfg_.warm_starts;
  }

  double operator()(double t) {
    SearchConfig c = cfg_;
    c.t = t;
    c.warm_starts = pool_;
    MarginResult r = margin_of(kind_, a_, c);
    evaluations_ += r.evaluations;
    pool_.push_back(r.witness);
    if (pool_.size() > kPoolSize) pool_.erase(pool_.begin());
    return r.value;
  }

  // Re-evaluates at t and keeps the lower (better) value.
  double refine(double t, double previous) { return std::min(previous, (*this)(t)); }

  std::size_t evaluations() const { return evaluations_; }

 private:
  static constexpr std::size_t kPoolSize = 32;

  const CoefficientTensor& a_;
  ConditionKind kind_;
  SearchConfig cfg_;
  std::vector<Witness> pool_;
  std::size_t evaluations_ = 0;
};

struct CurvePoint {
  double t;
  double value;
};

// Index of the middle point of the first triple violating concavity, if any.
inline std::optional<std::size_t> concavity_violation(const std::vector<CurvePoint>& pts, double slack) {
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const auto& l = pts[i - 1];
    const auto& c = pts[i];
    const auto& r = pts[i + 1];
    const double w = (c.t - l.t) / (r.t - l.t);
    const double chord = (1.0 - w) * l.value + w * r.value;
    if (c.value < chord - slack) return i;
  }
  return std::nullopt;
}

}  // namespace detail

/// {t : margin(t) > 0} for a single tensor, by bisection from t = 0 toward
/// each end. Needs margin(0) > 0; otherwise the range is empty. Reported
/// endpoints are the last positive t moved toward 0 by the tolerance, and
/// are clamped to +-1 when the margin is still positive at +-(1 - 1e-6).
inline PRange condition_range(const CoefficientTensor& a, ConditionKind kind, const SearchConfig& cfg) {
  cfg.validate();
  detail::MarginProbe probe(a, kind, cfg);
  std::vector<detail::CurvePoint> pts;
  auto sample = [&](double t) {
    const double v = probe(t);
    pts.push_back({t, v});
    return v;
  };

  if (!(sample(0.0) > 0.0)) return PRange::none();

  double ends[2] = {0.0, 0.0};
  for (int dir = 0; dir < 2; ++dir) {
    const double s = dir == 0 ? 1.0 : -1.0;
    const double edge = s * (1.0 - kEndpointProbe);
    if (sample(edge) > 0.0) {
      ends[dir] = s;
      continue;
    }
    double good = 0.0, bad = edge;
    while (std::abs(bad - good) > kRangeTolerance) {
      const double mid = 0.5 * (good + bad);
      (sample(mid) > 0.0 ? good : bad) = mid;
    }
    ends[dir] = std::abs(good) > kRangeTolerance ? good - s * kRangeTolerance : 0.0;
  }

  // The margin is an infimum of concave quadratics in t. A concavity
  // violation means the outer search missed somewhere: re-run the three
  // points of the offending triple once with the grown warm-start pool.
  std::sort(pts.begin(), pts.end(), [](const auto& l, const auto& r) { return l.t < r.t; });
  if (auto bad = detail::concavity_violation(pts, kConcavitySlack)) {
    for (std::size_t j = *bad - 1; j <= *bad + 1; ++j) pts[j].value = probe.refine(pts[j].t, pts[j].value);
    if (detail::concavity_violation(pts, kConcavitySlack))
      throw InconsistencyError("margin is not concave in t: outer search missed a minimizer");
    for (const auto& p : pts)
      if (p.t == 0.0 && !(p.value > 0.0)) return PRange::none();
  }

  PRange r{ends[1], ends[0], false};
  if (r.t_lo >= r.t_hi) return PRange::none();
  return r;
}

namespace detail {
template <class Fn>
auto with_sample_index(std::size_t i, Fn&& fn) {
  const std::string where = "sample " + std::to_string(i) + ": ";
  try {
    return fn();
  } catch (const NumericalError& e) {
    throw NumericalError(where + e.what(), e.best_value(), e.evaluations());
  } catch (const InconsistencyError& e) {
    throw InconsistencyError(where + e.what());
  } catch (const InputError& e) {
    throw InputError(where + e.what());
  }
}
}  // namespace detail

/// Intersection of condition_range over all samples of a field.
inline PRange field_range(const TensorField& f, ConditionKind kind, const SearchConfig& cfg) {
  if (f.is_constant()) return condition_range(f.sample(0), kind, cfg);
  std::vector<PRange> ranges(f.sample_count());
  parallel_for(ranges.size(), [&](std::size_t i) {
    ranges[i] = detail::with_sample_index(i, [&] { return condition_range(f.sample(i), kind, cfg); });
  });
  PRange out{-1.0, 1.0, false};
  for (const auto& r : ranges) out = out.intersect(r);
  return out;
}

/// Hausdorff distance between range(A*) and the reflection of range(A).
/// Infinite when the adjoint's range comes out empty.
inline double duality_residual(const CoefficientTensor& a, ConditionKind kind, const SearchConfig& cfg) {
  const PRange ra = condition_range(a, kind, cfg);
  detail::require(!ra.empty, "duality_residual: the tensor's range is empty");
  const PRange rs = condition_range(adjoint(a), kind, cfg);
  if (rs.empty) return std::numeric_limits<double>::infinity();
  return std::max(std::abs(rs.t_lo + ra.t_hi), std::abs(rs.t_hi + ra.t_lo));
}

/// Margin at each t of `ts`, from a forward and a backward warm-started
/// sweep; each entry is the lower of the two.
inline std::vector<double> margin_curve(const CoefficientTensor& a, ConditionKind kind, const SearchConfig& cfg,
                                        const std::vector<double>& ts) {
  cfg.validate();
  std::vector<double> out(ts.size(), std::numeric_limits<double>::infinity());
  detail::MarginProbe probe(a, kind, cfg);
  for (std::size_t i = 0; i < ts.size(); ++i) out[i] = probe(ts[i]);
  for (std::size_t i = ts.size(); i-- > 0;) out[i] = probe.refine(ts[i], out[i]);
  return out;
}

}  // namespace pell
