#pragma once

// Lame system: tensor builders, closed-form p-ellipticity constants,
// admissibility predicates, and a sampled oscillation scan.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pell/error.hpp"
#include "pell/p_range.hpp"
#include "pell/parallel.hpp"
#include "pell/tensor.hpp"

namespace pell {

struct LameParams {
  int n = 2;
  double lambda = 1.0;
  double mu = 1.0;

  void validate() const {
    detail::require(n >= 2, "Lame parameters: n must be >= 2");
    detail::require(std::isfinite(lambda) && std::isfinite(mu), "Lame parameters must be finite");
    detail::require(mu > 0.0, "Lame parameters: mu must be positive");
    detail::require(lambda + 2.0 * mu > 0.0, "Lame parameters: lambda + 2 mu must be positive");
  }
};

enum class LameBranch { n2, cubic, dim_independent, case1 };

inline const char* to_string(LameBranch b) {
  switch (b) {
    case LameBranch::n2: return "n2";
    case LameBranch::cubic: return "cubic";
    case LameBranch::dim_independent: return "dim-independent";
    case LameBranch::case1: return "case1";
  }
  return "?";
}

struct LameSufficiency {
  double C_lower = 0.0;
  double C_upper = 0.0;
  double gamma_star = 0.0;
  double r_star = 0.0;
  LameBranch branch = LameBranch::n2;
  PRange p_interval;  // {p : (1 - 2/p)^2 < C_lower}
};

/// A^{hk}_{ab} = mu d^{hk} d_{ab} + (lambda + r) d^h_a d^k_b + (mu - r) d^h_b d^k_a, m = n.
inline CoefficientTensor lame_tensor(double lambda, double mu, double r, int n) {
  LameParams{n, lambda, mu}.validate();
  detail::require(std::isfinite(r), "lame_tensor: r must be finite");
  CoefficientTensor a(n, n);
  for (int h = 0; h < n; ++h)
    for (int k = 0; k < n; ++k)
      for (int al = 0; al < n; ++al)
        for (int be = 0; be < n; ++be) {
          double v = 0.0;
          if (h == k && al == be) v += mu;
          if (h == al && k == be) v += lambda + r;
          if (h == be && k == al) v += mu - r;
          a(h, k, al, be) = v;
        }
  return a;
}

inline double necessary_constant(int n, double lambda, double mu) {
  LameParams{n, lambda, mu}.validate();
  const double x = (lambda + mu) / (lambda + 3.0 * mu);
  return 1.0 - x * x;
}

/// Cubic in x = gamma/mu with a = lambda/mu, scaled so the x^3 coefficient is (n-2)/(n-1).
inline double lame_cubic(int n, double a, double x) {
  const double nn = static_cast<double>(n);
  return (nn - 2.0) / (nn - 1.0) * x * x * x + (1.0 / (a + 2.0) - a - nn / (nn - 1.0)) * x * x -
         2.0 * (a + 1.0) / (a + 2.0) * x + (a + 1.0) * (a + 1.0) / (a + 2.0);
}

/// Roots {-1, x_minus, x_plus} of lame_cubic for n >= 3.
inline std::array<double, 3> lame_cubic_roots(int n, double lambda, double mu) {
  LameParams{n, lambda, mu}.validate();
  detail::require(n >= 3, "lame_cubic_roots: n must be >= 3");
  const double nn = static_cast<double>(n);
  const double scale = (nn - 1.0) / (2.0 * (nn - 2.0)) * (lambda + mu) / (mu * (lambda + 2.0 * mu));
  const double disc = (lambda + mu) * (lambda + mu) + 4.0 * mu * (lambda + 2.0 * mu) / (nn - 1.0);
  if (!(disc >= 0.0)) throw NumericalError("lame_cubic_roots: negative discriminant", disc, 0);
  const double root = std::sqrt(disc);
  return {-1.0, scale * ((lambda + 3.0 * mu) - root), scale * ((lambda + 3.0 * mu) + root)};
}

namespace detail {

// 1 - (lambda+mu-gamma)^2 / ((lambda+2mu)(lambda+mu-gamma+(mu+gamma)/(n-1))),
// or nullopt when gamma violates the positivity constraints it relies on.
inline std::optional<double> lame_trace_term(int n, double lambda, double mu, double gamma) {
  const double b = lambda + mu - gamma;
  const double c = b + (mu + gamma) / (n - 1.0);
  if (!(c > 0.0)) return std::nullopt;
  if (!((lambda + 2.0 * mu) * c > b * b)) return std::nullopt;
  if (n >= 3 && !(gamma < ((n - 1.0) * lambda + n * mu) / (n - 2.0))) return std::nullopt;
  return 1.0 - b * b / ((lambda + 2.0 * mu) * c);
}

inline PRange lame_interval(double c) {
  if (!(c > 0.0)) return PRange::none();
  const double s = std::sqrt(std::min(c, 1.0));
  return PRange{-s, s, false};
}

}  // namespace detail

/// Lower and upper bounds on the Lame constant C(n, lambda, mu). Exact for
/// n = 2. For n >= 3 the lower bound is the best of the dimension-free
/// bound and every admissible root of the cubic.
inline LameSufficiency sufficient_constant(int n, double lambda, double mu) {
  LameParams{n, lambda, mu}.validate();
  LameSufficiency s;
  s.C_upper = necessary_constant(n, lambda, mu);
  const double lm = lambda + mu;

  if (n == 2) {
    s.C_lower = s.C_upper;
    s.gamma_star = mu * lm / (lambda + 3.0 * mu);
    s.r_star = 2.0 * mu * mu / (lambda + 3.0 * mu);
    s.branch = LameBranch::n2;
    s.p_interval = detail::lame_interval(s.C_lower);
    return s;
  }

  // Dimension-free bound, epsilon -> 0.
  const double denom = std::max(mu, lambda + 2.0 * mu);
  const double ratio = lm / denom;
  s.C_lower = 1.0 - ratio * ratio;
  if (lm < 0.0) {
    s.branch = LameBranch::case1;
    s.gamma_star = lm;
  } else {
    s.branch = LameBranch::dim_independent;
    s.gamma_star = mu - mu * mu / (lambda + 2.0 * mu);
  }

  const auto roots = lame_cubic_roots(n, lambda, mu);
  for (std::size_t i = 1; i < roots.size(); ++i) {
    const double x = roots[i];
    if (!(std::abs(x) < 1.0)) continue;
    const double gamma = mu * x;
    const auto trace = detail::lame_trace_term(n, lambda, mu, gamma);
    if (!trace) continue;
    const double value = std::min(1.0 - x * x, *trace);
    if (value > s.C_lower) {
      s.C_lower = value;
      s.gamma_star = gamma;
      s.branch = LameBranch::cubic;
    }
  }
  s.C_lower = std::min(s.C_lower, s.C_upper);
  s.r_star = mu - s.gamma_star;
  s.p_interval = detail::lame_interval(s.C_lower);
  return s;
}

/// Essential infimum of sufficient_constant over sampled moduli. The
/// returned gamma/r/branch belong to the sample attaining the lowest C_lower.
inline LameSufficiency sufficient_constant_field(int n, const std::vector<double>& lambdas,
                                                 const std::vector<double>& mus) {
  detail::require(!lambdas.empty() && lambdas.size() == mus.size(),
                  "Lame field: lambda and mu need the same non-zero sample count");
  LameSufficiency worst;
  double upper = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    LameSufficiency s = sufficient_constant(n, lambdas[i], mus[i]);
    upper = std::min(upper, s.C_upper);
    if (i == 0 || s.C_lower < worst.C_lower) worst = s;
  }
  worst.C_upper = upper;
  return worst;
}

struct AdmissibilityReport {
  bool admissible = false;
  double inf_expression = 0.0;  // ess inf of min{(sqrt8-1)mu+lambda, (sqrt8+1)mu-lambda}
  bool poisson_defined = true;
  double poisson_max = 0.0;     // largest nu = lambda / (2(lambda+mu)) over samples
  bool poisson_below = false;   // nu < 0.396 at every sample
};

inline constexpr double kPoissonThreshold = 0.396;

inline AdmissibilityReport admissibility(const std::vector<double>& lambdas, const std::vector<double>& mus,
                                         double mu0) {
  detail::require(mu0 > 0.0, "admissibility: mu0 must be positive");
  detail::require(!lambdas.empty() && lambdas.size() == mus.size(),
                  "admissibility: lambda and mu need the same non-zero sample count");
  const double s8 = std::sqrt(8.0);
  AdmissibilityReport r;
  r.inf_expression = std::numeric_limits<double>::infinity();
  r.poisson_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double l = lambdas[i], m = mus[i];
    detail::require(std::isfinite(l) && std::isfinite(m), "admissibility: moduli must be finite");
    r.inf_expression = std::min({r.inf_expression, (s8 - 1.0) * m + l, (s8 + 1.0) * m - l});
    if (l + m == 0.0) r.poisson_defined = false;
    else r.poisson_max = std::max(r.poisson_max, l / (2.0 * (l + m)));
  }
  r.admissible = r.inf_expression >= mu0;
  r.poisson_below = r.poisson_defined && r.poisson_max < kPoissonThreshold;
  return r;
}

inline AdmissibilityReport admissibility(double lambda, double mu, double mu0) {
  return admissibility(std::vector<double>{lambda}, std::vector<double>{mu}, mu0);
}

struct OscillationReport {
  double max_sum = 0.0;
  std::size_t argmax = 0;
  bool passes = true;                // max_sum <= K
  std::vector<std::size_t> isolated; // points whose ball held no other lattice point
};

/// For every point x: osc of lambda plus osc of mu over the lattice points
/// in the closed ball B(x, delta(x)/2). Lattice sampling only, so this
/// under-approximates the true oscillation.
inline OscillationReport oscillation_scan(const std::vector<double>& lambdas, const std::vector<double>& mus,
                                          const std::vector<std::vector<double>>& points,
                                          const std::vector<double>& delta, double K) {
  const std::size_t count = points.size();
  detail::require(count >= 1, "oscillation_scan: need at least one point");
  detail::require(lambdas.size() == count && mus.size() == count && delta.size() == count,
                  "oscillation_scan: fields, points, and delta must share the lattice");
  for (double d : delta) detail::require(d > 0.0, "oscillation_scan: delta must be positive");
  std::vector<double> sums(count);
  std::vector<char> alone(count);
  parallel_for(count, [&](std::size_t i) {
    double lmin = lambdas[i], lmax = lambdas[i], mmin = mus[i], mmax = mus[i];
    const double radius2 = std::pow(0.5 * delta[i] + 1e-12, 2);
    bool neighbour = false;
    for (std::size_t j = 0; j < count; ++j) {
      if (j == i) continue;
      double d2 = 0.0;
      for (std::size_t c = 0; c < points[i].size(); ++c) d2 += std::pow(points[i][c] - points[j][c], 2);
      if (d2 > radius2) continue;
      neighbour = true;
      lmin = std::min(lmin, lambdas[j]);
      lmax = std::max(lmax, lambdas[j]);
      mmin = std::min(mmin, mus[j]);
      mmax = std::max(mmax, mus[j]);
    }
    sums[i] = (lmax - lmin) + (mmax - mmin);
    alone[i] = !neighbour;
  });
  OscillationReport r;
  for (std::size_t i = 0; i < count; ++i) {
    if (sums[i] > r.max_sum) r.max_sum = sums[i], r.argmax = i;
    if (alone[i]) r.isolated.push_back(i);
  }
  r.passes = r.max_sum <= K;
  return r;
}

}  // namespace pell
