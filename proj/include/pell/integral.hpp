#pragma once

// Discrete version of the integral p-ellipticity quotient on [0,1]^n.
//
// Test functions live on the lattice x_i = i/(N-1) and vanish on the
// boundary layer. Gradients are forward differences on each cell, the
// coefficient tensor is read at the cell midpoint, and the
// (v/|v|) grad|v| term is omega Re<omega, grad v> with omega = v/|v| at
// the cell midpoint (the mean of the cell's corners).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pell/conditions.hpp"
#include "pell/error.hpp"
#include "pell/parallel.hpp"
#include "pell/tensor.hpp"

namespace pell {

/// Complex m-vector per lattice point of [0,1]^n, row-major with axis 0
/// slowest and the m components innermost.
struct TestFunctionGrid {
  int n = 2;
  int m = 1;
  int N = 8;
  std::vector<cplx> values;

  std::size_t points() const {
    std::size_t c = 1;
    for (int d = 0; d < n; ++d) c *= static_cast<std::size_t>(N);
    return c;
  }

  cplx& at(std::size_t point, int a) { return values[point * static_cast<std::size_t>(m) + a]; }
  const cplx& at(std::size_t point, int a) const { return values[point * static_cast<std::size_t>(m) + a]; }

  std::vector<int> coords(std::size_t point) const {
    std::vector<int> c(static_cast<std::size_t>(n));
    for (int d = n; d-- > 0;) {
      c[static_cast<std::size_t>(d)] = static_cast<int>(point % static_cast<std::size_t>(N));
      point /= static_cast<std::size_t>(N);
    }
    return c;
  }

  bool on_boundary(std::size_t point) const {
    for (int c : coords(point))
      if (c == 0 || c == N - 1) return true;
    return false;
  }
};

enum class TestFamily { sine_sum, oscillation };

struct Counterexample {
  TestFunctionGrid v;
  double quotient = 0.0;
  double p = 2.0;
  std::uint64_t seed = 0;        // seed passed to the falsifier
  std::size_t trial = 0;         // index of the offending trial
  std::uint64_t trial_seed = 0;  // substream_seed(seed, trial)
  TestFamily family = TestFamily::sine_sum;
};

inline constexpr int kMaxTestFrequency = 4;
inline constexpr double kDegenerateFraction = 1e-12;

namespace detail {

inline void check_desk_limits(int n, int m, int N) {
  require(n == 2 || n == 3, "test functions need n in {2, 3}");
  require(m >= 1 && m <= 4, "test functions need 1 <= m <= 4");
  require(N >= 8 && N <= 65, "test functions need 8 <= N <= 65");
}

inline void validate_grid(const TestFunctionGrid& v) {
  check_desk_limits(v.n, v.m, v.N);
  require(v.values.size() == v.points() * static_cast<std::size_t>(v.m), "test function has the wrong value count");
  for (std::size_t i = 0; i < v.points(); ++i)
    if (v.on_boundary(i))
      for (int a = 0; a < v.m; ++a) require(v.at(i, a) == cplx{}, "test function must vanish on the boundary");
}

// Per-cell data: midpoint value (mean of the 2^n corners) and the
// forward-difference gradient from the lower corner.
struct Cell {
  std::vector<cplx> u;
  GradientState grad;
  std::vector<double> midpoint;
};

template <class Fn>
void for_each_cell(const TestFunctionGrid& v, Fn&& fn) {
  const int n = v.n, N = v.N, m = v.m;
  const double inv_h = static_cast<double>(N - 1);
  std::vector<std::size_t> stride(static_cast<std::size_t>(n));
  stride[static_cast<std::size_t>(n - 1)] = 1;
  for (int d = n - 1; d-- > 0;) stride[d] = stride[d + 1] * static_cast<std::size_t>(N);

  std::vector<std::size_t> corners(std::size_t{1} << n, 0);
  for (std::size_t mask = 0; mask < corners.size(); ++mask)
    for (int d = 0; d < n; ++d)
      if (mask >> d & 1u) corners[mask] += stride[d];
  const double corner_weight = 1.0 / static_cast<double>(corners.size());

  Cell cell{std::vector<cplx>(static_cast<std::size_t>(m)), GradientState(n, m), std::vector<double>(n)};
  for (std::size_t i = 0; i < v.points(); ++i) {
    const auto c = v.coords(i);
    bool interior_corner = true;
    for (int d = 0; d < n; ++d) interior_corner = interior_corner && c[d] < N - 1;
    if (!interior_corner) continue;
    for (int a = 0; a < m; ++a) {
      cplx sum{};
      for (std::size_t off : corners) sum += v.at(i + off, a);
      cell.u[a] = sum * corner_weight;
    }
    for (int h = 0; h < n; ++h) {
      for (int a = 0; a < m; ++a) cell.grad(h, a) = (v.at(i + stride[h], a) - v.at(i, a)) * inv_h;
      cell.midpoint[h] = (c[h] + 0.5) / (N - 1);
    }
    fn(cell);
  }
}

inline double max_abs(const TestFunctionGrid& v) {
  double mx = 0.0;
  for (std::size_t i = 0; i < v.points(); ++i) {
    double s = 0.0;
    for (int a = 0; a < v.m; ++a) s += std::norm(v.at(i, a));
    mx = std::max(mx, std::sqrt(s));
  }
  return mx;
}

inline double vec_norm(const std::vector<cplx>& u) {
  double s = 0.0;
  for (const auto& z : u) s += std::norm(z);
  return std::sqrt(s);
}

// Draws the real part before the imaginary part (argument evaluation order
// is unspecified, so the two draws are sequenced explicitly).
inline cplx draw(std::mt19937_64& rng, std::normal_distribution<double>& normal, bool complex_field) {
  const double re = normal(rng);
  if (!complex_field) return {re, 0.0};
  const double im = normal(rng);
  return {re, im};
}

inline std::vector<cplx> random_unit(std::mt19937_64& rng, int m, bool complex_field) {
  std::normal_distribution<double> normal;
  std::vector<cplx> c(static_cast<std::size_t>(m));
  double s = 0.0;
  for (auto& z : c) {
    z = draw(rng, normal, complex_field);
    s += std::norm(z);
  }
  for (auto& z : c) z /= std::sqrt(s);
  return c;
}

}  // namespace detail

/// Draws a test function. `sine_sum` is a tensor-product sine series with
/// frequencies 1..4 per axis and normal coefficients. `oscillation` is a
/// bump times (omega + g sin(2 pi k q.x + phi) eta): its gradient is close
/// to rank one (q (x) eta) while v/|v| sweeps around omega.
inline TestFunctionGrid random_test_function(int n, int m, int N, std::uint64_t seed, bool complex_field,
                                             TestFamily family = TestFamily::sine_sum) {
  detail::check_desk_limits(n, m, N);
  TestFunctionGrid v{n, m, N, {}};
  v.values.assign(v.points() * static_cast<std::size_t>(m), cplx{});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double pi = std::numbers::pi;

  if (family == TestFamily::sine_sum) {
    int modes = 1;
    for (int d = 0; d < n; ++d) modes *= kMaxTestFrequency;
    std::vector<cplx> coef(static_cast<std::size_t>(modes * m));
    for (auto& c : coef) c = detail::draw(rng, normal, complex_field);
    // sines[d][f][i] = sin(pi (f+1) x_i)
    std::vector<std::vector<double>> sines(static_cast<std::size_t>(kMaxTestFrequency),
                                           std::vector<double>(static_cast<std::size_t>(N)));
    for (int f = 0; f < kMaxTestFrequency; ++f)
      for (int i = 0; i < N; ++i) sines[f][i] = std::sin(pi * (f + 1) * i / (N - 1));
    for (std::size_t pt = 0; pt < v.points(); ++pt) {
      if (v.on_boundary(pt)) continue;
      const auto c = v.coords(pt);
      for (int mode = 0; mode < modes; ++mode) {
        double basis = 1.0;
        int rest = mode;
        for (int d = 0; d < n; ++d) {
          basis *= sines[rest % kMaxTestFrequency][c[d]];
          rest /= kMaxTestFrequency;
        }
        for (int a = 0; a < m; ++a) v.at(pt, a) += coef[static_cast<std::size_t>(mode * m + a)] * basis;
      }
    }
    return v;
  }

  const auto omega = detail::random_unit(rng, m, complex_field);
  const auto eta = detail::random_unit(rng, m, complex_field);
  std::vector<double> q(static_cast<std::size_t>(n));
  double qn = 0.0;
  for (auto& x : q) {
    x = normal(rng);
    qn += x * x;
  }
  for (auto& x : q) x /= std::sqrt(qn);
  const int k = 2 + static_cast<int>(unif(rng) * 7.0);  // 2..8
  const double g = 0.3 + 0.7 * unif(rng);
  const double phase = 2.0 * pi * unif(rng);
  for (std::size_t pt = 0; pt < v.points(); ++pt) {
    if (v.on_boundary(pt)) continue;
    const auto c = v.coords(pt);
    double bump = 1.0, qx = 0.0;
    for (int d = 0; d < n; ++d) {
      const double x = static_cast<double>(c[d]) / (N - 1);
      bump *= std::sin(pi * x);
      qx += q[d] * x;
    }
    const double osc = g * std::sin(2.0 * pi * k * qx + phase);
    for (int a = 0; a < m; ++a) v.at(pt, a) = bump * (omega[a] + osc * eta[a]);
  }
  return v;
}

/// Q(v) = Re sum <A(grad v - t Z), grad v + t Z> / sum |grad v|^2 with
/// Z = (v/|v|) grad|v| and t = 1 - 2/p. Z is zero where
/// |v| < 1e-12 max|v|.
inline double discrete_quotient(const TensorField& f, double p, const TestFunctionGrid& v) {
  detail::require(std::isfinite(p) && p > 1.0, "discrete_quotient: p must be > 1");
  detail::validate_grid(v);
  detail::require(f.n() == v.n && f.m() == v.m, "discrete_quotient: field and test function dimensions differ");
  const double vmax = detail::max_abs(v);
  detail::require(vmax > 0.0, "discrete_quotient: test function is identically zero");
  const double threshold = kDegenerateFraction * vmax;
  const double t = 1.0 - 2.0 / p;
  double num = 0.0, den = 0.0;
  detail::for_each_cell(v, [&](const detail::Cell& cell) {
    const CoefficientTensor& a = sample_field(f, cell.midpoint);
    const double un = detail::vec_norm(cell.u);
    den += cell.grad.norm_squared();
    if (un < threshold) {
      num += real_pairing(a, cell.grad, cell.grad);
      return;
    }
    std::vector<cplx> dir(cell.u);
    for (auto& z : dir) z /= un;
    const GradientState z = project_state(cell.grad, UnitState(std::move(dir)));
    num += real_pairing(a, cell.grad - t * z, cell.grad + t * z);
  });
  if (!std::isfinite(num) || !std::isfinite(den))
    throw NumericalError("discrete_quotient: non-finite differences", num, 0);
  detail::require(den > 0.0, "discrete_quotient: test function has zero gradient");
  return num / den;
}

/// Searches for a test function with Q(v) <= 0. Even trials draw from the
/// sine family, odd trials from the oscillation family; trial i uses seed
/// substream_seed(seed, i). Returns the lowest-index hit. A miss proves
/// nothing; a hit refutes the integral condition (up to discretization).
inline std::optional<Counterexample> falsify_integral(const TensorField& f, double p, int trials, std::uint64_t seed,
                                                      int N = 33) {
  detail::require(trials >= 1, "falsify_integral: trials must be >= 1");
  detail::require(std::isfinite(p) && p > 1.0, "falsify_integral: p must be > 1");
  detail::check_desk_limits(f.n(), f.m(), N);
  const bool complex_field = !f.is_real();
  constexpr std::size_t kChunk = 64;
  for (std::size_t begin = 0; begin < static_cast<std::size_t>(trials); begin += kChunk) {
    const std::size_t count = std::min<std::size_t>(kChunk, static_cast<std::size_t>(trials) - begin);
    std::vector<std::optional<Counterexample>> hits(count);
    parallel_for(count, [&](std::size_t j) {
      const std::size_t trial = begin + j;
      const std::uint64_t ts = substream_seed(seed, trial);
      const TestFamily family = trial % 2 == 0 ? TestFamily::sine_sum : TestFamily::oscillation;
      TestFunctionGrid v = random_test_function(f.n(), f.m(), N, ts, complex_field, family);
      const double q = discrete_quotient(f, p, v);
      if (q <= 0.0) hits[j] = Counterexample{std::move(v), q, p, seed, trial, ts, family};
    });
    for (auto& h : hits)
      if (h) return std::move(h);
  }
  return std::nullopt;
}

/// A point value u in C^m together with its gradient grad u in C^{n x m}.
struct PowerSample {
  std::vector<cplx> u;
  GradientState grad;
};

struct PowerIdentityReport {
  double residual = 0.0;     // max |lhs - rhs|
  bool bounds_hold = true;   // c1 |u|^{p-2}|grad u|^2 <= lhs <= c2 |u|^{p-2}|grad u|^2
  std::size_t skipped = 0;   // samples with u = 0
};

/// Checks |grad(|u|^{(p-2)/2} u)|^2 = |u|^{p-2}(|grad u|^2 + (p^2/4 - 1)|grad|u||^2)
/// pointwise. The left side is assembled from the chain rule
/// grad(|u|^s u) = |u|^s (grad u + s u grad|u| / |u|), s = (p-2)/2.
inline PowerIdentityReport power_identity_residual(const std::vector<PowerSample>& samples, double p) {
  detail::require(std::isfinite(p) && p > 1.0, "power_identity_residual: p must be > 1");
  const double s = 0.5 * (p - 2.0);
  const double c1 = p >= 2.0 ? 1.0 : 0.25 * p * p;
  const double c2 = p >= 2.0 ? 0.25 * p * p : 1.0;
  PowerIdentityReport rep;
  for (const auto& smp : samples) {
    const int n = smp.grad.n(), m = smp.grad.m();
    detail::require(static_cast<int>(smp.u.size()) == m, "power_identity_residual: dimension mismatch");
    const double un = detail::vec_norm(smp.u);
    if (un == 0.0) {
      ++rep.skipped;
      continue;
    }
    std::vector<double> grad_abs(static_cast<std::size_t>(n), 0.0);
    double grad_abs2 = 0.0;
    for (int h = 0; h < n; ++h) {
      for (int a = 0; a < m; ++a) grad_abs[h] += (std::conj(smp.u[a]) * smp.grad(h, a)).real();
      grad_abs[h] /= un;
      grad_abs2 += grad_abs[h] * grad_abs[h];
    }
    const double us = std::pow(un, s);
    double lhs = 0.0;
    for (int h = 0; h < n; ++h)
      for (int a = 0; a < m; ++a) lhs += std::norm(us * (smp.grad(h, a) + s * smp.u[a] * grad_abs[h] / un));
    const double weight = std::pow(un, p - 2.0);
    const double g2 = smp.grad.norm_squared();
    const double rhs = weight * (g2 + (0.25 * p * p - 1.0) * grad_abs2);
    rep.residual = std::max(rep.residual, std::abs(lhs - rhs));
    const double slack = 1e-12 * std::max(1.0, weight * g2 * c2);
    if (lhs < c1 * weight * g2 - slack || lhs > c2 * weight * g2 + slack) rep.bounds_hold = false;
  }
  return rep;
}

/// min over sampled u of Re sum <A grad u, grad(|u|^{p-2} u)> / sum |u|^{p-2}|grad u|^2,
/// an upper bound on the best constant lambda_p. Cells with
/// |u| < 1e-12 max|u| are skipped.
inline double lambda_p_estimate(const TensorField& f, double p, int trials, std::uint64_t seed, int N = 33) {
  detail::require(trials >= 1, "lambda_p_estimate: trials must be >= 1");
  detail::require(std::isfinite(p) && p > 1.0, "lambda_p_estimate: p must be > 1");
  detail::check_desk_limits(f.n(), f.m(), N);
  const bool complex_field = !f.is_real();
  std::vector<double> ratios(static_cast<std::size_t>(trials));
  parallel_for(ratios.size(), [&](std::size_t i) {
    const auto family = i % 2 == 0 ? TestFamily::sine_sum : TestFamily::oscillation;
    const TestFunctionGrid u = random_test_function(f.n(), f.m(), N, substream_seed(seed, i), complex_field, family);
    const double threshold = kDegenerateFraction * detail::max_abs(u);
    double num = 0.0, den = 0.0;
    detail::for_each_cell(u, [&](const detail::Cell& cell) {
      const double un = detail::vec_norm(cell.u);
      if (un < threshold) return;
      const CoefficientTensor& a = sample_field(f, cell.midpoint);
      std::vector<cplx> dir(cell.u);
      for (auto& z : dir) z /= un;
      const GradientState z = project_state(cell.grad, UnitState(std::move(dir)));
      const double w = std::pow(un, p - 2.0);
      num += w * real_pairing(a, cell.grad, cell.grad + (p - 2.0) * z);
      den += w * cell.grad.norm_squared();
    });
    if (!(den > 0.0) || !std::isfinite(num)) throw NumericalError("lambda_p_estimate: degenerate test function", num, i);
    ratios[i] = num / den;
  });
  return *std::min_element(ratios.begin(), ratios.end());
}

}  // namespace pell
