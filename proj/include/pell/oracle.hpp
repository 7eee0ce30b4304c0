#pragma once

// Brute-force reference minimizers and random tensor generators for tests.
// brute_margin uses nothing but real_pairing and project_state, so it fails
// independently of the eigenvalue-based search in conditions.hpp.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "pell/error.hpp"
#include "pell/lame.hpp"
#include "pell/parallel.hpp"
#include "pell/tensor.hpp"

namespace pell::oracle {

enum class FormKind { strong, lh, scalar };
enum class TensorStyle { hermitian_positive, legendre_perturbed, lame_like, real_symmetric };

struct OracleConfig {
  int samples = 20000;
  std::uint64_t seed = 1;
  bool refine = true;
  int refine_top = 8;  // pattern search runs from this many best draws
  // Test objects over C (true) or R (false); unset means real for real tensors.
  std::optional<bool> complex_field;
};

namespace detail {

struct Point {
  std::vector<double> x;  // flat real coordinates of every test object
  double value = std::numeric_limits<double>::infinity();
};

class FormEvaluator {
 public:
  FormEvaluator(const CoefficientTensor& a, double t, FormKind kind, bool cf) : a_(a), t_(t), kind_(kind), cf_(cf) {
    const int n = a.n(), m = a.m();
    per_ = cf_ ? 2 : 1;
    switch (kind_) {
      case FormKind::strong: dims_ = {n * m * per_, m * per_}; break;
      case FormKind::lh: dims_ = {m * per_, m * per_, n}; break;
      case FormKind::scalar: dims_ = {n * 2}; break;
    }
  }

  int size() const {
    int s = 0;
    for (int d : dims_) s += d;
    return s;
  }

  double operator()(const std::vector<double>& x) const {
    const int n = a_.n(), m = a_.m();
    switch (kind_) {
      case FormKind::strong: {
        GradientState xi(n, m, complexify(x, 0, n * m, cf_));
        auto w = complexify(x, dims_[0], m, cf_);
        if (!nonzero(w) || xi.norm_squared() == 0.0) return kBad;
        const UnitState omega(std::move(w));
        const GradientState z = project_state(xi, omega);
        return real_pairing(a_, xi - t_ * z, xi + t_ * z) / xi.norm_squared();
      }
      case FormKind::lh: {
        const auto eta = complexify(x, 0, m, cf_);
        auto w = complexify(x, dims_[0], m, cf_);
        std::vector<double> q(x.begin() + dims_[0] + dims_[1], x.end());
        double qn = 0.0, en = 0.0;
        for (double v : q) qn += v * v;
        for (const auto& z : eta) en += std::norm(z);
        if (!nonzero(w) || qn == 0.0 || en == 0.0) return kBad;
        const GradientState xi = GradientState::outer(q, eta);
        const UnitState omega(std::move(w));
        const GradientState z = project_state(xi, omega);
        return real_pairing(a_, xi - t_ * z, xi + t_ * z) / (qn * en);
      }
      case FormKind::scalar: {
        GradientState xi(n, 1, complexify(x, 0, n, true));
        if (xi.norm_squared() == 0.0) return kBad;
        GradientState eta = xi;
        for (auto& z : eta.data()) z = z + std::abs(t_) * std::conj(z);
        return real_pairing(a_, xi, eta) / xi.norm_squared();
      }
    }
    return kBad;
  }

 private:
  static constexpr double kBad = std::numeric_limits<double>::infinity();

  static bool nonzero(const std::vector<cplx>& w) {
    for (const auto& z : w)
      if (z != cplx{}) return true;
    return false;
  }

  static std::vector<cplx> complexify(const std::vector<double>& x, int offset, int count, bool cf) {
    std::vector<cplx> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
      out[i] = cf ? cplx(x[offset + 2 * i], x[offset + 2 * i + 1]) : cplx(x[offset + i], 0.0);
    return out;
  }

  const CoefficientTensor& a_;
  double t_;
  FormKind kind_;
  bool cf_;
  int per_ = 1;
  std::vector<int> dims_;
};

// Coordinate pattern search: try +-step along each coordinate, shrink the
// step when no move helps, stop once it falls below 1e-7.
inline Point pattern_search(const FormEvaluator& f, Point p) {
  double step = 0.1;
  while (step >= 1e-7) {
    bool improved = false;
    for (std::size_t i = 0; i < p.x.size(); ++i) {
      for (double sgn : {1.0, -1.0}) {
        const double keep = p.x[i];
        p.x[i] = keep + sgn * step;
        const double v = f(p.x);
        if (v < p.value) {
          p.value = v;
          improved = true;
          break;
        }
        p.x[i] = keep;
      }
    }
    if (!improved) step *= 0.5;
  }
  return p;
}

}  // namespace detail

/// Minimum of the selected normalized form over random Gaussian draws,
/// optionally polished by pattern search. An upper bound on the infimum.
/// For `scalar`, |t| plays the role of |1 - 2/p|.
inline double brute_margin(const CoefficientTensor& a, double t, FormKind kind, const OracleConfig& cfg) {
  pell::detail::require(std::isfinite(t) && std::abs(t) < 1.0, "brute_margin: |t| must be < 1");
  pell::detail::require(cfg.samples >= 1000, "brute_margin: samples must be >= 1000");
  if (kind == FormKind::scalar) pell::detail::require(a.m() == 1, "brute_margin: scalar form needs m = 1");
  const bool cf = cfg.complex_field.value_or(!a.is_real());
  const detail::FormEvaluator f(a, t, kind, cf);

  std::vector<detail::Point> draws(static_cast<std::size_t>(cfg.samples));
  parallel_for(draws.size(), [&](std::size_t i) {
    std::mt19937_64 rng(substream_seed(cfg.seed, i));
    std::normal_distribution<double> normal;
    detail::Point p;
    p.x.resize(static_cast<std::size_t>(f.size()));
    for (auto& v : p.x) v = normal(rng);
    p.value = f(p.x);
    draws[i] = std::move(p);
  });
  const std::size_t top = cfg.refine ? std::min<std::size_t>(draws.size(), std::max(1, cfg.refine_top)) : 1;
  std::partial_sort(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(top), draws.end(),
                    [](const auto& l, const auto& r) { return l.value < r.value; });
  double best = draws.front().value;
  if (cfg.refine) {
    std::vector<double> polished(top);
    parallel_for(top, [&](std::size_t i) { polished[i] = detail::pattern_search(f, draws[i]).value; });
    best = std::min(best, *std::min_element(polished.begin(), polished.end()));
  }
  return best;
}

/// Smallest eigenvalue of the Hermitian part of the pairing on C^{n x m}
/// (or on R^{n x m}), i.e. the Legendre constant.
inline double legendre_constant(const CoefficientTensor& a, bool complex_field) {
  const int d = a.n() * a.m();
  const int m = a.m();
  if (complex_field) {
    Eigen::MatrixXcd k(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) k(j, i) = a(i / m, j / m, i % m, j % m);
    const Eigen::MatrixXcd herm = 0.5 * (k + k.adjoint());
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(herm).eigenvalues()(0);
  }
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = a(i / m, j / m, i % m, j % m).real();
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (g + g.transpose())).eigenvalues()(0);
}

namespace detail {

// A^{hk}_{ab} = K_{(k b),(h a)}, so that Re pairing(A, xi, xi) = Re x^* K x.
inline CoefficientTensor from_matrix(const Eigen::MatrixXcd& k, int n, int m) {
  CoefficientTensor a(n, m);
  for (int h = 0; h < n; ++h)
    for (int kk = 0; kk < n; ++kk)
      for (int al = 0; al < m; ++al)
        for (int be = 0; be < m; ++be) a(h, kk, al, be) = k(kk * m + be, h * m + al);
  return a;
}

inline Eigen::MatrixXcd gaussian_matrix(std::mt19937_64& rng, int d, bool complex_entries) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXcd b(d, d);
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double re = normal(rng);
      const double im = complex_entries ? normal(rng) : 0.0;
      b(i, j) = s * cplx(re, im);
    }
  return b;
}

}  // namespace detail

/// Deterministic per seed.
///  hermitian_positive: K = B^*B + 0.1 I, Legendre constant >= 0.1.
///  legendre_perturbed: the above plus an anti-Hermitian part, which leaves
///    the p = 2 form untouched; the margin >= 0.05 is still checked.
///  lame_like: lame_tensor with random admissible (lambda, mu, r); retried
///    until the real Legendre constant is >= 0.05.
///  real_symmetric: real K = B^T B + 0.1 I.
inline CoefficientTensor random_elliptic_tensor(int n, int m, TensorStyle style, std::uint64_t seed) {
  pell::detail::require(n >= 1 && m >= 1, "random_elliptic_tensor: n, m must be >= 1");
  const int d = n * m;
  constexpr int kAttempts = 20;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    std::mt19937_64 rng(substream_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    CoefficientTensor a(n, m);
    double floor = 0.1;
    switch (style) {
      case TensorStyle::hermitian_positive:
      case TensorStyle::real_symmetric: {
        const bool cx = style == TensorStyle::hermitian_positive;
        const Eigen::MatrixXcd b = detail::gaussian_matrix(rng, d, cx);
        const Eigen::MatrixXcd k = b.adjoint() * b + 0.1 * Eigen::MatrixXcd::Identity(d, d);
        a = detail::from_matrix(k, n, m);
        break;
      }
      case TensorStyle::legendre_perturbed: {
        const Eigen::MatrixXcd b = detail::gaussian_matrix(rng, d, true);
        const Eigen::MatrixXcd c = detail::gaussian_matrix(rng, d, true);
        const double scale = 0.5 + 1.5 * unif(rng);
        const Eigen::MatrixXcd k =
            b.adjoint() * b + 0.1 * Eigen::MatrixXcd::Identity(d, d) + scale * 0.5 * (c - c.adjoint());
        a = detail::from_matrix(k, n, m);
        floor = 0.05;
        break;
      }
      case TensorStyle::lame_like: {
        pell::detail::require(n == m, "random_elliptic_tensor: lame_like needs m = n");
        pell::detail::require(n >= 2, "random_elliptic_tensor: lame_like needs n >= 2");
        const double mu = 0.5 + 1.5 * unif(rng);
        const double lambda = mu * (-1.5 + 4.5 * unif(rng));
        const double r = mu * (0.1 + 1.8 * unif(rng));
        a = lame_tensor(lambda, mu, r, n);
        floor = 0.05;
        break;
      }
    }
    const bool cf = !a.is_real();
    if (legendre_constant(a, cf) >= floor - 1e-12) return a;
  }
  throw Error("random_elliptic_tensor: no tensor met the margin after 20 attempts");
}

}  // namespace pell::oracle
