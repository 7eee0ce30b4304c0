#pragma once

// Pointwise p-ellipticity forms and their margins.
//
// For fixed omega the strong form is a real quadratic form in the real
// coordinates of xi, so the inner minimum over |xi| = 1 is an eigenvalue
// problem. Only omega (and q for the Legendre-Hadamard form) needs a global
// search, which runs as multistart Riemannian descent on spheres.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <variant>
#include <vector>

#include "pell/error.hpp"
#include "pell/parallel.hpp"
#include "pell/tensor.hpp"

namespace pell {

/// Which test objects the infimum runs over. Real tensors describe real
/// systems, which are tested against real xi, omega, eta; `automatic` picks
/// that for real tensors and complex test objects otherwise.
enum class TestField { automatic, real, complex };

struct StrongWitness {
  GradientState xi;
  UnitState omega;
};

struct LhWitness {
  std::vector<cplx> eta;
  UnitState omega;
  std::vector<double> q;
};

using Witness = std::variant<StrongWitness, LhWitness>;

struct SearchConfig {
  double t = 0.0;              // 1 - 2/p
  int outer_starts = 64;
  int refine_iters = 200;
  std::uint64_t seed = 0;
  double eig_tol = 1e-10;
  TestField field = TestField::automatic;
  std::vector<Witness> warm_starts;  // extra starting points, tried first

  void validate() const {
    detail::require(std::isfinite(t) && std::abs(t) < 1.0, "SearchConfig: |t| must be < 1");
    detail::require(outer_starts >= 1, "SearchConfig: outer_starts must be >= 1");
    detail::require(refine_iters >= 0, "SearchConfig: refine_iters must be >= 0");
    detail::require(eig_tol > 0.0, "SearchConfig: eig_tol must be positive");
  }
};

/// value is an upper bound on the true infimum (certified stays false: the
/// outer search is heuristic).
struct MarginResult {
  double value = 0.0;
  Witness witness;
  std::size_t evaluations = 0;
  bool certified = false;
};

inline bool uses_complex_field(const CoefficientTensor& a, TestField f) {
  if (f == TestField::automatic) return !a.is_real();
  return f == TestField::complex;
}

inline double strong_form_value(const CoefficientTensor& a, double t, const GradientState& xi, const UnitState& omega) {
  detail::require(std::isfinite(t) && std::abs(t) < 1.0, "strong_form_value: |t| must be < 1");
  const GradientState z = project_state(xi, omega);
  return real_pairing(a, xi - t * z, xi + t * z);
}

inline double lh_form_value(const CoefficientTensor& a, double t, std::span<const cplx> eta, const UnitState& omega,
                            std::span<const double> q) {
  detail::require(std::isfinite(t) && std::abs(t) < 1.0, "lh_form_value: |t| must be < 1");
  detail::require(static_cast<int>(eta.size()) == a.m() && omega.m() == a.m() && static_cast<int>(q.size()) == a.n(),
                  "lh_form_value: dimension mismatch");
  double qn = 0.0;
  for (double v : q) qn += v * v;
  detail::require(std::abs(std::sqrt(qn) - 1.0) <= 1e-10, "lh_form_value: q must be a unit vector");
  // With q real, (q (x) eta)(omega) = q (x) zeta, so the rank-one strong form is the LH form.
  return strong_form_value(a, t, GradientState::outer(q, eta), omega);
}

namespace detail {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Real coordinates of an r x m block of complex components: component c
// maps to coordinate c (real field) or to 2c, 2c+1 (complex field).
inline cplx coord_unit(bool complex_field, int i) {
  return (complex_field && (i % 2 == 1)) ? cplx(0.0, 1.0) : cplx(1.0, 0.0);
}
inline int coord_component(bool complex_field, int i) { return complex_field ? i / 2 : i; }

struct EigenPair {
  double value;
  Vec vector;
};

inline EigenPair lowest_eigenpair(const Mat& sym, double eig_tol, std::size_t evaluations) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge", 0.0, evaluations);
  EigenPair out{es.eigenvalues()(0), es.eigenvectors().col(0)};
  const double scale = std::max(1.0, sym.cwiseAbs().maxCoeff());
  const double residual = (sym * out.vector - out.value * out.vector).norm();
  if (!(residual <= eig_tol * scale * std::sqrt(static_cast<double>(sym.rows()))))
    throw NumericalError("eigenvalue residual above eig_tol", out.value, evaluations);
  return out;
}

// M = (I - tP)^T G (I + tP), symmetrized, with P = blockdiag(w w^T) over
// `blocks` consecutive blocks of size w.size().
inline Mat projected_form(const Mat& g, const Vec& w, int blocks, double t) {
  const int b = static_cast<int>(w.size());
  Mat p = Mat::Zero(g.rows(), g.cols());
  const Mat ww = w * w.transpose();
  for (int h = 0; h < blocks; ++h) p.block(h * b, h * b, b, b) = ww;
  const Mat id = Mat::Identity(g.rows(), g.cols());
  const Mat m = (id - t * p).transpose() * g * (id + t * p);
  return 0.5 * (m + m.transpose());
}

inline Vec apply_projection(const Vec& v, const Vec& w, int blocks) {
  const int b = static_cast<int>(w.size());
  Vec z(v.size());
  for (int h = 0; h < blocks; ++h) z.segment(h * b, b) = w * w.dot(v.segment(h * b, b));
  return z;
}

// d phi / d w for phi = (v - t z)^T G (v + t z), z = P(w) v, eigenvector held fixed.
inline Vec projection_gradient(const Mat& g, const Vec& v, const Vec& w, int blocks, double t) {
  const int b = static_cast<int>(w.size());
  const Vec z = apply_projection(v, w, blocks);
  const Vec gz = t * (g.transpose() * v - g * v) - t * t * ((g + g.transpose()) * z);
  Vec grad = Vec::Zero(b);
  for (int h = 0; h < blocks; ++h) {
    const auto vh = v.segment(h * b, b);
    const auto gh = gz.segment(h * b, b);
    grad += w.dot(vh) * gh + w.dot(gh) * vh;
  }
  return grad;
}

struct Evaluation {
  double value;
  Vec gradient;  // Euclidean gradient in the concatenated sphere coordinates
  Vec state;     // minimizing eigenvector
};

// Multistart descent on a product of unit spheres. `blocks` lists the sphere
// dimensions (ambient sizes); `objective` maps a point to an Evaluation.
template <class Objective>
struct SphereSearch {
  std::vector<int> blocks;
  Objective objective;
  std::size_t evaluations = 0;

  int size() const { return std::accumulate(blocks.begin(), blocks.end(), 0); }

  void normalize(Vec& x) const {
    int off = 0;
    for (int b : blocks) {
      auto seg = x.segment(off, b);
      const double nrm = seg.norm();
      if (nrm > 0.0) seg /= nrm;
      else seg.setZero(), seg(0) = 1.0;
      off += b;
    }
  }

  Vec tangent(const Vec& g, const Vec& x) const {
    Vec out = g;
    int off = 0;
    for (int b : blocks) {
      out.segment(off, b) -= x.segment(off, b).dot(g.segment(off, b)) * x.segment(off, b);
      off += b;
    }
    return out;
  }

  Vec random_point(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Vec x(size());
    for (int i = 0; i < x.size(); ++i) x(i) = normal(rng);
    normalize(x);
    return x;
  }

  Evaluation eval(const Vec& x) {
    ++evaluations;
    return objective(x);
  }

  struct Local {
    Vec x;
    Evaluation e;
  };

  Local descend(Vec x, int iters) {
    normalize(x);
    Evaluation cur = eval(x);
    double step = 0.25;
    for (int it = 0; it < iters; ++it) {
      const Vec pg = tangent(cur.gradient, x);
      const double gn2 = pg.squaredNorm();
      if (gn2 < 1e-24) break;
      bool moved = false;
      while (step > 1e-12) {
        Vec xn = x - step * pg;
        normalize(xn);
        Evaluation en = eval(xn);
        if (en.value <= cur.value - 1e-4 * step * gn2) {
          x = std::move(xn);
          cur = std::move(en);
          step = std::min(step * 2.0, 4.0);
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    return {std::move(x), std::move(cur)};
  }

  // Screens every start with a short descent, then polishes the best few.
  Local run(const std::vector<Vec>& warm, int starts, int refine_iters, std::uint64_t seed) {
    bool trivial = true;
    for (int b : blocks) trivial = trivial && b == 1;
    if (trivial) {
      Vec x = Vec::Ones(size());
      Evaluation e = eval(x);
      return {std::move(x), std::move(e)};
    }
    std::vector<Vec> points = warm;
    for (int i = 0; i < starts; ++i) points.push_back(random_point(substream_seed(seed, static_cast<std::uint64_t>(i))));
    const int screen_iters = std::min(refine_iters, 6);
    std::vector<Local> screened;
    screened.reserve(points.size());
    for (auto& p : points) screened.push_back(descend(p, screen_iters));
    std::vector<std::size_t> order(screened.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return screened[a].e.value < screened[b].e.value; });
    const std::size_t polish = std::min<std::size_t>(order.size(), 4);
    Local best = screened[order[0]];
    for (std::size_t j = 0; j < polish; ++j) {
      Local l = descend(screened[order[j]].x, refine_iters);
      if (l.e.value < best.e.value) best = std::move(l);
    }
    return best;
  }
};

template <class Objective>
SphereSearch<Objective> make_search(std::vector<int> blocks, Objective obj) {
  return SphereSearch<Objective>{std::move(blocks), std::move(obj)};
}

inline Vec omega_coords(const UnitState& omega, bool complex_field) {
  const int m = omega.m();
  Vec w(complex_field ? 2 * m : m);
  for (int a = 0; a < m; ++a) {
    if (complex_field) {
      w(2 * a) = omega[a].real();
      w(2 * a + 1) = omega[a].imag();
    } else {
      w(a) = omega[a].real();
    }
  }
  return w;
}

inline UnitState omega_from_coords(const Vec& w, bool complex_field) {
  const int m = complex_field ? static_cast<int>(w.size()) / 2 : static_cast<int>(w.size());
  std::vector<cplx> c(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) c[a] = complex_field ? cplx(w(2 * a), w(2 * a + 1)) : cplx(w(a), 0.0);
  return UnitState(std::move(c));
}

inline std::vector<cplx> components_from_coords(const Vec& v, bool complex_field) {
  const int count = complex_field ? static_cast<int>(v.size()) / 2 : static_cast<int>(v.size());
  std::vector<cplx> c(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) c[i] = complex_field ? cplx(v(2 * i), v(2 * i + 1)) : cplx(v(i), 0.0);
  return c;
}

// Gram matrix of the pairing on real coordinates of xi in C^{n x m}
// (component index h*m + a).
inline Mat strong_gram(const CoefficientTensor& a, bool complex_field) {
  const int n = a.n(), m = a.m();
  const int per = complex_field ? 2 : 1;
  const int d = n * m * per;
  Mat g(d, d);
  for (int i = 0; i < d; ++i) {
    const int ci = coord_component(complex_field, i);
    const int h = ci / m, al = ci % m;
    const cplx ui = coord_unit(complex_field, i);
    for (int j = 0; j < d; ++j) {
      const int cj = coord_component(complex_field, j);
      const int k = cj / m, be = cj % m;
      g(i, j) = (a(h, k, al, be) * ui * std::conj(coord_unit(complex_field, j))).real();
    }
  }
  return g;
}

}  // namespace detail

inline MarginResult strong_margin(const CoefficientTensor& a, const SearchConfig& cfg) {
  cfg.validate();
  const bool cf = uses_complex_field(a, cfg.field);
  const int n = a.n(), m = a.m();
  const int wdim = cf ? 2 * m : m;
  const detail::Mat g = detail::strong_gram(a, cf);
  const double t = cfg.t;
  std::size_t evals = 0;

  auto objective = [&](const detail::Vec& w) {
    const detail::Mat mat = detail::projected_form(g, w, n, t);
    auto ep = detail::lowest_eigenpair(mat, cfg.eig_tol, evals);
    ++evals;
    detail::Vec grad = t == 0.0 ? detail::Vec::Zero(w.size()) : detail::projection_gradient(g, ep.vector, w, n, t);
    return detail::Evaluation{ep.value, std::move(grad), std::move(ep.vector)};
  };
  auto search = detail::make_search({wdim}, objective);

  std::vector<detail::Vec> warm;
  for (const auto& ws : cfg.warm_starts)
    if (const auto* s = std::get_if<StrongWitness>(&ws); s && s->omega.m() == m)
      warm.push_back(detail::omega_coords(s->omega, cf));

  typename decltype(search)::Local best;
  if (t == 0.0) {
    // The form does not depend on omega at p = 2.
    detail::Vec w = detail::Vec::Zero(wdim);
    w(0) = 1.0;
    best = {w, search.eval(w)};
  } else {
    best = search.run(warm, cfg.outer_starts, cfg.refine_iters, cfg.seed);
  }
  GradientState xi(n, m, detail::components_from_coords(best.e.state, cf));
  return MarginResult{best.e.value, StrongWitness{std::move(xi), detail::omega_from_coords(best.x, cf)},
                      search.evaluations, false};
}

inline MarginResult lh_margin(const CoefficientTensor& a, const SearchConfig& cfg) {
  cfg.validate();
  const bool cf = uses_complex_field(a, cfg.field);
  const int n = a.n(), m = a.m();
  const int per = cf ? 2 : 1;
  const int d = m * per;
  const double t = cfg.t;

  // G^{hk} on the real coordinates of eta.
  std::vector<detail::Mat> gb(static_cast<std::size_t>(n * n), detail::Mat(d, d));
  for (int h = 0; h < n; ++h)
    for (int k = 0; k < n; ++k) {
      auto& gk = gb[static_cast<std::size_t>(h * n + k)];
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          gk(i, j) = (a(h, k, detail::coord_component(cf, i), detail::coord_component(cf, j)) *
                      detail::coord_unit(cf, i) * std::conj(detail::coord_unit(cf, j)))
                         .real();
    }
  std::size_t evals = 0;

  auto objective = [&](const detail::Vec& x) {
    const detail::Vec w = x.head(d);
    const detail::Vec q = x.tail(n);
    detail::Mat gq = detail::Mat::Zero(d, d);
    for (int h = 0; h < n; ++h)
      for (int k = 0; k < n; ++k) gq += q(h) * q(k) * gb[static_cast<std::size_t>(h * n + k)];
    const detail::Mat mat = detail::projected_form(gq, w, 1, t);
    auto ep = detail::lowest_eigenpair(mat, cfg.eig_tol, evals);
    ++evals;
    detail::Vec grad(d + n);
    grad.head(d) = t == 0.0 ? detail::Vec::Zero(d) : detail::projection_gradient(gq, ep.vector, w, 1, t);
    const detail::Vec z = detail::apply_projection(ep.vector, w, 1);
    const detail::Vec xv = ep.vector - t * z, yv = ep.vector + t * z;
    for (int h = 0; h < n; ++h) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        const auto& ghk = gb[static_cast<std::size_t>(h * n + k)];
        const auto& gkh = gb[static_cast<std::size_t>(k * n + h)];
        s += q(k) * (xv.dot(ghk * yv) + xv.dot(gkh * yv));
      }
      grad(d + h) = s;
    }
    return detail::Evaluation{ep.value, std::move(grad), std::move(ep.vector)};
  };

  std::vector<int> blocks{d, n};
  if (t == 0.0) blocks[0] = 1;  // omega drops out; search q only
  auto search = detail::make_search(blocks, [&](const detail::Vec& x) {
    if (t != 0.0) return objective(x);
    detail::Vec full(d + n);
    full.head(d).setZero();
    full(0) = 1.0;
    full.tail(n) = x.tail(n);
    auto e = objective(full);
    detail::Vec grad(1 + n);
    grad(0) = 0.0;
    grad.tail(n) = e.gradient.tail(n);
    e.gradient = std::move(grad);
    return e;
  });

  std::vector<detail::Vec> warm;
  for (const auto& ws : cfg.warm_starts) {
    const auto* s = std::get_if<LhWitness>(&ws);
    if (!s || s->omega.m() != m || static_cast<int>(s->q.size()) != n) continue;
    detail::Vec x(blocks[0] + n);
    if (t != 0.0) x.head(d) = detail::omega_coords(s->omega, cf);
    else x(0) = 1.0;
    for (int h = 0; h < n; ++h) x(blocks[0] + h) = s->q[static_cast<std::size_t>(h)];
    warm.push_back(std::move(x));
  }

  auto best = search.run(warm, cfg.outer_starts, cfg.refine_iters, cfg.seed);
  detail::Vec w = detail::Vec::Zero(d);
  if (t != 0.0) w = best.x.head(d);
  else w(0) = 1.0;
  std::vector<double> q(static_cast<std::size_t>(n));
  for (int h = 0; h < n; ++h) q[static_cast<std::size_t>(h)] = best.x(blocks[0] + h);
  return MarginResult{best.e.value,
                      LhWitness{detail::components_from_coords(best.e.state, cf), detail::omega_from_coords(w, cf),
                                std::move(q)},
                      search.evaluations, false};
}

/// Scalar (m = 1) condition: inf over unit xi in C^n of
/// Re sum A^{hk} xi_h conj(eta_k) with eta = xi + |1 - 2/p| conj(xi).
/// Conjugation is real-linear, so this is one exact eigenvalue problem.
inline double scalar_p_margin(const CoefficientTensor& a, double p) {
  detail::require(a.m() == 1, "scalar_p_margin: tensor must have m = 1");
  detail::require(std::isfinite(p) && p > 1.0, "scalar_p_margin: p must be > 1");
  const double c = std::abs(1.0 - 2.0 / p);
  const detail::Mat g = detail::strong_gram(a, true);
  detail::Mat j = detail::Mat::Identity(g.rows(), g.cols());
  for (int i = 1; i < j.rows(); i += 2) j(i, i) = -1.0;
  const detail::Mat mat = g * (detail::Mat::Identity(g.rows(), g.cols()) + c * j);
  return detail::lowest_eigenpair(0.5 * (mat + mat.transpose()), 1e-10, 0).value;
}

}  // namespace pell
