#pragma once

// Coefficient tensors A^{hk}_{ab} of second-order systems
//
//     (Lu)_a = d_h (A^{hk}_{ab} d_k u^b),   h,k = 1..n,  a,b = 1..m,
//
// the test objects used by the pointwise ellipticity conditions, and
// spatially sampled tensor fields. Indices are 0-based in code.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pell/error.hpp"

namespace pell {

using cplx = std::complex<double>;

/// Complex tensor A^{hk}_{ab} at a point. Storage is row-major in
/// (h, k, a, b), which is also the nesting order of the JSON schema.
class CoefficientTensor {
 public:
  CoefficientTensor(int n, int m) : CoefficientTensor(n, m, {}) {}

  CoefficientTensor(int n, int m, std::vector<cplx> entries) : n_(n), m_(m), entries_(std::move(entries)) {
    detail::require(n >= 1 && m >= 1, "tensor dimensions must satisfy n >= 1, m >= 1");
    const auto count = static_cast<std::size_t>(n) * n * m * m;
    if (entries_.empty()) entries_.assign(count, cplx{});
    detail::require(entries_.size() == count, "tensor entry count must be n*n*m*m = " + std::to_string(count));
    for (const auto& z : entries_) {
      detail::require(std::isfinite(z.real()) && std::isfinite(z.imag()), "tensor entries must be finite");
    }
  }

  /// A^{hk}_{ab} = delta^{hk} delta_{ab}.
  static CoefficientTensor identity(int n, int m) {
    CoefficientTensor a(n, m);
    for (int h = 0; h < n; ++h)
      for (int al = 0; al < m; ++al) a(h, h, al, al) = 1.0;
    return a;
  }

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }

  cplx& operator()(int h, int k, int a, int b) { return entries_[index(h, k, a, b)]; }
  const cplx& operator()(int h, int k, int a, int b) const { return entries_[index(h, k, a, b)]; }

  std::span<const cplx> entries() const noexcept { return entries_; }

  bool is_real() const noexcept {
    for (const auto& z : entries_)
      if (z.imag() != 0.0) return false;
    return true;
  }

  CoefficientTensor& operator*=(cplx s) {
    for (auto& z : entries_) z *= s;
    return *this;
  }
  CoefficientTensor& operator+=(const CoefficientTensor& o) {
    detail::require(o.n_ == n_ && o.m_ == m_, "tensor dimension mismatch in addition");
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
    return *this;
  }
  friend CoefficientTensor operator+(CoefficientTensor a, const CoefficientTensor& b) { return a += b; }
  friend CoefficientTensor operator*(cplx s, CoefficientTensor a) { return a *= s; }

  bool operator==(const CoefficientTensor&) const = default;

 private:
  std::size_t index(int h, int k, int a, int b) const noexcept {
    return ((static_cast<std::size_t>(h) * n_ + k) * m_ + a) * m_ + b;
  }

  int n_;
  int m_;
  std::vector<cplx> entries_;
};

/// xi = (xi^a_h) in C^{n x m}; stored h-major.
class GradientState {
 public:
  GradientState(int n, int m) : n_(n), m_(m), data_(static_cast<std::size_t>(n) * m) {
    detail::require(n >= 1 && m >= 1, "state dimensions must satisfy n >= 1, m >= 1");
  }
  GradientState(int n, int m, std::vector<cplx> data) : n_(n), m_(m), data_(std::move(data)) {
    detail::require(n >= 1 && m >= 1, "state dimensions must satisfy n >= 1, m >= 1");
    detail::require(data_.size() == static_cast<std::size_t>(n) * m, "state component count must be n*m");
    for (const auto& z : data_)
      detail::require(std::isfinite(z.real()) && std::isfinite(z.imag()), "state components must be finite");
  }

  /// Rank-one state xi^a_h = q_h eta^a.
  static GradientState outer(std::span<const double> q, std::span<const cplx> eta) {
    GradientState s(static_cast<int>(q.size()), static_cast<int>(eta.size()));
    for (std::size_t h = 0; h < q.size(); ++h)
      for (std::size_t a = 0; a < eta.size(); ++a) s(static_cast<int>(h), static_cast<int>(a)) = q[h] * eta[a];
    return s;
  }

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }

  /// Component xi^a_h.
  cplx& operator()(int h, int a) { return data_[static_cast<std::size_t>(h) * m_ + a]; }
  const cplx& operator()(int h, int a) const { return data_[static_cast<std::size_t>(h) * m_ + a]; }

  std::span<const cplx> data() const noexcept { return data_; }
  std::span<cplx> data() noexcept { return data_; }

  double norm_squared() const noexcept {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return s;
  }
  double norm() const noexcept { return std::sqrt(norm_squared()); }

  GradientState& operator+=(const GradientState& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  GradientState& operator-=(const GradientState& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  GradientState& operator*=(double s) {
    for (auto& z : data_) z *= s;
    return *this;
  }
  friend GradientState operator+(GradientState a, const GradientState& b) { return a += b; }
  friend GradientState operator-(GradientState a, const GradientState& b) { return a -= b; }
  friend GradientState operator*(double s, GradientState a) { return a *= s; }

  bool operator==(const GradientState&) const = default;

 private:
  void check_same(const GradientState& o) const {
    detail::require(o.n_ == n_ && o.m_ == m_, "state dimension mismatch");
  }

  int n_;
  int m_;
  std::vector<cplx> data_;
};

/// omega in C^m with |omega| = 1. The constructor normalizes its input;
/// a zero vector is rejected.
class UnitState {
 public:
  explicit UnitState(std::vector<cplx> components) : c_(std::move(components)) {
    detail::require(!c_.empty(), "unit state needs at least one component");
    double s = 0.0;
    for (const auto& z : c_) {
      detail::require(std::isfinite(z.real()) && std::isfinite(z.imag()), "unit state components must be finite");
      s += std::norm(z);
    }
    detail::require(s > 0.0, "unit state cannot be built from the zero vector");
    const double inv = 1.0 / std::sqrt(s);
    for (auto& z : c_) z *= inv;
  }

  /// e_j in C^m.
  static UnitState basis(int m, int j) {
    std::vector<cplx> c(static_cast<std::size_t>(m));
    c.at(static_cast<std::size_t>(j)) = 1.0;
    return UnitState(std::move(c));
  }

  int m() const noexcept { return static_cast<int>(c_.size()); }
  const cplx& operator[](int a) const { return c_[static_cast<std::size_t>(a)]; }
  std::span<const cplx> components() const noexcept { return c_; }

  bool operator==(const UnitState&) const = default;

 private:
  std::vector<cplx> c_;
};

/// Re sum A^{hk}_{ab} xi^a_h conj(eta^b_k).
inline double real_pairing(const CoefficientTensor& a, const GradientState& xi, const GradientState& eta) {
  detail::require(a.n() == xi.n() && a.n() == eta.n() && a.m() == xi.m() && a.m() == eta.m(),
                  "real_pairing: dimension mismatch");
  const int n = a.n(), m = a.m();
  double s = 0.0;
  for (int h = 0; h < n; ++h)
    for (int al = 0; al < m; ++al) {
      const cplx x = xi(h, al);
      if (x == cplx{}) continue;
      for (int k = 0; k < n; ++k)
        for (int be = 0; be < m; ++be) s += (a(h, k, al, be) * x * std::conj(eta(k, be))).real();
    }
  return s;
}

/// xi(omega)^a_h = omega^a Re(sum_b omega^b conj(xi^b_h)).
inline GradientState project_state(const GradientState& xi, const UnitState& omega) {
  detail::require(xi.m() == omega.m(), "project_state: dimension mismatch");
  GradientState out(xi.n(), xi.m());
  for (int h = 0; h < xi.n(); ++h) {
    double c = 0.0;
    for (int b = 0; b < xi.m(); ++b) c += (omega[b] * std::conj(xi(h, b))).real();
    for (int a = 0; a < xi.m(); ++a) out(h, a) = omega[a] * c;
  }
  return out;
}

/// (A*)^{hk}_{ab} = conj(A^{kh}_{ba}), so that
/// real_pairing(A, xi, eta) == real_pairing(A*, eta, xi).
inline CoefficientTensor adjoint(const CoefficientTensor& a) {
  CoefficientTensor out(a.n(), a.m());
  for (int h = 0; h < a.n(); ++h)
    for (int k = 0; k < a.n(); ++k)
      for (int al = 0; al < a.m(); ++al)
        for (int be = 0; be < a.m(); ++be) out(h, k, al, be) = std::conj(a(k, h, be, al));
  return out;
}

/// (A + A*) / 2.
inline CoefficientTensor hermitian_part(const CoefficientTensor& a) { return 0.5 * (a + adjoint(a)); }

/// A coefficient field over the unit cube. Sampled fields live on the
/// lattice x_i = i / N per axis (N = grid[d]); samples are stored row-major
/// with axis 0 slowest. Periodic fields are read on the torus.
class TensorField {
 public:
  struct Sampled {
    std::vector<int> grid;
    bool periodic = false;
    std::vector<CoefficientTensor> samples;
  };

  explicit TensorField(CoefficientTensor constant) : rep_(std::move(constant)) {}

  explicit TensorField(Sampled sampled) : rep_(std::move(sampled)) {
    const auto& s = std::get<Sampled>(rep_);
    detail::require(!s.samples.empty(), "sampled field needs at least one sample");
    const int n = s.samples.front().n(), m = s.samples.front().m();
    detail::require(static_cast<int>(s.grid.size()) == n, "field grid must list one point count per axis");
    std::size_t count = 1;
    for (int g : s.grid) {
      detail::require(g >= 1, "field lattice needs at least one point per axis");
      count *= static_cast<std::size_t>(g);
    }
    detail::require(count == s.samples.size(), "field sample count must equal the product of the grid sizes");
    for (const auto& t : s.samples)
      detail::require(t.n() == n && t.m() == m, "all field samples must share (n, m)");
  }

  bool is_constant() const noexcept { return std::holds_alternative<CoefficientTensor>(rep_); }
  bool periodic() const noexcept { return !is_constant() && std::get<Sampled>(rep_).periodic; }

  int n() const { return front().n(); }
  int m() const { return front().m(); }

  std::size_t sample_count() const { return is_constant() ? 1 : std::get<Sampled>(rep_).samples.size(); }
  const CoefficientTensor& sample(std::size_t i) const {
    if (is_constant()) return std::get<CoefficientTensor>(rep_);
    return std::get<Sampled>(rep_).samples.at(i);
  }
  const std::vector<int>& grid() const {
    static const std::vector<int> none;
    return is_constant() ? none : std::get<Sampled>(rep_).grid;
  }

  bool is_real() const {
    for (std::size_t i = 0; i < sample_count(); ++i)
      if (!sample(i).is_real()) return false;
    return true;
  }

  /// Lattice index of the point nearest to x (ties round up). Periodic
  /// fields wrap around; non-periodic ones clamp to the last point.
  std::size_t nearest_index(std::span<const double> x) const {
    const auto& s = std::get<Sampled>(rep_);
    std::size_t idx = 0;
    for (std::size_t d = 0; d < s.grid.size(); ++d) {
      const int g = s.grid[d];
      long i = static_cast<long>(std::floor(x[d] * g + 0.5));
      if (s.periodic) {
        i %= g;
        if (i < 0) i += g;
      } else {
        i = std::clamp<long>(i, 0, g - 1);
      }
      idx = idx * static_cast<std::size_t>(g) + static_cast<std::size_t>(i);
    }
    return idx;
  }

  /// Coordinates of lattice point `index`.
  std::vector<double> lattice_point(std::size_t index) const {
    const auto& g = grid();
    std::vector<double> x(g.size());
    for (std::size_t d = g.size(); d-- > 0;) {
      x[d] = static_cast<double>(index % static_cast<std::size_t>(g[d])) / g[d];
      index /= static_cast<std::size_t>(g[d]);
    }
    return x;
  }

 private:
  const CoefficientTensor& front() const { return sample(0); }

  std::variant<CoefficientTensor, Sampled> rep_;
};

/// A(x), or A(x / eps) read periodically when eps is given. Nearest-point
/// lookup: the conditions hold pointwise a.e., so no interpolation.
inline const CoefficientTensor& sample_field(const TensorField& field, std::span<const double> x,
                                             std::optional<double> eps = std::nullopt) {
  detail::require(static_cast<int>(x.size()) == field.n(), "sample_field: point dimension must equal n");
  for (double xd : x) detail::require(xd >= 0.0 && xd <= 1.0, "sample_field: point must lie in [0,1]^n");
  if (eps) {
    detail::require(*eps > 0.0, "sample_field: eps must be positive");
    detail::require(field.is_constant() || field.periodic(), "sample_field: eps requires a periodic field");
  }
  if (field.is_constant()) return field.sample(0);
  if (!eps) return field.sample(field.nearest_index(x));
  std::vector<double> y(x.begin(), x.end());
  for (double& yd : y) {
    yd /= *eps;
    yd -= std::floor(yd);
  }
  return field.sample(field.nearest_index(y));
}

/// The field x -> A(x / eps) sampled on the same lattice. Periodic fields only.
inline TensorField rescaled_field(const TensorField& field, double eps) {
  detail::require(field.is_constant() || field.periodic(), "rescaled_field: field must be periodic");
  detail::require(eps > 0.0, "rescaled_field: eps must be positive");
  if (field.is_constant()) return field;
  TensorField::Sampled out{field.grid(), true, {}};
  out.samples.reserve(field.sample_count());
  for (std::size_t i = 0; i < field.sample_count(); ++i) {
    const auto x = field.lattice_point(i);
    out.samples.push_back(sample_field(field, x, eps));
  }
  return TensorField(std::move(out));
}

}  // namespace pell
