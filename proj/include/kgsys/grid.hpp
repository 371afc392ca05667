#pragma once

// Spectral grid, vector fields and the Fourier-multiplier toolbox shared by the
// solver and the diagnostics.
//
// Conventions: the box is [-L, L) with n equispaced points x_m = -L + m dx, and
// spectral arrays hold continuum-normalized samples
//
//   phi_hat(xi_k) = dx / sqrt(2 pi) * sum_m exp(-i x_m xi_k) phi(x_m),
//   xi_k = pi k / L,  k = 0..n/2-1, -n/2..-1   (FFTW order),
//
// so that closed-form transforms under the (2 pi)^{-1/2} convention can be
// compared directly.  The inverse carries the weight dxi / sqrt(2 pi).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "kgsys/error.hpp"
#include "kgsys/fft.hpp"

namespace kgsys {

inline double japanese(double z) { return std::sqrt(1.0 + z * z); }

class SpectralGrid {
 public:
  SpectralGrid(double half_width, std::size_t n_points, int padding_factor = 2)
      : half_width_(half_width), n_(n_points), padding_(padding_factor) {
    if (!(half_width > 0.0)) throw PreconditionError("SpectralGrid: half_width must be positive");
    if (n_points < 4 || (n_points & (n_points - 1)) != 0)
      throw PreconditionError("SpectralGrid: n_points must be a power of two >= 4");
    if (padding_factor < 2) throw PreconditionError("SpectralGrid: padding_factor must be >= 2");
    dx_ = 2.0 * half_width_ / static_cast<double>(n_);
    dxi_ = std::numbers::pi / half_width_;
    x_.resize(n_);
    xi_.resize(n_);
    bracket_.resize(n_);
    for (std::size_t m = 0; m < n_; ++m) x_[m] = -half_width_ + static_cast<double>(m) * dx_;
    for (std::size_t k = 0; k < n_; ++k) {
      xi_[k] = dxi_ * static_cast<double>(mode(k));
      bracket_[k] = japanese(xi_[k]);
    }
    plan_ = std::make_shared<FftPlan>(n_);
    padded_plan_ = std::make_shared<FftPlan>(padded_size());
  }

  static std::shared_ptr<const SpectralGrid> make(double half_width, std::size_t n_points,
                                                  int padding_factor = 2) {
    return std::make_shared<const SpectralGrid>(half_width, n_points, padding_factor);
  }

  double half_width() const { return half_width_; }
  std::size_t size() const { return n_; }
  std::size_t padded_size() const { return n_ * static_cast<std::size_t>(padding_); }
  int padding_factor() const { return padding_; }
  double dx() const { return dx_; }
  double dxi() const { return dxi_; }
  double xi_max() const { return dxi_ * static_cast<double>(n_ / 2); }

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& xi() const { return xi_; }
  /// <xi_k> = sqrt(1 + xi_k^2), FFTW order.
  const std::vector<double>& bracket() const { return bracket_; }

  /// Signed mode number of FFTW index k.
  long mode(std::size_t k) const {
    const long n = static_cast<long>(n_);
    const long kk = static_cast<long>(k);
    return kk < n / 2 ? kk : kk - n;
  }
  /// FFTW index of the signed mode number (|k| < n/2, plus k = -n/2).
  std::size_t index_of_mode(long k) const {
    const long n = static_cast<long>(n_);
    return static_cast<std::size_t>(k >= 0 ? k : k + n);
  }

  void forward(cvec& a) const { forward_impl(a, *plan_, dx_); }
  void inverse(cvec& a) const { inverse_impl(a, *plan_); }
  /// Same transforms on the zero-padded grid (padding_factor * n points, spacing dx / padding).
  void forward_padded(cvec& a) const { forward_impl(a, *padded_plan_, dx_ / padding_); }
  void inverse_padded(cvec& a) const { inverse_impl(a, *padded_plan_); }

  /// Copy coarse spectral samples into a zero-padded spectral array.
  void pad(const cvec& coarse, cvec& fine) const {
    const std::size_t big = padded_size();
    fine.assign(big, cplx{});
    const std::size_t half = n_ / 2;
    for (std::size_t k = 0; k < half; ++k) fine[k] = coarse[k];
    for (std::size_t k = half; k < n_; ++k) fine[big - n_ + k] = coarse[k];
  }
  /// Keep only the coarse modes of a padded spectral array.
  void truncate(const cvec& fine, cvec& coarse) const {
    const std::size_t big = padded_size();
    coarse.resize(n_);
    const std::size_t half = n_ / 2;
    for (std::size_t k = 0; k < half; ++k) coarse[k] = fine[k];
    for (std::size_t k = half; k < n_; ++k) coarse[k] = fine[big - n_ + k];
  }

 private:
  // exp(-i x_0 xi_k) with x_0 = -L equals (-1)^k on both grids.
  static double parity(std::size_t k) { return (k & 1U) != 0U ? -1.0 : 1.0; }

  void forward_impl(cvec& a, const FftPlan& plan, double spacing) const {
    if (a.size() != plan.size()) throw DimensionMismatch("forward transform: wrong array length");
    plan.forward(a.data());
    const double scale = spacing / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t k = 0; k < a.size(); ++k) a[k] *= scale * parity(k);
  }
  void inverse_impl(cvec& a, const FftPlan& plan) const {
    if (a.size() != plan.size()) throw DimensionMismatch("inverse transform: wrong array length");
    for (std::size_t k = 0; k < a.size(); ++k) a[k] *= parity(k);
    plan.backward(a.data());
    const double scale = dxi_ / std::sqrt(2.0 * std::numbers::pi);
    for (auto& z : a) z *= scale;
  }

  double half_width_;
  std::size_t n_;
  int padding_;
  double dx_ = 0.0;
  double dxi_ = 0.0;
  std::vector<double> x_, xi_, bracket_;
  std::shared_ptr<FftPlan> plan_, padded_plan_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

enum class Representation { physical, spectral };

inline const char* to_string(Representation r) {
  return r == Representation::physical ? "physical" : "spectral";
}

/// N complex components on one grid, all in the same representation.
class VectorField {
 public:
  VectorField() = default;
  VectorField(GridPtr grid, std::size_t components, Representation rep)
      : grid_(std::move(grid)), rep_(rep), comps_(components, cvec(grid_->size())) {}
  VectorField(GridPtr grid, std::vector<cvec> comps, Representation rep)
      : grid_(std::move(grid)), rep_(rep), comps_(std::move(comps)) {
    for (const auto& c : comps_)
      if (c.size() != grid_->size()) throw DimensionMismatch("VectorField: component length != grid size");
  }

  const SpectralGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  Representation representation() const { return rep_; }
  bool is_physical() const { return rep_ == Representation::physical; }
  bool is_spectral() const { return rep_ == Representation::spectral; }
  void set_representation(Representation r) { rep_ = r; }

  std::size_t components() const { return comps_.size(); }
  std::size_t size() const { return grid_ ? grid_->size() : 0; }
  cvec& operator[](std::size_t j) { return comps_[j]; }
  const cvec& operator[](std::size_t j) const { return comps_[j]; }
  std::vector<cvec>& data() { return comps_; }
  const std::vector<cvec>& data() const { return comps_; }

  void require_compatible(const VectorField& o) const {
    if (grid_ != o.grid_ && (grid_->size() != o.grid_->size() ||
                             grid_->half_width() != o.grid_->half_width()))
      throw DimensionMismatch("fields live on different grids");
    if (components() != o.components()) throw DimensionMismatch("component count mismatch");
    if (rep_ != o.rep_) throw RepresentationMismatch("fields in different representations");
  }

  VectorField& operator+=(const VectorField& o) {
    require_compatible(o);
    for (std::size_t j = 0; j < comps_.size(); ++j)
      for (std::size_t m = 0; m < comps_[j].size(); ++m) comps_[j][m] += o.comps_[j][m];
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    require_compatible(o);
    for (std::size_t j = 0; j < comps_.size(); ++j)
      for (std::size_t m = 0; m < comps_[j].size(); ++m) comps_[j][m] -= o.comps_[j][m];
    return *this;
  }
  VectorField& operator*=(cplx s) {
    for (auto& c : comps_)
      for (auto& z : c) z *= s;
    return *this;
  }
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(cplx s, VectorField a) { return a *= s; }

 private:
  GridPtr grid_;
  Representation rep_ = Representation::physical;
  std::vector<cvec> comps_;
};

/// Sample N functions of x on the grid.
inline VectorField sample(const GridPtr& grid, const std::vector<std::function<cplx(double)>>& fns) {
  VectorField f(grid, fns.size(), Representation::physical);
  for (std::size_t j = 0; j < fns.size(); ++j)
    for (std::size_t m = 0; m < grid->size(); ++m) f[j][m] = fns[j](grid->x()[m]);
  return f;
}

inline VectorField forward_transform(const VectorField& field) {
  if (!field.is_physical()) throw RepresentationMismatch("forward_transform expects a physical field");
  VectorField out = field;
  for (std::size_t j = 0; j < out.components(); ++j) out.grid().forward(out[j]);
  out.set_representation(Representation::spectral);
  return out;
}

inline VectorField inverse_transform(const VectorField& field) {
  if (!field.is_spectral()) throw RepresentationMismatch("inverse_transform expects a spectral field");
  VectorField out = field;
  for (std::size_t j = 0; j < out.components(); ++j) out.grid().inverse(out[j]);
  out.set_representation(Representation::physical);
  return out;
}

inline VectorField to_spectral(const VectorField& f) { return f.is_spectral() ? f : forward_transform(f); }
inline VectorField to_physical(const VectorField& f) { return f.is_physical() ? f : inverse_transform(f); }

inline VectorField as_representation(const VectorField& f, Representation r) {
  return r == Representation::physical ? to_physical(f) : to_spectral(f);
}

/// Pointwise spectral multiplier m(xi); the result keeps the input representation.
template <class Symbol>
VectorField fourier_multiplier(const VectorField& field, Symbol&& symbol) {
  VectorField s = to_spectral(field);
  const auto& xi = s.grid().xi();
  for (std::size_t j = 0; j < s.components(); ++j)
    for (std::size_t k = 0; k < xi.size(); ++k) s[j][k] *= symbol(xi[k]);
  return as_representation(s, field.representation());
}

/// <i d_x>^s, i.e. multiplication of the spectrum by <xi>^s.
inline VectorField bessel_multiplier(const VectorField& field, double s) {
  if (s == 0.0) return field;
  return fourier_multiplier(field, [s](double xi) { return cplx(std::pow(1.0 + xi * xi, 0.5 * s)); });
}

inline VectorField derivative(const VectorField& field) {
  return fourier_multiplier(field, [](double xi) { return cplx(0.0, xi); });
}

/// Free Klein-Gordon group exp(-i t <i d_x>).
inline VectorField free_evolve(const VectorField& field, double t) {
  if (t == 0.0) return field;
  return fourier_multiplier(field, [t](double xi) { return std::polar(1.0, -t * japanese(xi)); });
}

/// Multiplication by the periodic coordinate x in [-L, L).
inline VectorField multiply_x(const VectorField& field) {
  VectorField p = to_physical(field);
  const auto& x = p.grid().x();
  for (std::size_t j = 0; j < p.components(); ++j)
    for (std::size_t m = 0; m < x.size(); ++m) p[j][m] *= x[m];
  return as_representation(p, field.representation());
}

/// max |phi| over the outer 10% of the box divided by max |phi| overall (0 for the zero field).
inline double boundary_ratio(const VectorField& field) {
  const VectorField p = to_physical(field);
  const double L = p.grid().half_width();
  double inner = 0.0, outer = 0.0;
  for (std::size_t j = 0; j < p.components(); ++j)
    for (std::size_t m = 0; m < p.size(); ++m) {
      const double a = std::abs(p[j][m]);
      inner = std::max(inner, a);
      if (std::abs(p.grid().x()[m]) >= 0.9 * L) outer = std::max(outer, a);
    }
  return inner > 0.0 ? outer / inner : 0.0;
}

inline constexpr double kBoundaryTolerance = 1e-10;

inline void check_support(const VectorField& field, const std::string& context, Warnings* sink) {
  if (sink == nullptr) return;
  const double r = boundary_ratio(field);
  if (r > kBoundaryTolerance)
    warn(sink, context + ": field not localized (outer-10% ratio " + std::to_string(r) +
                   "), x-weights wrap around the periodic box");
}

/// Smoothness s, weight q and Lebesgue exponent p (2 or infinity).
struct NormSpec {
  double s = 0.0;
  double q = 0.0;
  double p = 2.0;

  static NormSpec sobolev(double s) { return {s, 0.0, 2.0}; }
  static NormSpec weighted(double s, double q) { return {s, q, 2.0}; }
  static NormSpec sup(double s = 0.0) { return {s, 0.0, std::numeric_limits<double>::infinity()}; }
};

/// Per-component norms ||<x>^q <i d_x>^s phi_j||_{L^p}.
inline std::vector<double> component_norms(const VectorField& field, const NormSpec& spec) {
  const bool sup = std::isinf(spec.p) && spec.p > 0;
  if (!sup && spec.p != 2.0) throw Unsupported("norm: only p = 2 and p = infinity are supported");
  if (sup && spec.q != 0.0) throw Unsupported("norm: weighted sup norms (p = infinity, q != 0) are not supported");
  const VectorField phys = to_physical(bessel_multiplier(field, spec.s));
  const auto& x = phys.grid().x();
  std::vector<double> out(phys.components(), 0.0);
  for (std::size_t j = 0; j < phys.components(); ++j) {
    double acc = 0.0;
    for (std::size_t m = 0; m < x.size(); ++m) {
      const double w = spec.q == 0.0 ? 1.0 : std::pow(1.0 + x[m] * x[m], 0.5 * spec.q);
      const double a = w * std::abs(phys[j][m]);
      acc = sup ? std::max(acc, a) : acc + a * a;
    }
    out[j] = sup ? acc : std::sqrt(phys.grid().dx() * acc);
  }
  return out;
}

/// Sum of component norms, as in the weighted Sobolev norm of a vector.
inline double norm(const VectorField& field, const NormSpec& spec) {
  double total = 0.0;
  for (double v : component_norms(field, spec)) total += v;
  return total;
}

/// J = <i d_x> x + i t d_x.  The multiplication by x is done in physical space.
inline VectorField apply_J(const VectorField& field, double t, Warnings* warnings = nullptr) {
  if (!field.is_physical()) throw RepresentationMismatch("apply_J expects a physical field");
  check_support(field, "apply_J", warnings);
  VectorField out = bessel_multiplier(multiply_x(field), 1.0);
  if (t != 0.0) out += cplx(0.0, t) * derivative(field);
  return out;
}

}  // namespace kgsys
