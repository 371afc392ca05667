#pragma once

// Pointwise and field evaluation of F, F~ and G.

#include <complex>
#include <string>
#include <vector>

#include "kgsys/grid.hpp"
#include "kgsys/rational.hpp"
#include "kgsys/tensor.hpp"

namespace kgsys {

namespace detail {

template <class T>
T coefficient_as(const Rational& q);
template <>
inline double coefficient_as<double>(const Rational& q) { return q.get_d(); }
template <>
inline cplx coefficient_as<cplx>(const Rational& q) { return {q.get_d(), 0.0}; }
template <>
inline Rational coefficient_as<Rational>(const Rational& q) { return q; }
template <>
inline QComplex coefficient_as<QComplex>(const Rational& q) { return QComplex(q); }

inline cplx conjugate(const cplx& z) { return std::conj(z); }
inline QComplex conjugate(const QComplex& z) { return z.conj(); }

inline void require_components(const CubicTensor& c, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(c.components()) != n)
    throw DimensionMismatch(std::string(what) + ": tensor has " + std::to_string(c.components()) +
                            " components, argument has " + std::to_string(n));
}

}  // namespace detail

/// F_j(u) = sum C_{jklm} u_k u_l u_m at a single point (double, Rational, complex...).
template <class T>
std::vector<T> eval_F(const CubicTensor& c, const std::vector<T>& u) {
  detail::require_components(c, u.size(), "eval_F");
  std::vector<T> out(u.size(), T(0));
  for (const auto& e : c.entries()) {
    const auto& [j, k, l, m] = e.index;
    out[j] += detail::coefficient_as<T>(e.value) * u[k] * u[l] * u[m];
  }
  return out;
}

/// F~_j(Y) = sum C_{jklm} (conj(Y_k) Y_l Y_m + Y_k conj(Y_l) Y_m + Y_k Y_l conj(Y_m)).
template <class T>
std::vector<T> eval_Ftilde(const CubicTensor& c, const std::vector<T>& y) {
  detail::require_components(c, y.size(), "eval_Ftilde");
  std::vector<T> out(y.size(), T{});
  for (const auto& e : c.entries()) {
    const auto& [j, k, l, m] = e.index;
    const T yk = y[k], yl = y[l], ym = y[m];
    const T s = detail::conjugate(yk) * yl * ym + yk * detail::conjugate(yl) * ym + yk * yl * detail::conjugate(ym);
    out[j] += detail::coefficient_as<T>(e.value) * s;
  }
  return out;
}

/// Dealiased evaluation of F(s * Re v) on the spectral grid.
///
/// Works on spectral arrays: each component is zero-padded, transformed to the
/// fine grid, the cubic products are formed there and the result is truncated
/// back.  Padding by 2 makes the cubic products alias-free on the retained modes.
class CubicKernel {
 public:
  CubicKernel(GridPtr grid, CubicTensor tensor)
      : grid_(std::move(grid)), tensor_(std::move(tensor)) {
    for (const auto& e : tensor_.entries())
      terms_.push_back({e.index[0], e.index[1], e.index[2], e.index[3], e.value.get_d()});
    const std::size_t n = static_cast<std::size_t>(tensor_.components());
    fine_.assign(n, cvec(grid_->padded_size()));
    values_.assign(n, std::vector<double>(grid_->padded_size()));
    acc_.assign(grid_->padded_size(), 0.0);
  }

  const SpectralGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const CubicTensor& tensor() const { return tensor_; }
  std::size_t components() const { return static_cast<std::size_t>(tensor_.components()); }

  /// out_j = (F(real_scale * Re v))^_j truncated to the coarse modes; vhat and out are spectral.
  void apply(const std::vector<cvec>& vhat, double real_scale, std::vector<cvec>& out) {
    const std::size_t n = components();
    if (vhat.size() != n) throw DimensionMismatch("CubicKernel: component count mismatch");
    out.resize(n);
    if (terms_.empty()) {
      for (auto& o : out) o.assign(grid_->size(), cplx{});
      return;
    }
    const std::size_t big = grid_->padded_size();
    for (std::size_t j = 0; j < n; ++j) {
      grid_->pad(vhat[j], fine_[j]);
      grid_->inverse_padded(fine_[j]);
      for (std::size_t m = 0; m < big; ++m) values_[j][m] = real_scale * fine_[j][m].real();
    }
    for (std::size_t j = 0; j < n; ++j) {
      std::fill(acc_.begin(), acc_.end(), 0.0);
      bool any = false;
      for (const auto& t : terms_) {
        if (static_cast<std::size_t>(t.j) != j) continue;
        any = true;
        const auto& a = values_[t.k];
        const auto& b = values_[t.l];
        const auto& c = values_[t.m];
        for (std::size_t m = 0; m < big; ++m) acc_[m] += t.c * a[m] * b[m] * c[m];
      }
      if (!any) {
        out[j].assign(grid_->size(), cplx{});
        continue;
      }
      cvec& buf = fine_[j];
      for (std::size_t m = 0; m < big; ++m) buf[m] = cplx(acc_[m], 0.0);
      grid_->forward_padded(buf);
      grid_->truncate(buf, out[j]);
    }
  }

  /// G^ = (i/2) <xi>^{-1} (F(v + conj v))^ for spectral v.
  void apply_G(const std::vector<cvec>& vhat, std::vector<cvec>& out) {
    apply(vhat, 2.0, out);
    const auto& br = grid_->bracket();
    for (auto& o : out)
      for (std::size_t k = 0; k < o.size(); ++k) o[k] *= cplx(0.0, 0.5 / br[k]);
  }

 private:
  struct Term {
    int j, k, l, m;
    double c;
  };
  GridPtr grid_;
  CubicTensor tensor_;
  std::vector<Term> terms_;
  std::vector<cvec> fine_;
  std::vector<std::vector<double>> values_;
  std::vector<double> acc_;
};

inline void require_real(const VectorField& u, const char* what) {
  double big = 0.0, imag = 0.0;
  for (std::size_t j = 0; j < u.components(); ++j)
    for (const auto& z : u[j]) {
      big = std::max(big, std::abs(z));
      imag = std::max(imag, std::abs(z.imag()));
    }
  if (imag > 1e-12 * std::max(1.0, big)) throw PreconditionError(std::string(what) + ": argument is not real-valued");
}

/// Grid projection of F(u) for a real physical field u.
inline VectorField eval_F(const CubicTensor& c, const VectorField& u) {
  if (!u.is_physical()) throw RepresentationMismatch("eval_F expects a physical field");
  detail::require_components(c, u.components(), "eval_F");
  require_real(u, "eval_F");
  CubicKernel kernel(u.grid_ptr(), c);
  VectorField s = forward_transform(u);
  std::vector<cvec> out;
  kernel.apply(s.data(), 1.0, out);
  VectorField r(u.grid_ptr(), std::move(out), Representation::spectral);
  VectorField p = inverse_transform(r);
  for (auto& comp : p.data())
    for (auto& z : comp) z = cplx(z.real(), 0.0);
  return p;
}

/// G(v) = (i/2) <i d_x>^{-1} F(v + conj v) for a physical field v.
inline VectorField eval_G(const CubicTensor& c, const VectorField& v) {
  if (!v.is_physical()) throw RepresentationMismatch("eval_G expects a physical field");
  detail::require_components(c, v.components(), "eval_G");
  CubicKernel kernel(v.grid_ptr(), c);
  VectorField s = forward_transform(v);
  std::vector<cvec> out;
  kernel.apply_G(s.data(), out);
  return inverse_transform(VectorField(v.grid_ptr(), std::move(out), Representation::spectral));
}

/// The same operator written as 4i <i d_x>^{-1} F(Re v); used as a cross-check of eval_G.
inline VectorField eval_G_real_part_form(const CubicTensor& c, const VectorField& v) {
  if (!v.is_physical()) throw RepresentationMismatch("eval_G expects a physical field");
  VectorField re = v;
  for (auto& comp : re.data())
    for (auto& z : comp) z = cplx(z.real(), 0.0);
  VectorField f = eval_F(c, re);
  return cplx(0.0, 4.0) * bessel_multiplier(f, -1.0);
}

}  // namespace kgsys
