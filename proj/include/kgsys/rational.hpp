#pragma once

// Exact rationals (GMP) plus the small amount of exact linear algebra the
// structure checker needs: complex rationals, RREF, nullspaces, determinants.

#include <gmpxx.h>

#include <complex>
#include <string>
#include <vector>

#include "kgsys/error.hpp"

namespace kgsys {

using Rational = mpq_class;

/// Parses "3", "-3/2", "0.25" or "1e-2" exactly.
inline Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (c != ' ' && c != '\t') s.push_back(c);
  if (s.empty()) throw PreconditionError("empty rational literal");
  try {
    if (s.find_first_of(".eE") == std::string::npos) {
      Rational q(s, 10);
      if (q.get_den() == 0) throw PreconditionError("zero denominator in '" + text + "'");
      q.canonicalize();
      return q;
    }
    // decimal / scientific: mantissa digits over a power of ten
    std::size_t epos = s.find_first_of("eE");
    std::string mant = s.substr(0, epos);
    long exp10 = epos == std::string::npos ? 0 : std::stol(s.substr(epos + 1));
    bool neg = false;
    if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
      neg = mant[0] == '-';
      mant.erase(0, 1);
    }
    std::size_t dot = mant.find('.');
    std::string digits = mant;
    if (dot != std::string::npos) {
      digits = mant.substr(0, dot) + mant.substr(dot + 1);
      exp10 -= static_cast<long>(mant.size() - dot - 1);
    }
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw PreconditionError("bad rational literal '" + text + "'");
    mpz_class num(digits, 10), ten = 10, pow10;
    mpz_pow_ui(pow10.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
    Rational q = exp10 >= 0 ? Rational(num * pow10) : Rational(num, pow10);
    q.canonicalize();
    return neg ? Rational(-q) : q;
  } catch (const std::invalid_argument&) {
    throw PreconditionError("bad rational literal '" + text + "'");
  }
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

/// Exact complex rational a + b i.
struct QComplex {
  Rational re{0};
  Rational im{0};

  QComplex() = default;
  QComplex(Rational r) : re(std::move(r)) {}  // NOLINT(google-explicit-constructor)
  QComplex(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

  bool is_zero() const { return re == 0 && im == 0; }
  QComplex conj() const { return {re, -im}; }
  Rational norm2() const { return re * re + im * im; }
  std::complex<double> to_complex() const { return {re.get_d(), im.get_d()}; }

  QComplex& operator+=(const QComplex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  QComplex& operator-=(const QComplex& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  friend QComplex operator+(QComplex a, const QComplex& b) { return a += b; }
  friend QComplex operator-(QComplex a, const QComplex& b) { return a -= b; }
  friend QComplex operator-(const QComplex& a) { return {-a.re, -a.im}; }
  friend QComplex operator*(const QComplex& a, const QComplex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend QComplex operator/(const QComplex& a, const QComplex& b) {
    const Rational d = b.norm2();
    if (d == 0) throw PreconditionError("division by zero complex rational");
    const QComplex n = a * b.conj();
    return {n.re / d, n.im / d};
  }
  friend bool operator==(const QComplex& a, const QComplex& b) { return a.re == b.re && a.im == b.im; }
  friend bool operator!=(const QComplex& a, const QComplex& b) { return !(a == b); }
};

inline std::string to_string(const QComplex& z) {
  if (z.im == 0) return z.re.get_str();
  return z.re.get_str() + (z.im < 0 ? "-" : "+") + Rational(abs(z.im)).get_str() + "i";
}

using QMatrix = std::vector<std::vector<Rational>>;
using QCMatrix = std::vector<std::vector<QComplex>>;

/// Reduced row echelon form in place; returns pivot columns.
inline std::vector<std::size_t> rref(QMatrix& m) {
  std::vector<std::size_t> pivots;
  if (m.empty()) return pivots;
  const std::size_t rows = m.size(), cols = m[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && m[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(m[p], m[r]);
    const Rational inv = 1 / m[r][c];
    for (auto& v : m[r]) v *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][c] == 0) continue;
      const Rational f = m[i][c];
      for (std::size_t k = c; k < cols; ++k) m[i][k] -= f * m[r][k];
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

/// Basis of {x : M x = 0} for an (r x cols) rational matrix.
inline std::vector<std::vector<Rational>> nullspace(QMatrix m, std::size_t cols) {
  for (auto& row : m)
    if (row.size() != cols) throw DimensionMismatch("nullspace: ragged matrix");
  const auto pivots = rref(m);
  std::vector<bool> is_pivot(cols, false);
  for (auto c : pivots) is_pivot[c] = true;
  std::vector<std::vector<Rational>> basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<Rational> v(cols, Rational(0));
    v[free] = 1;
    for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = -m[i][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

/// Determinant over Q(i) by Gaussian elimination.
inline QComplex determinant(QCMatrix a) {
  const std::size_t n = a.size();
  QComplex det(Rational(1));
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && a[p][c].is_zero()) ++p;
    if (p == n) return QComplex{};
    if (p != c) {
      std::swap(a[p], a[c]);
      det = -det;
    }
    det = det * a[c][c];
    for (std::size_t i = c + 1; i < n; ++i) {
      if (a[i][c].is_zero()) continue;
      const QComplex f = a[i][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[i][k] -= f * a[c][k];
    }
  }
  return det;
}

/// Scales a nonzero rational vector to coprime integers, keeping the sign pattern.
inline std::vector<Rational> primitive_integer_vector(std::vector<Rational> v) {
  mpz_class l = 1;
  for (const auto& q : v)
    if (q != 0) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den_mpz_t());
  mpz_class g = 0;
  for (auto& q : v) {
    q *= l;
    q.canonicalize();
    if (q != 0) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), q.get_num_mpz_t());
  }
  if (g != 0)
    for (auto& q : v) q /= g;
  return v;
}

}  // namespace kgsys
