#pragma once

// Exact decision of Im(AY . F~(Y)) == 0 for all Y in C^N, and a search for A.
//
// The quartic form AY . F~(Y) is expanded into monomials Y^a conj(Y)^b with
// |a| = |b| = 2; it is real for every Y exactly when c_{a,b} = conj(c_{b,a}).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgsys/nonlinearity.hpp"
#include "kgsys/rational.hpp"
#include "kgsys/tensor.hpp"

namespace kgsys {

class HermitianForm {
 public:
  HermitianForm() = default;
  explicit HermitianForm(QCMatrix entries) : a_(std::move(entries)) {
    for (const auto& row : a_)
      if (row.size() != a_.size()) throw DimensionMismatch("HermitianForm: matrix must be square");
  }

  static HermitianForm identity(std::size_t n) {
    QCMatrix m(n, std::vector<QComplex>(n));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = QComplex(Rational(1));
    return HermitianForm(std::move(m));
  }
  static HermitianForm diagonal(const std::vector<Rational>& d) {
    QCMatrix m(d.size(), std::vector<QComplex>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) m[i][i] = QComplex(d[i]);
    return HermitianForm(std::move(m));
  }

  std::size_t dimension() const { return a_.size(); }
  const QComplex& operator()(std::size_t i, std::size_t j) const { return a_[i][j]; }
  const QCMatrix& entries() const { return a_; }

  bool is_hermitian() const {
    for (std::size_t i = 0; i < a_.size(); ++i)
      for (std::size_t j = i; j < a_.size(); ++j)
        if (a_[i][j] != a_[j][i].conj()) return false;
    return true;
  }

  /// Leading principal minors (real for Hermitian A).
  std::vector<Rational> leading_minors() const {
    std::vector<Rational> out;
    for (std::size_t k = 1; k <= a_.size(); ++k) {
      QCMatrix sub(k, std::vector<QComplex>(k));
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) sub[i][j] = a_[i][j];
      out.push_back(determinant(std::move(sub)).re);
    }
    return out;
  }

  bool is_positive_definite() const {
    if (!is_hermitian() || a_.empty()) return false;
    for (const auto& m : leading_minors())
      if (m <= 0) return false;
    return true;
  }

  void validate() const {
    if (a_.empty()) throw PreconditionError("HermitianForm: empty matrix");
    if (!is_hermitian()) throw NotHermitian("matrix A is not Hermitian");
    if (!is_positive_definite()) throw NotPositiveDefinite("matrix A is not positive definite");
  }

  Eigen::MatrixXcd to_matrix() const {
    const auto n = static_cast<Eigen::Index>(a_.size());
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = a_[i][j].to_complex();
    return m;
  }

  /// (smallest, largest) eigenvalue of the float view.
  std::pair<double, double> eigen_bounds() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_matrix(), Eigen::EigenvaluesOnly);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
  }

  /// conj(Y)^T A Y, real for Hermitian A.
  double quadratic(const std::vector<cplx>& y) const {
    cplx acc{};
    for (std::size_t i = 0; i < a_.size(); ++i)
      for (std::size_t j = 0; j < a_.size(); ++j) acc += std::conj(y[i]) * a_[i][j].to_complex() * y[j];
    return acc.real();
  }

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : a_) {
      nlohmann::json r = nlohmann::json::array();
      for (const auto& z : row) r.push_back(to_string(z));
      rows.push_back(r);
    }
    return rows;
  }

  /// Rows of entries; each entry is a rational literal or a [re, im] pair.
  static HermitianForm from_json(const nlohmann::json& j) {
    QCMatrix m;
    for (const auto& row : j) {
      std::vector<QComplex> r;
      for (const auto& e : row) {
        if (e.is_array()) {
          if (e.size() != 2) throw PreconditionError("complex entry must be [re, im]");
          r.emplace_back(CubicTensor::json_rational(e[0]), CubicTensor::json_rational(e[1]));
        } else {
          r.emplace_back(CubicTensor::json_rational(e));
        }
      }
      m.push_back(std::move(r));
    }
    return HermitianForm(std::move(m));
  }

 private:
  QCMatrix a_;
};

/// Exponent pair (alpha over Y, beta over conj Y).
struct MonomialKey {
  std::vector<int> alpha;
  std::vector<int> beta;
  MonomialKey swapped() const { return {beta, alpha}; }
  friend auto operator<=>(const MonomialKey&, const MonomialKey&) = default;
};

inline std::string to_string(const MonomialKey& k) {
  std::string s;
  auto emit = [&](const std::vector<int>& e, const char* sym) {
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      if (!s.empty()) s += " ";
      s += std::string(sym) + std::to_string(i + 1);
      if (e[i] > 1) s += "^" + std::to_string(e[i]);
    }
  };
  emit(k.alpha, "Y");
  emit(k.beta, "conj(Y)");
  return s.empty() ? "1" : s;
}

class MonomialPolynomial {
 public:
  explicit MonomialPolynomial(std::size_t variables = 0) : n_(variables) {}

  std::size_t variables() const { return n_; }
  const std::map<MonomialKey, QComplex>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  void add(MonomialKey key, const QComplex& c) {
    if (key.alpha.size() != n_ || key.beta.size() != n_) throw DimensionMismatch("monomial arity mismatch");
    int deg = 0;
    for (std::size_t i = 0; i < n_; ++i) deg += key.alpha[i] + key.beta[i];
    if (deg != 4) throw PreconditionError("monomial of degree " + std::to_string(deg) + ", expected 4");
    if (c.is_zero()) return;
    auto it = terms_.find(key);
    if (it == terms_.end()) {
      terms_.emplace(std::move(key), c);
    } else {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  QComplex coefficient(const MonomialKey& key) const {
    auto it = terms_.find(key);
    return it == terms_.end() ? QComplex{} : it->second;
  }

  /// First key with c_{a,b} != conj(c_{b,a}), if any.
  std::optional<MonomialKey> first_violation() const {
    for (const auto& [key, c] : terms_)
      if (c != coefficient(key.swapped()).conj()) return key;
    return std::nullopt;
  }

  bool is_real_valued() const { return !first_violation().has_value(); }

  cplx evaluate(const std::vector<cplx>& y) const {
    cplx acc{};
    for (const auto& [key, c] : terms_) {
      cplx term = c.to_complex();
      for (std::size_t i = 0; i < n_; ++i) {
        for (int p = 0; p < key.alpha[i]; ++p) term *= y[i];
        for (int p = 0; p < key.beta[i]; ++p) term *= std::conj(y[i]);
      }
      acc += term;
    }
    return acc;
  }

 private:
  std::size_t n_;
  std::map<MonomialKey, QComplex> terms_;
};

/// Which factor of the scalar product carries the conjugate.
enum class ScalarProduct {
  conjugate_second,  // Y . Z = sum Y_n conj(Z_n)   (default)
  conjugate_first,   // Y . Z = sum conj(Y_n) Z_n
};

/// Exact expansion of AY . F~(Y).
inline MonomialPolynomial expand_condition(const CubicTensor& c, const HermitianForm& a,
                                           ScalarProduct convention = ScalarProduct::conjugate_second) {
  const std::size_t n = static_cast<std::size_t>(c.components());
  if (a.dimension() != n) throw DimensionMismatch("expand_condition: A and C have different dimensions");
  MonomialPolynomial poly(n);
  // Each term of F~_n is a product of three factors, exactly one of them conjugated.
  // With conjugate_second we need conj(F~_n): the conjugation pattern flips.
  const bool flip = convention == ScalarProduct::conjugate_second;
  for (const auto& e : c.entries()) {
    const auto& [row, k, l, m] = e.index;
    const std::array<int, 3> idx{k, l, m};
    for (std::size_t p = 0; p < n; ++p) {
      QComplex apn = convention == ScalarProduct::conjugate_second ? a(static_cast<std::size_t>(row), p)
                                                                   : a(static_cast<std::size_t>(row), p).conj();
      if (apn.is_zero()) continue;
      for (int conj_slot = 0; conj_slot < 3; ++conj_slot) {
        MonomialKey key{std::vector<int>(n, 0), std::vector<int>(n, 0)};
        // (AY)_row = sum_p A_{row,p} Y_p; under conjugate_first it enters conjugated.
        if (flip)
          key.alpha[p] += 1;
        else
          key.beta[p] += 1;
        for (int s = 0; s < 3; ++s) {
          const bool conj_here = (s == conj_slot) != flip;
          (conj_here ? key.beta : key.alpha)[static_cast<std::size_t>(idx[s])] += 1;
        }
        poly.add(std::move(key), apn * QComplex(e.value));
      }
    }
  }
  return poly;
}

/// Im(AY . F~(Y)) by direct floating evaluation (independent of the expansion).
inline double condition_value(const CubicTensor& c, const HermitianForm& a, const std::vector<cplx>& y,
                              ScalarProduct convention = ScalarProduct::conjugate_second) {
  const auto ft = eval_Ftilde(c, y);
  cplx acc{};
  for (std::size_t i = 0; i < y.size(); ++i) {
    cplx ay{};
    for (std::size_t j = 0; j < y.size(); ++j) ay += a(i, j).to_complex() * y[j];
    acc += convention == ScalarProduct::conjugate_second ? ay * std::conj(ft[i]) : std::conj(ay) * ft[i];
  }
  return acc.imag();
}

struct StructureWitness {
  MonomialKey monomial;
  QComplex coefficient;
  QComplex partner_coefficient;
  std::vector<cplx> y;
  double value = 0.0;  // Im(AY . F~(Y)) at y
};

struct StructureVerdict {
  bool holds = false;
  std::optional<StructureWitness> witness;
};

/// Exact decision; on violation the witness maximizes |Im(AY . F~(Y))| over a seeded sample of unit Y.
inline StructureVerdict structure_verify(const CubicTensor& c, const HermitianForm& a, std::uint64_t seed = 1) {
  a.validate();
  const auto poly = expand_condition(c, a);
  const auto bad = poly.first_violation();
  if (!bad) return {true, std::nullopt};
  StructureWitness w;
  w.monomial = *bad;
  w.coefficient = poly.coefficient(*bad);
  w.partner_coefficient = poly.coefficient(bad->swapped());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const std::size_t n = a.dimension();
  for (int trial = 0; trial < 256; ++trial) {
    std::vector<cplx> y(n);
    double nrm = 0.0;
    for (auto& z : y) {
      z = {nd(rng), nd(rng)};
      nrm += std::norm(z);
    }
    for (auto& z : y) z /= std::sqrt(nrm);
    const double v = condition_value(c, a, y);
    if (std::abs(v) > std::abs(w.value)) {
      w.value = v;
      w.y = y;
    }
  }
  return {false, w};
}

enum class SearchOutcome { found, none_diagonal, none_found };

inline const char* to_string(SearchOutcome o) {
  switch (o) {
    case SearchOutcome::found: return "found";
    case SearchOutcome::none_diagonal: return "none_diagonal";
    case SearchOutcome::none_found: return "none_found";
  }
  return "?";
}

struct SearchResult {
  SearchOutcome outcome = SearchOutcome::none_found;
  std::optional<HermitianForm> a;
  bool diagonal = false;
  std::string certificate;
  std::size_t solution_dimension = 0;  // real dimension of the Hermitian solution space
};

namespace detail {

// Real coordinates of a Hermitian matrix: a_ii, then (Re A_ij, Im A_ij) for i < j.
inline HermitianForm hermitian_from_coordinates(std::size_t n, const std::vector<Rational>& x) {
  QCMatrix m(n, std::vector<QComplex>(n));
  std::size_t u = 0;
  for (std::size_t i = 0; i < n; ++i) m[i][i] = QComplex(x[u++]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Rational re = x[u++], im = x[u++];
      m[i][j] = QComplex(re, im);
      m[j][i] = QComplex(re, -im);
    }
  return HermitianForm(std::move(m));
}

// Real linear constraints on the N^2 coordinates; one row per real equation.
inline QMatrix structure_constraints(const CubicTensor& c) {
  const std::size_t n = static_cast<std::size_t>(c.components());
  const std::size_t dim = n * n;
  std::vector<MonomialPolynomial> polys;
  for (std::size_t u = 0; u < dim; ++u) {
    std::vector<Rational> x(dim, Rational(0));
    x[u] = 1;
    polys.push_back(expand_condition(c, hermitian_from_coordinates(n, x)));
  }
  std::map<MonomialKey, bool> keys;
  for (const auto& p : polys)
    for (const auto& [k, v] : p.terms()) keys[k] = true;
  QMatrix rows;
  for (const auto& [key, unused] : keys) {
    const MonomialKey partner = key.swapped();
    if (partner < key && keys.count(partner)) continue;  // each pair once
    std::vector<Rational> re(dim), im(dim);
    for (std::size_t u = 0; u < dim; ++u) {
      const QComplex d = polys[u].coefficient(key) - polys[u].coefficient(partner).conj();
      re[u] = d.re;
      im[u] = d.im;
    }
    rows.push_back(std::move(re));
    rows.push_back(std::move(im));
  }
  return rows;
}

inline std::vector<Rational> combine(const std::vector<std::vector<Rational>>& basis, const std::vector<Rational>& coef,
                                     std::size_t dim) {
  std::vector<Rational> x(dim, Rational(0));
  for (std::size_t b = 0; b < basis.size(); ++b)
    if (coef[b] != 0)
      for (std::size_t u = 0; u < dim; ++u) x[u] += coef[b] * basis[b][u];
  return x;
}

// Extreme rays of {a in span(basis), a >= 0}, by zero-pattern enumeration.
inline std::vector<std::vector<Rational>> nonnegative_rays(const std::vector<std::vector<Rational>>& basis,
                                                           std::size_t n) {
  std::vector<std::vector<Rational>> rays;
  const std::size_t d = basis.size();
  if (d == 0) return rays;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    QMatrix rows;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::size_t{1} << i)) {
        std::vector<Rational> r(d);
        for (std::size_t b = 0; b < d; ++b) r[b] = basis[b][i];
        rows.push_back(std::move(r));
      }
    const auto ns = rows.empty() ? std::vector<std::vector<Rational>>{} : nullspace(rows, d);
    std::vector<std::vector<Rational>> cand;
    if (rows.empty()) {
      if (d != 1) continue;
      cand.push_back({Rational(1)});
    } else {
      if (ns.size() != 1) continue;
      cand = ns;
    }
    auto a = primitive_integer_vector(combine(basis, cand[0], n));
    bool pos = true, neg = true, nonzero = false;
    for (const auto& v : a) {
      if (v < 0) pos = false;
      if (v > 0) neg = false;
      if (v != 0) nonzero = true;
    }
    if (!nonzero || !(pos || neg)) continue;
    if (neg)
      for (auto& v : a) v = -v;
    if (std::find(rays.begin(), rays.end(), a) == rays.end()) rays.push_back(std::move(a));
  }
  return rays;
}

}  // namespace detail

/// Looks for a positive Hermitian A satisfying the condition: diagonal A first
/// (exactly, through the extreme rays of the nonnegative solution cone), then a
/// deterministic sample of the full Hermitian solution space.  none_found is
/// returned only with a certificate (trivial solution space or a diagonal entry
/// forced to zero); none_diagonal means the sample found nothing.
inline SearchResult structure_search(const CubicTensor& c, std::size_t samples = 20000, std::uint64_t seed = 7) {
  const std::size_t n = static_cast<std::size_t>(c.components());
  if (n > 4) throw Unsupported("structure_search: N > 4 is outside the search bound");
  const std::size_t dim = n * n;
  SearchResult res;
  if (c.is_zero()) {
    res.outcome = SearchOutcome::found;
    res.a = HermitianForm::identity(n);
    res.diagonal = true;
    res.certificate = "C = 0: every Hermitian A satisfies the condition";
    res.solution_dimension = dim;
    return res;
  }
  const QMatrix rows = detail::structure_constraints(c);
  const auto full = rows.empty() ? std::vector<std::vector<Rational>>{} : nullspace(rows, dim);
  res.solution_dimension = rows.empty() ? dim : full.size();

  // diagonal subspace: drop the off-diagonal columns
  QMatrix drows;
  for (const auto& r : rows) drows.emplace_back(r.begin(), r.begin() + static_cast<long>(n));
  std::vector<std::vector<Rational>> dbasis;
  if (drows.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Rational> e(n, Rational(0));
      e[i] = 1;
      dbasis.push_back(e);
    }
  } else {
    dbasis = nullspace(drows, n);
  }
  const auto rays = detail::nonnegative_rays(dbasis, n);
  std::vector<Rational> sum(n, Rational(0));
  for (const auto& r : rays)
    for (std::size_t i = 0; i < n; ++i) sum[i] += r[i];
  if (!rays.empty() && std::all_of(sum.begin(), sum.end(), [](const Rational& q) { return q > 0; })) {
    res.outcome = SearchOutcome::found;
    res.diagonal = true;
    res.a = HermitianForm::diagonal(primitive_integer_vector(sum));
    res.certificate = "positive diagonal solution (sum of " + std::to_string(rays.size()) +
                      " extreme rays of the nonnegative diagonal cone)";
    return res;
  }

  if (!rows.empty() && full.empty()) {
    res.outcome = SearchOutcome::none_found;
    res.certificate = "the constraints admit only A = 0";
    return res;
  }
  const auto& basis = rows.empty() ? std::vector<std::vector<Rational>>{} : full;
  for (std::size_t i = 0; i < n; ++i) {
    const bool forced = std::all_of(basis.begin(), basis.end(), [&](const auto& b) { return b[i] == 0; });
    if (forced) {
      res.outcome = SearchOutcome::none_found;
      res.certificate = "the constraints force A" + std::to_string(i + 1) + std::to_string(i + 1) +
                        " = 0, so no positive definite A exists";
      return res;
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coef(-4, 4);
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<Rational> w(basis.size());
    for (auto& q : w) q = coef(rng);
    auto x = detail::combine(basis, w, dim);
    auto form = detail::hermitian_from_coordinates(n, x);
    if (!form.is_positive_definite()) {
      for (auto& q : x) q = -q;
      form = detail::hermitian_from_coordinates(n, x);
    }
    if (form.is_positive_definite()) {
      res.outcome = SearchOutcome::found;
      res.a = form;
      res.certificate = "positive definite point of the Hermitian solution space (sample " + std::to_string(s) + ")";
      return res;
    }
  }
  res.outcome = SearchOutcome::none_diagonal;
  res.certificate = "no positive diagonal solution; " + std::to_string(samples) +
                    " samples of the Hermitian solution space found no definite A (inconclusive)";
  return res;
}

}  // namespace kgsys
