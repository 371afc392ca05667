#pragma once

// Factorization of the free group
//
//   F^{-1} e^{-it<xi>} phi = D_t M(t) B V(t) phi + D_t W(t) phi,
//
// with every factor implemented on its own as a callable so that the identity
// can be checked point by point, plus the rate probes for V - 1 and W and the
// Klainerman-Sobolev type bound.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgsys/fit.hpp"
#include "kgsys/grid.hpp"

namespace kgsys {

using ComplexFn = std::function<cplx(double)>;

/// Uniform samples with 4-point cubic (Lagrange) interpolation; zero outside the sampled range.
class SampledFunction {
 public:
  SampledFunction() = default;
  SampledFunction(double x0, double step, std::vector<cplx> values)
      : x0_(x0), h_(step), v_(std::move(values)) {
    if (!(step > 0.0)) throw PreconditionError("SampledFunction: step must be positive");
    if (v_.size() < 4) throw PreconditionError("SampledFunction: need at least 4 samples");
  }
  static SampledFunction from_function(const ComplexFn& f, double a, double b, std::size_t n) {
    if (n < 4 || !(b > a)) throw PreconditionError("SampledFunction: bad sampling range");
    const double h = (b - a) / static_cast<double>(n - 1);
    std::vector<cplx> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = f(a + h * static_cast<double>(i));
    return {a, h, std::move(v)};
  }

  double x0() const { return x0_; }
  double step() const { return h_; }
  double x_end() const { return x0_ + h_ * static_cast<double>(v_.size() - 1); }
  std::size_t size() const { return v_.size(); }
  double node(std::size_t i) const { return x0_ + h_ * static_cast<double>(i); }
  const std::vector<cplx>& values() const { return v_; }

  cplx operator()(double x) const {
    if (x < x0_ || x > x_end()) return {};
    const double s = (x - x0_) / h_;
    auto i = static_cast<long>(std::floor(s));
    const long last = static_cast<long>(v_.size()) - 1;
    i = std::clamp(i - 1, 0L, last - 3);  // stencil i .. i+3
    const double u = s - static_cast<double>(i);
    const double l0 = -(u - 1) * (u - 2) * (u - 3) / 6.0;
    const double l1 = u * (u - 2) * (u - 3) / 2.0;
    const double l2 = -u * (u - 1) * (u - 3) / 2.0;
    const double l3 = u * (u - 1) * (u - 2) / 6.0;
    const auto k = static_cast<std::size_t>(i);
    return l0 * v_[k] + l1 * v_[k + 1] + l2 * v_[k + 2] + l3 * v_[k + 3];
  }

  ComplexFn as_function() const {
    auto self = std::make_shared<SampledFunction>(*this);
    return [self](double x) { return (*self)(x); };
  }

 private:
  double x0_ = 0.0, h_ = 1.0;
  std::vector<cplx> v_;
};

/// D_w phi(x) = |w|^{-1/2} phi(x / w)
inline ComplexFn dilation(ComplexFn phi, double omega) {
  if (omega == 0.0) throw PreconditionError("dilation: omega must be nonzero");
  const double a = 1.0 / std::sqrt(std::abs(omega));
  return [phi = std::move(phi), omega, a](double x) { return a * phi(x / omega); };
}

/// Dilation of sampled data, resampled on the same nodes.
inline SampledFunction dilation(const SampledFunction& phi, double omega) {
  if (omega == 0.0) throw PreconditionError("dilation: omega must be nonzero");
  const double a = 1.0 / std::sqrt(std::abs(omega));
  std::vector<cplx> v(phi.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * phi(phi.node(i) / omega);
  return {phi.x0(), phi.step(), std::move(v)};
}

/// M(t, x) = e^{-it sqrt(1 - x^2)} on |x| < 1, and 1 elsewhere.
inline cplx mod_factor(double t, double x) {
  if (std::abs(x) >= 1.0) return {1.0, 0.0};
  return std::polar(1.0, -t * std::sqrt(1.0 - x * x));
}

/// B phi(x) = e^{-i pi/4} (1 - x^2)^{-3/4} phi(x / sqrt(1 - x^2)) on |x| < 1, zero elsewhere.
inline ComplexFn apply_B(ComplexFn phi) {
  return [phi = std::move(phi)](double x) -> cplx {
    if (std::abs(x) >= 1.0) return {};
    const double s = std::sqrt(1.0 - x * x);
    return std::polar(1.0, -std::numbers::pi / 4) * std::pow(s, -1.5) * phi(x / s);
  };
}

/// B^{-1} psi(xi) = e^{i pi/4} <xi>^{-3/2} psi(xi / <xi>)
inline ComplexFn apply_Binv(ComplexFn psi) {
  return [psi = std::move(psi)](double xi) -> cplx {
    const double b = japanese(xi);
    return std::polar(1.0, std::numbers::pi / 4) * std::pow(b, -1.5) * psi(xi / b);
  };
}

/// Trapezoid nodes for g(x) = (2 pi)^{-1/2} int e^{ix xi - it<xi>} phi^(xi) d xi over [-xi_max, xi_max).
struct QuadratureSpec {
  std::size_t nodes = 0;
  double xi_max = 0.0;
  std::string method = "trapezoid";

  double step() const { return 2.0 * xi_max / static_cast<double>(nodes); }

  /// Nodes needed so that the phase advances by at most pi/4 per node at reach |x| + t.
  std::size_t required_nodes(double reach) const {
    return static_cast<std::size_t>(std::ceil(2.0 * xi_max * reach / (std::numbers::pi / 4)));
  }
  /// Enough nodes for an increment of pi/8 at the given reach, and at least min_nodes.
  static QuadratureSpec resolving(double xi_max, double reach, std::size_t min_nodes = 0) {
    QuadratureSpec q;
    q.xi_max = xi_max;
    q.nodes = std::max<std::size_t>(
        min_nodes, static_cast<std::size_t>(std::ceil(2.0 * xi_max * reach / (std::numbers::pi / 8))));
    return q;
  }
  /// The nodes of a spectral grid.
  static QuadratureSpec for_grid(const SpectralGrid& g) {
    QuadratureSpec q;
    q.nodes = g.size();
    q.xi_max = g.xi_max();
    return q;
  }
  void validate(std::size_t min_nodes = 0) const {
    if (method != "trapezoid") throw Unsupported("QuadratureSpec: only the trapezoid method is implemented");
    if (!(xi_max > 0.0) || nodes == 0) throw PreconditionError("QuadratureSpec: empty node set");
    if (nodes < min_nodes)
      throw PreconditionError("QuadratureSpec: node count below the grid size " + std::to_string(min_nodes));
  }
};

/// Spectral samples in FFTW order as an interpolable function of xi (zero outside the grid).
inline SampledFunction spectrum_function(const SpectralGrid& g, const cvec& hat) {
  if (hat.size() != g.size()) throw DimensionMismatch("spectrum_function: length != grid size");
  std::vector<cplx> ordered(g.size());
  const std::size_t half = g.size() / 2;
  for (std::size_t k = 0; k < g.size(); ++k) ordered[k] = hat[(k + half) % g.size()];
  return {-g.xi_max(), g.dxi(), std::move(ordered)};
}

/// g(x) = (F^{-1} e^{-it<xi>} phi^)(x) at arbitrary x by direct trapezoid quadrature.
class FreeWaveEvaluator {
 public:
  FreeWaveEvaluator(const ComplexFn& phi_hat, double t, QuadratureSpec spec) : t_(t), spec_(std::move(spec)) {
    spec_.validate();
    const double h = spec_.step();
    xi_.resize(spec_.nodes);
    w_.resize(spec_.nodes);
    for (std::size_t k = 0; k < spec_.nodes; ++k) {
      xi_[k] = -spec_.xi_max + h * static_cast<double>(k);
      w_[k] = h / std::sqrt(2.0 * std::numbers::pi) * std::polar(1.0, -t * japanese(xi_[k])) * phi_hat(xi_[k]);
    }
  }

  /// Spectral samples living on a SpectralGrid (FFTW order); refine > 1 interpolates
  /// the spectrum onto refine * n nodes to reach further in x.
  static FreeWaveEvaluator on_grid(const SpectralGrid& g, const cvec& hat, double t, std::size_t refine = 1) {
    if (hat.size() != g.size()) throw DimensionMismatch("FreeWaveEvaluator: spectrum length != grid size");
    if (refine == 0) throw PreconditionError("FreeWaveEvaluator: refine must be >= 1");
    const SampledFunction s = spectrum_function(g, hat);
    QuadratureSpec q = QuadratureSpec::for_grid(g);
    q.nodes *= refine;
    q.validate(g.size());
    return FreeWaveEvaluator(s.as_function(), t, q);
  }

  double time() const { return t_; }
  const QuadratureSpec& spec() const { return spec_; }

  cplx operator()(double x) const {
    const double reach = std::abs(x) + std::abs(t_);
    if (spec_.step() * reach > std::numbers::pi / 4)
      throw QuadratureResolution(spec_.required_nodes(reach),
                                 "oscillatory quadrature under-resolved at x = " + std::to_string(x) +
                                     ", t = " + std::to_string(t_));
    // e^{i x xi_k} by recurrence from the first node
    const cplx rot = std::polar(1.0, x * spec_.step());
    cplx e = std::polar(1.0, x * xi_.front());
    cplx acc{};
    for (std::size_t k = 0; k < w_.size(); ++k) {
      acc += e * w_[k];
      e *= rot;
      if ((k & 255U) == 255U) e = std::polar(1.0, x * xi_[std::min(k + 1, xi_.size() - 1)]);
    }
    return acc;
  }

  ComplexFn as_function() const {
    auto self = std::make_shared<FreeWaveEvaluator>(*this);
    return [self](double x) { return (*self)(x); };
  }

 private:
  double t_;
  QuadratureSpec spec_;
  std::vector<double> xi_;
  std::vector<cplx> w_;
};

inline double theta(double x) { return std::abs(x) < 1.0 ? 1.0 : 0.0; }

/// V(t) phi = B^{-1} conj(M(t)) D_t^{-1} g, a function of xi.
inline ComplexFn apply_V(const FreeWaveEvaluator& g) {
  const double t = g.time();
  if (t < 1.0) throw PreconditionError("apply_V: t must be >= 1");
  ComplexFn dg = dilation(g.as_function(), 1.0 / t);
  ComplexFn inner = [dg, t](double y) { return std::conj(mod_factor(t, y)) * dg(y); };
  return apply_Binv(std::move(inner));
}

/// W(t) phi = (1 - theta) D_t^{-1} g, a function of y.
inline ComplexFn apply_W(const FreeWaveEvaluator& g) {
  const double t = g.time();
  if (t < 1.0) throw PreconditionError("apply_W: t must be >= 1");
  ComplexFn dg = dilation(g.as_function(), 1.0 / t);
  return [dg](double y) { return (1.0 - theta(y)) * dg(y); };
}

struct IdentityCheck {
  double t = 0.0;
  double residual = 0.0;  // sup |lhs - g| over the targets
  double scale = 0.0;     // sup |g|
  std::size_t points = 0;
};

/// D_t M(t) B V(t) phi + D_t W(t) phi against g at the given x.
inline IdentityCheck decomposition_identity(const FreeWaveEvaluator& g, const std::vector<double>& xs) {
  const double t = g.time();
  ComplexFn bv = apply_B(apply_V(g));
  ComplexFn w = apply_W(g);
  ComplexFn mbv = [bv, t](double y) { return mod_factor(t, y) * bv(y); };
  ComplexFn lhs_inner = [mbv, w](double y) { return mbv(y) + w(y); };
  ComplexFn lhs = dilation(lhs_inner, t);
  IdentityCheck r;
  r.t = t;
  r.points = xs.size();
  for (double x : xs) {
    const cplx ref = g(x);
    r.scale = std::max(r.scale, std::abs(ref));
    r.residual = std::max(r.residual, std::abs(lhs(x) - ref));
  }
  return r;
}

/// Quadrature that resolves |x| <= reach_factor * t.
inline QuadratureSpec lemma1_quadrature(double t, double reach_factor = 2.0, double xi_max = 12.0) {
  auto q = QuadratureSpec::resolving(xi_max, reach_factor * t + t + 80.0);
  q.nodes = std::max<std::size_t>(q.nodes, static_cast<std::size_t>(2.0 * xi_max / 0.01));
  return q;
}

/// sup over |xi| <= xi_eval of <xi>^{3/2} |V(t) phi - phi|.
inline double lemma1_v_error(const ComplexFn& phi_hat, double t, double xi_eval = 6.0, std::size_t points = 1201) {
  FreeWaveEvaluator g(phi_hat, t, lemma1_quadrature(t));
  ComplexFn v = apply_V(g);
  double sup = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double xi = -xi_eval + 2.0 * xi_eval * static_cast<double>(i) / static_cast<double>(points - 1);
    sup = std::max(sup, std::pow(japanese(xi), 1.5) * std::abs(v(xi) - phi_hat(xi)));
  }
  return sup;
}

/// ||W(t) phi||_{L^2} = ||g||_{L^2(|x| > t)}, integrated over t < |x| < t + tail.
inline double lemma1_w_norm(const ComplexFn& phi_hat, double t, double tail = 60.0, std::size_t points = 3000) {
  FreeWaveEvaluator g(phi_hat, t, lemma1_quadrature(t));
  ComplexFn w = apply_W(g);
  // in y = x / t the region is 1 < |y| < 1 + tail / t
  const double h = tail / t / static_cast<double>(points - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double y = 1.0 + 1e-12 + h * static_cast<double>(i);
    const double wt = (i == 0 || i + 1 == points) ? 0.5 : 1.0;
    acc += wt * (std::norm(w(y)) + std::norm(w(-y)));
  }
  return std::sqrt(acc * h);
}

struct RateFit {
  std::string estimate_name;
  double slope = 0.0;
  double intercept = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  double pass_threshold = 0.0;
  bool pass = false;
  std::vector<double> times, values;

  nlohmann::json to_json() const {
    return {{"estimate_name", estimate_name}, {"slope", slope},      {"intercept", intercept},
            {"window", {window_lo, window_hi}}, {"pass_threshold", pass_threshold}, {"pass", pass},
            {"times", times},                 {"values", values}};
  }
};

/// Fits a probe over the times in [lo, hi]; passes when slope <= threshold.
inline RateFit fit_rate(const std::string& name, const std::vector<double>& ts, const std::function<double(double)>& probe,
                        double lo, double hi, double threshold) {
  RateFit r;
  r.estimate_name = name;
  r.window_lo = lo;
  r.window_hi = hi;
  r.pass_threshold = threshold;
  for (double t : ts) {
    r.times.push_back(t);
    r.values.push_back(probe(t));
  }
  std::vector<double> ft, fv;
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts[i] >= lo && ts[i] <= hi) {
      ft.push_back(r.times[i]);
      fv.push_back(r.values[i]);
    }
  const auto p = loglog_fit(ft, fv);
  r.slope = p.slope;
  r.intercept = p.intercept;
  r.pass = r.slope <= threshold;
  return r;
}

struct KlainermanSobolev {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

/// ||phi||_inf against <t>^{-1/2} ||phi||_{H^{3/2}}^{1/2} (||phi||_{H^{3/2}}^{1/2} + ||J phi||_{H^{1/2}}^{1/2}), C = 1.
inline KlainermanSobolev klainerman_sobolev_check(const VectorField& phi, double t, Warnings* warnings = nullptr) {
  const VectorField p = to_physical(phi);
  KlainermanSobolev k;
  k.lhs = norm(p, NormSpec::sup());
  const double a = std::sqrt(norm(p, NormSpec::sobolev(1.5)));
  const double b = std::sqrt(norm(apply_J(p, t, warnings), NormSpec::sobolev(0.5)));
  k.rhs = a * (a + b) / std::sqrt(japanese(t));
  k.ratio = k.rhs > 0.0 ? k.lhs / k.rhs : 0.0;
  return k;
}

}  // namespace kgsys
