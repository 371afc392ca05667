#pragma once

// Large-time factorization of the nonlinear term and the profile equations.
//
// For v = e^{-it<i d_x>} phi the weighted nonlinearity e^{it<xi>} <xi> G^(v)
// splits into eight cubic interactions (conjugation pattern alpha, output
// frequency omega), a main term of size 1/t, and a faster remainder.  With
// psi = <xi>^kappa e^{it<xi>} v^ the omega = 1 interactions are local in xi and
// give the resonant ODE; the others oscillate with phase b(xi) and form S.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgsys/decomposition.hpp"
#include "kgsys/evolution.hpp"
#include "kgsys/fit.hpp"
#include "kgsys/nonlinearity.hpp"
#include "kgsys/structure.hpp"

namespace kgsys {

/// Constants of the eight interaction rows.
///
/// stationary_phase: mu = e^{-i pi (omega - sgn omega) / 4} / 2, the constants the
/// stationary-phase expansion actually produces (the Hessian changes sign with omega).
/// unsigned_hessian: mu = -e^{-i pi s / 2} / 2 with s = (omega + 3) / 2 ... as if the
/// Hessian were always positive; it leaves an O(1/t) remainder for omega < 0 and is
/// kept only for comparison.
enum class MuConvention { stationary_phase, unsigned_hessian };

struct InteractionRow {
  int nu;                   // 1..8
  std::array<int, 3> alpha; // 1: factor phi^, 0: factor conj(phi^)
  int omega;                // 2 |alpha| - 3
  cplx mu;
  bool resonant() const { return omega == 1; }
};

inline const std::array<InteractionRow, 8>& interaction_rows(MuConvention c = MuConvention::stationary_phase) {
  const cplx half(0.5, 0.0), ihalf(0.0, 0.5);
  static const std::array<InteractionRow, 8> sp{{
      {1, {1, 1, 1}, 3, -ihalf},
      {2, {1, 1, 0}, 1, half},
      {3, {1, 0, 1}, 1, half},
      {4, {1, 0, 0}, -1, half},
      {5, {0, 1, 1}, 1, half},
      {6, {0, 1, 0}, -1, half},
      {7, {0, 0, 1}, -1, half},
      {8, {0, 0, 0}, -3, ihalf},
  }};
  static const std::array<InteractionRow, 8> uh{{
      {1, {1, 1, 1}, 3, -ihalf},
      {2, {1, 1, 0}, 1, half},
      {3, {1, 0, 1}, 1, half},
      {4, {1, 0, 0}, -1, ihalf},
      {5, {0, 1, 1}, 1, half},
      {6, {0, 1, 0}, -1, ihalf},
      {7, {0, 0, 1}, -1, ihalf},
      {8, {0, 0, 0}, -3, -half},
  }};
  return c == MuConvention::stationary_phase ? sp : uh;
}

/// a_{nu,kappa}(xi) = <xi>^{kappa-1} <xi/omega>^{3-3kappa}
inline double phase_a(int omega, double kappa, double xi) {
  const double w = static_cast<double>(omega);
  return std::pow(japanese(xi), kappa - 1.0) * std::pow(japanese(xi / w), 3.0 - 3.0 * kappa);
}

/// b_nu(xi) = omega <xi/omega> - <xi>
inline double phase_b(int omega, double xi) {
  const double w = static_cast<double>(omega);
  return w * japanese(xi / w) - japanese(xi);
}

struct PhaseBound {
  int nu = 0;
  int omega = 0;
  double min_b_bracket = 0.0;  // min |b(xi)| <xi>
  double sup_a_over_b = 0.0;   // sup |a / b|
  double argsup = 0.0;         // xi attaining the sup
};

/// Bounds over |xi| <= xi_max on a uniform grid, for the non-resonant rows.
inline std::vector<PhaseBound> phase_bounds(double kappa, double xi_max = 32.0, std::size_t points = 200001) {
  std::vector<PhaseBound> out;
  for (const auto& r : interaction_rows()) {
    if (r.resonant()) continue;
    PhaseBound p;
    p.nu = r.nu;
    p.omega = r.omega;
    p.min_b_bracket = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points; ++i) {
      const double xi = -xi_max + 2.0 * xi_max * static_cast<double>(i) / static_cast<double>(points - 1);
      const double b = phase_b(r.omega, xi);
      p.min_b_bracket = std::min(p.min_b_bracket, std::abs(b) * japanese(xi));
      const double q = std::abs(phase_a(r.omega, kappa, xi) / b);
      if (q > p.sup_a_over_b) {
        p.sup_a_over_b = q;
        p.argsup = xi;
      }
    }
    out.push_back(p);
  }
  return out;
}

namespace detail {

// Cubic Lagrange stencil (FFTW-order indices) reading a spectrum at xi / omega,
// the same scheme as SampledFunction on the ordered xi nodes.
struct Stencil {
  std::vector<std::array<std::size_t, 4>> index;
  std::vector<std::array<double, 4>> weight;
  std::vector<char> inside;

  Stencil(const SpectralGrid& g, double omega) {
    const std::size_t n = g.size(), half = n / 2;
    index.resize(n);
    weight.resize(n);
    inside.assign(n, 0);
    const double x0 = -g.xi_max(), h = g.dxi(), x_end = x0 + h * static_cast<double>(n - 1);
    const long last = static_cast<long>(n) - 1;
    for (std::size_t k = 0; k < n; ++k) {
      const double z = g.xi()[k] / omega;
      if (z < x0 || z > x_end) continue;
      const double s = (z - x0) / h;
      const long i = std::clamp(static_cast<long>(std::floor(s)) - 1, 0L, last - 3);
      const double u = s - static_cast<double>(i);
      weight[k] = {-(u - 1) * (u - 2) * (u - 3) / 6.0, u * (u - 2) * (u - 3) / 2.0, -u * (u - 1) * (u - 3) / 2.0,
                   u * (u - 1) * (u - 2) / 6.0};
      for (std::size_t q = 0; q < 4; ++q) index[k][q] = (static_cast<std::size_t>(i) + q + half) % n;
      inside[k] = 1;
    }
  }
  cplx operator()(const cvec& hat, std::size_t k) const {
    const auto& i = index[k];
    const auto& w = weight[k];
    return w[0] * hat[i[0]] + w[1] * hat[i[1]] + w[2] * hat[i[2]] + w[3] * hat[i[3]];
  }
};

struct Term {
  std::size_t k, l, m;
  double value;
};

inline std::vector<std::vector<Term>> terms_by_output(const CubicTensor& c) {
  std::vector<std::vector<Term>> out(static_cast<std::size_t>(c.components()));
  for (const auto& e : c.entries())
    out[static_cast<std::size_t>(e.index[0])].push_back({static_cast<std::size_t>(e.index[1]),
                                                         static_cast<std::size_t>(e.index[2]),
                                                         static_cast<std::size_t>(e.index[3]), e.value.get_d()});
  return out;
}

inline void require_spectra(const SpectralGrid& g, const CubicTensor& c, const std::vector<cvec>& hat) {
  if (hat.size() != static_cast<std::size_t>(c.components()))
    throw DimensionMismatch("profile: tensor and spectrum have different component counts");
  for (const auto& h : hat)
    if (h.size() != g.size()) throw DimensionMismatch("profile: spectrum length != grid size");
}

// sum_{entries j k l m} C_{jklm} prod_lambda f_lambda(xi_k / omega), f = hat or conj(hat) as alpha dictates,
// for every output component j at once.
inline void row_products(const Stencil& st, const InteractionRow& row, const std::vector<std::vector<Term>>& terms,
                         const std::vector<cvec>& hat, std::size_t k, std::vector<cplx>& at, std::vector<cplx>& out) {
  for (std::size_t q = 0; q < hat.size(); ++q) at[q] = st(hat[q], k);
  auto f = [&](std::size_t q, int s) { return row.alpha[static_cast<std::size_t>(s)] ? at[q] : std::conj(at[q]); };
  for (std::size_t j = 0; j < terms.size(); ++j) {
    cplx acc{};
    for (const auto& t : terms[j]) acc += t.value * f(t.k, 0) * f(t.l, 1) * f(t.m, 2);
    out[j] = acc;
  }
}

}  // namespace detail

/// <xi>^{kappa-1} times the main term
///   i t^{-1} e^{it<xi>} sum_nu mu_nu |omega|^{-1/2} e^{-it omega <xi/omega>} <xi/omega>^3 prod(...)(xi/omega)
/// for every component, with phi^ given on the spectral grid.
inline std::vector<cvec> lemma3_main_terms(const SpectralGrid& g, const CubicTensor& c,
                                           const std::vector<cvec>& phi_hat, double t, double kappa = 1.0,
                                           MuConvention conv = MuConvention::stationary_phase) {
  if (t < 1.0) throw PreconditionError("lemma3_main_term: t must be >= 1");
  detail::require_spectra(g, c, phi_hat);
  const std::size_t n = g.size(), comps = phi_hat.size();
  const auto terms = detail::terms_by_output(c);
  std::vector<cvec> out(comps, cvec(n));
  std::vector<cplx> at(comps), prod(comps);
  for (const auto& row : interaction_rows(conv)) {
    const double w = static_cast<double>(row.omega);
    const detail::Stencil st(g, w);
    for (std::size_t k = 0; k < n; ++k) {
      if (!st.inside[k]) continue;
      const double xi = g.xi()[k], bz = japanese(xi / w);
      const cplx coef = cplx(0.0, 1.0 / t) * std::polar(1.0, t * japanese(xi) - t * w * bz) * row.mu /
                        std::sqrt(std::abs(w)) * bz * bz * bz * std::pow(japanese(xi), kappa - 1.0);
      detail::row_products(st, row, terms, phi_hat, k, at, prod);
      for (std::size_t j = 0; j < comps; ++j) out[j][k] += coef * prod[j];
    }
  }
  return out;
}

inline cvec lemma3_main_term(const SpectralGrid& g, const CubicTensor& c, const std::vector<cvec>& phi_hat, double t,
                             std::size_t j, double kappa = 1.0, MuConvention conv = MuConvention::stationary_phase) {
  if (j >= phi_hat.size()) throw DimensionMismatch("lemma3_main_term: component out of range");
  return lemma3_main_terms(g, c, phi_hat, t, kappa, conv)[j];
}

/// e^{it<xi>} <xi> G_j^(e^{-it<i d_x>} phi) on the spectral grid (dealiased).
inline cvec weighted_nonlinearity(const SpectralGrid& g, CubicKernel& kernel, const std::vector<cvec>& phi_hat,
                                  double t, std::size_t j) {
  const std::size_t n = g.size();
  std::vector<cvec> v(phi_hat.size(), cvec(n)), gv;
  const auto& br = g.bracket();
  for (std::size_t q = 0; q < phi_hat.size(); ++q)
    for (std::size_t k = 0; k < n; ++k) v[q][k] = std::polar(1.0, -t * br[k]) * phi_hat[q][k];
  kernel.apply_G(v, gv);
  cvec out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = std::polar(1.0, t * br[k]) * br[k] * gv[j][k];
  return out;
}

struct RemainderProbe {
  std::vector<double> times;
  std::vector<double> sup_remainder;  // sup_xi |R_j(t)|
  std::vector<double> sup_main;       // sup_xi |main term|
  double slope = 0.0;
  double intercept = 0.0;
  bool vanishes = false;  // the component's nonlinearity is identically zero on this data: no fit

  nlohmann::json to_json() const {
    return {{"times", times}, {"sup_remainder", sup_remainder}, {"sup_main", sup_main}, {"slope", slope},
            {"intercept", intercept}, {"vanishes", vanishes}};
  }
};

/// sup_xi |R_j(t)| with R_j = e^{it<xi>} <xi> G_j^ - main term, and its log-log slope over t_list.
inline RemainderProbe lemma3_remainder_probe(const VectorField& phi, const CubicTensor& c,
                                             const std::vector<double>& t_list, std::size_t j,
                                             MuConvention conv = MuConvention::stationary_phase,
                                             Warnings* warnings = nullptr) {
  const VectorField hat = to_spectral(phi);
  const SpectralGrid& g = hat.grid();
  detail::require_spectra(g, c, hat.data());
  if (j >= hat.components()) throw DimensionMismatch("lemma3_remainder_probe: component out of range");
  CubicKernel kernel(hat.grid_ptr(), c);
  RemainderProbe p;
  for (double t : t_list) {
    if (t < 1.0) throw PreconditionError("lemma3_remainder_probe: t must be >= 1");
    check_support(free_evolve(hat, t), "lemma3_remainder_probe(t = " + std::to_string(t) + ")", warnings);
    const cvec lhs = weighted_nonlinearity(g, kernel, hat.data(), t, j);
    const cvec main = lemma3_main_term(g, c, hat.data(), t, j, 1.0, conv);
    double r = 0.0, m = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      r = std::max(r, std::abs(lhs[k] - main[k]));
      m = std::max(m, std::abs(main[k]));
    }
    p.times.push_back(t);
    p.sup_remainder.push_back(r);
    p.sup_main.push_back(m);
  }
  p.vanishes = std::all_of(p.sup_remainder.begin(), p.sup_remainder.end(), [](double r) { return r == 0.0; });
  if (p.vanishes || p.times.size() < 2) return p;
  const auto f = loglog_fit(p.times, p.sup_remainder);
  p.slope = f.slope;
  p.intercept = f.intercept;
  return p;
}

/// psi(t, xi) on the spectral grid, with its weight kappa.
struct ProfileState {
  GridPtr grid;
  double kappa = 2.5;
  double t = 1.0;
  std::vector<cvec> psi;  // FFTW order

  void validate() const {
    if (!grid) throw PreconditionError("ProfileState: missing grid");
    if (!(kappa >= 1.5 && kappa <= 4.0)) throw PreconditionError("ProfileState: kappa must lie in [3/2, 4]");
    if (t < 1.0) throw PreconditionError("ProfileState: t must be >= 1");
    for (const auto& c : psi) {
      if (c.size() != grid->size()) throw DimensionMismatch("ProfileState: length != grid size");
      for (auto z : c)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw PreconditionError("ProfileState: non-finite");
    }
  }
  double sup() const {
    double m = 0.0;
    for (const auto& c : psi)
      for (auto z : c) m = std::max(m, std::abs(z));
    return m;
  }
  /// phi^ = <xi>^{-kappa} psi
  std::vector<cvec> phi_hat() const {
    std::vector<cvec> out = psi;
    const auto& br = grid->bracket();
    for (auto& c : out)
      for (std::size_t k = 0; k < c.size(); ++k) c[k] *= std::pow(br[k], -kappa);
    return out;
  }
};

/// psi_j = <xi>^kappa e^{it<xi>} v^_j at a snapshot time t >= 1.
inline ProfileState extract_psi(const SolutionTrajectory& traj, double t, double kappa) {
  if (t < 1.0) throw PreconditionError("extract_psi: t must be >= 1");
  if (!(kappa >= 1.5 && kappa <= 4.0)) throw PreconditionError("extract_psi: kappa must lie in [3/2, 4]");
  const VectorField v = to_spectral(traj.v_at(t));
  ProfileState s;
  s.grid = traj.grid_ptr();
  s.kappa = kappa;
  s.t = t;
  s.psi = v.data();
  const auto& br = s.grid->bracket();
  for (auto& c : s.psi)
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= std::pow(br[k], kappa) * std::polar(1.0, t * br[k]);
  return s;
}

/// (i/2) t^{-1} <xi>^{2-2kappa} F~(psi) at one frequency.
inline std::vector<cplx> resonant_rhs(const CubicTensor& c, const std::vector<cplx>& psi, double t, double xi,
                                      double kappa) {
  if (t < 1.0) throw PreconditionError("resonant_rhs: t must be >= 1");
  auto f = eval_Ftilde(c, psi);
  const cplx s = cplx(0.0, 0.5 / t) * std::pow(japanese(xi), 2.0 - 2.0 * kappa);
  for (auto& z : f) z *= s;
  return f;
}

/// Resonant right-hand side on the whole grid.
inline std::vector<cvec> resonant_rhs(const CubicTensor& c, const ProfileState& s) {
  const std::size_t n = s.grid->size(), comps = s.psi.size();
  std::vector<cvec> out(comps, cvec(n));
  std::vector<cplx> p(comps);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t q = 0; q < comps; ++q) p[q] = s.psi[q][k];
    const auto r = resonant_rhs(c, p, s.t, s.grid->xi()[k], s.kappa);
    for (std::size_t q = 0; q < comps; ++q) out[q][k] = r[q];
  }
  return out;
}

/// S_j = i t^{-1} sum_{nu non-resonant} C^nu_{jklm} a_{nu,kappa}(xi) e^{-it b_nu(xi)} prod(psi factors)(xi/omega),
/// with C^nu_{jklm} = mu_nu C_{jklm} |omega_nu|^{-1/2}.  The time-independent parts are built once.
class NonresonantOperator {
 public:
  NonresonantOperator(GridPtr grid, const CubicTensor& c, double kappa,
                      MuConvention conv = MuConvention::stationary_phase)
      : grid_(std::move(grid)), terms_(detail::terms_by_output(c)), comps_(static_cast<std::size_t>(c.components())) {
    const auto& xi = grid_->xi();
    for (const auto& r : interaction_rows(conv)) {
      if (r.resonant()) continue;
      Row row{r, detail::Stencil(*grid_, r.omega), cvec(xi.size()), std::vector<double>(xi.size())};
      for (std::size_t k = 0; k < xi.size(); ++k) {
        row.coef[k] = cplx(0.0, 1.0) * r.mu / std::sqrt(std::abs(static_cast<double>(r.omega))) *
                      phase_a(r.omega, kappa, xi[k]);
        row.b[k] = phase_b(r.omega, xi[k]);
        max_b_ = std::max(max_b_, std::abs(row.b[k]));
      }
      rows_.push_back(std::move(row));
    }
  }

  double max_abs_b() const { return max_b_; }

  /// out += S(psi, t)
  void accumulate(const std::vector<cvec>& psi, double t, std::vector<cvec>& out) const {
    const std::size_t n = grid_->size();
    double sup = 0.0;
    for (const auto& c : psi)
      for (auto z : c) sup = std::max(sup, std::abs(z));
    const double floor = 1e-12 * sup;  // products below 1e-36 sup^3 are dropped
    std::vector<cplx> at(comps_), prod(comps_);
    for (const auto& row : rows_)
      for (std::size_t k = 0; k < n; ++k) {
        if (!row.stencil.inside[k]) continue;
        double m = 0.0;
        for (std::size_t q = 0; q < comps_; ++q) m = std::max(m, std::abs(row.stencil(psi[q], k)));
        if (m <= floor) continue;
        detail::row_products(row.stencil, row.r, terms_, psi, k, at, prod);
        const cplx s = row.coef[k] / t * std::polar(1.0, -t * row.b[k]);
        for (std::size_t j = 0; j < comps_; ++j) out[j][k] += s * prod[j];
      }
  }

 private:
  struct Row {
    InteractionRow r;
    detail::Stencil stencil;
    cvec coef;
    std::vector<double> b;
  };
  GridPtr grid_;
  std::vector<std::vector<detail::Term>> terms_;
  std::size_t comps_;
  std::vector<Row> rows_;
  double max_b_ = 0.0;
};

inline std::vector<cvec> nonresonant_rhs(const CubicTensor& c, const ProfileState& s,
                                         MuConvention conv = MuConvention::stationary_phase) {
  s.validate();
  detail::require_spectra(*s.grid, c, s.psi);
  std::vector<cvec> out(s.psi.size(), cvec(s.grid->size()));
  NonresonantOperator(s.grid, c, s.kappa, conv).accumulate(s.psi, s.t, out);
  return out;
}

/// Full main term in profile form: <xi>^{kappa-1} main(<xi>^{-kappa} psi).
inline std::vector<cvec> profile_main_term(const CubicTensor& c, const ProfileState& s,
                                           MuConvention conv = MuConvention::stationary_phase) {
  return lemma3_main_terms(*s.grid, c, s.phi_hat(), s.t, s.kappa, conv);
}

struct ProfileOdeOptions {
  bool include_nonresonant = false;
  double log_step = 1e-3;        // dt = log_step * t
  double max_phase_step = 0.2;   // with S: dt * max|b| bounded by this
  std::size_t max_rejections = 60;
};

struct ProfileTrajectory {
  std::vector<ProfileState> states;  // at the requested output times
  std::size_t steps = 0;
  std::size_t rejected = 0;
};

/// RK4 in t for d psi / dt = resonant (+ S).  A step is rejected and the step
/// halved whenever ||d psi||_inf > 0.1 ||psi||_inf.
inline ProfileTrajectory integrate_profile_ode(const CubicTensor& c, const ProfileState& psi0,
                                               const std::vector<double>& output_times,
                                               const ProfileOdeOptions& opt = {}) {
  psi0.validate();
  detail::require_spectra(*psi0.grid, c, psi0.psi);
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    if (output_times[i] < psi0.t) throw PreconditionError("integrate_profile_ode: output time before the start");
    if (i > 0 && output_times[i] <= output_times[i - 1])
      throw PreconditionError("integrate_profile_ode: output times must increase");
  }
  std::optional<NonresonantOperator> sop;
  if (opt.include_nonresonant) sop.emplace(psi0.grid, c, psi0.kappa);
  auto cap = [&](double t) {
    double h = opt.log_step * t;
    if (sop && sop->max_abs_b() > 0.0) h = std::min(h, opt.max_phase_step / sop->max_abs_b());
    return h;
  };
  auto rhs = [&](const ProfileState& s) {
    auto r = resonant_rhs(c, s);
    if (sop) sop->accumulate(s.psi, s.t, r);
    return r;
  };
  auto axpy = [](const ProfileState& s, double h, const std::vector<cvec>& k, double t) {
    ProfileState o = s;
    o.t = t;
    for (std::size_t q = 0; q < o.psi.size(); ++q)
      for (std::size_t m = 0; m < o.psi[q].size(); ++m) o.psi[q][m] += h * k[q][m];
    return o;
  };

  ProfileTrajectory out;
  ProfileState s = psi0;
  std::size_t next = 0;
  while (next < output_times.size() && output_times[next] <= s.t) out.states.push_back(s), ++next;
  std::size_t rejections_in_row = 0;
  double dt = cap(s.t);
  while (next < output_times.size()) {
    dt = std::min(dt, cap(s.t));
    const double target = output_times[next];
    const bool land = s.t + dt >= target;
    const double h = land ? target - s.t : dt;
    const double t0 = s.t;
    const auto k1 = rhs(s);
    const auto k2 = rhs(axpy(s, 0.5 * h, k1, t0 + 0.5 * h));
    const auto k3 = rhs(axpy(s, 0.5 * h, k2, t0 + 0.5 * h));
    const auto k4 = rhs(axpy(s, h, k3, t0 + h));
    ProfileState n = s;
    n.t = land ? target : t0 + h;
    double dmax = 0.0;
    for (std::size_t q = 0; q < n.psi.size(); ++q)
      for (std::size_t m = 0; m < n.psi[q].size(); ++m) {
        const cplx d = h / 6.0 * (k1[q][m] + 2.0 * k2[q][m] + 2.0 * k3[q][m] + k4[q][m]);
        n.psi[q][m] += d;
        dmax = std::max(dmax, std::abs(d));
      }
    if (dmax > 0.1 * s.sup() && dmax > 0.0) {
      ++out.rejected;
      if (++rejections_in_row > opt.max_rejections)
        throw NumericalBlowUp(s.t, "profile ODE step rejected " + std::to_string(rejections_in_row) + " times");
      dt = 0.5 * h;
      continue;
    }
    rejections_in_row = 0;
    ++out.steps;
    s = std::move(n);
    dt = std::min(1.25 * dt, cap(s.t));
    for (const auto& comp : s.psi)
      for (auto z : comp)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw NumericalBlowUp(s.t, "profile ODE");
    if (land) {
      out.states.push_back(s);
      ++next;
    }
  }
  return out;
}

/// psi . A psi pointwise in xi, checked against c_* |psi|^2 <= psi . A psi <= c^* |psi|^2.
inline std::vector<double> lyapunov(const ProfileState& s, const HermitianForm& a) {
  a.validate();
  if (a.dimension() != s.psi.size()) throw DimensionMismatch("lyapunov: A and psi have different dimensions");
  const auto [lo, hi] = a.eigen_bounds();
  const std::size_t n = s.grid->size();
  std::vector<double> out(n);
  std::vector<cplx> y(s.psi.size());
  for (std::size_t k = 0; k < n; ++k) {
    double mod2 = 0.0;
    for (std::size_t q = 0; q < y.size(); ++q) {
      y[q] = s.psi[q][k];
      mod2 += std::norm(y[q]);
    }
    out[k] = a.quadratic(y);
    const double tol = 1e-12 * hi * mod2;
    if (out[k] < lo * mod2 - tol || out[k] > hi * mod2 + tol)
      throw Error("lyapunov: eigenvalue sandwich violated at xi = " + std::to_string(s.grid->xi()[k]));
  }
  return out;
}

}  // namespace kgsys
