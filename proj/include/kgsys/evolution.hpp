#pragma once

// Time integration of L v = G(v), L = d_t + i<i d_x>, and the diagnostics that
// live on a trajectory (u = 2 Re v, the vector fields P and J, the X_T norm).

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kgsys/config.hpp"
#include "kgsys/grid.hpp"
#include "kgsys/nonlinearity.hpp"
#include "kgsys/tensor.hpp"

namespace kgsys {

struct CauchyData {
  VectorField f;  // u(0), physical, real
  VectorField g;  // d_t u(0), physical, real

  std::size_t components() const { return f.components(); }
  const GridPtr& grid_ptr() const { return f.grid_ptr(); }

  /// ||f||_{H^{4,1}} + ||g||_{H^{3,1}}
  double size() const { return norm(f, NormSpec::weighted(4, 1)) + norm(g, NormSpec::weighted(3, 1)); }

  /// Smallest r with |f|, |g| <= tol * max outside [-r, r].
  double radius(double tol = 1e-12) const {
    double big = 0.0;
    for (const auto* h : {&f, &g})
      for (std::size_t j = 0; j < h->components(); ++j)
        for (auto z : (*h)[j]) big = std::max(big, std::abs(z));
    if (big == 0.0) return 0.0;
    double r = 0.0;
    const auto& x = f.grid().x();
    for (const auto* h : {&f, &g})
      for (std::size_t j = 0; j < h->components(); ++j)
        for (std::size_t m = 0; m < x.size(); ++m)
          if (std::abs((*h)[j][m]) > tol * big) r = std::max(r, std::abs(x[m]));
    return r;
  }

  void validate() const {
    if (!f.is_physical() || !g.is_physical()) throw RepresentationMismatch("CauchyData: f and g must be physical");
    f.require_compatible(g);
    require_real(f, "CauchyData f");
    require_real(g, "CauchyData g");
    for (const auto* h : {&f, &g})
      for (std::size_t j = 0; j < h->components(); ++j)
        for (auto z : (*h)[j])
          if (!std::isfinite(z.real())) throw PreconditionError("CauchyData: non-finite sample");
  }
};

/// Component-wise Gaussians w_j a e^{-(x - c_j)^2 / sigma^2}; a is chosen so that the data size equals epsilon.
struct DataSpec {
  double epsilon = 0.1;
  double sigma = 2.0;
  std::vector<double> f_weights;  // empty: all ones
  std::vector<double> g_weights;
  std::vector<double> centers;    // empty: all zero

  static DataSpec from_json(const Json& j) {
    DataSpec d;
    d.epsilon = get_number(j, "epsilon", d.epsilon);
    d.sigma = get_number(j, "sigma", d.sigma);
    d.f_weights = get_numbers(j, "f_weights", {});
    d.g_weights = get_numbers(j, "g_weights", {});
    d.centers = get_numbers(j, "centers", {});
    return d;
  }
  Json to_json() const {
    return {{"epsilon", epsilon}, {"sigma", sigma}, {"f_weights", f_weights}, {"g_weights", g_weights},
            {"centers", centers}};
  }
};

inline CauchyData make_gaussian_data(const GridPtr& grid, std::size_t components, const DataSpec& spec) {
  if (!(spec.sigma > 0.0)) throw PreconditionError("DataSpec: sigma must be positive");
  if (spec.epsilon < 0.0) throw PreconditionError("DataSpec: epsilon must be nonnegative");
  auto pick = [&](const std::vector<double>& v, std::size_t j, double fallback, const char* what) {
    if (v.empty()) return fallback;
    if (v.size() != components) throw DimensionMismatch(std::string("DataSpec: ") + what + " needs one entry per component");
    return v[j];
  };
  std::vector<std::function<cplx(double)>> ff, gg;
  for (std::size_t j = 0; j < components; ++j) {
    const double c = pick(spec.centers, j, 0.0, "centers");
    const double wf = pick(spec.f_weights, j, 1.0, "f_weights");
    const double wg = pick(spec.g_weights, j, 1.0, "g_weights");
    const double s2 = spec.sigma * spec.sigma;
    ff.push_back([=](double x) { return cplx(wf * std::exp(-(x - c) * (x - c) / s2), 0.0); });
    gg.push_back([=](double x) { return cplx(wg * std::exp(-(x - c) * (x - c) / s2), 0.0); });
  }
  CauchyData d{sample(grid, ff), sample(grid, gg)};
  const double unit = d.size();
  if (unit == 0.0) throw PreconditionError("DataSpec: all weights are zero");
  const double a = spec.epsilon / unit;
  d.f *= a;
  d.g *= a;
  return d;
}

struct GridSpec {
  double half_width = 400.0;
  std::size_t n_points = 8192;
  int padding = 2;

  static GridSpec from_json(const Json& j) {
    GridSpec g;
    g.half_width = get_number(j, "L", g.half_width);
    g.n_points = static_cast<std::size_t>(get_number(j, "n", static_cast<double>(g.n_points)));
    g.padding = static_cast<int>(get_number(j, "padding", g.padding));
    return g;
  }
  Json to_json() const { return {{"L", half_width}, {"n", n_points}, {"padding", padding}}; }
  GridPtr make() const { return SpectralGrid::make(half_width, n_points, padding); }
};

struct SimulationConfig {
  GridPtr grid;
  CubicTensor tensor;
  CauchyData data;
  double dt = 0.05;
  double T = 10.0;
  std::size_t snapshot_stride = 20;  // steps between stored snapshots
  double gamma = 0.1;
  double kappa = 2.5;
  double blowup_threshold = 1e6;
  bool periodic_data = false;  // data deliberately periodic (plane waves): no wraparound window

  double snapshot_interval() const { return dt * static_cast<double>(snapshot_stride); }
  /// Largest T before the fastest group (speed < 1) can carry data across the periodic boundary.
  double valid_time() const { return 0.8 * (grid->half_width() - data.radius()); }

  void validate() const {
    if (!grid) throw PreconditionError("SimulationConfig: missing grid");
    data.validate();
    if (data.grid_ptr()->size() != grid->size() || data.grid_ptr()->half_width() != grid->half_width())
      throw DimensionMismatch("SimulationConfig: data lives on a different grid");
    if (static_cast<std::size_t>(tensor.components()) != data.components())
      throw DimensionMismatch("SimulationConfig: tensor and data have different component counts");
    if (!(dt > 0.0)) throw PreconditionError("SimulationConfig: dt must be positive");
    if (!(T > 0.0)) throw PreconditionError("SimulationConfig: T must be positive");
    if (snapshot_stride == 0) throw PreconditionError("SimulationConfig: snapshot_stride must be >= 1");
    if (!periodic_data && T > valid_time() + 1e-12)
      throw PreconditionError("SimulationConfig: T = " + std::to_string(T) + " exceeds 0.8 (L - r_data) = " +
                              std::to_string(valid_time()));
    if (!(gamma > 0.0 && gamma <= 0.25)) throw PreconditionError("SimulationConfig: gamma must lie in (0, 1/4]");
    if (!(kappa >= 1.5 && kappa <= 4.0)) throw PreconditionError("SimulationConfig: kappa must lie in [3/2, 4]");
  }
};

/// Builds a config from {"grid", "tensor", "data", "dt", "T", "snapshot_interval", "gamma", "kappa", ...}.
inline SimulationConfig config_from_json(const Json& j) {
  SimulationConfig c;
  c.grid = GridSpec::from_json(j.value("grid", Json::object())).make();
  if (!j.contains("tensor")) throw PreconditionError("config: missing 'tensor'");
  c.tensor = tensor_from_json(j.at("tensor"));
  c.data = make_gaussian_data(c.grid, static_cast<std::size_t>(c.tensor.components()),
                              DataSpec::from_json(j.value("data", Json::object())));
  c.dt = get_number(j, "dt", c.dt);
  c.T = get_number(j, "T", c.T);
  const double interval = get_number(j, "snapshot_interval", 1.0);
  c.snapshot_stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(interval / c.dt)));
  c.gamma = get_number(j, "gamma", c.gamma);
  c.kappa = get_number(j, "kappa", c.kappa);
  c.blowup_threshold = get_number(j, "blowup_threshold", c.blowup_threshold);
  return c;
}

/// Snapshots of v (spectral) at strictly increasing times starting at 0.
class SolutionTrajectory {
 public:
  SolutionTrajectory() = default;
  SolutionTrajectory(GridPtr grid, CubicTensor tensor) : grid_(std::move(grid)), tensor_(std::move(tensor)) {}

  const GridPtr& grid_ptr() const { return grid_; }
  const SpectralGrid& grid() const { return *grid_; }
  const CubicTensor& tensor() const { return tensor_; }
  const std::vector<double>& times() const { return times_; }
  std::size_t size() const { return times_.size(); }
  Warnings& warnings() { return warnings_; }
  const Warnings& warnings() const { return warnings_; }
  /// Diagnostics computed on a const trajectory still report here.
  Warnings* warning_sink() const { return &warnings_; }

  void push(double t, VectorField v_spectral) {
    if (!v_spectral.is_spectral()) throw RepresentationMismatch("trajectory stores spectral snapshots");
    if (!times_.empty() && !(t > times_.back())) throw PreconditionError("trajectory times must increase");
    if (times_.empty() && t != 0.0) throw PreconditionError("trajectory must start at t = 0");
    times_.push_back(t);
    v_.push_back(std::move(v_spectral));
    u_cache_.emplace_back();
  }

  /// Index of the snapshot at time t (tolerance 1e-9 relative).
  std::size_t index_of(double t) const {
    for (std::size_t i = 0; i < times_.size(); ++i)
      if (std::abs(times_[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return i;
    throw PreconditionError("no snapshot at t = " + std::to_string(t));
  }

  const VectorField& v(std::size_t i) const { return v_.at(i); }
  const VectorField& v_at(double t) const { return v_.at(index_of(t)); }

  /// u = 2 Re v (physical), cached.
  const VectorField& u(std::size_t i) const {
    auto& slot = u_cache_.at(i);
    if (!slot) {
      VectorField p = to_physical(v_[i]);
      for (auto& comp : p.data())
        for (auto& z : comp) z = cplx(2.0 * z.real(), 0.0);
      slot = std::move(p);
    }
    return *slot;
  }

 private:
  GridPtr grid_;
  CubicTensor tensor_;
  std::vector<double> times_;
  std::vector<VectorField> v_;
  mutable std::vector<std::optional<VectorField>> u_cache_;
  mutable Warnings warnings_;
};

/// v(0) = (f + i <i d_x>^{-1} g) / 2
inline VectorField make_initial_v(const CauchyData& data) {
  data.validate();
  VectorField g = bessel_multiplier(data.g, -1.0);
  VectorField v = data.f;
  for (std::size_t j = 0; j < v.components(); ++j)
    for (std::size_t m = 0; m < v.size(); ++m) v[j][m] = 0.5 * (data.f[j][m].real() + cplx(0.0, g[j][m].real()));
  return v;
}

/// u = 2 Re v in physical space.
inline VectorField reconstruct_u(const VectorField& v) {
  VectorField p = to_physical(v);
  for (auto& comp : p.data())
    for (auto& z : comp) z = cplx(2.0 * z.real(), 0.0);
  return p;
}

/// d_t u = 2 <i d_x> Im v for a solution of L v = G(v).
inline VectorField reconstruct_ut(const VectorField& v) {
  VectorField p = to_physical(v);
  for (auto& comp : p.data())
    for (auto& z : comp) z = cplx(2.0 * z.imag(), 0.0);
  VectorField q = bessel_multiplier(p, 1.0);
  for (auto& comp : q.data())
    for (auto& z : comp) z = cplx(z.real(), 0.0);
  return q;
}

using SnapshotObserver = std::function<void(double t, const VectorField& v_spectral)>;

namespace detail {

inline double max_abs(const std::vector<cvec>& a) {
  double m = 0.0;
  for (const auto& c : a)
    for (auto z : c) {
      const double v = std::abs(z);
      if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
      m = std::max(m, v);
    }
  return m;
}

inline void check_blowup(const std::vector<cvec>& v, double t, double threshold) {
  const double m = max_abs(v);
  if (!std::isfinite(m)) throw NumericalBlowUp(t, "non-finite spectral coefficient");
  if (m > threshold) throw NumericalBlowUp(t, "spectral amplitude " + std::to_string(m) + " exceeds threshold");
}

struct StepPlan {
  std::size_t steps;
  double dt;
};

inline StepPlan plan_steps(double T, double dt) {
  const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  return {std::max<std::size_t>(steps, 1), T / static_cast<double>(std::max<std::size_t>(steps, 1))};
}

}  // namespace detail

/// Interaction-picture RK4.  In terms of w = e^{it<xi>} v^ the scheme is classic
/// RK4 for w' = e^{it<xi>} G(v)^; it is written here in the v variable with the
/// half and full step propagators E(h) = e^{-ih<xi>}, which is algebraically the same.
inline SolutionTrajectory simulate(const SimulationConfig& config, const SnapshotObserver& observer = {}) {
  config.validate();
  const GridPtr& grid = config.grid;
  const std::size_t n = grid->size();
  const std::size_t comps = config.data.components();
  const auto plan = detail::plan_steps(config.T, config.dt);
  const double h = plan.dt;
  CubicKernel kernel(grid, config.tensor);

  cvec e_half(n), e_full(n);
  for (std::size_t k = 0; k < n; ++k) {
    e_half[k] = std::polar(1.0, -0.5 * h * grid->bracket()[k]);
    e_full[k] = std::polar(1.0, -h * grid->bracket()[k]);
  }

  VectorField v0 = forward_transform(make_initial_v(config.data));
  std::vector<cvec> v = v0.data();
  std::vector<cvec> k1, k2, k3, k4, stage(comps, cvec(n));

  SolutionTrajectory traj(grid, config.tensor);
  auto store = [&](double t) {
    VectorField snap(grid, v, Representation::spectral);
    if (observer) observer(t, snap);
    traj.push(t, std::move(snap));
  };
  store(0.0);

  const bool linear = config.tensor.is_zero();
  for (std::size_t step = 1; step <= plan.steps; ++step) {
    if (linear) {
      for (std::size_t j = 0; j < comps; ++j)
        for (std::size_t k = 0; k < n; ++k) v[j][k] *= e_full[k];
    } else {
      kernel.apply_G(v, k1);
      for (std::size_t j = 0; j < comps; ++j)
        for (std::size_t k = 0; k < n; ++k) stage[j][k] = e_half[k] * (v[j][k] + 0.5 * h * k1[j][k]);
      kernel.apply_G(stage, k2);
      for (std::size_t j = 0; j < comps; ++j)
        for (std::size_t k = 0; k < n; ++k) stage[j][k] = e_half[k] * v[j][k] + 0.5 * h * k2[j][k];
      kernel.apply_G(stage, k3);
      for (std::size_t j = 0; j < comps; ++j)
        for (std::size_t k = 0; k < n; ++k) stage[j][k] = e_full[k] * v[j][k] + h * e_half[k] * k3[j][k];
      kernel.apply_G(stage, k4);
      for (std::size_t j = 0; j < comps; ++j)
        for (std::size_t k = 0; k < n; ++k)
          v[j][k] = e_full[k] * v[j][k] +
                    h / 6.0 * (e_full[k] * k1[j][k] + 2.0 * e_half[k] * (k2[j][k] + k3[j][k]) + k4[j][k]);
    }
    const double t = step == plan.steps ? config.T : h * static_cast<double>(step);
    detail::check_blowup(v, t, config.blowup_threshold);
    if (step % config.snapshot_stride == 0 || step == plan.steps) store(t);
  }
  check_support(traj.u(traj.size() - 1), "simulate(t = " + std::to_string(config.T) + ")", &traj.warnings());
  return traj;
}

/// Stormer-Verlet for u_tt = -<i d_x>^2 u + F(u), spectral in space.
///
/// Refuses dt > 0.9 dx, and also dt <xi_max> >= 2, beyond which the scheme is
/// unstable on the highest retained mode.
inline SolutionTrajectory leapfrog_reference(const SimulationConfig& config, const SnapshotObserver& observer = {}) {
  config.validate();
  const GridPtr& grid = config.grid;
  if (config.dt > 0.9 * grid->dx())
    throw PreconditionError("leapfrog_reference: dt = " + std::to_string(config.dt) + " violates dt <= 0.9 dx = " +
                            std::to_string(0.9 * grid->dx()));
  if (config.dt * japanese(grid->xi_max()) >= 2.0)
    throw PreconditionError("leapfrog_reference: dt <xi_max> >= 2, the scheme is unstable on this grid");
  const std::size_t n = grid->size();
  const std::size_t comps = config.data.components();
  const auto plan = detail::plan_steps(config.T, config.dt);
  const double h = plan.dt;
  CubicKernel kernel(grid, config.tensor);
  const auto& br = grid->bracket();

  std::vector<cvec> u = forward_transform(config.data.f).data();
  std::vector<cvec> p = forward_transform(config.data.g).data();
  std::vector<cvec> force;
  auto accel = [&](const std::vector<cvec>& uu, std::vector<cvec>& out) {
    kernel.apply(uu, 1.0, out);
    for (std::size_t j = 0; j < comps; ++j)
      for (std::size_t k = 0; k < n; ++k) out[j][k] -= br[k] * br[k] * uu[j][k];
  };
  auto as_v = [&]() {
    std::vector<cvec> v(comps, cvec(n));
    for (std::size_t j = 0; j < comps; ++j)
      for (std::size_t k = 0; k < n; ++k) v[j][k] = 0.5 * (u[j][k] + cplx(0.0, 1.0 / br[k]) * p[j][k]);
    return VectorField(grid, std::move(v), Representation::spectral);
  };

  SolutionTrajectory traj(grid, config.tensor);
  auto store = [&](double t) {
    VectorField snap = as_v();
    if (observer) observer(t, snap);
    traj.push(t, std::move(snap));
  };
  store(0.0);
  accel(u, force);
  for (std::size_t step = 1; step <= plan.steps; ++step) {
    for (std::size_t j = 0; j < comps; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        p[j][k] += 0.5 * h * force[j][k];
        u[j][k] += h * p[j][k];
      }
    accel(u, force);
    for (std::size_t j = 0; j < comps; ++j)
      for (std::size_t k = 0; k < n; ++k) p[j][k] += 0.5 * h * force[j][k];
    const double t = step == plan.steps ? config.T : h * static_cast<double>(step);
    detail::check_blowup(u, t, config.blowup_threshold);
    if (step % config.snapshot_stride == 0 || step == plan.steps) store(t);
  }
  return traj;
}

/// First Picard iterate v1(t) = int_0^t e^{-i(t-s)<i d_x>} G(e^{-is<i d_x>} v0) ds (spectral),
/// integrated with RK4 in the interaction picture.
inline VectorField first_picard_iterate(const GridPtr& grid, const CubicTensor& tensor, const VectorField& v0,
                                        double T, double dt) {
  const std::size_t n = grid->size();
  const std::size_t comps = v0.components();
  CubicKernel kernel(grid, tensor);
  const auto plan = detail::plan_steps(T, dt);
  const VectorField v0s = to_spectral(v0);
  const auto& br = grid->bracket();
  // w(t) = int_0^t e^{is<xi>} G(free(s))^ ds
  auto integrand = [&](double s, std::vector<cvec>& out) {
    std::vector<cvec> free(comps, cvec(n));
    for (std::size_t j = 0; j < comps; ++j)
      for (std::size_t k = 0; k < n; ++k) free[j][k] = std::polar(1.0, -s * br[k]) * v0s[j][k];
    kernel.apply_G(free, out);
    for (std::size_t j = 0; j < comps; ++j)
      for (std::size_t k = 0; k < n; ++k) out[j][k] *= std::polar(1.0, s * br[k]);
  };
  std::vector<cvec> w(comps, cvec(n)), a, b, c;
  for (std::size_t step = 0; step < plan.steps; ++step) {
    const double s = plan.dt * static_cast<double>(step);
    integrand(s, a);
    integrand(s + 0.5 * plan.dt, b);
    integrand(s + plan.dt, c);
    for (std::size_t j = 0; j < comps; ++j)
      for (std::size_t k = 0; k < n; ++k) w[j][k] += plan.dt / 6.0 * (a[j][k] + 4.0 * b[j][k] + c[j][k]);
  }
  for (std::size_t j = 0; j < comps; ++j)
    for (std::size_t k = 0; k < n; ++k) w[j][k] *= std::polar(1.0, -T * br[k]);
  return VectorField(grid, std::move(w), Representation::spectral);
}

/// P v = t d_x v + x d_t v, with d_t v = -i<i d_x> v + G(v) (physical result).
inline VectorField apply_P_on_solution(const SolutionTrajectory& traj, double t) {
  const std::size_t i = traj.index_of(t);
  const VectorField& vs = traj.v(i);
  const VectorField v = to_physical(vs);
  check_support(v, "apply_P_on_solution", traj.warning_sink());
  VectorField dtv = cplx(0.0, -1.0) * bessel_multiplier(v, 1.0);
  dtv += eval_G(traj.tensor(), v);
  VectorField out = multiply_x(dtv);
  if (t != 0.0) out += cplx(t, 0.0) * derivative(v);
  return out;
}

/// J v on a solution via J = iP - ixL - <i d_x>^{-1} d_x with L v = G(v).
inline VectorField apply_J_on_solution(const SolutionTrajectory& traj, double t) {
  const VectorField v = to_physical(traj.v_at(t));
  VectorField out = cplx(0.0, 1.0) * apply_P_on_solution(traj, t);
  out -= cplx(0.0, 1.0) * multiply_x(eval_G(traj.tensor(), v));
  out -= bessel_multiplier(derivative(v), -1.0);
  return out;
}

struct XtTerms {
  double t = 0.0;
  double v_h4 = 0.0;     // <t>^{-gamma} ||v||_{H^4}
  double jv_h2 = 0.0;    // <t>^{-gamma} ||Jv||_{H^2}
  double jv_h3 = 0.0;    // <t>^{-3 gamma} ||Jv||_{H^3}
  double v_hinf1 = 0.0;  // <t>^{1/2} ||v||_{H^1_inf}
  double total() const { return v_h4 + jv_h2 + jv_h3 + v_hinf1; }
};

struct XtNorm {
  double value = 0.0;                  // sum of the four suprema
  std::array<double, 4> sup_terms{};   // per-term suprema
  std::vector<XtTerms> series;
};

inline XtTerms xt_terms_at(const SolutionTrajectory& traj, std::size_t i, double gamma) {
  const double t = traj.times()[i];
  const double jt = japanese(t);
  XtTerms r;
  r.t = t;
  const VectorField& v = traj.v(i);
  const VectorField jv = apply_J_on_solution(traj, t);
  r.v_h4 = std::pow(jt, -gamma) * norm(v, NormSpec::sobolev(4));
  r.jv_h2 = std::pow(jt, -gamma) * norm(jv, NormSpec::sobolev(2));
  r.jv_h3 = std::pow(jt, -3.0 * gamma) * norm(jv, NormSpec::sobolev(3));
  r.v_hinf1 = std::sqrt(jt) * norm(v, NormSpec::sup(1));
  return r;
}

inline XtNorm xt_norm(const SolutionTrajectory& traj, double gamma) {
  if (!(gamma > 0.0 && gamma <= 0.25)) throw PreconditionError("xt_norm: gamma must lie in (0, 1/4]");
  XtNorm out;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    auto r = xt_terms_at(traj, i, gamma);
    out.sup_terms[0] = std::max(out.sup_terms[0], r.v_h4);
    out.sup_terms[1] = std::max(out.sup_terms[1], r.jv_h2);
    out.sup_terms[2] = std::max(out.sup_terms[2], r.jv_h3);
    out.sup_terms[3] = std::max(out.sup_terms[3], r.v_hinf1);
    out.series.push_back(r);
  }
  out.value = out.sup_terms[0] + out.sup_terms[1] + out.sup_terms[2] + out.sup_terms[3];
  return out;
}

}  // namespace kgsys
