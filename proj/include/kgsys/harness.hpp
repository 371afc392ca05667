#pragma once

// Scenario runner: builds the simulation from a JSON scenario, executes the
// requested checks and writes a JSON report plus a CSV time series.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kgsys/config.hpp"
#include "kgsys/decomposition.hpp"
#include "kgsys/evolution.hpp"
#include "kgsys/fit.hpp"
#include "kgsys/profile.hpp"
#include "kgsys/structure.hpp"

namespace kgsys {

inline constexpr const char* kVersion = "0.1.0";

enum class Check { structure, decay, counterexample_growth, epsilon_sweep, integrators, lemma3, decomposition, profile };

inline const char* to_string(Check c) {
  switch (c) {
    case Check::structure: return "structure";
    case Check::decay: return "decay";
    case Check::counterexample_growth: return "counterexample_growth";
    case Check::epsilon_sweep: return "epsilon_sweep";
    case Check::integrators: return "integrators";
    case Check::lemma3: return "lemma3";
    case Check::decomposition: return "decomposition";
    case Check::profile: return "profile";
  }
  return "?";
}

inline Check check_from_string(const std::string& s) {
  for (auto c : {Check::structure, Check::decay, Check::counterexample_growth, Check::epsilon_sweep,
                 Check::integrators, Check::lemma3, Check::decomposition, Check::profile})
    if (s == to_string(c)) return c;
  throw PreconditionError("unknown check '" + s + "'");
}

/// Pass thresholds; every one can be overridden from the scenario file.
struct Thresholds {
  std::array<double, 2> decay_slope{-0.6, -0.4};
  bool require_bounded = true;
  double bounded_growth = 0.05;       // running sup may rise by less than this in the final third
  double growth_min = 0.2;            // counterexample: (1+t)^{1/2} ||u_c||_inf growth over the window
  double pearson_min = 0.9;           // ... and its correlation with ln t
  std::array<double, 2> free_slope{-0.55, -0.45};
  std::array<double, 2> sweep_ratio{1.5, 2.5};
  double integrator_tol = 1e-5;
  double integrator_dt = 0.01;
  double integrator_T = 10.0;
  double lemma3_slope_max = -1.0;
  double homogeneity_tol = 0.05;
  double identity_tol = 1e-6;
  double v_rate_max = -0.2;
  double w_rate_max = -0.45;
  double ks_ratio_max = 5.0;
  double lyapunov_tol = 1e-8;
  double psi_growth_max = 2.0;

  static Thresholds from_json(const Json& j) {
    Thresholds t;
    auto pair = [&](const char* key, std::array<double, 2>& out) {
      if (!j.contains(key)) return;
      const auto v = get_numbers(j, key, {});
      if (v.size() != 2 || !(v[0] <= v[1])) throw PreconditionError(std::string("thresholds.") + key + ": need [lo, hi]");
      out = {v[0], v[1]};
    };
    pair("decay_slope", t.decay_slope);
    pair("free_slope", t.free_slope);
    pair("sweep_ratio", t.sweep_ratio);
    t.require_bounded = j.value("require_bounded", t.require_bounded);
    t.bounded_growth = get_number(j, "bounded_growth", t.bounded_growth);
    t.growth_min = get_number(j, "growth_min", t.growth_min);
    t.pearson_min = get_number(j, "pearson_min", t.pearson_min);
    t.integrator_tol = get_number(j, "integrator_tol", t.integrator_tol);
    t.integrator_dt = get_number(j, "integrator_dt", t.integrator_dt);
    t.integrator_T = get_number(j, "integrator_T", t.integrator_T);
    t.lemma3_slope_max = get_number(j, "lemma3_slope_max", t.lemma3_slope_max);
    t.homogeneity_tol = get_number(j, "homogeneity_tol", t.homogeneity_tol);
    t.identity_tol = get_number(j, "identity_tol", t.identity_tol);
    t.v_rate_max = get_number(j, "v_rate_max", t.v_rate_max);
    t.w_rate_max = get_number(j, "w_rate_max", t.w_rate_max);
    t.ks_ratio_max = get_number(j, "ks_ratio_max", t.ks_ratio_max);
    t.lyapunov_tol = get_number(j, "lyapunov_tol", t.lyapunov_tol);
    t.psi_growth_max = get_number(j, "psi_growth_max", t.psi_growth_max);
    return t;
  }
  Json to_json() const {
    return {{"decay_slope", decay_slope},       {"require_bounded", require_bounded},
            {"bounded_growth", bounded_growth}, {"growth_min", growth_min},
            {"pearson_min", pearson_min},       {"free_slope", free_slope},
            {"sweep_ratio", sweep_ratio},       {"integrator_tol", integrator_tol},
            {"integrator_dt", integrator_dt},   {"integrator_T", integrator_T},
            {"lemma3_slope_max", lemma3_slope_max}, {"homogeneity_tol", homogeneity_tol},
            {"identity_tol", identity_tol},     {"v_rate_max", v_rate_max},
            {"w_rate_max", w_rate_max},         {"ks_ratio_max", ks_ratio_max},
            {"lyapunov_tol", lyapunov_tol},     {"psi_growth_max", psi_growth_max}};
  }
};

struct Scenario {
  std::string name = "scenario";
  Json tensor_ref = "complex_cubic";
  std::optional<HermitianForm> a;
  std::string expect_structure = "holds";  // "holds" or "fails"
  DataSpec data;
  GridSpec grid;
  double dt = 0.05;
  double T = 200.0;
  double snapshot_interval = 1.0;
  double gamma = 0.1;
  double kappa = 2.5;
  double blowup_threshold = 1e6;
  std::optional<std::array<double, 2>> window;  // default [10, min(200, 0.8 (L - r_data))]
  std::size_t growth_component = 2;             // 1-based, counterexample check
  std::size_t free_component = 1;
  std::vector<Check> checks;
  Thresholds thresholds;

  CubicTensor tensor() const { return tensor_from_json(tensor_ref); }

  bool wants(Check c) const { return std::find(checks.begin(), checks.end(), c) != checks.end(); }

  SimulationConfig simulation_config(double epsilon_scale = 1.0) const {
    SimulationConfig c;
    c.grid = grid.make();
    c.tensor = tensor();
    DataSpec d = data;
    d.epsilon *= epsilon_scale;
    c.data = make_gaussian_data(c.grid, static_cast<std::size_t>(c.tensor.components()), d);
    c.dt = dt;
    c.T = T;
    c.snapshot_stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(snapshot_interval / dt)));
    c.gamma = gamma;
    c.kappa = kappa;
    c.blowup_threshold = blowup_threshold;
    return c;
  }

  /// Fit window; must lie inside the pre-wraparound range.
  std::array<double, 2> decay_window(const SimulationConfig& cfg) const {
    const double valid = cfg.valid_time();
    std::array<double, 2> w = window.value_or(std::array<double, 2>{10.0, std::min(200.0, valid)});
    w[1] = std::min(w[1], T);
    if (!(w[0] > 0.0 && w[0] < w[1])) throw PreconditionError("scenario '" + name + "': empty decay window");
    if (w[1] > valid + 1e-12)
      throw PreconditionError("scenario '" + name + "': decay window ends after the wraparound time " +
                              std::to_string(valid));
    return w;
  }

  void validate() const {
    const auto c = tensor();
    const auto n = static_cast<std::size_t>(c.components());
    if (expect_structure != "holds" && expect_structure != "fails")
      throw PreconditionError("scenario '" + name + "': expect_structure must be 'holds' or 'fails'");
    if (a) {
      if (a->dimension() != n) throw DimensionMismatch("scenario '" + name + "': A and tensor dimensions differ");
      a->validate();
    }
    if (wants(Check::profile) && !a) throw PreconditionError("scenario '" + name + "': profile check requires A");
    if (wants(Check::counterexample_growth) &&
        (growth_component < 1 || growth_component > n || free_component < 1 || free_component > n))
      throw PreconditionError("scenario '" + name + "': component index out of range");
    if (!(snapshot_interval > 0.0)) throw PreconditionError("scenario '" + name + "': snapshot_interval must be > 0");
    simulation_config().validate();
  }

  static Scenario from_json(const Json& j) {
    Scenario s;
    s.name = j.value("name", s.name);
    if (!j.contains("tensor")) throw PreconditionError("scenario: missing 'tensor'");
    s.tensor_ref = j.at("tensor");
    if (j.contains("A")) s.a = HermitianForm::from_json(j.at("A"));
    s.expect_structure = j.value("expect_structure", s.expect_structure);
    s.data = DataSpec::from_json(j.value("data", Json::object()));
    s.grid = GridSpec::from_json(j.value("grid", Json::object()));
    s.dt = get_number(j, "dt", s.dt);
    s.T = get_number(j, "T", s.T);
    s.snapshot_interval = get_number(j, "snapshot_interval", s.snapshot_interval);
    s.gamma = get_number(j, "gamma", s.gamma);
    s.kappa = get_number(j, "kappa", s.kappa);
    s.blowup_threshold = get_number(j, "blowup_threshold", s.blowup_threshold);
    if (j.contains("window")) {
      const auto w = get_numbers(j, "window", {});
      if (w.size() != 2) throw PreconditionError("scenario: window must be [t0, t1]");
      s.window = std::array<double, 2>{w[0], w[1]};
    }
    s.growth_component = j.value("growth_component", s.growth_component);
    s.free_component = j.value("free_component", s.free_component);
    for (const auto& c : j.value("checks", Json::array())) s.checks.push_back(check_from_string(c.get<std::string>()));
    s.thresholds = Thresholds::from_json(j.value("thresholds", Json::object()));
    return s;
  }

  Json to_json() const {
    Json j = {{"name", name},
              {"tensor", tensor_ref},
              {"expect_structure", expect_structure},
              {"data", data.to_json()},
              {"grid", grid.to_json()},
              {"dt", dt},
              {"T", T},
              {"snapshot_interval", snapshot_interval},
              {"gamma", gamma},
              {"kappa", kappa},
              {"blowup_threshold", blowup_threshold},
              {"growth_component", growth_component},
              {"free_component", free_component},
              {"thresholds", thresholds.to_json()}};
    if (a) j["A"] = a->to_json();
    if (window) j["window"] = *window;
    Json cs = Json::array();
    for (auto c : checks) cs.push_back(to_string(c));
    j["checks"] = cs;
    return j;
  }
};

/// Built-in scenarios: free, scalar_cubic, complex_cubic, rho_family_1234, counterexample.
inline Scenario builtin_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  if (name == "free") {
    s.tensor_ref = "zero(1)";
    s.T = 100.0;
    s.window = std::array<double, 2>{10.0, 100.0};
    s.thresholds.decay_slope = s.thresholds.free_slope;
    s.checks = {Check::decay, Check::decomposition};
  } else if (name == "scalar_cubic") {
    s.tensor_ref = "scalar_cubic";
    s.a = HermitianForm::identity(1);
    s.checks = {Check::structure, Check::decay, Check::lemma3, Check::profile};
  } else if (name == "complex_cubic") {
    s.tensor_ref = "complex_cubic";
    s.a = HermitianForm::identity(2);
    s.checks = {Check::structure, Check::decay, Check::epsilon_sweep, Check::integrators, Check::lemma3,
                Check::decomposition, Check::profile};
  } else if (name == "rho_family_1234") {
    s.tensor_ref = "rho_family(1,2,3,4)";
    s.a = HermitianForm::diagonal({Rational(3), Rational(2)});
    s.checks = {Check::structure, Check::decay, Check::lemma3, Check::profile};
  } else if (name == "counterexample") {
    s.tensor_ref = "counterexample";
    s.expect_structure = "fails";
    s.data.f_weights = {1.0, 0.0};
    s.data.g_weights = {1.0, 0.0};
    s.checks = {Check::structure, Check::counterexample_growth, Check::lemma3};
  } else {
    throw PreconditionError("unknown built-in scenario '" + name + "'");
  }
  return s;
}

inline std::vector<std::string> builtin_scenario_names() {
  return {"free", "scalar_cubic", "complex_cubic", "rho_family_1234", "counterexample"};
}

// ---------------------------------------------------------------------------
// Series and reports

struct SeriesRow {
  double t = 0.0;
  std::vector<double> u_inf;  // per component
  double u_h1_inf = 0.0;      // ||u||_{H^1_inf}
  double v_h4 = 0.0;
  std::optional<XtTerms> xt;
};

inline std::vector<SeriesRow> trajectory_series(const SolutionTrajectory& traj, std::optional<double> gamma) {
  std::vector<SeriesRow> out;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    SeriesRow r;
    r.t = traj.times()[i];
    const VectorField& u = traj.u(i);
    r.u_inf = component_norms(u, NormSpec::sup());
    r.u_h1_inf = norm(u, NormSpec::sup(1));
    r.v_h4 = norm(traj.v(i), NormSpec::sobolev(4));
    if (gamma) r.xt = xt_terms_at(traj, i, *gamma);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::string series_csv(const std::vector<SeriesRow>& rows) {
  std::ostringstream os;
  os << std::setprecision(17);
  const std::size_t n = rows.empty() ? 0 : rows.front().u_inf.size();
  os << "t";
  for (std::size_t j = 0; j < n; ++j) os << ",u_inf_" << j + 1;
  os << ",u_h1_inf,v_h4";
  const bool xt = !rows.empty() && rows.front().xt.has_value();
  if (xt) os << ",xt_v_h4,xt_jv_h2,xt_jv_h3,xt_v_hinf1";
  os << "\n";
  for (const auto& r : rows) {
    os << r.t;
    for (double v : r.u_inf) os << "," << v;
    os << "," << r.u_h1_inf << "," << r.v_h4;
    if (xt) os << "," << r.xt->v_h4 << "," << r.xt->jv_h2 << "," << r.xt->jv_h3 << "," << r.xt->v_hinf1;
    os << "\n";
  }
  return os.str();
}

struct BoundedProxy {
  double growth = 0.0;  // running-sup increase over the final third of the window
  bool bounded = false;
};

/// Running sup of the series over [lo, hi]; bounded when it rises by less than tol over the final third.
inline BoundedProxy bounded_proxy(const std::vector<double>& t, const std::vector<double>& w, double lo, double hi,
                                  double tol) {
  if (t.size() != w.size()) throw DimensionMismatch("bounded_proxy: length mismatch");
  const double cut = lo + 2.0 * (hi - lo) / 3.0;
  double run = 0.0, at_cut = -1.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < lo || t[i] > hi) continue;
    if (t[i] > cut && at_cut < 0.0) at_cut = run;
    run = std::max(run, w[i]);
  }
  if (at_cut <= 0.0) throw PreconditionError("bounded_proxy: window has no points before its final third");
  BoundedProxy b;
  b.growth = run / at_cut - 1.0;
  b.bounded = b.growth < tol;
  return b;
}

struct DecayReport {
  DecayFit fit;
  double sup_weighted = 0.0;  // sup_t (1+t)^{1/2} ||u||_{H^1_inf}
  BoundedProxy proxy;
  bool slope_ok = false;
  bool passed = false;
  std::string config_hash;

  Json to_json() const {
    return {{"slope", fit.slope},
            {"stderr", fit.stderr_slope},
            {"points", fit.points},
            {"window", {fit.window_lo, fit.window_hi}},
            {"curvature", fit.curvature},
            {"curved", fit.curved},
            {"sup_weighted_h1_inf", sup_weighted},
            {"bounded_growth", proxy.growth},
            {"bounded", proxy.bounded},
            {"slope_ok", slope_ok},
            {"passed", passed},
            {"provenance", {{"config_hash", config_hash}, {"version", kVersion}}}};
  }
};

inline DecayReport decay_report(const std::vector<SeriesRow>& rows, std::array<double, 2> window,
                                const Thresholds& thr, const std::string& hash) {
  std::vector<double> t, v, w;
  DecayReport d;
  for (const auto& r : rows) {
    t.push_back(r.t);
    v.push_back(r.u_h1_inf);
    w.push_back(std::sqrt(1.0 + r.t) * r.u_h1_inf);
    d.sup_weighted = std::max(d.sup_weighted, w.back());
  }
  d.fit = fit_decay_exponent(t, v, window[0], window[1]);
  d.proxy = bounded_proxy(t, w, window[0], window[1], thr.bounded_growth);
  d.slope_ok = d.fit.slope >= thr.decay_slope[0] && d.fit.slope <= thr.decay_slope[1];
  d.passed = d.slope_ok && (!thr.require_bounded || d.proxy.bounded);
  d.config_hash = hash;
  return d;
}

struct GrowthReport {
  double growth = 0.0;   // r(t1) / r(t0) - 1, r = (1+t)^{1/2} ||u_c||_inf
  double pearson = 0.0;  // corr(r, ln t) over the window
  double free_slope = 0.0;
  bool passed = false;

  Json to_json() const {
    return {{"growth", growth}, {"pearson_ln_t", pearson}, {"free_component_slope", free_slope}, {"passed", passed}};
  }
};

inline GrowthReport counterexample_growth(const std::vector<SeriesRow>& rows, std::array<double, 2> window,
                                          std::size_t growth_component, std::size_t free_component,
                                          const Thresholds& thr) {
  std::vector<double> t, r, lt, tf, uf;
  for (const auto& row : rows) {
    if (row.t < window[0] || row.t > window[1]) continue;
    t.push_back(row.t);
    lt.push_back(std::log(row.t));
    r.push_back(std::sqrt(1.0 + row.t) * row.u_inf.at(growth_component - 1));
    uf.push_back(row.u_inf.at(free_component - 1));
  }
  if (t.size() < 8) throw PreconditionError("counterexample_growth: need at least 8 points in the window");
  GrowthReport g;
  if (!(r.front() > 0.0)) throw PreconditionError("counterexample_growth: growing component vanishes at t0");
  g.growth = r.back() / r.front() - 1.0;
  g.pearson = pearson(r, lt);
  g.free_slope = fit_decay_exponent(t, uf, window[0], window[1]).slope;
  g.passed = g.growth >= thr.growth_min && g.pearson >= thr.pearson_min && g.free_slope >= thr.free_slope[0] &&
             g.free_slope <= thr.free_slope[1];
  return g;
}

struct IntegratorComparison {
  double T = 0.0;
  double dt = 0.0;
  double deviation = 0.0;       // sup |u_rk4 - u_leapfrog| at T
  double deviation_half = 0.0;  // same with the leapfrog step halved
  double order = 0.0;           // log2(deviation / deviation_half), 0 when both vanish
  bool passed = false;

  Json to_json() const {
    return {{"T", T}, {"dt", dt}, {"deviation", deviation}, {"deviation_half_dt", deviation_half},
            {"leapfrog_order", order}, {"passed", passed}};
  }
};

inline IntegratorComparison compare_integrators(const Scenario& s) {
  const Thresholds& thr = s.thresholds;
  SimulationConfig cfg = s.simulation_config();
  cfg.T = thr.integrator_T;
  cfg.dt = thr.integrator_dt;
  cfg.snapshot_stride = std::numeric_limits<std::size_t>::max() / 2;
  auto sup_diff = [](const VectorField& a, const VectorField& b) {
    const VectorField d = to_physical(a - b);
    return norm(d, NormSpec::sup());
  };
  const auto rk = simulate(cfg);
  const auto lf = leapfrog_reference(cfg);
  auto half = cfg;
  half.dt = 0.5 * cfg.dt;
  const auto lf2 = leapfrog_reference(half);
  IntegratorComparison c;
  c.T = cfg.T;
  c.dt = cfg.dt;
  c.deviation = sup_diff(rk.u(rk.size() - 1), lf.u(lf.size() - 1));
  c.deviation_half = sup_diff(rk.u(rk.size() - 1), lf2.u(lf2.size() - 1));
  if (c.deviation > 0.0 && c.deviation_half > 0.0) c.order = std::log2(c.deviation / c.deviation_half);
  c.passed = c.deviation <= thr.integrator_tol;
  return c;
}

struct CheckResult {
  std::string name;
  bool passed = false;
  Json metrics;
};

struct ScenarioReport {
  std::string name;
  std::string config_hash;
  std::vector<CheckResult> checks;
  std::string csv;
  Json series_summary;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
  }
  Json to_json(const Scenario& s) const {
    Json cs = Json::object();
    for (const auto& c : checks) cs[c.name] = {{"passed", c.passed}, {"metrics", c.metrics}};
    return {{"scenario", name},
            {"passed", passed()},
            {"checks", cs},
            {"series", series_summary},
            {"config", s.to_json()},
            {"provenance", {{"config_hash", config_hash}, {"version", kVersion}}}};
  }
};

/// Writes through a temporary file and a rename, so readers never see a partial file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + tmp);
    f << content;
    if (!f) throw Error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

namespace detail {

inline std::vector<double> geometric_times(double lo, double hi, double factor) {
  std::vector<double> t;
  for (double s = lo; s <= hi * (1.0 + 1e-12); s *= factor) t.push_back(s);
  return t;
}

inline CheckResult run_structure(const Scenario& s, const CubicTensor& c) {
  CheckResult r{"structure", false, Json::object()};
  const auto search = structure_search(c);
  r.metrics["search_outcome"] = to_string(search.outcome);
  if (search.a) r.metrics["search_A"] = search.a->to_json();
  if (!search.certificate.empty()) r.metrics["certificate"] = search.certificate;
  bool holds = search.outcome == SearchOutcome::found;
  if (s.a) {
    const auto v = structure_verify(c, *s.a);
    r.metrics["given_A_holds"] = v.holds;
    if (v.witness) r.metrics["witness_monomial"] = to_string(v.witness->monomial);
    holds = holds || v.holds;
  }
  r.passed = s.expect_structure == "holds" ? holds : search.outcome == SearchOutcome::none_found;
  return r;
}

inline CheckResult run_lemma3(const Scenario& s, const SimulationConfig& cfg) {
  CheckResult r{"lemma3", false, Json::object()};
  const VectorField v0 = make_initial_v(cfg.data);
  const auto ts = geometric_times(1.0, 64.0, std::sqrt(2.0));
  bool ok = true;
  Json per = Json::array();
  for (std::size_t j = 0; j < v0.components(); ++j) {
    const auto p1 = lemma3_remainder_probe(v0, cfg.tensor, ts, j);
    if (p1.vanishes) {
      per.push_back({{"component", j + 1}, {"vanishes", true}});
      continue;
    }
    VectorField twice = v0;
    twice *= 2.0;
    const auto p2 = lemma3_remainder_probe(twice, cfg.tensor, {ts.back()}, j);
    const double factor = p2.sup_remainder[0] / p1.sup_remainder.back();
    const bool pass = p1.slope <= s.thresholds.lemma3_slope_max &&
                      std::abs(factor - 8.0) <= 8.0 * s.thresholds.homogeneity_tol;
    ok = ok && pass;
    per.push_back({{"component", j + 1}, {"slope", p1.slope}, {"doubling_factor", factor}, {"passed", pass}});
  }
  r.metrics["components"] = per;
  r.passed = ok;
  return r;
}

inline CheckResult run_decomposition(const Scenario& s, const SimulationConfig& cfg, const SolutionTrajectory& traj) {
  CheckResult r{"decomposition", false, Json::object()};
  const auto& thr = s.thresholds;
  const VectorField v0 = to_spectral(make_initial_v(cfg.data));
  const SampledFunction hat = spectrum_function(*cfg.grid, v0[0]);
  const ComplexFn phi_hat = hat.as_function();
  double worst = 0.0;
  Json ids = Json::array();
  for (double t : {1.0, 4.0, 16.0, 64.0}) {
    FreeWaveEvaluator g(phi_hat, t, lemma1_quadrature(t));
    std::vector<double> xs;
    for (int i = -200; i <= 200; ++i) xs.push_back(0.95 * t * i / 200.0);
    const auto id = decomposition_identity(g, xs);
    worst = std::max(worst, id.residual);
    ids.push_back({{"t", t}, {"residual", id.residual}, {"scale", id.scale}});
  }
  const std::vector<double> ts{4, 8, 16, 32, 64};
  const auto v = fit_rate("V-1", ts, [&](double t) { return lemma1_v_error(phi_hat, t); }, 4, 64, thr.v_rate_max);
  const auto w = fit_rate("W", ts, [&](double t) { return lemma1_w_norm(phi_hat, t); }, 4, 64, thr.w_rate_max);
  // Klainerman-Sobolev ratio along the computed solution
  double ks_max = 0.0, early = 0.0, late = 0.0;
  std::vector<double> kt;
  for (double t : traj.times())
    if (t >= 1.0 && t <= 100.0) kt.push_back(t);
  for (std::size_t i = 0; i < kt.size(); ++i) {
    const double q = klainerman_sobolev_check(traj.v_at(kt[i]), kt[i]).ratio;
    ks_max = std::max(ks_max, q);
    double& half = i < kt.size() / 2 ? early : late;
    half = std::max(half, q);
  }
  const bool ks_ok = ks_max <= thr.ks_ratio_max && late <= 1.05 * early;
  r.metrics = {{"identity", ids}, {"identity_max_residual", worst}, {"v_rate", v.to_json()},
               {"w_rate", w.to_json()}, {"ks_ratio_max", ks_max}, {"ks_no_divergence", late <= 1.05 * early}};
  r.passed = worst <= thr.identity_tol && v.pass && w.pass && ks_ok;
  return r;
}

inline CheckResult run_profile(const Scenario& s, const SimulationConfig& cfg, const SolutionTrajectory& traj) {
  CheckResult r{"profile", false, Json::object()};
  const auto& thr = s.thresholds;
  const ProfileState psi1 = extract_psi(traj, 1.0, s.kappa);
  const double sup1 = psi1.sup();
  double sup_pde = 0.0;
  for (double t : traj.times())
    if (t >= 1.0) sup_pde = std::max(sup_pde, extract_psi(traj, t, s.kappa).sup());
  const auto ode = integrate_profile_ode(cfg.tensor, psi1, {s.T});
  const auto l0 = lyapunov(psi1, *s.a);
  const auto l1 = lyapunov(ode.states.back(), *s.a);
  const double lmax = *std::max_element(l0.begin(), l0.end());
  double drift = 0.0;
  for (std::size_t k = 0; k < l0.size(); ++k)
    if (l0[k] > 1e-20 * lmax) drift = std::max(drift, std::abs(l1[k] - l0[k]) / l0[k]);
  const double ratio = sup1 > 0.0 ? sup_pde / sup1 : 0.0;
  r.metrics = {{"lyapunov_drift", drift}, {"psi_sup_t1", sup1}, {"psi_sup_window", sup_pde},
               {"psi_growth", ratio}, {"ode_steps", ode.steps}, {"ode_rejected", ode.rejected}};
  r.passed = drift <= thr.lyapunov_tol && ratio <= thr.psi_growth_max;
  return r;
}

template <class F>
CheckResult guarded(const Scenario& s, Check c, F&& f) {
  try {
    return f();
  } catch (const ScenarioError&) {
    throw;
  } catch (const Error& e) {
    throw ScenarioError(s.name, to_string(c), e.what());
  }
}

}  // namespace detail

/// Runs every requested check.  With a non-empty out_dir, writes <name>.json and <name>.csv there.
inline ScenarioReport run_scenario(const Scenario& s, const std::filesystem::path& out_dir = {}) {
  s.validate();
  const SimulationConfig cfg = s.simulation_config();
  const CubicTensor c = cfg.tensor;
  ScenarioReport rep;
  rep.name = s.name;
  rep.config_hash = config_hash(s.to_json());

  std::optional<SolutionTrajectory> traj;
  std::vector<SeriesRow> rows;
  auto need_traj = [&] {
    if (traj) return;
    traj = simulate(cfg);
    rows = trajectory_series(*traj, s.gamma);
  };

  for (Check k : s.checks) {
    rep.checks.push_back(detail::guarded(s, k, [&]() -> CheckResult {
      switch (k) {
        case Check::structure: return detail::run_structure(s, c);
        case Check::decay: {
          need_traj();
          const auto d = decay_report(rows, s.decay_window(cfg), s.thresholds, rep.config_hash);
          return {"decay", d.passed, d.to_json()};
        }
        case Check::counterexample_growth: {
          need_traj();
          const auto g = counterexample_growth(rows, s.decay_window(cfg), s.growth_component, s.free_component,
                                               s.thresholds);
          return {"counterexample_growth", g.passed, g.to_json()};
        }
        case Check::epsilon_sweep: {
          need_traj();
          double k_full = 0.0, k_half = 0.0;
          for (const auto& r : rows) k_full = std::max(k_full, std::sqrt(1.0 + r.t) * r.u_h1_inf);
          const auto half = simulate(s.simulation_config(0.5));
          for (const auto& r : trajectory_series(half, std::nullopt))
            k_half = std::max(k_half, std::sqrt(1.0 + r.t) * r.u_h1_inf);
          const double ratio = k_full / k_half;
          return {"epsilon_sweep",
                  ratio >= s.thresholds.sweep_ratio[0] && ratio <= s.thresholds.sweep_ratio[1],
                  {{"epsilon", s.data.epsilon}, {"K_eps", k_full}, {"K_half_eps", k_half}, {"ratio", ratio}}};
        }
        case Check::integrators: {
          const auto ci = compare_integrators(s);
          return {"integrators", ci.passed, ci.to_json()};
        }
        case Check::lemma3: return detail::run_lemma3(s, cfg);
        case Check::decomposition: need_traj(); return detail::run_decomposition(s, cfg, *traj);
        case Check::profile: need_traj(); return detail::run_profile(s, cfg, *traj);
      }
      throw Error("unreachable");
    }));
  }

  if (traj) {
    rep.csv = series_csv(rows);
    const auto xt = xt_norm(*traj, s.gamma);
    rep.series_summary = {{"snapshots", traj->size()},
                          {"xt_norm", xt.value},
                          {"xt_sup_terms", xt.sup_terms},
                          {"data_size", cfg.data.size()},
                          {"warnings", traj->warnings()}};
  }
  if (!out_dir.empty()) {
    atomic_write(out_dir / (s.name + ".json"), rep.to_json(s).dump(2) + "\n");
    if (!rep.csv.empty()) atomic_write(out_dir / (s.name + ".csv"), rep.csv);
  }
  return rep;
}

/// Runs scenarios concurrently (one task each); results keep the input order.
inline std::vector<ScenarioReport> run_batch(const std::vector<Scenario>& scenarios,
                                             const std::filesystem::path& out_dir = {}) {
  std::vector<std::future<ScenarioReport>> jobs;
  for (const auto& s : scenarios)
    jobs.push_back(std::async(std::launch::async, [&s, &out_dir] { return run_scenario(s, out_dir); }));
  std::vector<ScenarioReport> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

}  // namespace kgsys
