// kgsys command-line front end.
//
// Exit status: 0 when every declared assertion passes, 1 when a check fails,
// 2 on a usage or library error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "kgsys/kgsys.hpp"

using namespace kgsys;
namespace fs = std::filesystem;

namespace {

Json read_json_arg(const std::string& arg) {
  // a file path, or inline JSON
  if (fs::exists(arg)) {
    std::ifstream f(arg);
    if (!f) throw Error("cannot read " + arg);
    return Json::parse(f);
  }
  try {
    return Json::parse(arg);
  } catch (const Json::parse_error&) {
    return Json(arg);  // bare name such as complex_cubic
  }
}

void emit(const Json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    atomic_write(out, text);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_rational(item).get_d());
  return out;
}

/// Plain-text snapshot: a header then one row per grid point, x u_1..u_N ut_1..ut_N.
void dump_snapshot(const fs::path& path, double t, const VectorField& v_spectral) {
  const VectorField u = reconstruct_u(v_spectral), ut = reconstruct_ut(v_spectral);
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# kgsys snapshot t = " << t << "\n# columns: x";
  for (std::size_t j = 0; j < u.components(); ++j) os << " u_" << j + 1;
  for (std::size_t j = 0; j < u.components(); ++j) os << " ut_" << j + 1;
  os << "\n";
  const auto& x = u.grid().x();
  for (std::size_t m = 0; m < x.size(); ++m) {
    os << x[m];
    for (std::size_t j = 0; j < u.components(); ++j) os << " " << u[j][m].real();
    for (std::size_t j = 0; j < u.components(); ++j) os << " " << ut[j][m].real();
    os << "\n";
  }
  atomic_write(path, os.str());
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(std::move(cells));
  }
  if (rows.size() < 2) throw PreconditionError(path + ": no data rows");
  return rows;
}

int cmd_check_structure(const std::string& tensor_arg, const std::string& a_arg, std::size_t samples,
                        std::uint64_t seed, const std::string& out) {
  const CubicTensor c = tensor_from_json(read_json_arg(tensor_arg));
  Json j = {{"tensor", c.to_json()}};
  const auto search = structure_search(c, samples, seed);
  j["search"] = {{"outcome", to_string(search.outcome)}, {"solution_dimension", search.solution_dimension}};
  if (search.a) j["search"]["A"] = search.a->to_json();
  if (!search.certificate.empty()) j["search"]["certificate"] = search.certificate;
  bool holds = search.outcome == SearchOutcome::found;
  if (!a_arg.empty()) {
    const HermitianForm a = HermitianForm::from_json(read_json_arg(a_arg));
    const auto v = structure_verify(c, a);
    j["verify"] = {{"A", a.to_json()}, {"holds", v.holds}};
    if (v.witness) {
      j["verify"]["witness"] = {{"monomial", to_string(v.witness->monomial)},
                                {"coefficient", to_string(v.witness->coefficient)},
                                {"partner_coefficient", to_string(v.witness->partner_coefficient)},
                                {"value", v.witness->value}};
    }
    holds = v.holds;
  }
  j["holds"] = holds;
  emit(j, out);
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, bool dump, const std::string& integrator) {
  const Json cj = read_json_arg(config_path);
  const SimulationConfig cfg = config_from_json(cj);
  fs::create_directories(out_dir);
  SnapshotObserver obs;
  if (dump)
    obs = [&](double t, const VectorField& v) {
      std::ostringstream name;
      name << "snapshot_" << std::fixed << std::setprecision(3) << t << ".txt";
      dump_snapshot(fs::path(out_dir) / name.str(), t, v);
    };
  SolutionTrajectory traj = integrator == "leapfrog" ? leapfrog_reference(cfg, obs) : simulate(cfg, obs);
  const auto rows = trajectory_series(traj, cfg.gamma);
  atomic_write(fs::path(out_dir) / "series.csv", series_csv(rows));
  const auto xt = xt_norm(traj, cfg.gamma);
  const Json summary = {{"integrator", integrator},
                        {"snapshots", traj.size()},
                        {"data_size", cfg.data.size()},
                        {"valid_time", cfg.valid_time()},
                        {"xt_norm", xt.value},
                        {"xt_sup_terms", xt.sup_terms},
                        {"warnings", traj.warnings()},
                        {"config", cj},
                        {"provenance", {{"config_hash", config_hash(cj)}, {"version", kVersion}}}};
  atomic_write(fs::path(out_dir) / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_decay_fit(const std::string& csv, const std::string& column, double lo, double hi, double bounded_tol,
                  const std::string& out) {
  const auto rows = read_csv(csv);
  const auto& head = rows.front();
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < head.size(); ++i)
      if (head[i] == name) return i;
    throw PreconditionError(csv + ": no column '" + name + "'");
  };
  const std::size_t ct = col("t"), cv = col(column);
  std::vector<double> t, v, w;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    t.push_back(std::stod(rows[r].at(ct)));
    v.push_back(std::stod(rows[r].at(cv)));
    w.push_back(std::sqrt(1.0 + t.back()) * v.back());
  }
  const auto fit = fit_decay_exponent(t, v, lo, hi);
  const auto proxy = bounded_proxy(t, w, lo, hi, bounded_tol);
  emit({{"column", column},
        {"slope", fit.slope},
        {"stderr", fit.stderr_slope},
        {"intercept", fit.intercept},
        {"points", fit.points},
        {"window", {lo, hi}},
        {"curvature", fit.curvature},
        {"curved", fit.curved},
        {"bounded_growth", proxy.growth},
        {"bounded", proxy.bounded}},
       out);
  return 0;
}

int cmd_decompose_verify(const std::vector<double>& ts, const std::string& profile, const std::string& out) {
  ComplexFn phi_hat;
  if (profile == "gaussian")
    phi_hat = [](double xi) { return cplx(std::sqrt(2.0) * std::exp(-xi * xi), 0.0); };
  else if (profile == "cusp")
    phi_hat = [](double xi) { return cplx(std::pow(std::abs(xi - 0.5), 0.55) * std::exp(-xi * xi), 0.0); };
  else
    throw PreconditionError("unknown profile '" + profile + "' (gaussian, cusp)");
  Json ids = Json::array();
  for (double t : ts) {
    FreeWaveEvaluator g(phi_hat, t, lemma1_quadrature(t));
    std::vector<double> xs;
    for (int i = -200; i <= 200; ++i) xs.push_back(0.95 * t * i / 200.0);
    const auto r = decomposition_identity(g, xs);
    ids.push_back({{"t", t}, {"residual", r.residual}, {"scale", r.scale}, {"points", r.points}});
  }
  Json j = {{"profile", profile}, {"identity", ids}};
  std::vector<double> rt;
  for (double t : ts)
    if (t >= 4.0) rt.push_back(t);
  if (rt.size() >= 2) {
    const double lo = rt.front(), hi = rt.back();
    j["v_rate"] = fit_rate("V-1", rt, [&](double t) { return lemma1_v_error(phi_hat, t); }, lo, hi, -0.2).to_json();
    j["w_rate"] = fit_rate("W", rt, [&](double t) { return lemma1_w_norm(phi_hat, t); }, lo, hi, -0.45).to_json();
  }
  emit(j, out);
  return 0;
}

int cmd_lemma3(const std::string& tensor_arg, std::size_t component, const std::vector<double>& ts,
               const std::string& mu, double amplitude, double L, std::size_t n, const std::string& out) {
  const CubicTensor c = tensor_from_json(read_json_arg(tensor_arg));
  const auto comps = static_cast<std::size_t>(c.components());
  if (component < 1 || component > comps) throw PreconditionError("component out of range");
  const auto grid = SpectralGrid::make(L, n);
  std::vector<ComplexFn> fs(comps, [amplitude](double x) { return cplx(amplitude * std::exp(-x * x / 4.0), 0.0); });
  const VectorField phi = sample(grid, fs);
  const MuConvention conv = mu == "unsigned" ? MuConvention::unsigned_hessian : MuConvention::stationary_phase;
  if (mu != "unsigned" && mu != "stationary") throw PreconditionError("--mu must be 'stationary' or 'unsigned'");
  Warnings w;
  const auto p = lemma3_remainder_probe(phi, c, ts, component - 1, conv, &w);
  Json j = p.to_json();
  j["component"] = component;
  j["mu"] = mu;
  j["warnings"] = w;
  emit(j, out);
  return 0;
}

int cmd_profile_ode(const std::string& config_path, const std::string& a_arg, bool nonresonant,
                    const std::string& out_dir) {
  const Json cj = read_json_arg(config_path);
  const SimulationConfig cfg = config_from_json(cj);
  const auto traj = simulate(cfg);
  const ProfileState psi1 = extract_psi(traj, 1.0, cfg.kappa);
  std::vector<double> outs;
  for (double t : traj.times())
    if (t > 1.0) outs.push_back(t);
  ProfileOdeOptions opt;
  opt.include_nonresonant = nonresonant;
  const auto ode = integrate_profile_ode(cfg.tensor, psi1, outs, opt);
  std::optional<HermitianForm> a;
  if (!a_arg.empty()) a = HermitianForm::from_json(read_json_arg(a_arg));
  std::optional<std::vector<double>> l0;
  if (a) l0 = lyapunov(psi1, *a);

  std::ostringstream csv;
  csv << std::setprecision(17) << "t,psi_sup_pde,psi_sup_ode,abs_gap" << (a ? ",lyapunov_drift" : "") << "\n";
  double drift_max = 0.0, gap_max = 0.0;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const ProfileState pde = extract_psi(traj, outs[i], cfg.kappa);
    const ProfileState& o = ode.states[i];
    double gap = 0.0;
    for (std::size_t j = 0; j < pde.psi.size(); ++j)
      for (std::size_t k = 0; k < pde.psi[j].size(); ++k)
        gap = std::max(gap, std::abs(std::abs(pde.psi[j][k]) - std::abs(o.psi[j][k])));
    gap_max = std::max(gap_max, gap);
    csv << outs[i] << "," << pde.sup() << "," << o.sup() << "," << gap;
    if (a) {
      const auto l1 = lyapunov(o, *a);
      const double lmax = *std::max_element(l0->begin(), l0->end());
      double d = 0.0;
      for (std::size_t k = 0; k < l1.size(); ++k)
        if ((*l0)[k] > 1e-20 * lmax) d = std::max(d, std::abs(l1[k] - (*l0)[k]) / (*l0)[k]);
      drift_max = std::max(drift_max, d);
      csv << "," << d;
    }
    csv << "\n";
  }
  fs::create_directories(out_dir);
  atomic_write(fs::path(out_dir) / "profile.csv", csv.str());
  Json j = {{"kappa", cfg.kappa},
            {"nonresonant", nonresonant},
            {"psi_sup_t1", psi1.sup()},
            {"max_abs_gap", gap_max},
            {"ode_steps", ode.steps},
            {"ode_rejected", ode.rejected},
            {"provenance", {{"config_hash", config_hash(cj)}, {"version", kVersion}}}};
  if (a) j["lyapunov_drift_max"] = drift_max;
  atomic_write(fs::path(out_dir) / "profile.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_run(const std::vector<std::string>& names, bool all, const std::string& out_dir) {
  std::vector<Scenario> scenarios;
  if (all)
    for (const auto& n : builtin_scenario_names()) scenarios.push_back(builtin_scenario(n));
  for (const auto& n : names) {
    if (fs::exists(n))
      scenarios.push_back(Scenario::from_json(read_json_arg(n)));
    else
      scenarios.push_back(builtin_scenario(n));
  }
  if (scenarios.empty()) throw PreconditionError("run: no scenarios given");
  const auto reports = run_batch(scenarios, out_dir);
  bool ok = true;
  for (const auto& r : reports) {
    std::cout << (r.passed() ? "PASS " : "FAIL ") << r.name << " [" << r.config_hash << "]\n";
    for (const auto& c : r.checks) std::cout << "  " << (c.passed ? "pass " : "FAIL ") << c.name << "\n";
    ok = ok && r.passed();
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cubic Klein-Gordon systems in 1D: structure checks, simulation and decay diagnostics"};
  app.require_subcommand(1);

  std::string out, tensor_arg = "complex_cubic", a_arg;
  std::size_t samples = 20000;
  std::uint64_t seed = 7;
  auto* cs = app.add_subcommand("check-structure", "Decide the structural condition for a cubic tensor");
  cs->add_option("-t,--tensor", tensor_arg, "Tensor name, JSON file or inline JSON");
  cs->add_option("-A,--matrix", a_arg, "Hermitian A to verify (JSON rows, file or inline)");
  cs->add_option("--samples", samples, "Integer combinations tried by the search");
  cs->add_option("--seed", seed, "Search seed");
  cs->add_option("-o,--out", out, "Write the report here instead of stdout");

  std::string config, out_dir = "out", integrator = "rk4";
  bool dump = false;
  auto* sim = app.add_subcommand("simulate", "Integrate a configuration and write snapshots and series");
  sim->add_option("-c,--config", config, "Simulation config (JSON)")->required();
  sim->add_option("-d,--out-dir", out_dir, "Output directory");
  sim->add_flag("--dump-snapshots", dump, "Write plain-text snapshot files");
  sim->add_option("--integrator", integrator, "rk4 or leapfrog")->check(CLI::IsMember({"rk4", "leapfrog"}));

  std::string csv, column = "u_h1_inf";
  double lo = 10.0, hi = 200.0, bounded_tol = 0.05;
  auto* df = app.add_subcommand("decay-fit", "Fit a power law to a CSV column");
  df->add_option("--csv", csv, "Series CSV")->required();
  df->add_option("--column", column, "Column to fit");
  df->add_option("--lo", lo, "Window start");
  df->add_option("--hi", hi, "Window end");
  df->add_option("--bounded-tol", bounded_tol, "Bounded-proxy tolerance");
  df->add_option("-o,--out", out, "Write the report here instead of stdout");

  std::string t_list = "1,4,16,64", profile = "gaussian";
  auto* dv = app.add_subcommand("decompose-verify", "Check the free-wave decomposition and its rates");
  dv->add_option("--times", t_list, "Comma-separated times >= 1");
  dv->add_option("--profile", profile, "gaussian or cusp");
  dv->add_option("-o,--out", out, "Write the report here instead of stdout");

  std::size_t component = 1, n_points = 8192;
  std::string probe_t, mu = "stationary";
  double amplitude = 1.0, half_width = 400.0;
  auto* l3 = app.add_subcommand("lemma3-probe", "Remainder of the large-time factorization of the nonlinearity");
  l3->add_option("-t,--tensor", tensor_arg, "Tensor name, JSON file or inline JSON");
  l3->add_option("--component", component, "Output component (1-based)");
  l3->add_option("--times", probe_t, "Comma-separated times (default 1 .. 64, ratio sqrt 2)");
  l3->add_option("--mu", mu, "stationary or unsigned");
  l3->add_option("--amplitude", amplitude, "Amplitude of the Gaussian data e^{-x^2/4}");
  l3->add_option("--L", half_width, "Half width of the box");
  l3->add_option("--n", n_points, "Grid points");
  l3->add_option("-o,--out", out, "Write the report here instead of stdout");

  bool nonresonant = false;
  auto* po = app.add_subcommand("profile-ode", "Compare the PDE profile with the profile ODE");
  po->add_option("-c,--config", config, "Simulation config (JSON)")->required();
  po->add_option("-A,--matrix", a_arg, "Hermitian A for the Lyapunov functional");
  po->add_flag("--nonresonant", nonresonant, "Include the oscillating interactions");
  po->add_option("-d,--out-dir", out_dir, "Output directory");

  std::vector<std::string> scenarios;
  bool all = false;
  auto* run = app.add_subcommand("run", "Run scenarios (built-in names or JSON files) in parallel");
  run->add_option("scenarios", scenarios, "Scenario names or files");
  run->add_flag("--all", all, "Run every built-in scenario");
  run->add_option("-d,--out-dir", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*cs) return cmd_check_structure(tensor_arg, a_arg, samples, seed, out);
    if (*sim) return cmd_simulate(config, out_dir, dump, integrator);
    if (*df) return cmd_decay_fit(csv, column, lo, hi, bounded_tol, out);
    if (*dv) return cmd_decompose_verify(parse_list(t_list), profile, out);
    if (*l3) {
      std::vector<double> ts = parse_list(probe_t);
      if (ts.empty())
        for (double s = 1.0; s <= 64.0 * (1 + 1e-12); s *= std::sqrt(2.0)) ts.push_back(s);
      return cmd_lemma3(tensor_arg, component, ts, mu, amplitude, half_width, n_points, out);
    }
    if (*po) return cmd_profile_ode(config, a_arg, nonresonant, out_dir);
    if (*run) return cmd_run(scenarios, all, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
