#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kgsys/harness.hpp"

using namespace kgsys;

namespace {

std::vector<double> log_times(double lo, double hi, std::size_t n) {
  std::vector<double> t;
  for (std::size_t i = 0; i < n; ++i) t.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1.0)));
  return t;
}

// Small, fast scenario: L = 100 leaves room for T = 40 before wraparound.
Scenario small_free() {
  Scenario s = builtin_scenario("free");
  s.name = "small_free";
  s.grid.half_width = 100.0;
  s.grid.n_points = 1024;
  s.T = 40.0;
  s.window = std::array<double, 2>{10.0, 40.0};
  s.checks = {Check::decay};
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(DecayFit, PurePower) {
  const auto t = log_times(10.0, 200.0, 40);
  std::vector<double> v;
  for (double s : t) v.push_back(3.0 * std::pow(s, -0.5));
  const auto f = fit_decay_exponent(t, v, 10.0, 200.0);
  EXPECT_NEAR(f.slope, -0.5, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-10);
  EXPECT_FALSE(f.curved);
}

TEST(DecayFit, LogCorrectionShowsUpAsCurvature) {
  const auto t = log_times(10.0, 200.0, 40);
  std::vector<double> v;
  for (double s : t) v.push_back(std::pow(s, -0.5) * std::log(s));
  const auto f = fit_decay_exponent(t, v, 10.0, 200.0);
  EXPECT_GT(f.slope, -0.35);
  EXPECT_TRUE(f.curved);
}

TEST(DecayFit, ConstantAndBadInput) {
  const auto t = log_times(1.0, 100.0, 20);
  EXPECT_NEAR(fit_decay_exponent(t, std::vector<double>(t.size(), 2.0), 1.0, 100.0).slope, 0.0, 1e-12);
  EXPECT_THROW(fit_decay_exponent(t, std::vector<double>(t.size(), 1.0), 50.0, 60.0), PreconditionError);
  auto v = std::vector<double>(t.size(), 1.0);
  v[5] = 0.0;
  EXPECT_THROW(fit_decay_exponent(t, v, 1.0, 100.0), PreconditionError);
  EXPECT_THROW(fit_decay_exponent(t, {1.0}, 1.0, 100.0), DimensionMismatch);
}

TEST(BoundedProxy, FlatVersusGrowing) {
  const auto t = log_times(10.0, 200.0, 60);
  std::vector<double> flat, grow;
  for (double s : t) {
    flat.push_back(1.0 - 1.0 / s);
    grow.push_back(std::log(s));
  }
  const auto a = bounded_proxy(t, flat, 10.0, 200.0, 0.05);
  EXPECT_TRUE(a.bounded);
  EXPECT_LT(a.growth, 0.01);
  const auto b = bounded_proxy(t, grow, 10.0, 200.0, 0.05);
  EXPECT_FALSE(b.bounded);
  // ln 200 / ln(10 + 2 (190) / 3), up to the sampling of the cut
  EXPECT_NEAR(b.growth, std::log(200.0) / std::log(136.67) - 1.0, 0.02);
  EXPECT_THROW(bounded_proxy(t, flat, 150.0, 151.0, 0.05), PreconditionError);
}

TEST(Scenario, JsonRoundTripAndHash) {
  for (const auto& name : builtin_scenario_names()) {
    const Scenario s = builtin_scenario(name);
    const Scenario r = Scenario::from_json(s.to_json());
    EXPECT_EQ(r.to_json(), s.to_json()) << name;
    EXPECT_EQ(config_hash(r.to_json()), config_hash(s.to_json()));
  }
  Scenario a = builtin_scenario("complex_cubic"), b = a;
  b.data.epsilon = 0.05;
  EXPECT_NE(config_hash(a.to_json()), config_hash(b.to_json()));
  EXPECT_EQ(config_hash(a.to_json()).size(), 16u);
}

TEST(Scenario, ThresholdOverrides) {
  Json j = builtin_scenario("scalar_cubic").to_json();
  j["thresholds"] = {{"decay_slope", {-0.7, -0.3}}, {"growth_min", 0.5}};
  const auto s = Scenario::from_json(j);
  EXPECT_EQ(s.thresholds.decay_slope[0], -0.7);
  EXPECT_EQ(s.thresholds.growth_min, 0.5);
  EXPECT_EQ(s.thresholds.pearson_min, 0.9);
  j["thresholds"] = {{"decay_slope", {-0.3, -0.7}}};
  EXPECT_THROW(Scenario::from_json(j), PreconditionError);
}

TEST(Scenario, Validation) {
  Scenario s = builtin_scenario("complex_cubic");
  s.validate();
  s.a.reset();
  EXPECT_THROW(s.validate(), PreconditionError);
  s = builtin_scenario("complex_cubic");
  s.a = HermitianForm::identity(3);
  EXPECT_THROW(s.validate(), DimensionMismatch);
  s = builtin_scenario("complex_cubic");
  s.expect_structure = "maybe";
  EXPECT_THROW(s.validate(), PreconditionError);
  s = builtin_scenario("complex_cubic");
  s.T = 1000.0;  // past the wraparound time on L = 400
  EXPECT_THROW(s.validate(), PreconditionError);
  s = builtin_scenario("counterexample");
  s.growth_component = 3;
  EXPECT_THROW(s.validate(), PreconditionError);
  EXPECT_THROW(builtin_scenario("nope"), PreconditionError);
  EXPECT_THROW(check_from_string("nope"), PreconditionError);
  Json j = {{"name", "x"}};
  EXPECT_THROW(Scenario::from_json(j), PreconditionError);
}

TEST(Scenario, DefaultDecayWindow) {
  const Scenario s = builtin_scenario("complex_cubic");
  const auto w = s.decay_window(s.simulation_config());
  EXPECT_EQ(w[0], 10.0);
  EXPECT_EQ(w[1], 200.0);
  Scenario t = s;
  t.window = std::array<double, 2>{50.0, 20.0};
  EXPECT_THROW(t.decay_window(t.simulation_config()), PreconditionError);
}

TEST(Integrators, ZeroDataGivesZeroDeviation) {
  Scenario s = builtin_scenario("complex_cubic");
  s.grid.half_width = 50.0;
  s.grid.n_points = 256;
  s.data.epsilon = 0.0;
  s.thresholds.integrator_T = 1.0;
  const auto c = compare_integrators(s);
  EXPECT_EQ(c.deviation, 0.0);
  EXPECT_EQ(c.order, 0.0);
  EXPECT_TRUE(c.passed);
}

TEST(RunScenario, FreeDecayAndFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "kgsys_test_harness";
  std::filesystem::remove_all(dir);
  const Scenario s = small_free();
  const auto rep = run_scenario(s, dir);
  ASSERT_EQ(rep.checks.size(), 1u);
  EXPECT_TRUE(rep.passed()) << rep.to_json(s).dump(2);
  const double slope = rep.checks[0].metrics.at("slope").get<double>();
  EXPECT_NEAR(slope, -0.5, 0.05);

  const Json written = Json::parse(slurp(dir / "small_free.json"));
  EXPECT_EQ(written.at("provenance").at("config_hash"), config_hash(s.to_json()));
  EXPECT_EQ(written.at("checks").at("decay").at("passed"), true);
  const std::string csv = slurp(dir / "small_free.csv");
  EXPECT_EQ(csv.substr(0, 2), "t,");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 42);  // header + t = 0..40
  for (const auto& e : std::filesystem::directory_iterator(dir)) EXPECT_NE(e.path().extension(), ".tmp");
  std::filesystem::remove_all(dir);
}

TEST(RunScenario, ModuleErrorsNameTheScenario) {
  Scenario s = small_free();
  s.window = std::array<double, 2>{10.0, 11.0};  // too few points to fit
  try {
    run_scenario(s);
    FAIL() << "expected ScenarioError";
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.scenario, "small_free");
    EXPECT_EQ(e.check, "decay");
  }
}

TEST(RunScenario, BatchKeepsOrder) {
  Scenario a = small_free(), b = small_free();
  b.name = "second";
  b.data.epsilon = 0.2;
  const auto reps = run_batch({a, b});
  ASSERT_EQ(reps.size(), 2u);
  EXPECT_EQ(reps[0].name, "small_free");
  EXPECT_EQ(reps[1].name, "second");
  EXPECT_NE(reps[0].config_hash, reps[1].config_hash);
}
