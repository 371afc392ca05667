#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kgsys/nonlinearity.hpp"

using namespace kgsys;

namespace {

Rational q(long num, long den) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

}  // namespace

TEST(Tensor, NamedTensors) {
  EXPECT_EQ(named_tensor("complex_cubic"), rho_family(1, 1, 1, 1));
  EXPECT_EQ(named_tensor("rho_family(1, 2, 3/2, -4)").coefficient(1, 0, 0, 1), Rational(3, 2));
  EXPECT_EQ(named_tensor("counterexample").coefficient(1, 0, 0, 0), 1);
  EXPECT_EQ(named_tensor("scalar_cubic").components(), 1);
  EXPECT_TRUE(named_tensor("zero(3)").is_zero());
  EXPECT_THROW(named_tensor("quartic"), PreconditionError);
}

TEST(Tensor, JsonRoundTripExact) {
  auto t = rho_family(Rational(1, 3), 2, parse_rational("0.25"), -7);
  auto back = CubicTensor::from_json(nlohmann::json::parse(t.to_json().dump()));
  EXPECT_EQ(back, t);
  auto j = nlohmann::json::parse(R"({"n":2,"entries":[[2,1,1,1,"1"],[1,1,2,2,0.5]]})");
  auto c = CubicTensor::from_json(j);
  EXPECT_EQ(c.coefficient(1, 0, 0, 0), 1);
  EXPECT_EQ(c.coefficient(0, 0, 1, 1), Rational(1, 2));
  EXPECT_THROW(CubicTensor::from_json(nlohmann::json::parse(R"({"n":2,"entries":[[3,1,1,1,"1"]]})")),
               DimensionMismatch);
  EXPECT_THROW(parse_rational("1/0"), PreconditionError);
}

TEST(EvalF, Examples) {
  EXPECT_EQ(eval_F(scalar_cubic(), std::vector<double>{2.0})[0], 8.0);
  auto f = eval_F(complex_cubic(), std::vector<double>{1.0, 1.0});
  EXPECT_EQ(f[0], 2.0);
  EXPECT_EQ(f[1], 2.0);
  auto z = eval_F(complex_cubic(), std::vector<double>{0.0, 0.0});
  EXPECT_EQ(z[0], 0.0);
  EXPECT_THROW(eval_F(complex_cubic(), std::vector<double>{1.0}), DimensionMismatch);
}

TEST(EvalF, HomogeneityExact) {
  auto c = rho_family(Rational(3, 7), -2, 5, Rational(1, 9));
  c.add({0, 0, 1, 0}, Rational(-11, 4));
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> d(-50, 50);
  for (int trial = 0; trial < 50; ++trial) {
    const Rational lambda = q(d(rng), 1 + std::abs(d(rng)));
    std::vector<Rational> u{q(d(rng), 7), q(d(rng), 3)};
    std::vector<Rational> lu{lambda * u[0], lambda * u[1]};
    auto a = eval_F(c, lu);
    auto b = eval_F(c, u);
    for (int j = 0; j < 2; ++j) EXPECT_EQ(a[j], lambda * lambda * lambda * b[j]);
  }
}

TEST(EvalFtilde, RealSliceIsThreeF) {
  auto c = rho_family(2, Rational(1, 3), -1, 4);
  c.add({1, 0, 1, 1}, 5);
  std::mt19937 rng(2);
  std::uniform_int_distribution<int> d(-20, 20);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Rational> y{q(d(rng), 5), q(d(rng), 2)};
    std::vector<QComplex> yc{QComplex(y[0]), QComplex(y[1])};
    auto ft = eval_Ftilde(c, yc);
    auto f = eval_F(c, y);
    for (int j = 0; j < 2; ++j) EXPECT_EQ(ft[j], QComplex(3 * f[j]));
  }
}

TEST(EvalFtilde, Examples) {
  auto ft = eval_Ftilde(rho_family(5, 2, 3, 4), std::vector<cplx>{1.0, 0.0});
  EXPECT_EQ(ft[0], cplx(15.0, 0.0));
  EXPECT_EQ(ft[1], cplx(0.0, 0.0));
  auto s = eval_Ftilde(scalar_cubic(), std::vector<cplx>{cplx(0.0, 1.0)});
  EXPECT_NEAR(std::abs(s[0] - cplx(0.0, 3.0)), 0.0, 1e-15);
}

namespace {

GridPtr small_grid() { return SpectralGrid::make(20.0, 256); }

}  // namespace

TEST(EvalFField, ConstantAndZero) {
  auto g = small_grid();
  auto two = sample(g, {[](double) { return cplx(2.0, 0.0); }});
  auto f = eval_F(scalar_cubic(), two);
  for (auto z : f[0]) EXPECT_NEAR(z.real(), 8.0, 1e-12);
  VectorField zero(g, 2, Representation::physical);
  auto fz = eval_F(complex_cubic(), zero);
  for (std::size_t j = 0; j < 2; ++j)
    for (auto z : fz[j]) EXPECT_EQ(z, cplx{});
}

TEST(EvalFField, DealiasedProductIsExactProjection) {
  // cos^3(kx) = (3 cos kx + cos 3kx) / 4; with modes well inside the band it is reproduced exactly.
  auto g = small_grid();
  const double k = g->dxi() * 5;
  auto u = sample(g, {[=](double x) { return cplx(std::cos(k * x), 0.0); }});
  auto f = eval_F(scalar_cubic(), u);
  for (std::size_t m = 0; m < g->size(); ++m) {
    const double x = g->x()[m];
    EXPECT_NEAR(f[0][m].real(), (3 * std::cos(k * x) + std::cos(3 * k * x)) / 4, 1e-12);
  }
}

TEST(EvalFField, RejectsComplexArgument) {
  auto g = small_grid();
  auto u = sample(g, {[](double x) { return cplx(std::exp(-x * x), 0.5); }});
  EXPECT_THROW(eval_F(scalar_cubic(), u), PreconditionError);
}

TEST(EvalG, TwoFormsAgree) {
  auto g = small_grid();
  const double k = g->dxi() * 7;
  auto v = sample(g, {[=](double x) { return std::polar(0.3, k * x); }});
  auto a = eval_G(scalar_cubic(), v);
  auto b = eval_G_real_part_form(scalar_cubic(), v);
  double err = 0.0;
  for (std::size_t m = 0; m < g->size(); ++m) err = std::max(err, std::abs(a[0][m] - b[0][m]));
  EXPECT_LT(err, 1e-12);

  auto w = sample(g, {[](double x) { return cplx(std::exp(-x * x), 0.2 * std::exp(-(x - 1) * (x - 1))); },
                      [](double x) { return cplx(0.0, std::exp(-0.5 * x * x)); }});
  auto c1 = eval_G(complex_cubic(), w);
  auto c2 = eval_G_real_part_form(complex_cubic(), w);
  err = 0.0;
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t m = 0; m < g->size(); ++m) err = std::max(err, std::abs(c1[j][m] - c2[j][m]));
  EXPECT_LT(err, 1e-12);
}

TEST(EvalG, RealArgumentHomogeneity) {
  auto g = small_grid();
  auto v = sample(g, {[](double x) { return cplx(std::exp(-x * x), 0.0); }});
  auto a = eval_G(scalar_cubic(), v);
  auto b = cplx(0.0, 4.0) * bessel_multiplier(eval_F(scalar_cubic(), v), -1.0);
  for (std::size_t m = 0; m < g->size(); ++m) EXPECT_NEAR(std::abs(a[0][m] - b[0][m]), 0.0, 1e-12);
  VectorField zero(g, 1, Representation::physical);
  auto gz = eval_G(scalar_cubic(), zero);
  for (auto z : gz[0]) EXPECT_EQ(z, cplx{});
}
