#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kgsys/grid.hpp"

using namespace kgsys;

namespace {

VectorField gaussian(const GridPtr& g, double a, double c = 0.0) {
  return sample(g, {[=](double x) { return cplx(std::exp(-a * (x - c) * (x - c)), 0.0); }});
}

double max_abs_diff(const VectorField& a, const VectorField& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.components(); ++j)
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[j][k] - b[j][k]));
  return m;
}

}  // namespace

TEST(SpectralGrid, RejectsBadParameters) {
  EXPECT_THROW(SpectralGrid(0.0, 64), PreconditionError);
  EXPECT_THROW(SpectralGrid(1.0, 100), PreconditionError);
  EXPECT_THROW(SpectralGrid(1.0, 64, 1), PreconditionError);
}

TEST(SpectralGrid, FrequenciesSymmetricAndUniform) {
  auto g = SpectralGrid::make(20.0, 64);
  EXPECT_DOUBLE_EQ(g->dx() * 64, 40.0);
  for (std::size_t k = 0; k < 64; ++k) EXPECT_NEAR(g->xi()[k], std::numbers::pi / 20.0 * g->mode(k), 1e-14);
  for (long m = 1; m < 32; ++m)
    EXPECT_DOUBLE_EQ(g->xi()[g->index_of_mode(m)], -g->xi()[g->index_of_mode(-m)]);
}

TEST(Transform, ZeroMapsToZero) {
  auto g = SpectralGrid::make(20.0, 512);
  VectorField z(g, 2, Representation::physical);
  auto s = forward_transform(z);
  for (std::size_t j = 0; j < 2; ++j)
    for (auto v : s[j]) EXPECT_EQ(v, cplx{});
}

TEST(Transform, GaussianClosedForm) {
  auto g = SpectralGrid::make(20.0, 512);
  auto s = forward_transform(gaussian(g, 0.5));
  double err = 0.0;
  for (std::size_t k = 0; k < g->size(); ++k) {
    const double xi = g->xi()[k];
    err = std::max(err, std::abs(s[0][k] - std::exp(-xi * xi / 2)));
  }
  EXPECT_LT(err, 1e-10);
}

TEST(Transform, RoundTripRandom) {
  auto g = SpectralGrid::make(10.0, 256);
  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  VectorField f(g, 3, Representation::physical);
  for (std::size_t j = 0; j < 3; ++j)
    for (auto& z : f[j]) z = {nd(rng), nd(rng)};
  auto back = inverse_transform(forward_transform(f));
  double big = 0.0;
  for (std::size_t j = 0; j < 3; ++j)
    for (auto z : f[j]) big = std::max(big, std::abs(z));
  EXPECT_LT(max_abs_diff(back, f), 1e-12 * big);
}

TEST(Transform, RepresentationMismatch) {
  auto g = SpectralGrid::make(10.0, 64);
  auto f = gaussian(g, 1.0);
  EXPECT_THROW(inverse_transform(f), RepresentationMismatch);
  EXPECT_THROW(forward_transform(forward_transform(f)), RepresentationMismatch);
}

TEST(Multiplier, BesselGroupLawAndIdentity) {
  auto g = SpectralGrid::make(20.0, 512);
  auto f = gaussian(g, 1.0, 0.3);
  EXPECT_LT(max_abs_diff(bessel_multiplier(f, 0.0), f), 1e-15);
  EXPECT_LT(max_abs_diff(bessel_multiplier(bessel_multiplier(f, 1.0), -1.0), f), 1e-12);
  EXPECT_LT(max_abs_diff(bessel_multiplier(bessel_multiplier(f, 1.5), 2.0), bessel_multiplier(f, 3.5)), 1e-12);
  auto one = sample(g, {[](double) { return cplx(1.0, 0.0); }});
  EXPECT_LT(max_abs_diff(bessel_multiplier(one, 2.0), one), 1e-12);
}

TEST(Norm, ClosedFormGaussian) {
  auto g = SpectralGrid::make(20.0, 512);
  auto f = gaussian(g, 1.0);
  EXPECT_EQ(norm(VectorField(g, 1, Representation::physical), NormSpec::sobolev(0)), 0.0);
  EXPECT_NEAR(norm(f, NormSpec::sobolev(0)), std::pow(std::numbers::pi / 2, 0.25), 1e-12);
}

TEST(Norm, WeightedAgainstQuadratureOracle) {
  auto g = SpectralGrid::make(20.0, 512);
  auto f = gaussian(g, 1.0);
  // int (1 + x^2) e^{-2x^2} dx by composite Simpson on a fine independent mesh
  const int m = 200000;
  const double a = -12.0, b = 12.0, h = (b - a) / m;
  double acc = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double x = a + i * h;
    const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * (1 + x * x) * std::exp(-2 * x * x);
  }
  const double oracle = std::sqrt(acc * h / 3.0);
  EXPECT_NEAR(norm(f, NormSpec::weighted(0, 1)), oracle, 1e-8);
}

TEST(Norm, WeightedSupUnsupported) {
  auto g = SpectralGrid::make(20.0, 64);
  auto f = gaussian(g, 1.0);
  EXPECT_THROW(norm(f, NormSpec{0.0, 1.0, std::numeric_limits<double>::infinity()}), Unsupported);
  EXPECT_THROW(norm(f, NormSpec{0.0, 0.0, 1.0}), Unsupported);
}

TEST(FreeEvolve, IdentityAtZeroAndUnimodular) {
  auto g = SpectralGrid::make(40.0, 1024);
  auto f = gaussian(g, 1.0, 1.0);
  EXPECT_LT(max_abs_diff(free_evolve(f, 0.0), f), 1e-15);
  auto a = forward_transform(f);
  auto b = forward_transform(free_evolve(f, 7.3));
  for (std::size_t k = 0; k < g->size(); ++k) EXPECT_NEAR(std::abs(a[0][k]), std::abs(b[0][k]), 1e-14);
}

TEST(FreeEvolve, SobolevIsometry) {
  auto g = SpectralGrid::make(100.0, 2048);
  auto f = gaussian(g, 0.5);
  for (int s = 0; s <= 4; ++s) {
    const double n0 = norm(f, NormSpec::sobolev(s));
    const double n1 = norm(free_evolve(f, 37.0), NormSpec::sobolev(s));
    EXPECT_NEAR(n1 / n0, 1.0, 1e-12) << "s = " << s;
  }
}

TEST(FreeEvolve, DispersiveDecayBounded) {
  auto g = SpectralGrid::make(400.0, 8192);
  auto f = gaussian(g, 0.25);
  double lo = 1e300, hi = 0.0;
  for (double t = 10; t <= 100; t += 10) {
    const double v = std::sqrt(t) * norm(free_evolve(f, t), NormSpec::sup());
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_LT(hi / lo, 1.5);
}

TEST(ApplyJ, ZeroAndParity) {
  auto g = SpectralGrid::make(30.0, 512);
  VectorField z(g, 1, Representation::physical);
  EXPECT_EQ(norm(apply_J(z, 3.0), NormSpec::sobolev(0)), 0.0);
  auto f = gaussian(g, 1.0);
  auto j = apply_J(f, 0.0);
  // odd: J phi(x) = -J phi(-x); x_m and x_{n-m} are mirror points
  for (std::size_t m = 1; m < g->size(); ++m) EXPECT_NEAR(j[0][m].real(), -j[0][g->size() - m].real(), 1e-10);
}

TEST(ApplyJ, RequiresPhysical) {
  auto g = SpectralGrid::make(30.0, 64);
  EXPECT_THROW(apply_J(forward_transform(gaussian(g, 1.0)), 1.0), RepresentationMismatch);
}

TEST(ApplyJ, TransportAlongFreeFlow) {
  auto g = SpectralGrid::make(200.0, 4096);
  auto f = gaussian(g, 0.5, 2.0);
  const double t = 30.0;
  Warnings w;
  auto lhs = apply_J(free_evolve(f, t), t, &w);
  auto rhs = free_evolve(apply_J(f, 0.0), t);
  const double scale = norm(f, NormSpec::weighted(1, 1));
  EXPECT_LT(norm(lhs - rhs, NormSpec::sobolev(0)), 1e-8 * scale);
  EXPECT_TRUE(w.empty());
}

TEST(ApplyJ, WarnsOnWraparound) {
  auto g = SpectralGrid::make(10.0, 256);
  auto f = gaussian(g, 0.05);
  Warnings w;
  apply_J(f, 1.0, &w);
  EXPECT_FALSE(w.empty());
}
