#pragma once

// Least-squares fits on log-log data.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "kgsys/error.hpp"

namespace kgsys {

struct PowerFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  std::size_t points = 0;
};

/// OLS of ln(value) on ln(t); needs at least two positive points.
inline PowerFit loglog_fit(const std::vector<double>& t, const std::vector<double>& value) {
  if (t.size() != value.size()) throw DimensionMismatch("loglog_fit: length mismatch");
  if (t.size() < 2) throw PreconditionError("loglog_fit: need at least two points");
  const std::size_t n = t.size();
  double sx = 0, sy = 0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(t[i] > 0.0) || !(value[i] > 0.0)) throw PreconditionError("loglog_fit: times and values must be positive");
    lx[i] = std::log(t[i]);
    ly[i] = std::log(value[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw PreconditionError("loglog_fit: all times equal");
  PowerFit f;
  f.points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ly[i] - f.intercept - f.slope * lx[i];
      ss += r * r;
    }
    f.stderr_slope = std::sqrt(ss / static_cast<double>(n - 2) / sxx);
  }
  return f;
}

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  std::size_t points = 0;
  double window_lo = 0.0, window_hi = 0.0;
  double curvature = 0.0;         // quadratic coefficient in ln t
  double curvature_stderr = 0.0;
  bool curved = false;            // curvature significant: not a pure power law
};

/// Power-law fit of a (t, value) series restricted to [lo, hi].
inline DecayFit fit_decay_exponent(const std::vector<double>& t, const std::vector<double>& value, double lo,
                                   double hi) {
  if (t.size() != value.size()) throw DimensionMismatch("fit_decay_exponent: length mismatch");
  std::vector<double> tt, vv;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= lo && t[i] <= hi) {
      if (!(value[i] > 0.0))
        throw PreconditionError("fit_decay_exponent: nonpositive value at t = " + std::to_string(t[i]));
      tt.push_back(t[i]);
      vv.push_back(value[i]);
    }
  if (tt.size() < 8)
    throw PreconditionError("fit_decay_exponent: need at least 8 points in the window, got " +
                            std::to_string(tt.size()));
  const PowerFit p = loglog_fit(tt, vv);
  DecayFit d;
  d.slope = p.slope;
  d.intercept = p.intercept;
  d.stderr_slope = p.stderr_slope;
  d.points = p.points;
  d.window_lo = lo;
  d.window_hi = hi;

  const auto n = static_cast<Eigen::Index>(tt.size());
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = std::log(tt[static_cast<std::size_t>(i)]);
    X(i, 0) = 1.0;
    X(i, 1) = s;
    X(i, 2) = s * s;
    y(i) = std::log(vv[static_cast<std::size_t>(i)]);
  }
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
  const double rss = (y - X * beta).squaredNorm();
  const Eigen::MatrixXd cov = (X.transpose() * X).inverse() * (rss / static_cast<double>(n - 3));
  d.curvature = beta(2);
  d.curvature_stderr = std::sqrt(std::max(0.0, cov(2, 2)));
  d.curved = std::abs(d.curvature) > 1e-9 && std::abs(d.curvature) > 3.0 * d.curvature_stderr;
  return d;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw PreconditionError("pearson: need two equal-length series");
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace kgsys
