#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "taildep/errors.hpp"
#include "taildep/ingest.hpp"
#include "taildep/numeric.hpp"
#include "taildep/spectral.hpp"

namespace taildep {

enum class StdfKind { empirical_rank, spectral_cf, analytic };

// A stable tail dependence function estimate: positively homogeneous (or
// approximately so for the rank version), evaluated at nonnegative arguments.
struct StdfEstimate {
  StdfKind kind = StdfKind::analytic;
  std::size_t d = 2;
  std::size_t k = 0;  // exceedance count behind the estimate, when applicable
  std::function<double(const std::vector<double>&)> eval;

  double operator()(const std::vector<double>& x) const { return eval(x); }
  double operator()(double x, double y) const { return eval(std::vector<double>{x, y}); }
};

namespace detail {

inline void check_stdf_args(const std::vector<double>& x, std::size_t d) {
  if (x.size() != d) throw config_error("stdf: argument dimension mismatch");
  for (double v : x)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw config_error("stdf: arguments must be finite and nonnegative");
}

}  // namespace detail

// d-variate logistic (Gumbel) family: ell(x) = (sum x_j^theta)^(1/theta).
// theta = 1 is independence, theta -> infinity the max norm.
struct LogisticModel {
  double theta = 1.0;
  std::size_t d = 2;
};

inline double logistic_stdf(const LogisticModel& model, const std::vector<double>& x) {
  if (!(model.theta >= 1.0) || !std::isfinite(model.theta))
    throw config_error("logistic_stdf: theta must lie in [1, inf)");
  detail::check_stdf_args(x, model.d);
  double m = 0.0;
  for (double v : x) m = std::max(m, v);
  if (m == 0.0) return 0.0;
  if (model.theta == 1.0) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  // scale by the max so the powers stay in [0,1] for any theta
  double s = 0.0;
  for (double v : x) s += std::pow(v / m, model.theta);
  return m * std::pow(s, 1.0 / model.theta);
}

inline StdfEstimate logistic_stdf_estimate(const LogisticModel& model) {
  if (!(model.theta >= 1.0) || !std::isfinite(model.theta))
    throw config_error("logistic_stdf_estimate: theta must lie in [1, inf)");
  if (model.d < 2) throw config_error("logistic_stdf_estimate: need d >= 2");
  StdfEstimate est;
  est.kind = StdfKind::analytic;
  est.d = model.d;
  est.eval = [model](const std::vector<double>& x) { return logistic_stdf(model, x); };
  return est;
}

// Rank-based empirical stdf at top-k exceedance level:
// ell(x) = (1/k) #{i : exists j with R_ij > n + 1 - k x_j}.
inline StdfEstimate empirical_stdf(const ParetoSample& p, std::size_t k) {
  if (k < 1 || k >= p.n) throw config_error("empirical_stdf: k must satisfy 1 <= k < n");
  StdfEstimate est;
  est.kind = StdfKind::empirical_rank;
  est.d = p.d;
  est.k = k;
  const std::size_t n = p.n, d = p.d;
  const std::vector<std::size_t> ranks = p.ranks;
  est.eval = [n, d, k, ranks](const std::vector<double>& x) {
    detail::check_stdf_args(x, d);
    std::vector<double> cutoff(d);
    for (std::size_t j = 0; j < d; ++j)
      cutoff[j] = static_cast<double>(n) + 1.0 - static_cast<double>(k) * x[j];
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t* row = ranks.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) {
        if (static_cast<double>(row[j]) > cutoff[j]) {
          ++count;
          break;
        }
      }
    }
    return static_cast<double>(count) / static_cast<double>(k);
  };
  return est;
}

// Spectral-measure plug-in stdf (bivariate):
// ell(x, y) = 2 sum_i p_i max(W_i x, (1 - W_i) y).
inline StdfEstimate cf_stdf(const SpectralEstimate& spec, std::size_t k = 0) {
  if (spec.size() == 0) throw config_error("cf_stdf: empty spectral estimate");
  StdfEstimate est;
  est.kind = StdfKind::spectral_cf;
  est.d = 2;
  est.k = k;
  const std::vector<double> w = spec.angles;
  const std::vector<double> pw = spec.weights;
  est.eval = [w, pw](const std::vector<double>& x) {
    detail::check_stdf_args(x, 2);
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
      s += pw[i] * std::max(w[i] * x[0], (1.0 - w[i]) * x[1]);
    return 2.0 * s;
  };
  return est;
}

// Tail copula R(x,y) = x + y - ell(x,y), clipped to its theoretical range
// [0, min(x,y)]; `clipped` reports whether clipping was applied.
struct TailCopulaValue {
  double value = 0.0;
  bool clipped = false;
};

inline TailCopulaValue tail_copula(const StdfEstimate& ell, double x, double y) {
  if (ell.d != 2) throw config_error("tail_copula: defined for d = 2");
  const double raw = x + y - ell(x, y);
  TailCopulaValue out;
  out.value = std::clamp(raw, 0.0, std::min(x, y));
  out.clipped = out.value != raw;
  return out;
}

// Pickands dependence function A(t) = ell(1-t, t), t in [0,1].
inline double pickands(const StdfEstimate& ell, double t) {
  if (ell.d != 2) throw config_error("pickands: defined for d = 2");
  if (!(t >= 0.0 && t <= 1.0)) throw config_error("pickands: t must lie in [0,1]");
  return ell(1.0 - t, t);
}

// Exponent measure V(z) = ell(1/z_1, ..., 1/z_d), z > 0 componentwise.
inline double exponent_measure(const StdfEstimate& ell, const std::vector<double>& z) {
  if (z.size() != ell.d) throw config_error("exponent_measure: dimension mismatch");
  std::vector<double> x(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (!(z[j] > 0.0) || !std::isfinite(z[j]))
      throw config_error("exponent_measure: z must be finite and positive");
    x[j] = 1.0 / z[j];
  }
  return ell(x);
}

struct LevelSetPoint {
  double t = 0.0;  // ray parameter: direction (1-t, t)
  double x = 0.0;
  double y = 0.0;
};

// Level set {ell = c} traced along m rays by monotone bisection of
// r -> ell(r(1-t), rt) on the bracket [0, c*d].
inline std::vector<LevelSetPoint> level_set(const StdfEstimate& ell, double c, std::size_t m) {
  if (ell.d != 2) throw config_error("level_set: defined for d = 2");
  if (!(c > 0.0) || !std::isfinite(c)) throw config_error("level_set: c must be positive");
  if (m < 2) throw config_error("level_set: need at least 2 rays");
  const double hi = c * static_cast<double>(ell.d);
  std::vector<LevelSetPoint> out;
  out.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(m - 1);
    const auto g = [&](double r) { return ell(r * (1.0 - t), r * t); };
    if (g(hi) < c)
      throw computation_error("level_set: no root in bracket along ray t = " + std::to_string(t));
    const double r = bisect_root([&](double r_) { return g(r_) - c; }, 0.0, hi, 80);
    out.push_back({t, r * (1.0 - t), r * t});
  }
  return out;
}

// Least-squares logistic fit: theta minimizing the mean squared distance to
// ell on a 33 x 33 grid over [0,1]^2, golden-section on [1, 50] to 1e-4.
// Flat objectives resolve toward the smaller theta.
inline double fit_logistic_theta(const StdfEstimate& ell) {
  if (ell.d != 2) throw config_error("fit_logistic_theta: defined for d = 2");
  constexpr std::size_t G = 33;
  std::vector<double> grid(G);
  for (std::size_t i = 0; i < G; ++i) grid[i] = static_cast<double>(i) / static_cast<double>(G - 1);
  std::vector<double> target(G * G);
  for (std::size_t i = 0; i < G; ++i)
    for (std::size_t j = 0; j < G; ++j) target[i * G + j] = ell(grid[i], grid[j]);

  const auto objective = [&](double theta) {
    const LogisticModel model{theta, 2};
    double s = 0.0;
    std::vector<double> x(2);
    for (std::size_t i = 0; i < G; ++i)
      for (std::size_t j = 0; j < G; ++j) {
        x[0] = grid[i];
        x[1] = grid[j];
        const double diff = target[i * G + j] - logistic_stdf(model, x);
        s += diff * diff;
      }
    return s / static_cast<double>(G * G);
  };
  return golden_section_min(objective, 1.0, 50.0, 1e-4);
}

}  // namespace taildep
