#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "taildep/errors.hpp"
#include "taildep/numeric.hpp"

namespace taildep {

enum class SpectralKind { empirical, max_empirical_likelihood, max_euclidean_likelihood };

// Discrete spectral-measure estimate on [0,1]: mass weights[i] at angles[i].
// Constrained estimators satisfy sum(w) = 1 and sum(w*W) = 1/2; Euclidean
// weights may be negative (a signed measure).
struct SpectralEstimate {
  SpectralKind kind = SpectralKind::empirical;
  std::vector<double> angles;
  std::vector<double> weights;
  std::optional<double> lagrange;  // multiplier, MEL only
  bool has_negative_weights = false;

  std::size_t size() const { return angles.size(); }

  double cdf(double x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i)
      if (angles[i] <= x) s += weights[i];
    return s;
  }

  double moment() const {
    double s = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) s += weights[i] * angles[i];
    return s;
  }
};

namespace detail {

inline void check_angles(const std::vector<double>& w) {
  if (w.empty()) throw config_error("spectral estimate: empty angle set");
  for (double x : w)
    if (!(x >= 0.0 && x <= 1.0))
      throw config_error("spectral estimate: angles must lie in [0,1]");
}

}  // namespace detail

// Uniform masses 1/N at the observed angles (moment constraint not imposed).
inline SpectralEstimate empirical_spectral(const std::vector<double>& angles) {
  detail::check_angles(angles);
  SpectralEstimate est;
  est.kind = SpectralKind::empirical;
  est.angles = angles;
  est.weights.assign(angles.size(), 1.0 / static_cast<double>(angles.size()));
  return est;
}

// Maximum empirical likelihood weights: p_i = (1/N) / (1 + lambda (W_i - 1/2))
// with lambda the root of the tilted moment equation. Requires 1/2 strictly
// inside the hull of the angles unless every angle already equals 1/2.
inline SpectralEstimate mel_spectral(const std::vector<double>& angles) {
  detail::check_angles(angles);
  const std::size_t n = angles.size();
  SpectralEstimate est;
  est.kind = SpectralKind::max_empirical_likelihood;
  est.angles = angles;
  est.weights.assign(n, 1.0 / static_cast<double>(n));

  std::vector<double> dev(n);
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = -std::numeric_limits<double>::infinity();
  double dsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dev[i] = angles[i] - 0.5;
    dmin = std::min(dmin, dev[i]);
    dmax = std::max(dmax, dev[i]);
    dsum += dev[i];
  }

  if (dmin == 0.0 && dmax == 0.0) {  // every angle at 1/2: uniform already optimal
    est.lagrange = 0.0;
    return est;
  }
  if (dsum == 0.0) {  // sample mean already 1/2
    est.lagrange = 0.0;
    return est;
  }
  if (!(dmin < 0.0 && dmax > 0.0))
    throw infeasible_error("mel_spectral: 1/2 outside the hull of the angles");

  const auto f = [&](double lam) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += dev[i] / (1.0 + lam * dev[i]);
    return s / static_cast<double>(n);
  };
  const auto fprime = [&](double lam) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = 1.0 + lam * dev[i];
      s += dev[i] * dev[i] / (t * t);
    }
    return -s / static_cast<double>(n);
  };

  // f is strictly decreasing on the open domain (-1/dmax, -1/dmin).
  double lo = 0.0, hi = 0.0;
  if (dsum > 0.0) {
    lo = 0.0;
    hi = (1.0 - 1e-12) / (-dmin);
    for (int guard = 0; f(hi) > 0.0 && guard < 64; ++guard) hi += (1.0 / (-dmin) - hi) * 0.5;
  } else {
    hi = 0.0;
    lo = -(1.0 - 1e-12) / dmax;
    for (int guard = 0; f(lo) < 0.0 && guard < 64; ++guard) lo += (-1.0 / dmax - lo) * 0.5;
  }
  if (f(lo) < 0.0 || f(hi) > 0.0)
    throw computation_error("mel_spectral: failed to bracket the multiplier");

  double lam = 0.5 * (lo + hi);
  double fl = f(lam);
  for (int it = 0; it < 200 && std::fabs(fl) > 5e-15; ++it) {
    if (fl > 0.0)
      lo = lam;
    else
      hi = lam;
    const double step = fl / fprime(lam);  // Newton; fall back to bisection outside bracket
    double next = lam - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    lam = next;
    fl = f(lam);
  }

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    est.weights[i] = 1.0 / (static_cast<double>(n) * (1.0 + lam * dev[i]));
    total += est.weights[i];
  }
  for (double& w : est.weights) w /= total;  // exact unit mass; moment error stays O(|f|)
  est.lagrange = lam;
  return est;
}

// Maximum Euclidean likelihood weights, closed form:
// p_i = (1/N) [1 - (Wbar - 1/2) S^-2 (W_i - Wbar)], S^2 the population variance.
inline SpectralEstimate euclidean_spectral(const std::vector<double>& angles) {
  detail::check_angles(angles);
  const std::size_t n = angles.size();
  SpectralEstimate est;
  est.kind = SpectralKind::max_euclidean_likelihood;
  est.angles = angles;
  est.weights.assign(n, 1.0 / static_cast<double>(n));

  double mean = 0.0;
  for (double w : angles) mean += w;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double w : angles) var += (w - mean) * (w - mean);
  var /= static_cast<double>(n);

  if (var == 0.0) {
    if (angles[0] == 0.5) return est;  // constraint already holds, uniform weights
    throw degenerate_error("euclidean_spectral: all angles equal and different from 1/2");
  }

  const double c = (mean - 0.5) / var;
  for (std::size_t i = 0; i < n; ++i) {
    est.weights[i] = (1.0 - c * (angles[i] - mean)) / static_cast<double>(n);
    if (est.weights[i] < 0.0) est.has_negative_weights = true;
  }
  return est;
}

// Angles pulled to [1/(2N), 1 - 1/(2N)] so every beta kernel has positive shapes.
inline std::vector<double> clamp_angles(const std::vector<double>& angles) {
  const double lo = 1.0 / (2.0 * static_cast<double>(angles.size()));
  std::vector<double> out(angles.size());
  for (std::size_t i = 0; i < angles.size(); ++i) out[i] = std::clamp(angles[i], lo, 1.0 - lo);
  return out;
}

// Beta-kernel smoothed spectral density
//   h(x) = sum_i p_i beta(x; W_i nu, (1 - W_i) nu)
// built on the clamped angles. Signed when any weight is negative.
struct BetaMixtureDensity {
  std::vector<double> angles;  // clamped
  std::vector<double> weights;
  double nu = 0.0;
  bool signed_density = false;

  double operator()(double x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i)
      s += weights[i] * beta_pdf(x, angles[i] * nu, (1.0 - angles[i]) * nu);
    return s;
  }

  // Smoothed CDF via the regularized incomplete beta.
  double cdf(double x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i)
      s += weights[i] * reg_inc_beta(angles[i] * nu, (1.0 - angles[i]) * nu, x);
    return s;
  }

  // Mean of the mixture; equals sum_i p_i W_i (clamped), the preserved moment.
  double mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) s += weights[i] * angles[i];
    return s;
  }
};

inline BetaMixtureDensity beta_smooth_density(const SpectralEstimate& est, double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw config_error("beta_smooth_density: nu must be positive");
  BetaMixtureDensity d;
  d.angles = clamp_angles(est.angles);
  d.weights = est.weights;
  d.nu = nu;
  d.signed_density = est.has_negative_weights;
  return d;
}

// Leave-one-out log likelihood of the smoothed density at bandwidth nu.
// Left-out weights are renormalized: q_j = p_j / (1 - p_i), j != i.
// Returns -inf when any leave-one-out density is non-positive.
inline double loo_log_score(const SpectralEstimate& est, double nu) {
  const std::size_t n = est.size();
  if (n < 3) throw config_error("loo_log_score: need at least 3 angles");
  if (!(nu > 0.0) || !std::isfinite(nu)) throw config_error("loo_log_score: nu must be positive");
  const std::vector<double> w = clamp_angles(est.angles);
  const std::vector<double>& p = est.weights;

  std::vector<double> total(n, 0.0);
  std::vector<double> self(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = w[j] * nu, b = (1.0 - w[j]) * nu;
    for (std::size_t i = 0; i < n; ++i) {
      const double val = p[j] * beta_pdf(w[i], a, b);
      total[i] += val;
      if (i == j) self[i] = val;
    }
  }
  double score = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double denom = 1.0 - p[i];
    if (!(denom > 0.0)) return -std::numeric_limits<double>::infinity();
    const double di = (total[i] - self[i]) / denom;
    if (!(di > 0.0) || !std::isfinite(di)) return -std::numeric_limits<double>::infinity();
    score += std::log(di);
  }
  return score;
}

inline std::vector<double> default_nu_grid() {
  std::vector<double> g(30);
  const double llo = std::log(1.0), lhi = std::log(300.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(g.size() - 1));
  return g;
}

// Bandwidth with the best leave-one-out score; ties go to the smaller nu.
inline double cross_validate_nu(const SpectralEstimate& est,
                                const std::vector<double>& grid = default_nu_grid()) {
  if (grid.empty()) throw config_error("cross_validate_nu: empty bandwidth grid");
  double best = -std::numeric_limits<double>::infinity();
  double chosen = grid.front();
  for (double nu : grid) {
    const double s = loo_log_score(est, nu);
    if (s > best) {
      best = s;
      chosen = nu;
    }
  }
  if (!std::isfinite(best))
    throw computation_error("cross_validate_nu: no bandwidth gave a positive leave-one-out density");
  return chosen;
}

}  // namespace taildep
