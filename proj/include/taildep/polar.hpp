#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "taildep/errors.hpp"
#include "taildep/ingest.hpp"

namespace taildep {

// Which observations count as radius exceedances.
struct ExceedanceRule {
  enum class Kind { order_statistic, quantile, fixed };
  Kind kind = Kind::order_statistic;
  std::size_t k = 0;  // order_statistic: keep the k largest radii
  double q = 0.0;     // quantile: keep radii above the ceil(qn)-th smallest
  double u = 0.0;     // fixed: keep radii >= u

  static ExceedanceRule order_statistic(std::size_t k) {
    ExceedanceRule r;
    r.kind = Kind::order_statistic;
    r.k = k;
    return r;
  }
  static ExceedanceRule quantile(double q) {
    ExceedanceRule r;
    r.kind = Kind::quantile;
    r.q = q;
    return r;
  }
  static ExceedanceRule fixed(double u) {
    ExceedanceRule r;
    r.kind = Kind::fixed;
    r.u = u;
    return r;
  }
};

// Pseudo-polar decomposition of the Pareto-margin sample: radius S_i is the
// L1 norm of row i, the angle row is the first d-1 component shares.
struct PolarSample {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> radius;  // n
  std::vector<double> angle;   // n*(d-1)

  bool has_selection = false;
  std::vector<std::size_t> exceed_idx;  // ascending row indices
  std::size_t k_used = 0;               // realized exceedance count
  double threshold = std::numeric_limits<double>::quiet_NaN();

  double angle_share(std::size_t i, std::size_t j) const { return angle[i * (d - 1) + j]; }
};

inline PolarSample to_polar(const ParetoSample& p) {
  if (p.d < 2) throw config_error("to_polar: need at least 2 columns");
  PolarSample out;
  out.n = p.n;
  out.d = p.d;
  out.radius.resize(p.n);
  out.angle.resize(p.n * (p.d - 1));
  for (std::size_t i = 0; i < p.n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < p.d; ++j) s += p.par(i, j);
    out.radius[i] = s;
    for (std::size_t j = 0; j + 1 < p.d; ++j) out.angle[i * (p.d - 1) + j] = p.par(i, j) / s;
  }
  return out;
}

// Applies an exceedance rule. Selection only filters; no angle or radius is
// recomputed. Ties on the order-statistic rule break by lower row index.
inline PolarSample select_exceedances(const PolarSample& ps, const ExceedanceRule& rule) {
  PolarSample out = ps;
  out.exceed_idx.clear();
  const std::size_t n = ps.n;

  switch (rule.kind) {
    case ExceedanceRule::Kind::order_statistic: {
      if (rule.k < 1 || rule.k >= n)
        throw config_error("select_exceedances: k must satisfy 1 <= k <= n-1");
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (ps.radius[a] != ps.radius[b]) return ps.radius[a] > ps.radius[b];
        return a < b;
      });
      out.exceed_idx.assign(idx.begin(), idx.begin() + rule.k);
      std::sort(out.exceed_idx.begin(), out.exceed_idx.end());
      out.threshold = ps.radius[idx[rule.k]];  // S_(k+1), the first excluded radius
      break;
    }
    case ExceedanceRule::Kind::quantile: {
      if (!(rule.q > 0.0 && rule.q < 1.0))
        throw config_error("select_exceedances: quantile must lie in (0,1)");
      std::vector<double> sorted = ps.radius;
      std::sort(sorted.begin(), sorted.end());
      const auto pos = static_cast<std::size_t>(std::ceil(rule.q * static_cast<double>(n)));
      const double thr = sorted[pos - 1];  // ceil(qn)-th smallest
      for (std::size_t i = 0; i < n; ++i)
        if (ps.radius[i] > thr) out.exceed_idx.push_back(i);
      out.threshold = thr;
      break;
    }
    case ExceedanceRule::Kind::fixed: {
      if (!std::isfinite(rule.u)) throw config_error("select_exceedances: threshold must be finite");
      for (std::size_t i = 0; i < n; ++i)
        if (ps.radius[i] >= rule.u) out.exceed_idx.push_back(i);
      out.threshold = rule.u;
      break;
    }
  }

  if (out.exceed_idx.empty()) throw computation_error("select_exceedances: empty exceedance set");
  out.k_used = out.exceed_idx.size();
  out.has_selection = true;
  return out;
}

// First-component shares of the selected rows (bivariate convenience).
inline std::vector<double> exceedance_angles(const PolarSample& ps) {
  if (!ps.has_selection) throw config_error("exceedance_angles: no exceedance selection");
  if (ps.d != 2) throw config_error("exceedance_angles: defined for d = 2");
  std::vector<double> w;
  w.reserve(ps.exceed_idx.size());
  for (std::size_t i : ps.exceed_idx) w.push_back(ps.angle[i]);
  return w;
}

}  // namespace taildep
