#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "taildep/coeffs.hpp"
#include "taildep/errors.hpp"
#include "taildep/ingest.hpp"
#include "taildep/numeric.hpp"
#include "taildep/rng.hpp"

namespace taildep {

// Large-sample 0.95 quantiles of the integral and supremum statistics under
// the independence null.
inline constexpr double kIndepCriticalIntegral = 6.237;
inline constexpr double kIndepCriticalSupremum = 4.956;

namespace detail {

// Split-sample representation: the first half is thresholded against ranks
// computed within the second half. a_i, b_i are the jump locations of the
// indicator 1{x > a_i or y > b_i} whose mean over i is the split stdf.
struct SplitSample {
  std::size_t half = 0;
  std::size_t k = 0;
  std::vector<double> a;  // (h + 1 - cross_rank_x) / k
  std::vector<double> b;
};

inline SplitSample make_split(const ParetoSample& p, std::size_t k) {
  if (p.d != 2) throw config_error("split sample: defined for d = 2");
  const std::size_t h = p.n / 2;
  if (h < 2) throw config_error("split sample: need n >= 4");
  if (k < 1 || k > h - 1) throw config_error("split sample: k must satisfy 1 <= k <= n/2 - 1");

  // Global max-ranks order observations exactly as raw values do, so
  // cross-sample ranks can be counted on ranks alone.
  std::vector<std::size_t> sx(h), sy(h);
  for (std::size_t j = 0; j < h; ++j) {
    sx[j] = p.rank(h + j, 0);
    sy[j] = p.rank(h + j, 1);
  }
  std::sort(sx.begin(), sx.end());
  std::sort(sy.begin(), sy.end());

  SplitSample s;
  s.half = h;
  s.k = k;
  s.a.resize(h);
  s.b.resize(h);
  const double kd = static_cast<double>(k), hd = static_cast<double>(h);
  for (std::size_t i = 0; i < h; ++i) {
    const auto rx = 1 + static_cast<std::size_t>(
                            std::upper_bound(sx.begin(), sx.end(), p.rank(i, 0)) - sx.begin());
    const auto ry = 1 + static_cast<std::size_t>(
                            std::upper_bound(sy.begin(), sy.end(), p.rank(i, 1)) - sy.begin());
    s.a[i] = (hd + 1.0 - static_cast<double>(rx)) / kd;
    s.b[i] = (hd + 1.0 - static_cast<double>(ry)) / kd;
  }
  return s;
}

inline double split_stdf_eval(const SplitSample& s, double x, double y) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.half; ++i)
    if (x > s.a[i] || y > s.b[i]) ++count;
  return static_cast<double>(count) / static_cast<double>(s.k);
}

// Step structure of (x,y) -> ell~(x,y) on (0,1]^2: value is constant on each
// half-open cell (xb[p], xb[p+1]] x (yb[q], yb[q+1]].
struct SplitSteps {
  std::vector<double> xb, yb;           // breaks, 0 = first < ... < last = 1
  std::vector<std::size_t> survivors;   // (P+1)*(Q+1) suffix counts
  std::size_t half = 0, k = 0;

  std::size_t suffix(std::size_t p, std::size_t q) const {
    return survivors[p * yb.size() + q];
  }
  // ell~ on the cell with lower-left corner (xb[p], yb[q])
  double cell_value(std::size_t p, std::size_t q) const {
    return (static_cast<double>(half) - static_cast<double>(suffix(p + 1, q + 1))) /
           static_cast<double>(k);
  }
};

inline std::vector<double> step_breaks(const std::vector<double>& v) {
  std::vector<double> br;
  br.reserve(v.size() + 2);
  br.push_back(0.0);
  for (double x : v)
    if (x > 0.0 && x < 1.0) br.push_back(x);
  br.push_back(1.0);
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  return br;
}

inline SplitSteps make_steps(const SplitSample& s) {
  SplitSteps st;
  st.half = s.half;
  st.k = s.k;
  st.xb = step_breaks(s.a);
  st.yb = step_breaks(s.b);
  const std::size_t P = st.xb.size() - 1, Q = st.yb.size() - 1;

  // bucket index: count of breaks strictly below the value, capped at the top
  const auto bucket = [](const std::vector<double>& br, double v) -> std::size_t {
    if (v >= 1.0) return br.size() - 1;
    return static_cast<std::size_t>(std::lower_bound(br.begin(), br.end(), v) - br.begin());
  };

  std::vector<std::size_t> m((P + 1) * (Q + 1), 0);
  for (std::size_t i = 0; i < s.half; ++i)
    ++m[bucket(st.xb, s.a[i]) * (Q + 1) + bucket(st.yb, s.b[i])];

  // suffix-sum so suffix(p,q) = #{i : a_i > xb[p-1]... } counts by index:
  // survivors[p][q] = #{i : bucket_a(i) >= p and bucket_b(i) >= q}
  for (std::size_t p = P + 1; p-- > 0;)
    for (std::size_t q = Q + 1; q-- > 0;) {
      std::size_t v = m[p * (Q + 1) + q];
      if (p + 1 <= P) v += m[(p + 1) * (Q + 1) + q];
      if (q + 1 <= Q) v += m[p * (Q + 1) + q + 1];
      if (p + 1 <= P && q + 1 <= Q) v -= m[(p + 1) * (Q + 1) + q + 1];
      m[p * (Q + 1) + q] = v;
    }
  st.survivors = std::move(m);
  return st;
}

// Exact integral of k (ell~ - x - y)^2 over [0,1]^2 using the closed-form
// antiderivative on each constant cell.
inline double t_int_exact(const SplitSteps& st) {
  const std::size_t P = st.xb.size() - 1, Q = st.yb.size() - 1;
  double total = 0.0;
  for (std::size_t p = 0; p < P; ++p) {
    const double u1 = st.xb[p], u2 = st.xb[p + 1];
    for (std::size_t q = 0; q < Q; ++q) {
      const double v1 = st.yb[q], v2 = st.yb[q + 1];
      const double L = st.cell_value(p, q);
      const auto quart = [](double z) { return z * z * z * z; };
      total += (quart(L - u1 - v1) - quart(L - u2 - v1) - quart(L - u1 - v2) +
                quart(L - u2 - v2)) /
               12.0;
    }
  }
  return static_cast<double>(st.k) * total;
}

// Exact sup of sqrt(k) |ell~ - x - y| over [0,1]^2: cell corners plus the
// x = 0 and y = 0 boundary lines, where the indicator drops ties at zero.
inline double t_sup_exact(const SplitSteps& st) {
  const std::size_t P = st.xb.size() - 1, Q = st.yb.size() - 1;
  const double hd = static_cast<double>(st.half), kd = static_cast<double>(st.k);
  double sup = 0.0;
  for (std::size_t p = 0; p < P; ++p) {
    const double u1 = st.xb[p], u2 = st.xb[p + 1];
    for (std::size_t q = 0; q < Q; ++q) {
      const double L = st.cell_value(p, q);
      sup = std::max(sup, std::fabs(L - u1 - st.yb[q]));
      sup = std::max(sup, std::fabs(L - u2 - st.yb[q + 1]));
    }
  }
  for (std::size_t q = 0; q < Q; ++q) {  // x = 0: value (h - #{b_i > yb[q]}) / k
    const double L = (hd - static_cast<double>(st.suffix(0, q + 1))) / kd;
    sup = std::max(sup, std::fabs(L - st.yb[q]));
    sup = std::max(sup, std::fabs(L - st.yb[q + 1]));
  }
  for (std::size_t p = 0; p < P; ++p) {  // y = 0
    const double L = (hd - static_cast<double>(st.suffix(p + 1, 0))) / kd;
    sup = std::max(sup, std::fabs(L - st.xb[p]));
    sup = std::max(sup, std::fabs(L - st.xb[p + 1]));
  }
  return std::sqrt(kd) * sup;
}

}  // namespace detail

// Split-sample rank stdf ell~_n(x, y); the building block of the
// independence test statistics.
inline double split_sample_stdf(const ParetoSample& p, std::size_t k, double x, double y) {
  if (!(x >= 0.0) || !(y >= 0.0) || !std::isfinite(x) || !std::isfinite(y))
    throw config_error("split_sample_stdf: arguments must be finite and nonnegative");
  return detail::split_stdf_eval(detail::make_split(p, k), x, y);
}

struct IndepTestReport {
  std::size_t k = 0;
  double t_int = 0.0;
  double t_sup = 0.0;
  double critical_int = 0.0;
  double critical_sup = 0.0;
  double alpha = 0.05;
  bool reject_int = false;
  bool reject_sup = false;
};

// Asymptotic-independence test: D_n = sqrt(k)(ell~_n - (x+y)) on [0,1]^2,
// integral and supremum statistics computed exactly on the step structure.
// Without explicit critical values only alpha = 0.05 is available (the
// stored large-sample constants); pass simulated quantiles otherwise.
inline IndepTestReport indep_test(
    const ParetoSample& p, std::size_t k, double alpha = 0.05,
    std::optional<std::pair<double, double>> critical = std::nullopt) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("indep_test: alpha must lie in (0,1)");
  double ci, cs;
  if (critical) {
    ci = critical->first;
    cs = critical->second;
  } else {
    if (std::fabs(alpha - 0.05) > 1e-12)
      throw config_error("indep_test: stored critical values exist only for alpha = 0.05");
    ci = kIndepCriticalIntegral;
    cs = kIndepCriticalSupremum;
  }
  const detail::SplitSample s = detail::make_split(p, k);
  const detail::SplitSteps st = detail::make_steps(s);
  IndepTestReport r;
  r.k = k;
  r.alpha = alpha;
  r.t_int = detail::t_int_exact(st);
  r.t_sup = detail::t_sup_exact(st);
  r.critical_int = ci;
  r.critical_sup = cs;
  r.reject_int = r.t_int > ci;
  r.reject_sup = r.t_sup > cs;
  return r;
}

enum class VarianceMode { at_one, at_estimate };

struct EtaTestReport {
  std::size_t k = 0;
  double eta_hat = 0.0;   // GPD shape on structure-variable excesses
  double chi_hat = 0.0;   // k T_(k+1) / n
  double cx = 0.0, cy = 0.0;
  double sigma = 0.0;     // plug-in asymptotic sd of sqrt(k)(eta_hat - eta)
  double critical = 0.0;  // 1 - sigma z_(1-alpha) / sqrt(k)
  double alpha = 0.05;
  bool reject = false;    // eta_hat <= critical
  bool gpd_converged = false;
};

// One-sided test of eta = 1 (asymptotic dependence) against eta < 1.
inline EtaTestReport eta_test(const ParetoSample& p, std::size_t k, double alpha = 0.05,
                              VarianceMode mode = VarianceMode::at_one) {
  if (p.d != 2) throw config_error("eta_test: defined for d = 2");
  if (!(alpha > 0.0 && alpha < 0.5)) throw config_error("eta_test: alpha must lie in (0, 0.5)");
  const StructureSample t = structure_variable(p);
  const std::size_t n = p.n;
  if (k < 10 || k >= n) throw config_error("eta_test: k must satisfy 10 <= k <= n-1");

  const GpdFit fit = gpd_fit_excesses(t, k);
  if (!fit.converged) throw computation_error("eta_test: GPD fit did not converge");

  EtaTestReport r;
  r.k = k;
  r.alpha = alpha;
  r.eta_hat = fit.shape;
  r.gpd_converged = fit.converged;

  const double tk1 = t.sorted_desc[k];
  r.chi_hat = static_cast<double>(k) * tk1 / static_cast<double>(n);
  const double phat = static_cast<double>(k) / r.chi_hat;
  const double u = std::pow(phat, -0.25);

  // slope of the tilted threshold in each coordinate
  const auto tilted_order_stat = [&](std::size_t col) {
    std::vector<double> tv(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = p.par(i, 0) * (col == 0 ? 1.0 + u : 1.0);
      const double y = p.par(i, 1) * (col == 1 ? 1.0 + u : 1.0);
      tv[i] = std::min(x, y);
    }
    std::nth_element(tv.begin(), tv.begin() + k, tv.end(), std::greater<double>());
    return tv[k];
  };
  const double fac = std::pow(phat, 1.25) / static_cast<double>(n);
  r.cx = fac * (tilted_order_stat(0) - tk1);
  r.cy = fac * (tilted_order_stat(1) - tk1);

  const double eta_ref = mode == VarianceMode::at_one ? 1.0 : r.eta_hat;
  const double var = (1.0 + eta_ref) * (1.0 + eta_ref) * (1.0 - r.chi_hat) *
                     (1.0 - 2.0 * r.chi_hat * r.cx * r.cy);
  r.sigma = std::sqrt(std::max(0.0, var));
  r.critical = 1.0 - r.sigma * normal_quantile(1.0 - alpha) / std::sqrt(static_cast<double>(k));
  r.reject = r.eta_hat <= r.critical;
  return r;
}

// Monte Carlo for the 1-alpha quantiles of the limit statistics
//   T_I = 1/2 (int_0^2 W1^2 + int_0^2 W2^2) + 1/2 (int_0^2 W1)(int_0^2 W2)
//   T_S = sup |W1(s) + W2(t)|
// on an N-step left-Riemann grid. Path i uses substream (seed, i), so the
// result is invariant to how paths are chunked across threads.
inline std::pair<double, double> simulate_limit_quantiles(double alpha, std::size_t paths,
                                                          std::size_t steps, std::uint64_t seed,
                                                          unsigned n_threads = 0) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw config_error("simulate_limit_quantiles: alpha must lie in (0,1)");
  if (paths < 10000) throw config_error("simulate_limit_quantiles: need at least 1e4 paths");
  if (steps < 1000) throw config_error("simulate_limit_quantiles: need at least 1e3 steps");

  std::vector<double> ti(paths), ts(paths);
  const double dt = 2.0 / static_cast<double>(steps);
  const double sdt = std::sqrt(dt);

  const auto run_chunk = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t path = lo; path < hi; ++path) {
      RandomStream rs = RandomStream::substream(seed, path);
      double w1 = 0.0, w2 = 0.0;
      double s1 = 0.0, s2 = 0.0, q1 = 0.0, q2 = 0.0;
      double mx1 = 0.0, mn1 = 0.0, mx2 = 0.0, mn2 = 0.0;
      for (std::size_t j = 0; j < steps; ++j) {
        s1 += w1;  // left endpoint
        s2 += w2;
        q1 += w1 * w1;
        q2 += w2 * w2;
        w1 += sdt * rs.normal();
        w2 += sdt * rs.normal();
        mx1 = std::max(mx1, w1);
        mn1 = std::min(mn1, w1);
        mx2 = std::max(mx2, w2);
        mn2 = std::min(mn2, w2);
      }
      ti[path] = 0.5 * (q1 + q2) * dt + 0.5 * (s1 * dt) * (s2 * dt);
      ts[path] = std::max(mx1 + mx2, -(mn1 + mn2));
    }
  };

  unsigned nt = n_threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : n_threads;
  nt = std::min<unsigned>(nt, 64);
  if (nt <= 1) {
    run_chunk(0, paths);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (paths + nt - 1) / nt;
    for (unsigned t = 0; t < nt; ++t) {
      const std::size_t lo = std::min<std::size_t>(paths, t * chunk);
      const std::size_t hi = std::min<std::size_t>(paths, lo + chunk);
      if (lo < hi) pool.emplace_back(run_chunk, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  const auto quantile = [&](std::vector<double>& v) {
    const auto pos = static_cast<std::size_t>(
        std::ceil((1.0 - alpha) * static_cast<double>(paths)));
    std::nth_element(v.begin(), v.begin() + (pos - 1), v.end());
    return v[pos - 1];
  };
  return {quantile(ti), quantile(ts)};
}

}  // namespace taildep
