#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "taildep/spectral.hpp"
#include "test_util.hpp"

using namespace taildep;
using Catch::Matchers::WithinAbs;

namespace {

// Independent max empirical likelihood solver: plain bisection on the tilted
// moment equation, no Newton steps.
std::vector<double> mel_oracle(const std::vector<double>& w) {
  const std::size_t n = w.size();
  std::vector<double> dev(n);
  double dmin = 1e300, dmax = -1e300;
  for (std::size_t i = 0; i < n; ++i) {
    dev[i] = w[i] - 0.5;
    dmin = std::min(dmin, dev[i]);
    dmax = std::max(dmax, dev[i]);
  }
  const auto f = [&](double lam) {
    double s = 0.0;
    for (double d : dev) s += d / (1.0 + lam * d);
    return s;
  };
  double lo = -(1.0 - 1e-14) / dmax;
  double hi = (1.0 - 1e-14) / (-dmin);
  for (int it = 0; it < 500; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double lam = 0.5 * (lo + hi);
  std::vector<double> p(n);
  double tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = 1.0 / (static_cast<double>(n) * (1.0 + lam * dev[i]));
    tot += p[i];
  }
  for (double& v : p) v /= tot;
  return p;
}

// Independent Euclidean solver: the equality-constrained least squares
// problem min sum (N p_i - 1)^2 s.t. sum p = 1, sum p w = 1/2, solved through
// its 2x2 KKT system.
std::vector<double> qp_oracle(const std::vector<double>& w) {
  const auto n = static_cast<double>(w.size());
  double sw = 0.0, sww = 0.0;
  for (double v : w) {
    sw += v;
    sww += v * v;
  }
  // [n sw; sw sww] [alpha; beta] = [0; n sw - n^2/2]
  const double det = n * sww - sw * sw;
  const double rhs = n * sw - 0.5 * n * n;
  const double alpha = (-sw * rhs) / det;
  const double beta = (n * rhs) / det;
  std::vector<double> p(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) p[i] = (n - alpha - beta * w[i]) / (n * n);
  return p;
}

}  // namespace

TEST_CASE("empirical spectral weights are uniform") {
  const auto est = empirical_spectral({0.2, 0.8});
  REQUIRE(est.kind == SpectralKind::empirical);
  REQUIRE_THAT(est.weights[0], WithinAbs(0.5, 1e-16));
  REQUIRE_THAT(est.cdf(0.5), WithinAbs(0.5, 1e-16));
  REQUIRE_THAT(est.cdf(0.1), WithinAbs(0.0, 1e-16));
  REQUIRE_THAT(est.cdf(0.2), WithinAbs(0.5, 1e-16));  // atoms close on the right
  REQUIRE_THAT(est.cdf(0.9), WithinAbs(1.0, 1e-16));
  REQUIRE_THAT(est.moment(), WithinAbs(0.5, 1e-16));
}

TEST_CASE("angle validation") {
  REQUIRE_THROWS_AS(empirical_spectral({}), config_error);
  REQUIRE_THROWS_AS(empirical_spectral({0.5, 1.2}), config_error);
  REQUIRE_THROWS_AS(mel_spectral({-0.1}), config_error);
  REQUIRE_THROWS_AS(euclidean_spectral({0.5, std::nan("")}), config_error);
}

TEST_CASE("mel reduces to uniform when the sample moment is already half") {
  const auto est = mel_spectral({0.25, 0.25, 1.0});
  REQUIRE(est.lagrange.has_value());
  REQUIRE(*est.lagrange == 0.0);
  for (double p : est.weights) REQUIRE_THAT(p, WithinAbs(1.0 / 3.0, 1e-16));
  const auto half = mel_spectral({0.5, 0.5});
  REQUIRE(*half.lagrange == 0.0);
}

TEST_CASE("mel agrees with a pure bisection solver") {
  const std::vector<double> angles{0.2, 0.3, 0.9};
  const auto est = mel_spectral(angles);
  const auto want = mel_oracle(angles);
  for (std::size_t i = 0; i < angles.size(); ++i)
    REQUIRE_THAT(est.weights[i], WithinAbs(want[i], 1e-10));
  // mean below half tilts mass onto the high angle: negative multiplier
  REQUIRE(*est.lagrange < 0.0);
  REQUIRE(est.weights[2] > est.weights[0]);

  testutil::Rng rng(41);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = rng.index(3, 25);
    std::vector<double> w(n);
    w[0] = 0.05 + 0.4 * rng.u();
    w[1] = 0.55 + 0.4 * rng.u();
    for (std::size_t i = 2; i < n; ++i) w[i] = rng.u();
    const auto got = mel_spectral(w);
    const auto ref = mel_oracle(w);
    for (std::size_t i = 0; i < n; ++i) REQUIRE_THAT(got.weights[i], WithinAbs(ref[i], 1e-10));
  }
}

TEST_CASE("mel satisfies its constraints on random feasible instances") {
  testutil::Rng rng(42);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = rng.index(3, 40);
    std::vector<double> w(n);
    w[0] = 0.05 + 0.4 * rng.u();
    w[1] = 0.55 + 0.4 * rng.u();
    for (std::size_t i = 2; i < n; ++i) w[i] = rng.u();
    const auto est = mel_spectral(w);
    double sum = 0.0;
    for (double p : est.weights) {
      REQUIRE(p > 0.0);
      sum += p;
    }
    REQUIRE_THAT(sum, WithinAbs(1.0, 1e-13));
    REQUIRE_THAT(est.moment(), WithinAbs(0.5, 1e-10));
    REQUIRE_FALSE(est.has_negative_weights);
  }
}

TEST_CASE("mel rejects infeasible hulls") {
  REQUIRE_THROWS_AS(mel_spectral({0.1, 0.2, 0.4}), infeasible_error);
  REQUIRE_THROWS_AS(mel_spectral({0.6, 0.7}), infeasible_error);
  // one-sided with boundary contact is still infeasible
  REQUIRE_THROWS_AS(mel_spectral({0.5, 0.25}), infeasible_error);
}

TEST_CASE("euclidean weights on a hand-checked instance") {
  const auto est = euclidean_spectral({0.0, 1.0, 1.0});
  REQUIRE_THAT(est.weights[0], WithinAbs(0.5, 1e-15));
  REQUIRE_THAT(est.weights[1], WithinAbs(0.25, 1e-15));
  REQUIRE_THAT(est.weights[2], WithinAbs(0.25, 1e-15));
  REQUIRE_FALSE(est.has_negative_weights);
}

TEST_CASE("euclidean equals the constrained least squares solution") {
  testutil::Rng rng(43);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = rng.index(3, 30);
    std::vector<double> w(n);
    for (auto& v : w) v = rng.u();
    const auto est = euclidean_spectral(w);
    const auto ref = qp_oracle(w);
    for (std::size_t i = 0; i < n; ++i) REQUIRE_THAT(est.weights[i], WithinAbs(ref[i], 1e-11));
    double sum = 0.0;
    for (double p : est.weights) sum += p;
    REQUIRE_THAT(sum, WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(est.moment(), WithinAbs(0.5, 1e-12));
  }
}

TEST_CASE("euclidean flags negative weights") {
  const auto est = euclidean_spectral({0.5, 0.5, 0.5, 0.9, 0.95});
  REQUIRE(est.has_negative_weights);
  REQUIRE(est.weights.back() < 0.0);
  double sum = 0.0;
  for (double p : est.weights) sum += p;
  REQUIRE_THAT(sum, WithinAbs(1.0, 1e-13));
  REQUIRE_THAT(est.moment(), WithinAbs(0.5, 1e-13));
}

TEST_CASE("euclidean degenerate angle sets") {
  REQUIRE_THROWS_AS(euclidean_spectral({0.3, 0.3, 0.3}), degenerate_error);
  const auto est = euclidean_spectral({0.5, 0.5, 0.5});
  for (double p : est.weights) REQUIRE_THAT(p, WithinAbs(1.0 / 3.0, 1e-16));
}

TEST_CASE("estimators are equivariant under margin swap") {
  testutil::Rng rng(44);
  std::vector<double> w(12);
  w[0] = 0.1;
  w[1] = 0.9;
  for (std::size_t i = 2; i < w.size(); ++i) w[i] = rng.u();
  std::vector<double> rw(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) rw[i] = 1.0 - w[i];

  const auto pairs = {
      std::pair{empirical_spectral(w), empirical_spectral(rw)},
      std::pair{mel_spectral(w), mel_spectral(rw)},
      std::pair{euclidean_spectral(w), euclidean_spectral(rw)},
  };
  for (const auto& [a, b] : pairs)
    for (std::size_t i = 0; i < w.size(); ++i)
      REQUIRE_THAT(a.weights[i], WithinAbs(b.weights[i], 1e-12));
}

TEST_CASE("angle clamping pulls atoms off the boundary") {
  const auto out = clamp_angles({0.0, 0.2, 1.0, 0.999});
  REQUIRE_THAT(out[0], WithinAbs(0.125, 1e-16));
  REQUIRE_THAT(out[1], WithinAbs(0.2, 1e-16));
  REQUIRE_THAT(out[2], WithinAbs(0.875, 1e-16));
  REQUIRE_THAT(out[3], WithinAbs(0.875, 1e-16));
}

TEST_CASE("single kernel at half with nu=2 is the uniform density") {
  SpectralEstimate est;
  est.angles = {0.5};
  est.weights = {1.0};
  const auto dens = beta_smooth_density(est, 2.0);
  REQUIRE_THAT(dens(0.3), WithinAbs(1.0, 1e-13));
  REQUIRE_THAT(dens(0.77), WithinAbs(1.0, 1e-13));
  REQUIRE_THAT(dens.cdf(0.3), WithinAbs(0.3, 1e-13));
  REQUIRE_THAT(dens.mean(), WithinAbs(0.5, 1e-16));
  REQUIRE_THROWS_AS(beta_smooth_density(est, 0.0), config_error);
  REQUIRE_THROWS_AS(beta_smooth_density(est, -3.0), config_error);
}

TEST_CASE("smoothed density integrates to total mass and preserves the mean") {
  boost::math::quadrature::tanh_sinh<double> quad;
  testutil::Rng rng(45);

  std::vector<double> w(14);
  w[0] = 0.02;  // clamped upward
  w[1] = 0.98;
  for (std::size_t i = 2; i < w.size(); ++i) w[i] = rng.u();

  // Kernels with a shape parameter below one are singular at an endpoint,
  // and doubles near 1 are too coarse to carry the sliver of mass there.
  // A kernel at a mirrored center evaluated at a mirrored point equals the
  // original, so integrate each half upward from its own endpoint, where
  // subnormals give effectively unlimited resolution.
  const auto reflect = [](SpectralEstimate e) {
    for (auto& a : e.angles) a = 1.0 - a;
    return e;
  };

  for (const auto& est : {empirical_spectral(w), mel_spectral(w), euclidean_spectral(w)}) {
    for (double nu : {2.7, 35.0}) {
      const auto dens = beta_smooth_density(est, nu);
      const auto mirr = beta_smooth_density(reflect(est), nu);
      const double mass = quad.integrate([&](double x) { return dens(x); }, 0.0, 0.5) +
                          quad.integrate([&](double v) { return mirr(v); }, 0.0, 0.5);
      REQUIRE_THAT(mass, WithinAbs(1.0, 1e-9));
      const double mean =
          quad.integrate([&](double x) { return x * dens(x); }, 0.0, 0.5) +
          quad.integrate([&](double v) { return (1.0 - v) * mirr(v); }, 0.0, 0.5);
      REQUIRE_THAT(mean, WithinAbs(dens.mean(), 1e-9));
      // smoothed cdf is the integral of the smoothed density
      for (double x : {0.17, 0.5, 0.83}) {
        const double acc = quad.integrate([&](double y) { return dens(y); }, 0.0, x);
        REQUIRE_THAT(dens.cdf(x), WithinAbs(acc, 1e-8));
      }
    }
  }

  // signed density still integrates to unit total mass
  const auto neg = euclidean_spectral({0.5, 0.5, 0.5, 0.9, 0.95});
  REQUIRE(neg.has_negative_weights);
  const auto dens = beta_smooth_density(neg, 10.0);
  const auto mirr = beta_smooth_density(reflect(neg), 10.0);
  REQUIRE(dens.signed_density);
  const double mass = quad.integrate([&](double x) { return dens(x); }, 0.0, 0.5) +
                      quad.integrate([&](double v) { return mirr(v); }, 0.0, 0.5);
  REQUIRE_THAT(mass, WithinAbs(1.0, 1e-9));
}

TEST_CASE("leave one out score matches a direct reimplementation") {
  testutil::Rng rng(46);
  std::vector<double> w(9);
  w[0] = 0.12;
  w[1] = 0.88;
  for (std::size_t i = 2; i < w.size(); ++i) w[i] = rng.u();
  const auto est = mel_spectral(w);

  const auto brute = [&](double nu) {
    const double lo = 1.0 / (2.0 * static_cast<double>(w.size()));
    std::vector<double> cw(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) cw[i] = std::clamp(w[i], lo, 1.0 - lo);
    double score = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      double di = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) {
        if (j == i) continue;
        boost::math::beta_distribution<double> kb(cw[j] * nu, (1.0 - cw[j]) * nu);
        di += est.weights[j] / (1.0 - est.weights[i]) * boost::math::pdf(kb, cw[i]);
      }
      score += std::log(di);
    }
    return score;
  };

  for (double nu : {1.5, 8.0, 60.0, 250.0}) {
    const double got = loo_log_score(est, nu);
    const double want = brute(nu);
    REQUIRE_THAT(got, WithinAbs(want, 1e-9 * (1.0 + std::fabs(want))));
  }
  REQUIRE_THROWS_AS(loo_log_score(est, 0.0), config_error);

  SpectralEstimate tiny;
  tiny.angles = {0.4, 0.6};
  tiny.weights = {0.5, 0.5};
  REQUIRE_THROWS_AS(loo_log_score(tiny, 5.0), config_error);
}

TEST_CASE("cross validation picks the best score on the grid") {
  testutil::Rng rng(47);
  std::vector<double> w(20);
  w[0] = 0.1;
  w[1] = 0.9;
  for (std::size_t i = 2; i < w.size(); ++i) w[i] = rng.u();
  const auto est = euclidean_spectral(w);

  const auto grid = default_nu_grid();
  REQUIRE(grid.size() == 30);
  REQUIRE_THAT(grid.front(), WithinAbs(1.0, 1e-12));
  REQUIRE_THAT(grid.back(), WithinAbs(300.0, 1e-9));

  const double chosen = cross_validate_nu(est, grid);
  double best = -1e300, want = grid.front();
  for (double nu : grid) {
    const double s = loo_log_score(est, nu);
    if (s > best) {
      best = s;
      want = nu;
    }
  }
  REQUIRE(chosen == want);

  // reflection leaves the bandwidth choice unchanged
  std::vector<double> rw(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) rw[i] = 1.0 - w[i];
  REQUIRE(cross_validate_nu(euclidean_spectral(rw), grid) == chosen);

  REQUIRE_THROWS_AS(cross_validate_nu(est, {}), config_error);
  REQUIRE(cross_validate_nu(est, {chosen, chosen}) == chosen);
}
