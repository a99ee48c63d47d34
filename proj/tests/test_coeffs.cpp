#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "taildep/coeffs.hpp"
#include "taildep/simulate.hpp"
#include "test_util.hpp"

using namespace taildep;
using Catch::Matchers::WithinAbs;

TEST_CASE("chi(u) on a comonotone sample, counted by hand") {
  const auto m = testutil::make_matrix({{1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}, {4.0, 4.0}});
  const auto p = rank_transform(m);
  // shifted ecdf values 0, .25, .5, .75; three rows satisfy both <= 0.6
  REQUIRE_THAT(chi_u(p, 0.6), WithinAbs(2.0 - std::log(0.75) / std::log(0.6), 1e-14));
  REQUIRE_THROWS_AS(chi_u(p, 0.0), config_error);
  REQUIRE_THROWS_AS(chi_u(p, 1.0), config_error);
}

TEST_CASE("chi(u) rejects a vanishing joint count") {
  // row with both margins small never materializes here
  const auto m = testutil::make_matrix({{1.0, 4.0}, {2.0, 3.0}, {3.0, 2.0}, {4.0, 1.0}});
  const auto p = rank_transform(m);
  REQUIRE_THROWS_AS(chi_u(p, 0.2), computation_error);
}

TEST_CASE("limit chi from the logistic stdf matches the closed form") {
  for (double theta : {1.0, 1.25, 2.0, 2.5, 10.0}) {
    const auto ell = logistic_stdf_estimate({theta, 2});
    REQUIRE_THAT(chi_from_stdf(ell), WithinAbs(chi_logistic(theta), 1e-14));
  }
  REQUIRE_THAT(chi_logistic(1.0), WithinAbs(0.0, 1e-16));
  REQUIRE_THAT(chi_logistic(2.0), WithinAbs(2.0 - std::sqrt(2.0), 1e-15));
}

TEST_CASE("chibar identities") {
  REQUIRE(chibar(1.0) == 1.0);
  REQUIRE(chibar(0.5) == 0.0);

  const auto como = testutil::make_matrix({{1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}, {4.0, 4.0}});
  const auto cb = chibar_u(rank_transform(como), 0.5);
  REQUIRE(cb.has_value());
  REQUIRE_THAT(*cb, WithinAbs(1.0, 1e-15));

  // joint exceedance count empty: undefined
  const auto m = testutil::make_matrix({{10.0, 30.0}, {20.0, 40.0}, {30.0, 10.0}, {40.0, 20.0}});
  REQUIRE_FALSE(chibar_u(rank_transform(m), 0.5).has_value());
}

TEST_CASE("structure variable is the componentwise Pareto minimum") {
  ParetoSample p;
  p.n = 2;
  p.d = 2;
  p.pareto = {2.0, 4.0, 3.0, 1.5};
  p.ranks.assign(4, 1);
  p.ecdf.assign(4, 0.0);
  const auto s = structure_variable(p);
  REQUIRE(s.values == std::vector<double>{2.0, 1.5});
  REQUIRE(s.sorted_desc == std::vector<double>{2.0, 1.5});

  REQUIRE_THROWS_AS(make_structure({1.0}), config_error);
  REQUIRE_THROWS_AS(make_structure({1.0, std::nan("")}), config_error);
}

TEST_CASE("hill estimator on a hand-checked sample") {
  const auto s = make_structure({8.0, 4.0, 2.0, 1.0});
  REQUIRE_THAT(hill_eta(s, 2), WithinAbs(0.5 * (std::log(4.0) + std::log(2.0)), 1e-15));
  REQUIRE_THROWS_AS(hill_eta(s, 0), config_error);
  REQUIRE_THROWS_AS(hill_eta(s, 4), config_error);
  REQUIRE_THROWS_AS(hill_eta(make_structure({1.0, 0.0, -1.0, -2.0}), 2), computation_error);
}

TEST_CASE("hill estimator on the exact Pareto grid") {
  const std::size_t n = 10000, k = 1000;
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(n) / static_cast<double>(i + 1);
  const auto s = make_structure(t);
  const double got = hill_eta(s, k);
  // closed form (1/k) sum log((k+1)/i)
  double want = 0.0;
  for (std::size_t i = 1; i <= k; ++i) want += std::log(static_cast<double>(k + 1) / static_cast<double>(i));
  want /= static_cast<double>(k);
  REQUIRE_THAT(got, WithinAbs(want, 1e-12));
  REQUIRE_THAT(got, WithinAbs(1.0, 0.01));
}

TEST_CASE("hill estimator concentrates on simulated Pareto tails") {
  const double eta = 0.7;
  RandomStream rs(99);
  std::vector<double> t(20000);
  for (auto& v : t) v = std::pow(rs.uniform(), -eta);  // P(T > x) = x^(-1/eta)
  const double got = hill_eta(make_structure(t), 2000);
  REQUIRE_THAT(got, WithinAbs(eta, 4.0 * eta / std::sqrt(2000.0)));
}

TEST_CASE("gpd fit recovers positive shape on exact inverse-cdf samples") {
  RandomStream rs(7);
  const double xi = 0.5, sigma = 1.0;
  std::vector<double> y(50000);
  for (auto& v : y) v = sigma * (std::pow(1.0 - rs.uniform(), -xi) - 1.0) / xi;
  const auto fit = fit_gpd(y);
  REQUIRE(fit.converged);
  REQUIRE(fit.n_excess == y.size());
  REQUIRE_THAT(fit.shape, WithinAbs(xi, 0.02));
  REQUIRE_THAT(fit.scale, WithinAbs(sigma, 0.02));

  // reported likelihood equals the likelihood recomputed at the reported fit
  double ll = 0.0;
  for (double v : y)
    ll += -std::log(fit.scale) - (1.0 + 1.0 / fit.shape) * std::log1p(fit.shape * v / fit.scale);
  REQUIRE_THAT(fit.loglik, WithinAbs(ll, 1e-7 * std::fabs(ll)));

  // local maximum: nudging either parameter cannot improve the likelihood
  const auto loglik_at = [&](double s, double x) {
    double acc = 0.0;
    for (double v : y) acc += -std::log(s) - (1.0 + 1.0 / x) * std::log1p(x * v / s);
    return acc;
  };
  const double slack = 1e-8 * std::fabs(ll);
  REQUIRE(loglik_at(fit.scale * (1.0 + 1e-4), fit.shape) <= fit.loglik + slack);
  REQUIRE(loglik_at(fit.scale * (1.0 - 1e-4), fit.shape) <= fit.loglik + slack);
  REQUIRE(loglik_at(fit.scale, fit.shape + 1e-4) <= fit.loglik + slack);
  REQUIRE(loglik_at(fit.scale, fit.shape - 1e-4) <= fit.loglik + slack);
}

TEST_CASE("gpd fit handles light and negative tails") {
  RandomStream rs(8);
  std::vector<double> expo(50000);
  for (auto& v : expo) v = -std::log(rs.uniform());
  const auto f0 = fit_gpd(expo);
  REQUIRE(f0.converged);
  REQUIRE_THAT(f0.shape, WithinAbs(0.0, 0.02));
  REQUIRE_THAT(f0.scale, WithinAbs(1.0, 0.02));

  const double xi = -0.3, sigma = 2.0;
  std::vector<double> neg(50000);
  for (auto& v : neg) v = sigma * (std::pow(1.0 - rs.uniform(), -xi) - 1.0) / xi;
  const auto fn = fit_gpd(neg);
  REQUIRE(fn.converged);
  REQUIRE_THAT(fn.shape, WithinAbs(xi, 0.02));
  REQUIRE_THAT(fn.scale, WithinAbs(sigma, 0.04));
}

TEST_CASE("gpd fit rejects degenerate excesses") {
  REQUIRE_THROWS_AS(fit_gpd({1.0}), config_error);
  REQUIRE_THROWS_AS(fit_gpd({1.0, -0.5}), config_error);
  REQUIRE_THROWS_AS(fit_gpd({0.0, 0.0, 0.0}), degenerate_error);
  REQUIRE_THROWS_AS(fit_gpd({2.0, 2.0, 2.0}), degenerate_error);
}

TEST_CASE("gpd excess fit uses the k largest structure values") {
  RandomStream rs(9);
  std::vector<double> t(5000);
  for (auto& v : t) v = 1.0 / rs.uniform();
  const auto s = make_structure(t);
  const std::size_t k = 500;
  const auto fit = gpd_fit_excesses(s, k);
  REQUIRE(fit.n_excess == k);
  REQUIRE_THAT(fit.threshold, WithinAbs(s.sorted_desc[k], 1e-15));
  // unit Pareto excesses over a high threshold look GPD with shape about 1
  REQUIRE_THAT(fit.shape, WithinAbs(1.0, 0.25));
  REQUIRE_THROWS_AS(gpd_fit_excesses(s, 9), config_error);
  REQUIRE_THROWS_AS(gpd_fit_excesses(s, 5000), config_error);
}

TEST_CASE("diagnostic k grid spans 20 to n/5") {
  const auto g1 = diagnostic_k_grid(1000);
  REQUIRE(g1.front() == 20);
  REQUIRE(g1.back() == 200);
  REQUIRE(g1.size() == 181);
  for (std::size_t i = 1; i < g1.size(); ++i) REQUIRE(g1[i] > g1[i - 1]);

  const auto g2 = diagnostic_k_grid(10000);
  REQUIRE(g2.front() == 20);
  REQUIRE(g2.back() == 2000);
  REQUIRE(g2.size() <= 200);

  REQUIRE(diagnostic_k_grid(25) == std::vector<std::size_t>{20});
  REQUIRE_THROWS_AS(diagnostic_k_grid(24), config_error);
}
