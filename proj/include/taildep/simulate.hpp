#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "taildep/errors.hpp"
#include "taildep/ingest.hpp"
#include "taildep/numeric.hpp"
#include "taildep/rng.hpp"

namespace taildep {

enum class CopulaFamily { gumbel, normal, independence, comonotone };

struct CopulaSpec {
  CopulaFamily family = CopulaFamily::independence;
  double theta = 1.0;  // gumbel: theta >= 1
  double rho = 0.0;    // normal: rho in (-1, 1)
  std::size_t d = 2;

  void validate() const {
    if (d < 2) throw config_error("copula spec: need d >= 2");
    switch (family) {
      case CopulaFamily::gumbel:
        if (!(theta >= 1.0) || !std::isfinite(theta))
          throw config_error("copula spec: gumbel theta must lie in [1, inf)");
        break;
      case CopulaFamily::normal:
        if (d != 2) throw config_error("copula spec: normal family is bivariate");
        if (!(rho > -1.0 && rho < 1.0))
          throw config_error("copula spec: rho must lie in (-1, 1)");
        break;
      case CopulaFamily::independence:
      case CopulaFamily::comonotone:
        break;
    }
  }
};

// Positive alpha-stable draw with Laplace transform exp(-s^alpha), 0<alpha<1,
// by the Kanter representation: Theta ~ U(0,pi), W ~ Exp(1),
//   V = [sin(a Theta) / (sin Theta)^(1/a)] [sin((1-a) Theta) / W]^((1-a)/a).
inline double positive_stable(RandomStream& rs, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("positive_stable: alpha must lie in (0,1)");
  const double theta = 3.14159265358979323846 * rs.uniform();
  const double w = rs.exponential();
  const double logv = std::log(std::sin(alpha * theta)) - std::log(std::sin(theta)) / alpha +
                      (1.0 - alpha) / alpha *
                          (std::log(std::sin((1.0 - alpha) * theta)) - std::log(w));
  return std::exp(logv);
}

// n rows from the copula, uniform margins. Row i consumes only the substream
// (seed, i), so any prefix of rows is reproducible in isolation.
inline SampleMatrix sample_copula(const CopulaSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw config_error("sample_copula: need n >= 1");
  SampleMatrix out(n, spec.d);
  for (std::size_t j = 0; j < spec.d; ++j) out.labels[j] = "U" + std::to_string(j + 1);

  for (std::size_t i = 0; i < n; ++i) {
    RandomStream rs = RandomStream::substream(seed, i);
    switch (spec.family) {
      case CopulaFamily::gumbel: {
        if (spec.theta == 1.0) {
          // exp(-E) with E = -log(U) is U itself: independence, drawn directly
          for (std::size_t j = 0; j < spec.d; ++j) out(i, j) = rs.uniform();
        } else {
          // Archimedean frailty: U_j = exp(-(E_j / V)^(1/theta))
          const double v = positive_stable(rs, 1.0 / spec.theta);
          for (std::size_t j = 0; j < spec.d; ++j)
            out(i, j) = std::exp(-std::pow(rs.exponential() / v, 1.0 / spec.theta));
        }
        break;
      }
      case CopulaFamily::normal: {
        const double z1 = rs.normal();
        const double z2 = spec.rho * z1 + std::sqrt(1.0 - spec.rho * spec.rho) * rs.normal();
        out(i, 0) = normal_cdf(z1);
        out(i, 1) = normal_cdf(z2);
        break;
      }
      case CopulaFamily::independence:
        for (std::size_t j = 0; j < spec.d; ++j) out(i, j) = rs.uniform();
        break;
      case CopulaFamily::comonotone: {
        const double u = rs.uniform();
        for (std::size_t j = 0; j < spec.d; ++j) out(i, j) = u;
        break;
      }
    }
  }
  return out;
}

// Spectral density of the bivariate logistic model on (0,1), theta > 1:
// dH/dw = ((theta-1)/2) [w(1-w)]^(-1-theta) [w^-theta + (1-w)^-theta]^(1/theta-2).
inline double gumbel_spectral_density(double theta, double w) {
  if (!(theta > 1.0) || !std::isfinite(theta))
    throw config_error("gumbel_spectral_density: theta must exceed 1");
  if (!(w > 0.0 && w < 1.0)) throw config_error("gumbel_spectral_density: w must lie in (0,1)");
  const double lw = std::log(w), l1w = std::log1p(-w);
  const double a = -theta * lw, b = -theta * l1w;
  const double lse = std::max(a, b) + std::log1p(std::exp(-std::fabs(a - b)));
  const double logh =
      std::log((theta - 1.0) / 2.0) - (1.0 + theta) * (lw + l1w) + (1.0 / theta - 2.0) * lse;
  return std::exp(logh);
}

// chi = 2 - 2^(1/theta) for the logistic model.
inline double chi_logistic(double theta) {
  if (!(theta >= 1.0) || !std::isfinite(theta))
    throw config_error("chi_logistic: theta must lie in [1, inf)");
  return 2.0 - std::pow(2.0, 1.0 / theta);
}

}  // namespace taildep
