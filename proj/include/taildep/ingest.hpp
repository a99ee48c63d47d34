#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "taildep/errors.hpp"

namespace taildep {

// n x d numeric observations, row-major, with column labels.
struct SampleMatrix {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> values;       // n*d
  std::vector<std::string> labels;  // d entries; empty labels allowed

  SampleMatrix() = default;
  SampleMatrix(std::size_t n_, std::size_t d_)
      : n(n_), d(d_), values(n_ * d_, 0.0), labels(d_) {}

  double operator()(std::size_t i, std::size_t j) const { return values[i * d + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * d + j]; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = values[i * d + j];
    return out;
  }

  void require_finite() const {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j)
        if (!std::isfinite((*this)(i, j)))
          throw config_error("non-finite value at row " + std::to_string(i + 1) +
                             ", column " + std::to_string(j + 1));
  }
};

// Negative log returns of a positive price series, subsampled at `period`:
// r_i = -log(P_{(i+1)p} / P_{ip}).
inline std::vector<double> neg_log_returns(const std::vector<double>& prices,
                                           std::size_t period = 1) {
  if (period == 0) throw config_error("neg_log_returns: period must be >= 1");
  if (prices.size() < period + 1)
    throw config_error("neg_log_returns: need at least period+1 prices");
  for (std::size_t i = 0; i < prices.size(); ++i)
    if (!(prices[i] > 0.0))
      throw config_error("neg_log_returns: non-positive price at position " +
                         std::to_string(i + 1));
  const std::size_t m = (prices.size() - 1) / period;
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i)
    out[i] = -std::log(prices[(i + 1) * period] / prices[i * period]);
  return out;
}

// Rank-to-ecdf conventions: (R-1)/n, R/n, (R-1/2)/n.
enum class EcdfConvention { shifted, raw, midpoint };

inline double ecdf_from_rank(std::size_t rank, std::size_t n, EcdfConvention c) {
  switch (c) {
    case EcdfConvention::raw:
      return static_cast<double>(rank) / static_cast<double>(n);
    case EcdfConvention::midpoint:
      return (static_cast<double>(rank) - 0.5) / static_cast<double>(n);
    case EcdfConvention::shifted:
    default:
      return (static_cast<double>(rank) - 1.0) / static_cast<double>(n);
  }
}

// Componentwise max-ranks R_ij = #{l : X_lj <= X_ij} plus the derived
// uniform and unit-Pareto margins. Ranks are the canonical representation;
// everything downstream depends on the data only through them.
struct ParetoSample {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<std::size_t> ranks;  // n*d, row-major, values in [1, n]
  std::vector<double> ecdf;        // per `convention`
  std::vector<double> pareto;      // n / (n + 1 - R), values in [1, n]
  std::vector<std::string> labels;
  EcdfConvention convention = EcdfConvention::shifted;

  std::size_t rank(std::size_t i, std::size_t j) const { return ranks[i * d + j]; }
  double unif(std::size_t i, std::size_t j) const { return ecdf[i * d + j]; }
  double par(std::size_t i, std::size_t j) const { return pareto[i * d + j]; }
};

inline ParetoSample rank_transform(const SampleMatrix& data,
                                   EcdfConvention convention = EcdfConvention::shifted) {
  if (data.n < 2) throw config_error("rank_transform: need at least 2 observations");
  if (data.d < 1) throw config_error("rank_transform: need at least 1 column");
  data.require_finite();

  ParetoSample out;
  out.n = data.n;
  out.d = data.d;
  out.labels = data.labels;
  out.convention = convention;
  out.ranks.resize(data.n * data.d);
  out.ecdf.resize(data.n * data.d);
  out.pareto.resize(data.n * data.d);

  std::vector<double> sorted(data.n);
  for (std::size_t j = 0; j < data.d; ++j) {
    for (std::size_t i = 0; i < data.n; ++i) sorted[i] = data(i, j);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < data.n; ++i) {
      // max-rank: ties share the highest rank of the tie group
      const auto r = static_cast<std::size_t>(
          std::upper_bound(sorted.begin(), sorted.end(), data(i, j)) - sorted.begin());
      out.ranks[i * data.d + j] = r;
      out.ecdf[i * data.d + j] = ecdf_from_rank(r, data.n, convention);
      out.pareto[i * data.d + j] =
          static_cast<double>(data.n) / (static_cast<double>(data.n) + 1.0 - static_cast<double>(r));
    }
  }
  return out;
}

}  // namespace taildep
