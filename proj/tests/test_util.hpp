#pragma once

// Shared helpers for the unit tests. The generator here is intentionally not
// the library RandomStream so that test instances do not depend on the code
// under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "taildep/ingest.hpp"

namespace testutil {

// xorshift64* uniform generator, good enough for fuzzing test instances.
struct Rng {
  std::uint64_t s;
  explicit Rng(std::uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next() {
    s ^= s >> 12;
    s ^= s << 25;
    s ^= s >> 27;
    return s * 0x2545f4914f6cdd1dULL;
  }
  // open interval (0,1)
  double u() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }
  // integer in [lo, hi]
  std::size_t index(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(next() % (hi - lo + 1));
  }
};

inline taildep::SampleMatrix make_matrix(const std::vector<std::vector<double>>& rows) {
  taildep::SampleMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = 0; j < m.d; ++j) m(i, j) = rows[i][j];
  for (std::size_t j = 0; j < m.d; ++j) m.labels[j] = "c" + std::to_string(j + 1);
  return m;
}

// Kendall tau by direct pair counting; ties contribute zero.
inline double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  long long s = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = (x[i] - x[j]) * (y[i] - y[j]);
      if (a > 0.0)
        ++s;
      else if (a < 0.0)
        --s;
    }
  return 2.0 * static_cast<double>(s) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

// Kolmogorov-Smirnov distance of a sample against the uniform law on (0,1).
inline double ks_uniform(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    d = std::max(d, std::fabs(v[i] - static_cast<double>(i + 1) / n));
    d = std::max(d, std::fabs(v[i] - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace testutil
