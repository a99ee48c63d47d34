#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "taildep/coeffs.hpp"
#include "taildep/errors.hpp"
#include "taildep/hyptest.hpp"
#include "taildep/ingest.hpp"
#include "taildep/io.hpp"
#include "taildep/polar.hpp"
#include "taildep/spectral.hpp"
#include "taildep/stdf.hpp"

namespace taildep {

enum class PlotKind {
  polar_scatter,
  spectral_weights,
  spectral_density,
  level_sets,
  chi_curve,
  eta_curve,
  eta_test_curve,
  indep_test_curve,
  summary
};

inline const std::vector<std::string>& plot_schema(PlotKind kind) {
  static const std::vector<std::string> polar{"index", "radius", "angle", "exceed"};
  static const std::vector<std::string> weights{"angle", "weight"};
  static const std::vector<std::string> density{"x", "density"};
  static const std::vector<std::string> levels{"level", "t", "x", "y"};
  static const std::vector<std::string> chi{"u", "chi", "chibar"};
  static const std::vector<std::string> eta{"k", "eta_hill", "eta_mle", "chibar", "gpd_converged"};
  static const std::vector<std::string> etat{"k",        "eta",    "chi",      "sigma",
                                             "critical", "reject", "converged"};
  static const std::vector<std::string> indep{"k",        "t_int",    "t_sup",     "crit_int",
                                              "crit_sup", "reject_int", "reject_sup"};
  static const std::vector<std::string> summary{"n",       "k_exceed", "nu",      "chi_emp",
                                                "chi_cf",  "theta_fit", "eta_hill", "eta_mle",
                                                "chibar",  "t_int",    "t_sup"};
  switch (kind) {
    case PlotKind::polar_scatter: return polar;
    case PlotKind::spectral_weights: return weights;
    case PlotKind::spectral_density: return density;
    case PlotKind::level_sets: return levels;
    case PlotKind::chi_curve: return chi;
    case PlotKind::eta_curve: return eta;
    case PlotKind::eta_test_curve: return etat;
    case PlotKind::indep_test_curve: return indep;
    case PlotKind::summary: return summary;
  }
  throw config_error("plot_schema: unknown kind");
}

// Schema-checked table writer: every plot payload goes through here.
inline void emit_plot_data(PlotKind kind, const std::string& path, const Table& payload) {
  if (payload.columns != plot_schema(kind))
    throw config_error("emit_plot_data: payload columns do not match the schema for " + path);
  write_table(path, payload);
}

struct RunConfig {
  // ingest
  std::string input_path;
  std::vector<std::string> columns;  // labels; empty = all numeric columns
  bool already_returns = false;
  std::size_t stride = 1;
  EcdfConvention convention = EcdfConvention::shifted;
  // spectral
  SpectralKind estimator = SpectralKind::max_euclidean_likelihood;
  std::optional<std::size_t> k;  // order-statistic exceedance rule
  std::optional<double> q;       // quantile rule; neither set means quantile(0.95)
  std::optional<double> nu;      // fixed bandwidth; unset means cross-validated
  std::vector<double> nu_grid = default_nu_grid();
  std::size_t density_points = 512;
  // stdf
  std::size_t stdf_k = 50;
  std::vector<double> levels = {0.2, 0.4, 0.6, 0.8, 1.0};
  std::size_t rays = 101;
  // coefficients
  std::vector<double> u_grid;  // empty = default 0.80 .. 0.995 step 0.005
  // tests
  std::vector<std::size_t> k_grid;  // empty = default 25, 50, ..., 250
  double alpha = 0.05;
  bool simulate_critical = false;
  std::size_t mc_paths = 200000;
  std::size_t mc_steps = 2000;
  VarianceMode variance_mode = VarianceMode::at_one;
  // output
  std::string out_dir = ".";
  std::uint64_t seed = 1;

  static std::vector<double> default_u_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 39; ++i) g.push_back((800.0 + 5.0 * i) / 1000.0);
    return g;
  }
  static std::vector<std::size_t> default_k_grid() {
    std::vector<std::size_t> g;
    for (std::size_t k = 25; k <= 250; k += 25) g.push_back(k);
    return g;
  }

  std::vector<double> effective_u_grid() const { return u_grid.empty() ? default_u_grid() : u_grid; }
  std::vector<std::size_t> effective_k_grid() const {
    return k_grid.empty() ? default_k_grid() : k_grid;
  }
  ExceedanceRule effective_rule() const {
    if (k && q) throw config_error("config: --k and --quantile are mutually exclusive");
    if (k) return ExceedanceRule::order_statistic(*k);
    return ExceedanceRule::quantile(q.value_or(0.95));
  }

  void validate() const {
    if (stride == 0) throw config_error("config: stride must be >= 1");
    if (already_returns && stride > 1)
      throw config_error("config: stride applies to price inputs, not returns");
    if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("config: alpha must lie in (0,1)");
    if (std::fabs(alpha - 0.05) > 1e-12 && !simulate_critical)
      throw config_error("config: alpha != 0.05 requires simulated critical values");
    if (nu && !(*nu > 0.0)) throw config_error("config: nu must be positive");
    if (density_points < 2) throw config_error("config: need at least 2 density points");
    if (rays < 2) throw config_error("config: need at least 2 rays");
    for (double c : levels)
      if (!(c > 0.0)) throw config_error("config: levels must be positive");
    effective_rule();
  }

  // Deterministic header lines recorded in every emitted file.
  std::vector<std::string> serialize() const {
    std::vector<std::string> out;
    out.push_back("tool=taildep");
    const char* est = estimator == SpectralKind::empirical          ? "empirical"
                      : estimator == SpectralKind::max_empirical_likelihood ? "mel"
                                                                            : "euclidean";
    out.push_back(std::string("estimator=") + est);
    if (k)
      out.push_back("rule=order_statistic:" + std::to_string(*k));
    else
      out.push_back("rule=quantile:" + format_double(q.value_or(0.95), 17));
    out.push_back("nu=" + (nu ? format_double(*nu, 17) : std::string("cv")));
    out.push_back("stdf_k=" + std::to_string(stdf_k));
    std::string lv = "levels=";
    for (std::size_t i = 0; i < levels.size(); ++i)
      lv += (i ? "," : "") + format_double(levels[i], 17);
    out.push_back(lv);
    out.push_back("rays=" + std::to_string(rays));
    out.push_back("alpha=" + format_double(alpha, 17));
    std::string kg = "k_grid=";
    const auto ks = effective_k_grid();
    for (std::size_t i = 0; i < ks.size(); ++i) kg += (i ? "," : "") + std::to_string(ks[i]);
    out.push_back(kg);
    out.push_back(std::string("critical=") + (simulate_critical ? "simulate" : "stored"));
    out.push_back(std::string("variance=") +
                  (variance_mode == VarianceMode::at_one ? "at_one" : "at_estimate"));
    const char* conv = convention == EcdfConvention::shifted    ? "shifted"
                       : convention == EcdfConvention::raw      ? "raw"
                                                                : "midpoint";
    out.push_back(std::string("ecdf=") + conv);
    out.push_back(std::string("returns=") + (already_returns ? "1" : "0"));
    out.push_back("stride=" + std::to_string(stride));
    out.push_back("seed=" + std::to_string(seed));
    return out;
  }
};

namespace detail {

inline std::string sanitize_label(const std::string& s) {
  std::string out;
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out.empty() ? std::string("col") : out;
}

inline std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

}  // namespace detail

// Ingested numeric columns turned into the returns matrix the pipeline runs
// on: column selection, then negative log returns unless the input already
// is returns.
inline SampleMatrix load_returns(const RunConfig& cfg) {
  const LoadedSample loaded = read_delimited(cfg.input_path);
  const SampleMatrix& raw = loaded.data;

  std::vector<std::size_t> cols;
  if (cfg.columns.empty()) {
    for (std::size_t j = 0; j < raw.d; ++j) cols.push_back(j);
  } else {
    for (const auto& want : cfg.columns) {
      bool found = false;
      for (std::size_t j = 0; j < raw.d; ++j)
        if (raw.labels[j] == want) {
          cols.push_back(j);
          found = true;
          break;
        }
      if (!found) throw config_error("column '" + want + "' not found in " + cfg.input_path);
    }
  }
  if (cols.size() < 2) throw config_error("need at least 2 numeric columns");

  if (cfg.already_returns) {
    SampleMatrix out(raw.n, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out.labels[j] = raw.labels[cols[j]];
      for (std::size_t i = 0; i < raw.n; ++i) out(i, j) = raw(i, cols[j]);
    }
    return out;
  }

  std::vector<std::vector<double>> rets;
  for (std::size_t j : cols) rets.push_back(neg_log_returns(raw.column(j), cfg.stride));
  SampleMatrix out(rets[0].size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.labels[j] = raw.labels[cols[j]];
    for (std::size_t i = 0; i < out.n; ++i) out(i, j) = rets[j][i];
  }
  return out;
}

inline std::string pair_prefix(const SampleMatrix& returns2) {
  if (returns2.d != 2) throw config_error("pair_prefix: need exactly 2 columns");
  return detail::sanitize_label(returns2.labels[0]) + "_" +
         detail::sanitize_label(returns2.labels[1]);
}

// The per-pair derived state every emitter consumes.
struct PairAnalysis {
  std::string prefix;
  ParetoSample pareto;
  PolarSample polar;  // with exceedance selection
  SpectralEstimate spectral;
  double nu = 0.0;
  StdfEstimate ell_emp;
  StdfEstimate ell_cf;
};

inline PairAnalysis analyze_pair(const RunConfig& cfg, const SampleMatrix& returns2) {
  if (returns2.d != 2) throw config_error("analyze_pair: need exactly 2 columns");
  PairAnalysis pa;
  pa.prefix = pair_prefix(returns2);
  pa.pareto = rank_transform(returns2, cfg.convention);
  pa.polar = select_exceedances(to_polar(pa.pareto), cfg.effective_rule());
  const std::vector<double> angles = exceedance_angles(pa.polar);
  switch (cfg.estimator) {
    case SpectralKind::empirical: pa.spectral = empirical_spectral(angles); break;
    case SpectralKind::max_empirical_likelihood: pa.spectral = mel_spectral(angles); break;
    case SpectralKind::max_euclidean_likelihood: pa.spectral = euclidean_spectral(angles); break;
  }
  pa.nu = cfg.nu ? *cfg.nu : cross_validate_nu(pa.spectral, cfg.nu_grid);
  const std::size_t stdf_k = std::min(cfg.stdf_k, pa.pareto.n - 1);
  pa.ell_emp = empirical_stdf(pa.pareto, stdf_k);
  pa.ell_cf = cf_stdf(pa.spectral, pa.polar.k_used);
  return pa;
}

inline void emit_polar(const RunConfig& cfg, const PairAnalysis& pa) {
  Table t;
  t.columns = plot_schema(PlotKind::polar_scatter);
  t.metadata = cfg.serialize();
  t.metadata.push_back("pair=" + pa.prefix);
  std::vector<bool> ex(pa.polar.n, false);
  for (std::size_t i : pa.polar.exceed_idx) ex[i] = true;
  for (std::size_t i = 0; i < pa.polar.n; ++i)
    t.add_row({static_cast<double>(i + 1), pa.polar.radius[i], pa.polar.angle[i],
               ex[i] ? 1.0 : 0.0});
  emit_plot_data(PlotKind::polar_scatter,
                 detail::join_path(cfg.out_dir, pa.prefix + "_polar.tsv"), t);
}

inline void emit_spectral(const RunConfig& cfg, const PairAnalysis& pa) {
  Table w;
  w.columns = plot_schema(PlotKind::spectral_weights);
  w.metadata = cfg.serialize();
  w.metadata.push_back("pair=" + pa.prefix);
  w.metadata.push_back("k_exceed=" + std::to_string(pa.polar.k_used));
  std::vector<std::size_t> order(pa.spectral.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pa.spectral.angles[a] != pa.spectral.angles[b])
      return pa.spectral.angles[a] < pa.spectral.angles[b];
    return a < b;
  });
  for (std::size_t i : order) w.add_row({pa.spectral.angles[i], pa.spectral.weights[i]});
  emit_plot_data(PlotKind::spectral_weights,
                 detail::join_path(cfg.out_dir, pa.prefix + "_spectral.tsv"), w);

  const BetaMixtureDensity dens = beta_smooth_density(pa.spectral, pa.nu);
  Table d;
  d.columns = plot_schema(PlotKind::spectral_density);
  d.metadata = cfg.serialize();
  d.metadata.push_back("pair=" + pa.prefix);
  d.metadata.push_back("nu_chosen=" + format_double(pa.nu, 17));
  d.metadata.push_back(std::string("signed_density=") + (dens.signed_density ? "1" : "0"));
  for (std::size_t i = 0; i < cfg.density_points; ++i) {
    const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(cfg.density_points);
    d.add_row({x, dens(x)});
  }
  emit_plot_data(PlotKind::spectral_density,
                 detail::join_path(cfg.out_dir, pa.prefix + "_density.tsv"), d);
}

inline void emit_level_sets(const RunConfig& cfg, const PairAnalysis& pa) {
  Table t;
  t.columns = plot_schema(PlotKind::level_sets);
  t.metadata = cfg.serialize();
  t.metadata.push_back("pair=" + pa.prefix);
  t.metadata.push_back("stdf=spectral_cf");
  for (double c : cfg.levels)
    for (const LevelSetPoint& pt : level_set(pa.ell_cf, c, cfg.rays))
      t.add_row({c, pt.t, pt.x, pt.y});
  emit_plot_data(PlotKind::level_sets,
                 detail::join_path(cfg.out_dir, pa.prefix + "_levelsets.tsv"), t);
}

inline void emit_chi_curve(const RunConfig& cfg, const std::string& prefix,
                           const ParetoSample& pareto) {
  Table t;
  t.columns = plot_schema(PlotKind::chi_curve);
  t.metadata = cfg.serialize();
  t.metadata.push_back("pair=" + prefix);
  for (double u : cfg.effective_u_grid()) {
    double chi = std::numeric_limits<double>::quiet_NaN();
    try {
      chi = chi_u(pareto, u);
    } catch (const computation_error&) {
    }
    const auto cb = chibar_u(pareto, u);
    t.add_row({u, chi, cb ? *cb : std::numeric_limits<double>::quiet_NaN()});
  }
  emit_plot_data(PlotKind::chi_curve, detail::join_path(cfg.out_dir, prefix + "_chi.tsv"), t);
}

inline void emit_eta_curve(const RunConfig& cfg, const std::string& prefix,
                           const ParetoSample& pareto) {
  Table t;
  t.columns = plot_schema(PlotKind::eta_curve);
  t.metadata = cfg.serialize();
  t.metadata.push_back("pair=" + prefix);
  const StructureSample s = structure_variable(pareto);
  const std::size_t n = pareto.n;
  for (std::size_t k : diagnostic_k_grid(n)) {
    if (k < 10 || k >= n) continue;
    const double eh = hill_eta(s, k);
    double em = std::numeric_limits<double>::quiet_NaN();
    double conv = 0.0;
    try {
      const GpdFit fit = gpd_fit_excesses(s, k);
      em = fit.shape;
      conv = fit.converged ? 1.0 : 0.0;
    } catch (const computation_error&) {
    }
    t.add_row({static_cast<double>(k), eh, em, chibar(em), conv});
  }
  emit_plot_data(PlotKind::eta_curve, detail::join_path(cfg.out_dir, prefix + "_eta.tsv"), t);
}

inline void emit_eta_test_curve(const RunConfig& cfg, const std::string& prefix,
                                const ParetoSample& pareto) {
  const std::size_t n = pareto.n;
  Table et;
  et.columns = plot_schema(PlotKind::eta_test_curve);
  et.metadata = cfg.serialize();
  et.metadata.push_back("pair=" + prefix);
  for (std::size_t k : cfg.effective_k_grid()) {
    if (k < 10 || k >= n) continue;
    try {
      const EtaTestReport r = eta_test(pareto, k, cfg.alpha, cfg.variance_mode);
      et.add_row({static_cast<double>(k), r.eta_hat, r.chi_hat, r.sigma, r.critical,
                  r.reject ? 1.0 : 0.0, 1.0});
    } catch (const computation_error&) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      et.add_row({static_cast<double>(k), nan, nan, nan, nan, nan, 0.0});
    }
  }
  emit_plot_data(PlotKind::eta_test_curve,
                 detail::join_path(cfg.out_dir, prefix + "_etatest.tsv"), et);
}

inline void emit_indep_test_curve(const RunConfig& cfg, const std::string& prefix,
                                  const ParetoSample& pareto,
                                  std::optional<std::pair<double, double>> critical) {
  const std::size_t n = pareto.n;
  Table it;
  it.columns = plot_schema(PlotKind::indep_test_curve);
  it.metadata = cfg.serialize();
  it.metadata.push_back("pair=" + prefix);
  for (std::size_t k : cfg.effective_k_grid()) {
    if (n / 2 < 2 || k < 1 || k > n / 2 - 1) continue;
    const IndepTestReport r = indep_test(pareto, k, cfg.alpha, critical);
    it.add_row({static_cast<double>(k), r.t_int, r.t_sup, r.critical_int, r.critical_sup,
                r.reject_int ? 1.0 : 0.0, r.reject_sup ? 1.0 : 0.0});
  }
  emit_plot_data(PlotKind::indep_test_curve,
                 detail::join_path(cfg.out_dir, prefix + "_indeptest.tsv"), it);
}

inline void emit_summary(const RunConfig& cfg, const PairAnalysis& pa,
                         std::optional<std::pair<double, double>> critical) {
  const std::size_t n = pa.pareto.n;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const StructureSample s = structure_variable(pa.pareto);
  const std::size_t k_eta = std::min(std::max<std::size_t>(10, cfg.stdf_k), n - 1);
  const double eta_hill = hill_eta(s, k_eta);
  double eta_mle = nan;
  try {
    eta_mle = gpd_fit_excesses(s, k_eta).shape;
  } catch (const computation_error&) {
  }
  double t_int = nan, t_sup = nan;
  const std::size_t k_ind = std::min(cfg.stdf_k, n / 2 > 1 ? n / 2 - 1 : 1);
  if (k_ind >= 1 && k_ind <= n / 2 - 1) {
    const IndepTestReport r = indep_test(pa.pareto, k_ind, cfg.alpha, critical);
    t_int = r.t_int;
    t_sup = r.t_sup;
  }
  Table t;
  t.columns = plot_schema(PlotKind::summary);
  t.metadata = cfg.serialize();
  t.metadata.push_back("pair=" + pa.prefix);
  t.add_row({static_cast<double>(n), static_cast<double>(pa.polar.k_used), pa.nu,
             chi_from_stdf(pa.ell_emp), chi_from_stdf(pa.ell_cf), fit_logistic_theta(pa.ell_cf),
             eta_hill, eta_mle, chibar(eta_mle), t_int, t_sup});
  emit_plot_data(PlotKind::summary, detail::join_path(cfg.out_dir, pa.prefix + "_summary.tsv"),
                 t);
}

// Full pipeline for every unordered pair of columns. All emitted payloads
// are functions of the ranks and the config alone; no timestamps, so output
// bytes are a pure function of (input ranks, config).
inline void run_report(const RunConfig& cfg, const SampleMatrix& returns) {
  cfg.validate();
  std::optional<std::pair<double, double>> critical;
  if (cfg.simulate_critical)
    critical = simulate_limit_quantiles(cfg.alpha, cfg.mc_paths, cfg.mc_steps, cfg.seed);
  for (std::size_t a = 0; a < returns.d; ++a)
    for (std::size_t b = a + 1; b < returns.d; ++b) {
      SampleMatrix pair(returns.n, 2);
      pair.labels[0] = returns.labels[a];
      pair.labels[1] = returns.labels[b];
      for (std::size_t i = 0; i < returns.n; ++i) {
        pair(i, 0) = returns(i, a);
        pair(i, 1) = returns(i, b);
      }
      const PairAnalysis pa = analyze_pair(cfg, pair);
      emit_polar(cfg, pa);
      emit_spectral(cfg, pa);
      emit_level_sets(cfg, pa);
      emit_chi_curve(cfg, pa.prefix, pa.pareto);
      emit_eta_curve(cfg, pa.prefix, pa.pareto);
      emit_eta_test_curve(cfg, pa.prefix, pa.pareto);
      emit_indep_test_curve(cfg, pa.prefix, pa.pareto, critical);
      emit_summary(cfg, pa, critical);
    }
}

inline void run_report(const RunConfig& cfg) { run_report(cfg, load_returns(cfg)); }

}  // namespace taildep
