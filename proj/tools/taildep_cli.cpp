// Command line front end for the tail dependence toolkit. Exit codes:
// 0 success, 2 configuration/input error, 3 computation error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "taildep/taildep.hpp"

namespace {

taildep::EcdfConvention parse_ecdf(const std::string& s) {
  if (s == "shifted") return taildep::EcdfConvention::shifted;
  if (s == "raw") return taildep::EcdfConvention::raw;
  return taildep::EcdfConvention::midpoint;
}

taildep::SpectralKind parse_estimator(const std::string& s) {
  if (s == "emp") return taildep::SpectralKind::empirical;
  if (s == "mel") return taildep::SpectralKind::max_empirical_likelihood;
  return taildep::SpectralKind::max_euclidean_likelihood;
}

std::optional<double> parse_nu(const std::string& s) {
  if (s == "cv") return std::nullopt;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw taildep::config_error("--nu expects a positive number or 'cv', got '" + s + "'");
  }
}

std::vector<std::size_t> parse_k_grid(const std::string& s) {
  unsigned long a = 0, b = 0, step = 0;
  if (std::sscanf(s.c_str(), "%lu:%lu:%lu", &a, &b, &step) != 3 || step == 0 || a == 0 || b < a)
    throw taildep::config_error("--k-grid expects a:b:step with a <= b and step >= 1");
  std::vector<std::size_t> g;
  for (unsigned long k = a; k <= b; k += step) g.push_back(k);
  return g;
}

std::vector<double> parse_u_grid(const std::string& s) {
  double a = 0, b = 0, step = 0;
  if (std::sscanf(s.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 || !(step > 0) || !(a <= b) ||
      !(a > 0) || !(b < 1))
    throw taildep::config_error("--u-grid expects a:b:step inside (0,1)");
  std::vector<double> g;
  for (double u = a; u <= b + 1e-12; u += step) g.push_back(u);
  return g;
}

// Exactly two analysis columns after selection.
taildep::SampleMatrix load_pair(const taildep::RunConfig& cfg) {
  if (cfg.input_path.empty()) throw taildep::config_error("--input is required");
  taildep::SampleMatrix m = taildep::load_returns(cfg);
  if (m.d != 2)
    throw taildep::config_error("this command needs exactly 2 columns; select them with --cols");
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rank-based bivariate tail dependence toolkit"};
  app.require_subcommand(1);

  std::string input, out_dir = ".", ecdf = "shifted";
  std::vector<std::string> cols;
  std::uint64_t seed = 1;
  bool as_returns = false;
  std::size_t stride = 1;

  app.add_option("--input", input, "delimited input file (comma or tab)");
  app.add_option("--out", out_dir, "output directory (default .)");
  app.add_option("--seed", seed, "base RNG seed (default 1)");
  app.add_option("--cols", cols, "comma separated column labels to use")->delimiter(',');
  app.add_flag("--returns", as_returns, "input is already returns; skip the price transform");
  app.add_option("--stride", stride, "price subsampling period (default 1)");
  app.add_option("--ecdf", ecdf, "rank ecdf convention: shifted|raw|midpoint")
      ->check(CLI::IsMember({"shifted", "raw", "midpoint"}));

  auto* sim = app.add_subcommand("simulate", "draw a copula sample and write it");
  std::string family;
  double theta = 1.0, rho = 0.0;
  std::size_t sim_n = 0, sim_d = 2;
  std::string name = "sample.csv";
  sim->add_option("--family", family, "gumbel|normal|independence|comonotone")
      ->required()
      ->check(CLI::IsMember({"gumbel", "normal", "independence", "comonotone"}));
  sim->add_option("--theta", theta, "gumbel dependence parameter (>= 1)");
  sim->add_option("--rho", rho, "normal correlation in (-1,1)");
  sim->add_option("--n", sim_n, "number of rows")->required();
  sim->add_option("--d", sim_d, "dimension (default 2)");
  sim->add_option("--name", name, "output file name (default sample.csv)");

  std::string estimator = "euc", nu_str = "cv";
  std::size_t rule_k = 0;
  double rule_q = -1.0;
  std::size_t points = 512;
  auto* sp = app.add_subcommand("spectral", "angular measure estimate and smoothed density");
  sp->add_option("--estimator", estimator, "emp|mel|euc (default euc)")
      ->check(CLI::IsMember({"emp", "mel", "euc"}));
  sp->add_option("--k", rule_k, "order-statistic exceedance count");
  sp->add_option("--quantile", rule_q, "radius quantile threshold (default 0.95)");
  sp->add_option("--nu", nu_str, "beta kernel bandwidth, number or 'cv' (default cv)");
  sp->add_option("--points", points, "density curve sample count (default 512)");

  std::size_t stdf_k = 50, rays = 101;
  std::vector<double> levels;
  auto* sd = app.add_subcommand("stdf", "tail dependence function level sets");
  sd->add_option("--k", stdf_k, "exceedance count (default 50)");
  sd->add_option("--levels", levels, "comma separated level values")->delimiter(',');
  sd->add_option("--rays", rays, "rays per level set (default 101)");
  sd->add_option("--estimator", estimator, "emp|mel|euc weights behind the spectral stdf")
      ->check(CLI::IsMember({"emp", "mel", "euc"}));
  sd->add_option("--nu", nu_str, "bandwidth for the summary density, number or 'cv'");

  std::string u_grid_str;
  auto* co = app.add_subcommand("coeffs", "chi(u), chibar(u) and eta tables");
  co->add_option("--u-grid", u_grid_str, "a:b:step grid inside (0,1)");

  std::string null_kind, k_grid_str, critical = "stored", variance = "at_one";
  double alpha = 0.05;
  std::size_t mc_paths = 200000, mc_steps = 2000;
  auto* te = app.add_subcommand("test", "asymptotic dependence/independence tests");
  te->add_option("--null", null_kind, "independence|dependence")
      ->required()
      ->check(CLI::IsMember({"independence", "dependence"}));
  te->add_option("--k-grid", k_grid_str, "a:b:step grid of exceedance counts");
  te->add_option("--alpha", alpha, "test level (default 0.05)");
  te->add_option("--critical", critical, "stored|simulate critical values")
      ->check(CLI::IsMember({"stored", "simulate"}));
  te->add_option("--variance", variance, "at_one|at_estimate plug-in variance")
      ->check(CLI::IsMember({"at_one", "at_estimate"}));
  te->add_option("--paths", mc_paths, "Monte Carlo paths for --critical simulate");
  te->add_option("--steps", mc_steps, "grid steps per path for --critical simulate");

  auto* re = app.add_subcommand("report", "full pipeline over every column pair");
  re->add_option("--estimator", estimator, "emp|mel|euc (default euc)")
      ->check(CLI::IsMember({"emp", "mel", "euc"}));
  re->add_option("--k", rule_k, "order-statistic exceedance count");
  re->add_option("--quantile", rule_q, "radius quantile threshold (default 0.95)");
  re->add_option("--nu", nu_str, "beta kernel bandwidth, number or 'cv'");
  re->add_option("--stdf-k", stdf_k, "empirical stdf exceedance count (default 50)");
  re->add_option("--levels", levels, "comma separated level values")->delimiter(',');
  re->add_option("--rays", rays, "rays per level set (default 101)");
  re->add_option("--u-grid", u_grid_str, "a:b:step grid inside (0,1)");
  re->add_option("--k-grid", k_grid_str, "a:b:step grid of exceedance counts");
  re->add_option("--alpha", alpha, "test level (default 0.05)");
  re->add_option("--critical", critical, "stored|simulate critical values")
      ->check(CLI::IsMember({"stored", "simulate"}));
  re->add_option("--variance", variance, "at_one|at_estimate plug-in variance")
      ->check(CLI::IsMember({"at_one", "at_estimate"}));
  re->add_option("--points", points, "density curve sample count (default 512)");
  re->add_option("--paths", mc_paths, "Monte Carlo paths for --critical simulate");
  re->add_option("--steps", mc_steps, "grid steps per path for --critical simulate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    taildep::RunConfig cfg;
    cfg.input_path = input;
    cfg.columns = cols;
    cfg.already_returns = as_returns;
    cfg.stride = stride;
    cfg.convention = parse_ecdf(ecdf);
    cfg.estimator = parse_estimator(estimator);
    if (rule_k > 0) cfg.k = rule_k;
    if (rule_q >= 0.0) cfg.q = rule_q;
    cfg.nu = parse_nu(nu_str);
    cfg.stdf_k = stdf_k;
    if (!levels.empty()) cfg.levels = levels;
    cfg.rays = rays;
    if (!u_grid_str.empty()) cfg.u_grid = parse_u_grid(u_grid_str);
    if (!k_grid_str.empty()) cfg.k_grid = parse_k_grid(k_grid_str);
    cfg.alpha = alpha;
    cfg.simulate_critical = critical == "simulate";
    cfg.variance_mode = variance == "at_one" ? taildep::VarianceMode::at_one
                                             : taildep::VarianceMode::at_estimate;
    cfg.density_points = points;
    cfg.mc_paths = mc_paths;
    cfg.mc_steps = mc_steps;
    cfg.out_dir = out_dir;
    cfg.seed = seed;
    std::error_code dir_ec;
    std::filesystem::create_directories(out_dir, dir_ec);
    if (dir_ec) throw taildep::config_error("cannot create output directory: " + out_dir);

    if (sim->parsed()) {
      taildep::CopulaSpec spec;
      spec.family = family == "gumbel"         ? taildep::CopulaFamily::gumbel
                    : family == "normal"       ? taildep::CopulaFamily::normal
                    : family == "independence" ? taildep::CopulaFamily::independence
                                               : taildep::CopulaFamily::comonotone;
      spec.theta = theta;
      spec.rho = rho;
      spec.d = sim_d;
      const taildep::SampleMatrix m = taildep::sample_copula(spec, sim_n, seed);
      std::vector<std::string> meta{"tool=taildep", "family=" + family,
                                    "theta=" + taildep::format_double(theta, 17),
                                    "rho=" + taildep::format_double(rho, 17),
                                    "seed=" + std::to_string(seed)};
      taildep::write_sample(taildep::detail::join_path(out_dir, name), m, meta);
    } else if (sp->parsed()) {
      cfg.validate();
      const taildep::SampleMatrix pair = load_pair(cfg);
      const taildep::PairAnalysis pa = taildep::analyze_pair(cfg, pair);
      taildep::emit_polar(cfg, pa);
      taildep::emit_spectral(cfg, pa);
    } else if (sd->parsed()) {
      cfg.k = stdf_k;  // order-statistic rule shares the stdf exceedance count
      cfg.q.reset();
      cfg.validate();
      const taildep::SampleMatrix pair = load_pair(cfg);
      const taildep::PairAnalysis pa = taildep::analyze_pair(cfg, pair);
      taildep::emit_level_sets(cfg, pa);
      taildep::emit_summary(cfg, pa, std::nullopt);
    } else if (co->parsed()) {
      cfg.validate();
      const taildep::SampleMatrix pair = load_pair(cfg);
      const taildep::ParetoSample pareto = taildep::rank_transform(pair, cfg.convention);
      const std::string prefix = taildep::pair_prefix(pair);
      taildep::emit_chi_curve(cfg, prefix, pareto);
      taildep::emit_eta_curve(cfg, prefix, pareto);
    } else if (te->parsed()) {
      cfg.validate();
      const taildep::SampleMatrix pair = load_pair(cfg);
      const taildep::ParetoSample pareto = taildep::rank_transform(pair, cfg.convention);
      const std::string prefix = taildep::pair_prefix(pair);
      if (null_kind == "independence") {
        std::optional<std::pair<double, double>> crit;
        if (cfg.simulate_critical)
          crit = taildep::simulate_limit_quantiles(cfg.alpha, cfg.mc_paths, cfg.mc_steps, seed);
        taildep::emit_indep_test_curve(cfg, prefix, pareto, crit);
      } else {
        taildep::emit_eta_test_curve(cfg, prefix, pareto);
      }
    } else if (re->parsed()) {
      taildep::run_report(cfg);
    }
    return 0;
  } catch (const taildep::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
