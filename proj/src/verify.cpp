#include "saddle/verify.hpp"

#include "saddle/stats.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace saddle {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::parse(const std::string& text,
                                         const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig c;
  c.base_dir = base_dir;
  try {
    c.system_file = j.at("system_file").get<std::string>();
    c.mode = j.value("mode", "verify");
    for (double e : j.at("eps_grid")) c.eps_grid.push_back(e);
    c.alpha = j.value("alpha", 1.0);
    c.p = j.value("p", 0.0);
    c.delta = j.value("delta", 0.5);
    c.y2 = j.value("y2", 0.0);
    c.n_paths = j.value("n_paths", 10000L);
    c.seed = j.value("seed", uint64_t{1});
    c.h = j.value("h", 0.0);
    c.order_R = j.value("order_R", 0);
    c.output_dir = j.value("output_dir", "out");
    c.ks_threshold = j.value("ks_threshold", 0.05);
    c.exponent_tol = j.value("exponent_tol", 0.1);
    c.max_censored_fraction = j.value("max_censored_fraction", 0.05);
    std::string kv = j.value("kernel_variant", "lambda_plus");
    if (kv == "lambda_plus") c.kernel = KernelVariant::LambdaPlus;
    else if (kv == "lambda_minus") c.kernel = KernelVariant::LambdaMinus;
    else throw ConfigError("unknown kernel_variant: " + kv);
    if (j.contains("chi")) {
      // Same mixture schema as the system file's initial law.
      std::vector<MixtureComponent2> comps;
      for (const auto& cc : j.at("chi").at("components")) {
        MixtureComponent2 mc;
        mc.weight = cc.value("weight", 1.0);
        mc.mean = {cc.at("mean").at(0).get<double>(), cc.at("mean").at(1).get<double>()};
        if (cc.at("type") == "point_mass") {
          mc.point_mass = true;
        } else {
          const auto& cov = cc.at("cov");
          mc.cov = Mat2{{cov.at(0).at(0).get<double>(), cov.at(0).at(1).get<double>(),
                         cov.at(1).at(0).get<double>(), cov.at(1).at(1).get<double>()}};
        }
        comps.push_back(mc);
      }
      c.chi_law = Mixture2D(comps);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }

  if (c.eps_grid.empty()) throw ConfigError("eps_grid must be non-empty");
  for (size_t i = 0; i < c.eps_grid.size(); ++i) {
    if (c.eps_grid[i] <= 0 || c.eps_grid[i] >= 1)
      throw ConfigError("eps_grid entries must lie in (0,1)");
    if (i > 0 && c.eps_grid[i] >= c.eps_grid[i - 1])
      throw ConfigError("eps_grid must be strictly decreasing");
  }
  if (c.alpha <= 0 || c.alpha > 1) throw ConfigError("alpha must lie in (0,1]");
  if (c.n_paths <= 0) throw ConfigError("n_paths must be positive");
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), fs::path(path).parent_path().string());
}

std::string ExperimentConfig::resolve(const std::string& p) const {
  fs::path fp(p);
  if (fp.is_absolute() || base_dir.empty()) return p;
  return (fs::path(base_dir) / fp).string();
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

VerificationReport run_verification(const ExperimentConfig& config) {
  SaddleSystem sys = load_system(config.resolve(config.system_file));
  auto validation = validate_system(sys);
  if (!validation.valid)
    throw ConfigError("system failed validation: " +
                      (validation.failures.empty() ? "" : validation.failures[0]));

  int R = config.order_R;
  if (R == 0) {
    auto gen = is_resonant_pair({sys.lambda_plus, sys.lambda_minus, false});
    R = std::max(2, gen.generating_relation ? gen.generating_relation->order() + 1 : 3);
  }
  NormalForm nf = poincare_dulac(sys, R);

  double lp = sys.lp(), lm = sys.lm();
  Interval pr = p_range(config.alpha, lp, lm);
  double p = config.p != 0.0 ? config.p : 0.5 * (pr.lo + pr.hi);
  if (p <= pr.lo || p >= pr.hi)
    throw ConfigError("p outside the admissible range (" + std::to_string(pr.lo) + ", " +
                      std::to_string(pr.hi) + ")");
  if (config.delta >= nf.delta_prime)
    throw ConfigError("delta must be smaller than the normal-form box delta'");
  // The intermediate surface |Y1| = eps^(alpha p) must sit strictly inside
  // the exit surface |Y1| = delta for every grid point.
  for (double eps : config.eps_grid)
    if (std::pow(eps, config.alpha * p) >= config.delta)
      throw ConfigError("stage ordering violated: eps^(alpha p) >= delta at eps = " +
                        std::to_string(eps) + "; raise p, shrink eps or raise delta");

  double y2 = config.y2;
  if (y2 == 0.0) y2 = nf.f.c2.eval(sys.x0.x, sys.x0.y);

  LimitLaw law = make_limit_law(sys, nf, config.alpha, config.delta, y2,
                                config.chi_law.marginal_first(), config.kernel);

  VerificationReport rep;
  rep.system_name = sys.name;
  rep.alpha = config.alpha;
  rep.beta_expected = law.beta;
  rep.p = p;
  rep.delta = config.delta;
  rep.var_N_plus = law.var_N_plus;
  rep.sigma_plus = law.sigma_plus;
  rep.sigma_minus = law.sigma_minus;

  ExperimentSpec spec;
  spec.model = SdeModel::from_normal_form(sys, nf);
  spec.base_point = {0.0, y2};
  spec.alpha = config.alpha;
  spec.chi_law = config.chi_law;
  spec.mode = ExperimentSpec::Mode::TwoStage;
  spec.p = p;
  spec.delta = config.delta;
  spec.box_half_height = nf.delta_prime;
  spec.beta = law.beta;

  std::vector<double> eps_for_fit, iqr_for_fit, mean_times, log_eps;

  for (size_t ei = 0; ei < config.eps_grid.size(); ++ei) {
    double eps = config.eps_grid[ei];
    SimConfig sim;
    sim.eps = eps;
    sim.h = config.h;
    sim.seed = config.seed + ei;
    sim.n_paths = config.n_paths;

    auto samples = run_ensemble(sim, spec);
    auto summary = summarize(samples);

    EpsResult res;
    res.eps = eps;
    double n = static_cast<double>(samples.size());
    res.top_bottom_fraction = summary.top_bottom / n;
    res.censored_fraction = summary.censored / n;
    res.escaped_fraction = summary.escaped / n;
    res.side_hits = summary.side_hits;

    std::vector<double> emp_sign, emp_transverse, emp_time, emp_y2raw;
    for (const auto& s : samples) {
      if (!s.rescaled) continue;
      emp_sign.push_back(s.rescaled->psi_sign);
      emp_transverse.push_back(s.rescaled->phi);
      emp_time.push_back(s.rescaled->time_shifted);
      emp_y2raw.push_back(s.exit_point.y);

      // Recorded algebraic identities, exact by construction.
      double tau_hat_pred = -(config.alpha / lp) * (1 - p) * std::log(eps) -
                            std::log(std::abs(s.eta_plus)) / lp;
      res.max_tau_hat_identity_error =
          std::max(res.max_tau_hat_identity_error, std::abs(tau_hat_pred - s.tau_hat));
    }

    if (!emp_sign.empty()) {
      std::vector<double> lim_sign, lim_transverse, lim_time;
      for (size_t k = 0; k < emp_sign.size(); ++k) {
        Rng rng = sampler_stream(config.seed + ei, k);
        ThetaPrimeSample t = sample_theta_prime(law, Mat2::identity(), Mat2::identity(), rng);
        lim_sign.push_back(t.eta0_plus > 0 ? 1.0 : -1.0);
        lim_transverse.push_back(t.phi.y);
        lim_time.push_back(t.time);
        res.max_time_identity_error = std::max(
            res.max_time_identity_error,
            std::abs(t.time - (std::log(law.delta) - std::log(std::abs(t.eta0_plus))) / lp));
      }
      res.ks_sign = ks_two_sample(emp_sign, lim_sign);
      res.ks_transverse = ks_two_sample(emp_transverse, lim_transverse);
      res.ks_time = ks_two_sample(emp_time, lim_time);
      if (emp_y2raw.size() >= 4) {
        res.iqr_y2 = interquartile_range(emp_y2raw);
        if (res.iqr_y2 > 0) {
          eps_for_fit.push_back(eps);
          iqr_for_fit.push_back(res.iqr_y2);
        }
      }
      res.mean_exit_time = sample_mean(emp_time);
      mean_times.push_back(sample_mean(emp_time) - (config.alpha / lp) * std::log(eps));
      log_eps.push_back(std::log(eps));
    }

    rep.per_eps.push_back(res);
    rep.samples_per_eps.push_back(std::move(samples));
  }

  // Scaling exponent from the unrescaled transverse spread.
  if (eps_for_fit.size() >= 3) {
    auto fit = scaling_regression(eps_for_fit, iqr_for_fit);
    rep.beta_estimate = fit.slope;
    rep.beta_stderr = fit.stderr_slope;
    rep.beta_pass = std::abs(fit.slope - law.beta) <= config.exponent_tol;
  }

  // Exit-time slope: mean tau^U against -(alpha/l+) ln eps.
  if (mean_times.size() >= 2) {
    double num = 0, den = 0;
    double mx = sample_mean(log_eps), my = sample_mean(mean_times);
    for (size_t i = 0; i < log_eps.size(); ++i) {
      num += (log_eps[i] - mx) * (mean_times[i] - my);
      den += (log_eps[i] - mx) * (log_eps[i] - mx);
    }
    rep.time_slope_estimate = num / den;
    rep.time_slope_expected = -config.alpha / lp;
  }

  // Pass/fail aggregation.
  rep.censoring_pass = true;
  for (const auto& r : rep.per_eps)
    if (r.censored_fraction > config.max_censored_fraction) rep.censoring_pass = false;

  auto worst_ks = [](const EpsResult& r) {
    return std::max({r.ks_sign, r.ks_transverse, r.ks_time});
  };
  if (!rep.per_eps.empty()) {
    rep.ks_pass = worst_ks(rep.per_eps.back()) < config.ks_threshold;
    // The KS statistic has a sampling floor of order n^-1/2; increases within
    // 1.5 n^-1/2 are noise, one larger inversion is tolerated, two fail.
    int inversions = 0;
    for (size_t i = 1; i < rep.per_eps.size(); ++i) {
      double prev = rep.per_eps[i - 1].ks_time, cur = rep.per_eps[i].ks_time;
      long n = std::max(rep.per_eps[i].side_hits, 1L);
      double floor = 1.5 / std::sqrt(double(n));
      if (cur > prev + floor) ++inversions;
    }
    rep.ks_monotone_pass = inversions <= 1;
  }
  rep.pass = rep.ks_pass && rep.ks_monotone_pass && rep.beta_pass && rep.censoring_pass;
  if (!rep.censoring_pass) rep.pass = false;
  return rep;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace {

void check_finite(const json& j, const std::string& path) {
  if (j.is_number_float() && !std::isfinite(j.get<double>()))
    throw std::runtime_error("report contains a non-finite statistic at field: " + path);
  if (j.is_object())
    for (const auto& [k, v] : j.items()) check_finite(v, path.empty() ? k : path + "." + k);
  if (j.is_array())
    for (size_t i = 0; i < j.size(); ++i)
      check_finite(j.at(i), path + "[" + std::to_string(i) + "]");
}

}  // namespace

json report_to_json(const VerificationReport& rep) {
  json j;
  j["system"] = rep.system_name;
  j["alpha"] = rep.alpha;
  j["beta_expected"] = rep.beta_expected;
  j["p"] = rep.p;
  j["delta"] = rep.delta;
  j["var_N_plus"] = rep.var_N_plus;
  j["sigma_plus"] = rep.sigma_plus;
  j["sigma_minus"] = rep.sigma_minus;
  j["per_eps"] = json::array();
  for (const auto& r : rep.per_eps) {
    j["per_eps"].push_back({{"eps", r.eps},
                            {"ks_sign", r.ks_sign},
                            {"ks_transverse", r.ks_transverse},
                            {"ks_time", r.ks_time},
                            {"iqr_y2", r.iqr_y2},
                            {"mean_exit_time", r.mean_exit_time},
                            {"side_hits", r.side_hits},
                            {"top_bottom_fraction", r.top_bottom_fraction},
                            {"censored_fraction", r.censored_fraction},
                            {"escaped_fraction", r.escaped_fraction},
                            {"max_tau_hat_identity_error", r.max_tau_hat_identity_error},
                            {"max_time_identity_error", r.max_time_identity_error}});
  }
  j["beta_estimate"] = rep.beta_estimate;
  j["beta_stderr"] = rep.beta_stderr;
  j["time_slope_estimate"] = rep.time_slope_estimate;
  j["time_slope_expected"] = rep.time_slope_expected;
  j["ks_pass"] = rep.ks_pass;
  j["ks_monotone_pass"] = rep.ks_monotone_pass;
  j["beta_pass"] = rep.beta_pass;
  j["censoring_pass"] = rep.censoring_pass;
  j["pass"] = rep.pass;
  return j;
}

void emit_report(const VerificationReport& rep, const std::string& output_dir) {
  json j = report_to_json(rep);
  check_finite(j, "");

  fs::create_directories(fs::path(output_dir) / "samples");

  {
    std::ofstream f(fs::path(output_dir) / "report.json", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write report.json in " + output_dir);
    f << j.dump(2) << "\n";
  }
  {
    std::ofstream f(fs::path(output_dir) / "summary.txt", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write summary.txt in " + output_dir);
    char buf[256];
    f << "system: " << rep.system_name << "\n";
    std::snprintf(buf, sizeof(buf), "alpha=%.6g beta_expected=%.6g p=%.6g delta=%.6g\n",
                  rep.alpha, rep.beta_expected, rep.p, rep.delta);
    f << buf;
    f << "eps          ks_sign   ks_transv ks_time   censored  top_bot\n";
    for (const auto& r : rep.per_eps) {
      std::snprintf(buf, sizeof(buf), "%-12.4g %-9.4f %-9.4f %-9.4f %-9.4f %-9.4f\n", r.eps,
                    r.ks_sign, r.ks_transverse, r.ks_time, r.censored_fraction,
                    r.top_bottom_fraction);
      f << buf;
    }
    std::snprintf(buf, sizeof(buf), "beta estimate %.4f (expected %.4f)\n",
                  rep.beta_estimate, rep.beta_expected);
    f << buf;
    f << "overall: " << (rep.pass ? "PASS" : "FAIL") << "\n";
  }
  for (size_t i = 0; i < rep.samples_per_eps.size(); ++i) {
    std::ostringstream name;
    name << "eps_" << i << ".csv";
    write_samples_csv(rep.samples_per_eps[i],
                      (fs::path(output_dir) / "samples" / name.str()).string());
  }
}

}  // namespace saddle
