// saddle-exit: resonance reports, normal forms, Monte Carlo exit ensembles,
// limit-law parameters/samples, and the full verification pipeline.
//
// Exit codes: 0 pass, 1 statistical failure, 2 configuration error.

#include "saddle/limit_laws.hpp"
#include "saddle/normal_form.hpp"
#include "saddle/resonance.hpp"
#include "saddle/sde.hpp"
#include "saddle/system.hpp"
#include "saddle/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace saddle;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json multi_index_json(const MultiIndex& m) {
  return {{"a1", m.a1}, {"a2", m.a2}, {"target", m.target}, {"order", m.order()}};
}

json coeff_table(const Poly& p, int target) {
  json arr = json::array();
  for (const auto& [e, c] : p.terms()) {
    arr.push_back({{"target", target},
                   {"a1", e.a1},
                   {"a2", e.a2},
                   {"numerator", numerator(c).str()},
                   {"denominator", denominator(c).str()}});
  }
  return arr;
}

json vec_table(const PolyVec& v) {
  json arr = coeff_table(v.c1, 1);
  for (const auto& rec : coeff_table(v.c2, 2)) arr.push_back(rec);
  return arr;
}

int cmd_resonance(const std::string& system_file, int rmax) {
  SaddleSystem sys = load_system(system_file);
  auto rep = validate_system(sys);
  if (!rep.valid) {
    std::cerr << "system failed validation:\n";
    for (const auto& f : rep.failures) std::cerr << "  " << f << "\n";
    return 2;
  }
  ResonanceReport r = resonant_indices(sys.lambda_plus, sys.lambda_minus, rmax);
  json j;
  j["lambda_plus"] = rational_to_string(r.lambda_plus);
  j["lambda_minus"] = rational_to_string(r.lambda_minus);
  j["classification"] =
      r.classification == ResonanceClass::OneResonant ? "one_resonant" : "non_resonant";
  j["r_max"] = r.r_max;
  if (r.generating_relation) j["generating_relation"] = multi_index_json(*r.generating_relation);
  j["indices_plus"] = json::array();
  for (const auto& m : r.indices_plus) j["indices_plus"].push_back(multi_index_json(m));
  j["indices_minus"] = json::array();
  for (const auto& m : r.indices_minus) j["indices_minus"].push_back(multi_index_json(m));
  auto violations = check_observations(r);
  j["observation_violations"] = violations;
  std::cout << j.dump(2) << "\n";
  return violations.empty() ? 0 : 1;
}

int cmd_normal_form(const std::string& system_file, int order) {
  SaddleSystem sys = load_system(system_file);
  auto rep = validate_system(sys);
  if (!rep.valid) {
    std::cerr << "system failed validation:\n";
    for (const auto& f : rep.failures) std::cerr << "  " << f << "\n";
    return 2;
  }
  NormalForm nf = poincare_dulac(sys, order);
  json j;
  j["order"] = nf.R;
  j["delta"] = nf.delta;
  j["delta_prime"] = nf.delta_prime;
  j["g"] = vec_table(nf.g);
  j["f"] = vec_table(nf.f);
  j["P"] = vec_table(nf.P);
  std::cout << j.dump(2) << "\n";
  return 0;
}

struct Pipeline {
  ExperimentConfig config;
  SaddleSystem sys;
  NormalForm nf;
  LimitLaw law;
  ExperimentSpec spec;
  double p = 0, y2 = 0;
};

Pipeline build_pipeline(const std::string& config_file) {
  Pipeline pl;
  pl.config = ExperimentConfig::load(config_file);
  pl.sys = load_system(pl.config.resolve(pl.config.system_file));
  auto rep = validate_system(pl.sys);
  if (!rep.valid)
    throw ConfigError("system failed validation: " +
                      (rep.failures.empty() ? "" : rep.failures[0]));

  int R = pl.config.order_R;
  if (R == 0) {
    auto gen = is_resonant_pair({pl.sys.lambda_plus, pl.sys.lambda_minus, false});
    R = std::max(2, gen.generating_relation ? gen.generating_relation->order() + 1 : 3);
  }
  pl.nf = poincare_dulac(pl.sys, R);

  Interval pr = p_range(pl.config.alpha, pl.sys.lp(), pl.sys.lm());
  pl.p = pl.config.p != 0.0 ? pl.config.p : 0.5 * (pr.lo + pr.hi);
  if (pl.p <= pr.lo || pl.p >= pr.hi)
    throw ConfigError("p outside the admissible range");
  if (pl.config.delta >= pl.nf.delta_prime)
    throw ConfigError("delta must be smaller than the normal-form box delta'");

  pl.y2 = pl.config.y2 != 0.0 ? pl.config.y2
                              : pl.nf.f.c2.eval(pl.sys.x0.x, pl.sys.x0.y);
  pl.law = make_limit_law(pl.sys, pl.nf, pl.config.alpha, pl.config.delta, pl.y2,
                          pl.config.chi_law.marginal_first(), pl.config.kernel);

  pl.spec.model = SdeModel::from_normal_form(pl.sys, pl.nf);
  pl.spec.base_point = {0.0, pl.y2};
  pl.spec.alpha = pl.config.alpha;
  pl.spec.chi_law = pl.config.chi_law;
  pl.spec.mode = ExperimentSpec::Mode::TwoStage;
  pl.spec.p = pl.p;
  pl.spec.delta = pl.config.delta;
  pl.spec.box_half_height = pl.nf.delta_prime;
  pl.spec.beta = pl.law.beta;
  return pl;
}

int cmd_simulate(const std::string& config_file) {
  Pipeline pl = build_pipeline(config_file);
  fs::create_directories(pl.config.output_dir);
  bool ok = true;
  for (size_t ei = 0; ei < pl.config.eps_grid.size(); ++ei) {
    SimConfig sim;
    sim.eps = pl.config.eps_grid[ei];
    sim.h = pl.config.h;
    sim.seed = pl.config.seed + ei;
    sim.n_paths = pl.config.n_paths;
    auto samples = run_ensemble(sim, pl.spec);
    auto sum = summarize(samples);
    std::ostringstream name;
    name << "eps_" << ei << ".csv";
    write_samples_csv(samples, (fs::path(pl.config.output_dir) / name.str()).string());
    double n = static_cast<double>(samples.size());
    std::printf("eps=%g side=%ld top_bottom=%ld censored=%ld escaped=%ld\n", sim.eps,
                sum.side_hits, sum.top_bottom, sum.censored, sum.escaped);
    if (sum.censored / n > pl.config.max_censored_fraction) ok = false;
  }
  return ok ? 0 : 1;
}

int cmd_limit_law(const std::string& config_file, long n_samples) {
  Pipeline pl = build_pipeline(config_file);
  Interval pr = p_range(pl.config.alpha, pl.sys.lp(), pl.sys.lm());
  json j;
  j["alpha"] = pl.law.alpha;
  j["beta"] = pl.law.beta;
  j["p_range"] = {pr.lo, pr.hi};
  j["var_N_plus"] = pl.law.var_N_plus;
  j["sigma_plus"] = pl.law.sigma_plus;
  j["sigma_minus"] = pl.law.sigma_minus;
  j["y2"] = pl.law.y2;
  j["delta"] = pl.law.delta;
  std::cout << j.dump(2) << "\n";

  if (n_samples > 0) {
    fs::create_directories(pl.config.output_dir);
    std::vector<ExitSample> rows;
    rows.reserve(n_samples);
    for (long k = 0; k < n_samples; ++k) {
      Rng rng = sampler_stream(pl.config.seed, static_cast<uint64_t>(k));
      ThetaPrimeSample t =
          sample_theta_prime(pl.law, Mat2::identity(), Mat2::identity(), rng);
      ExitSample s;
      s.path_id = k;
      s.exit_kind = ExitKind::SideHit;
      s.exit_point = t.phi;
      s.exit_time = t.time;
      s.rescaled = RescaledTriple{t.eta0_plus > 0 ? 1 : -1, t.phi.y, t.time};
      rows.push_back(s);
    }
    write_samples_csv(rows, (fs::path(pl.config.output_dir) / "limit_samples.csv").string());
  }
  return 0;
}

int cmd_verify(const std::string& config_file) {
  ExperimentConfig config = ExperimentConfig::load(config_file);
  VerificationReport rep = run_verification(config);
  emit_report(rep, config.output_dir);
  std::cout << (rep.pass ? "PASS" : "FAIL") << " beta_estimate=" << rep.beta_estimate
            << " (expected " << rep.beta_expected << ")\n";
  return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exit statistics of small-noise saddle diffusions"};
  app.require_subcommand(1);

  std::string system_file, config_file;
  int rmax = 12, order = 3;
  long n_samples = 0;

  auto* res = app.add_subcommand("resonance", "resonant multi-index report");
  res->add_option("--system", system_file, "system JSON file")->required();
  res->add_option("--rmax", rmax, "maximum order");

  auto* nform = app.add_subcommand("normal-form", "Poincare-Dulac normal form tables");
  nform->add_option("--system", system_file, "system JSON file")->required();
  nform->add_option("--order", order, "truncation order R");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo exit ensembles to CSV");
  sim->add_option("--config", config_file, "experiment config JSON")->required();

  auto* law = app.add_subcommand("limit-law", "limit-law parameters and samples");
  law->add_option("--config", config_file, "experiment config JSON")->required();
  law->add_option("--samples", n_samples, "stream N limit samples to CSV");

  auto* ver = app.add_subcommand("verify", "Monte Carlo vs limit-law verification");
  ver->add_option("--config", config_file, "experiment config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (res->parsed()) return cmd_resonance(system_file, rmax);
    if (nform->parsed()) return cmd_normal_form(system_file, order);
    if (sim->parsed()) return cmd_simulate(config_file);
    if (law->parsed()) return cmd_limit_law(config_file, n_samples);
    if (ver->parsed()) return cmd_verify(config_file);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
