#include "saddle/sde.hpp"

#include "saddle/limit_laws.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace saddle {

namespace {

double pow_int(double x, int n) {
  double r = 1;
  while (n-- > 0) r *= x;
  return r;
}

double eval_terms(const std::vector<TermD>& terms, double x, double y) {
  double s = 0;
  for (const auto& t : terms) s += t.c * pow_int(x, t.a1) * pow_int(y, t.a2);
  return s;
}

std::vector<TermD> compile_poly(const Poly& p) {
  std::vector<TermD> out;
  for (const auto& [e, c] : p.terms()) out.push_back({to_double(c), e.a1, e.a2});
  return out;
}

std::vector<TermD> compile_nonlinear(const Poly& p) {
  std::vector<TermD> out;
  for (const auto& [e, c] : p.terms())
    if (e.order() >= 2) out.push_back({to_double(c), e.a1, e.a2});
  return out;
}

bool poly_is_constant(const Poly& p) { return p.max_degree() <= 0; }

unsigned worker_count() {
  if (const char* env = std::getenv("SADDLE_EXIT_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return 1;
}

}  // namespace

void SimConfig::validate() const {
  if (eps < 0 || eps >= 1) throw std::invalid_argument("SimConfig: eps must be in [0,1)");
  if (h < 0) throw std::invalid_argument("SimConfig: h must be nonnegative");
  if (t_max != 0 && t_max < 1) throw std::invalid_argument("SimConfig: t_max must be >= 1");
  if (n_paths < 0) throw std::invalid_argument("SimConfig: n_paths must be nonnegative");
}

SdeModel SdeModel::from_system(const SaddleSystem& sys) {
  SdeModel m;
  m.A = Mat2::diag(sys.lp(), -sys.lm());
  m.q1 = compile_nonlinear(sys.Q.c1);
  m.q2 = compile_nonlinear(sys.Q.c2);
  m.sigma_constant = true;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      if (!poly_is_constant(sys.sigma.m[i][j])) m.sigma_constant = false;
      m.sig[i][j] = compile_poly(sys.sigma.m[i][j]);
    }
  if (m.sigma_constant)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m.sigma0(i, j) = sys.sigma.m[i][j].eval(0, 0);
  m.guard_radius = sys.guard_radius;
  m.lambda_plus = sys.lp();
  m.lambda_minus = sys.lm();
  return m;
}

SdeModel SdeModel::from_normal_form(const SaddleSystem& sys, const NormalForm& nf) {
  SdeModel m;
  m.A = Mat2::diag(sys.lp(), -sys.lm());
  m.q1 = compile_nonlinear(nf.P.c1);
  m.q2 = compile_nonlinear(nf.P.c2);
  m.psi1 = compile_poly(nf.Psi.c1);
  m.psi2 = compile_poly(nf.Psi.c2);
  m.sigma_constant = true;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      if (!poly_is_constant(nf.sigma_tilde.m[i][j])) m.sigma_constant = false;
      m.sig[i][j] = compile_poly(nf.sigma_tilde.m[i][j]);
    }
  if (m.sigma_constant)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m.sigma0(i, j) = nf.sigma_tilde.m[i][j].eval(0, 0);
  m.guard_radius = sys.guard_radius;
  m.lambda_plus = sys.lp();
  m.lambda_minus = sys.lm();
  return m;
}

Vec2 SdeModel::drift(Vec2 y, double eps2) const {
  Vec2 d{A(0, 0) * y.x + A(0, 1) * y.y, A(1, 0) * y.x + A(1, 1) * y.y};
  if (!q1.empty()) d.x += eval_terms(q1, y.x, y.y);
  if (!q2.empty()) d.y += eval_terms(q2, y.x, y.y);
  if (eps2 != 0) {
    if (!psi1.empty()) d.x += eps2 * eval_terms(psi1, y.x, y.y);
    if (!psi2.empty()) d.y += eps2 * eval_terms(psi2, y.x, y.y);
  }
  return d;
}

Mat2 SdeModel::sigma(Vec2 y) const {
  if (sigma_constant) return sigma0;
  Mat2 s;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) s(i, j) = eval_terms(sig[i][j], y.x, y.y);
  return s;
}

Vec2 em_step(Vec2 x, const SdeModel& model, double eps, double h, Vec2 z) {
  Vec2 b = model.drift(x, eps * eps);
  Mat2 s = model.sigma(x);
  double sq = std::sqrt(h);
  return {x.x + b.x * h + eps * sq * (s(0, 0) * z.x + s(0, 1) * z.y),
          x.y + b.y * h + eps * sq * (s(1, 0) * z.x + s(1, 1) * z.y)};
}

double resolved_step(const SimConfig& config, const SdeModel& model) {
  if (config.h > 0) return config.h;
  return 1e-4 * std::min(1.0 / model.lambda_plus, 1.0 / model.lambda_minus);
}

double resolved_t_max(const SimConfig& config, const SdeModel& model, double alpha) {
  if (config.t_max > 0) return config.t_max;
  if (config.eps <= 0) return 50.0;
  return 10.0 * (alpha / model.lambda_plus) * std::abs(std::log(config.eps)) + 50.0;
}

ExitSample simulate_exit(const SdeModel& model, const SimConfig& config, Vec2 initial,
                         const StoppingSpec& stopping, Rng& rng) {
  config.validate();
  const double h = resolved_step(config, model);
  const double t_max = resolved_t_max(config, model, 1.0);
  const double eps = config.eps;
  const double eps2 = eps * eps;
  const double sqh = std::sqrt(h);
  const double guard = model.guard_radius;

  ExitSample out;
  Vec2 y = initial;

  auto finish_level = [&](Vec2 prev, Vec2 next, double t_prev) -> bool {
    // Candidate crossings of |y1| = level and, if set, |y2| = band.
    double best_s = 2.0;
    ExitKind kind = ExitKind::Censored;
    double clamp_val = 0;
    int clamp_coord = -1;
    auto consider = [&](double prev_c, double next_c, double lvl, int coord, ExitKind k) {
      if (lvl <= 0) return;
      for (double target : {lvl, -lvl}) {
        if ((prev_c < target && next_c >= target) || (prev_c > target && next_c <= target)) {
          double s = (target - prev_c) / (next_c - prev_c);
          if (s < best_s) {
            best_s = s;
            kind = k;
            clamp_val = target;
            clamp_coord = coord;
          }
        }
      }
    };
    consider(prev.x, next.x, stopping.level, 0, ExitKind::SideHit);
    if (stopping.box_half_height > 0)
      consider(prev.y, next.y, stopping.box_half_height, 1, ExitKind::TopBottomHit);
    if (best_s > 1.0) return false;
    Vec2 hit = prev + best_s * (next - prev);
    hit[clamp_coord] = clamp_val;
    out.exit_kind = kind;
    out.exit_point = hit;
    out.exit_time = t_prev + best_s * h;
    return true;
  };

  if (stopping.kind == StoppingSpec::Kind::Level) {
    // Starting on or beyond the surface exits immediately.
    if (std::abs(y.x) >= stopping.level) {
      out.exit_kind = ExitKind::SideHit;
      out.exit_point = {y.x >= 0 ? stopping.level : -stopping.level, y.y};
      out.exit_time = 0;
      return out;
    }
  } else if (!stopping.domain.contains(y)) {
    auto crossing = stopping.domain.first_crossing({0, 0}, y);
    out.exit_kind = ExitKind::SideHit;
    out.exit_point = crossing ? crossing->point : y;
    out.exit_time = 0;
    out.boundary_edge = crossing ? static_cast<int>(crossing->edge) : -1;
    return out;
  }

  double t = 0;
  while (t < t_max) {
    double z1, z2;
    rng.next_normal_pair(z1, z2);
    Vec2 b = model.drift(y, eps2);
    Mat2 s = model.sigma(y);
    Vec2 next{y.x + b.x * h + eps * sqh * (s(0, 0) * z1 + s(0, 1) * z2),
              y.y + b.y * h + eps * sqh * (s(1, 0) * z1 + s(1, 1) * z2)};

    if (!std::isfinite(next.x) || !std::isfinite(next.y) || std::abs(next.x) > guard ||
        std::abs(next.y) > guard) {
      out.exit_kind = ExitKind::Escaped;
      out.exit_point = next;
      out.exit_time = t + h;
      return out;
    }

    if (stopping.kind == StoppingSpec::Kind::Level) {
      if (finish_level(y, next, t)) return out;
    } else if (!stopping.domain.contains(next)) {
      auto crossing = stopping.domain.first_crossing(y, next);
      out.exit_kind = ExitKind::SideHit;
      out.exit_point = crossing ? crossing->point : next;
      out.exit_time = t + (crossing ? crossing->s : 1.0) * h;
      out.boundary_edge = crossing ? static_cast<int>(crossing->edge) : -1;
      return out;
    }

    y = next;
    t += h;
  }

  out.exit_kind = ExitKind::Censored;
  out.exit_point = y;
  out.exit_time = t_max;
  return out;
}

ExitSample two_stage_exit(const ExperimentSpec& spec, const SimConfig& config, Rng& rng) {
  const double eps = config.eps;
  const double alpha = spec.alpha;
  const double lp = spec.model.lambda_plus;
  const double lm = spec.model.lambda_minus;

  Vec2 chi = spec.chi_law.sample(rng);
  Vec2 y0 = spec.base_point + std::pow(eps, alpha) * chi;

  StoppingSpec stage1_stop;
  stage1_stop.kind = StoppingSpec::Kind::Level;
  stage1_stop.level = std::pow(eps, alpha * spec.p);
  stage1_stop.box_half_height = spec.box_half_height;

  SimConfig cfg = config;
  cfg.t_max = resolved_t_max(config, spec.model, alpha);

  ExitSample stage1 = simulate_exit(spec.model, cfg, y0, stage1_stop, rng);
  if (stage1.exit_kind != ExitKind::SideHit) return stage1;

  double tau_hat = stage1.exit_time;
  double eta_plus =
      std::pow(eps, -alpha) * std::exp(-lp * tau_hat) * stage1.exit_point.x;
  double eta_minus =
      std::pow(eps, -alpha * (1.0 - spec.p) * lm / lp) * stage1.exit_point.y;

  StoppingSpec stage2_stop = stage1_stop;
  stage2_stop.level = spec.delta;

  SimConfig cfg2 = cfg;
  cfg2.t_max = std::max(cfg.t_max - tau_hat, 1.0);
  ExitSample stage2 = simulate_exit(spec.model, cfg2, stage1.exit_point, stage2_stop, rng);

  ExitSample out = stage2;
  out.tau_hat = tau_hat;
  out.eta_plus = eta_plus;
  out.eta_minus = eta_minus;
  out.exit_time = tau_hat + stage2.exit_time;
  if (stage2.exit_kind != ExitKind::SideHit) return out;

  out.theta_plus = std::pow(eps, -alpha * spec.p) *
                   std::exp(-lp * stage2.exit_time) * stage2.exit_point.x;
  RescaledTriple triple;
  triple.psi_sign = stage2.exit_point.x > 0 ? 1 : -1;
  triple.phi = std::pow(eps, -spec.beta) * stage2.exit_point.y;
  triple.time_shifted = out.exit_time + (alpha / lp) * std::log(eps);
  out.rescaled = triple;
  return out;
}

namespace {

ExitSample run_single_stage(const ExperimentSpec& spec, const SimConfig& config, Rng& rng,
                            int edge_plus, int edge_minus) {
  Vec2 xi = spec.chi_law.sample(rng);
  Vec2 x0 = spec.base_point + std::pow(config.eps, spec.alpha) * xi;

  StoppingSpec stop;
  stop.kind = StoppingSpec::Kind::Polygon;
  stop.domain = spec.domain;

  SimConfig cfg = config;
  cfg.t_max = resolved_t_max(config, spec.model, spec.alpha);
  ExitSample s = simulate_exit(spec.model, cfg, x0, stop, rng);
  if (s.exit_kind != ExitKind::SideHit) return s;

  if (s.boundary_edge != edge_plus && s.boundary_edge != edge_minus) {
    s.exit_kind = ExitKind::TopBottomHit;
    return s;
  }
  if (spec.geometry) {
    const auto& geo = *spec.geometry;
    bool plus = s.boundary_edge == edge_plus;
    Vec2 q = plus ? geo.q_plus : geo.q_minus;
    Vec2 fluct = std::pow(config.eps, -geo.beta) * (s.exit_point - q);
    RescaledTriple triple;
    triple.psi_sign = plus ? 1 : -1;
    triple.phi = transversal_projection(plus ? geo.b_q_plus : geo.b_q_minus,
                                        plus ? geo.tangent_plus : geo.tangent_minus, fluct);
    triple.time_shifted =
        s.exit_time + (spec.alpha / spec.model.lambda_plus) * std::log(config.eps);
    s.rescaled = triple;
  }
  return s;
}

}  // namespace

std::vector<ExitSample> run_ensemble(const SimConfig& config, const ExperimentSpec& spec) {
  config.validate();
  std::vector<ExitSample> out(static_cast<size_t>(config.n_paths));
  if (config.n_paths == 0) return out;

  int edge_plus = -1, edge_minus = -1;
  if (spec.mode == ExperimentSpec::Mode::SingleStage && spec.geometry) {
    auto locate = [&](Vec2 q) {
      auto c = spec.domain.first_crossing(0.999999 * q, 1.000001 * q);
      return c ? static_cast<int>(c->edge) : -1;
    };
    edge_plus = locate(spec.geometry->q_plus);
    edge_minus = locate(spec.geometry->q_minus);
  }

  auto run_path = [&](long k) {
    Rng rng = path_stream(config.seed, static_cast<uint64_t>(k));
    ExitSample s = spec.mode == ExperimentSpec::Mode::TwoStage
                       ? two_stage_exit(spec, config, rng)
                       : run_single_stage(spec, config, rng, edge_plus, edge_minus);
    s.path_id = k;
    out[static_cast<size_t>(k)] = s;
  };

  unsigned workers = std::min<unsigned>(worker_count(),
                                        static_cast<unsigned>(config.n_paths));
  if (workers <= 1) {
    for (long k = 0; k < config.n_paths; ++k) run_path(k);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (long k = w; k < config.n_paths; k += workers) run_path(k);
      });
    for (auto& th : pool) th.join();
  }
  return out;
}

EnsembleSummary summarize(const std::vector<ExitSample>& samples) {
  EnsembleSummary s;
  for (const auto& x : samples) {
    switch (x.exit_kind) {
      case ExitKind::SideHit: ++s.side_hits; break;
      case ExitKind::TopBottomHit: ++s.top_bottom; break;
      case ExitKind::Censored: ++s.censored; break;
      case ExitKind::Escaped: ++s.escaped; break;
    }
  }
  return s;
}

std::string to_string(ExitKind k) {
  switch (k) {
    case ExitKind::SideHit: return "side_hit";
    case ExitKind::TopBottomHit: return "top_bottom_hit";
    case ExitKind::Censored: return "censored";
    case ExitKind::Escaped: return "escaped";
  }
  return "unknown";
}

std::string samples_to_csv(const std::vector<ExitSample>& samples) {
  std::string out =
      "path_id,exit_kind,exit_x,exit_y,exit_time,psi_sign,phi_rescaled,time_shifted\n";
  char buf[512];
  for (const auto& s : samples) {
    if (s.rescaled) {
      std::snprintf(buf, sizeof(buf), "%ld,%s,%.17g,%.17g,%.17g,%d,%.17g,%.17g\n",
                    s.path_id, to_string(s.exit_kind).c_str(), s.exit_point.x,
                    s.exit_point.y, s.exit_time, s.rescaled->psi_sign, s.rescaled->phi,
                    s.rescaled->time_shifted);
    } else {
      std::snprintf(buf, sizeof(buf), "%ld,%s,%.17g,%.17g,%.17g,,,\n", s.path_id,
                    to_string(s.exit_kind).c_str(), s.exit_point.x, s.exit_point.y,
                    s.exit_time);
    }
    out += buf;
  }
  return out;
}

void write_samples_csv(const std::vector<ExitSample>& samples, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open CSV for writing: " + path);
  f << samples_to_csv(samples);
}

}  // namespace saddle
