#pragma once

// Euler-Maruyama simulation of saddle diffusions with exit detection on the
// stopping surfaces used by the limit theorems, and reproducible parallel
// ensembles.

#include "saddle/linalg.hpp"
#include "saddle/mixture.hpp"
#include "saddle/normal_form.hpp"
#include "saddle/rng.hpp"
#include "saddle/system.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace saddle {

struct SimConfig {
  double eps = 1e-2;
  double h = 0;            // 0: use the default 1e-4 * min(1/l+, 1/l-)
  double t_max = 0;        // 0: use the default 10*(alpha/l+)*|ln eps| + 50
  uint64_t seed = 1;
  long n_paths = 0;

  void validate() const;
};

/// Compiled double-precision drift/diffusion for the inner loop.
struct TermD {
  double c;
  int a1, a2;
};

struct SdeModel {
  Mat2 A;                       // linear drift part
  std::vector<TermD> q1, q2;    // nonlinear drift terms per component
  bool sigma_constant = true;
  Mat2 sigma0;                  // sigma when constant
  std::vector<TermD> sig[2][2]; // polynomial sigma entries otherwise
  std::vector<TermD> psi1, psi2;  // Ito correction (scaled by eps^2 at runtime)
  double guard_radius = 4.0;
  double lambda_plus = 1.0, lambda_minus = 1.0;

  /// Original-coordinate model: b = Ax + Q, diffusion sigma.
  static SdeModel from_system(const SaddleSystem& system);
  /// Normal-form-coordinate model: drift Ay + P(y) + eps^2 Psi(y),
  /// diffusion sigma_tilde.
  static SdeModel from_normal_form(const SaddleSystem& system, const NormalForm& nf);

  Vec2 drift(Vec2 y, double eps2) const;
  Mat2 sigma(Vec2 y) const;
};

/// One Euler-Maruyama step: x + b(x) h + eps sigma(x) sqrt(h) z.
Vec2 em_step(Vec2 state, const SdeModel& model, double eps, double h, Vec2 gaussian_pair);

enum class ExitKind { SideHit, TopBottomHit, Censored, Escaped };
std::string to_string(ExitKind k);

struct RescaledTriple {
  int psi_sign = 0;         // exit direction
  double phi = 0;           // eps^-beta rescaled transverse coordinate
  double time_shifted = 0;  // exit time + (alpha/lambda_+) ln eps
};

struct ExitSample {
  long path_id = 0;
  ExitKind exit_kind = ExitKind::Censored;
  Vec2 exit_point;
  double exit_time = 0;
  std::optional<RescaledTriple> rescaled;  // present only for side hits
  // Two-stage records (NaN when not applicable).
  double eta_plus = std::numeric_limits<double>::quiet_NaN();
  double eta_minus = std::numeric_limits<double>::quiet_NaN();
  double theta_plus = std::numeric_limits<double>::quiet_NaN();
  double tau_hat = std::numeric_limits<double>::quiet_NaN();
  int boundary_edge = -1;  // polygon exits: index of the crossed edge
};

/// Stopping surface: |Y1| = level inside a |Y2| <= box_half_height guard
/// band, or the polygonal domain boundary.
struct StoppingSpec {
  enum class Kind { Level, Polygon } kind = Kind::Level;
  double level = 0.5;
  double box_half_height = 0;  // 0: no top/bottom band, only the guard radius
  ExitDomain domain;
};

/// Runs one trajectory until the stopping surface is crossed. Exit time and
/// point are linearly interpolated across the crossing step.
ExitSample simulate_exit(const SdeModel& model, const SimConfig& config, Vec2 initial,
                         const StoppingSpec& stopping, Rng& rng);

/// Step size / censoring horizon with the documented defaults filled in.
double resolved_step(const SimConfig& config, const SdeModel& model);
double resolved_t_max(const SimConfig& config, const SdeModel& model, double alpha);

/// Projection metadata for full-domain exits near q_plus / q_minus.
struct FullExitGeometry {
  Vec2 q_plus, q_minus;
  Vec2 tangent_plus, tangent_minus;  // boundary tangent directions at q+-
  Vec2 b_q_plus, b_q_minus;          // drift at q+-
  double beta = 1.0;
};

struct ExperimentSpec {
  SdeModel model;
  Vec2 base_point;          // x0 (original coords) or (0, y2) (normal form)
  double alpha = 1.0;
  Mixture2D chi_law;        // law of the eps^alpha perturbation
  enum class Mode { SingleStage, TwoStage } mode = Mode::TwoStage;

  // Two-stage parameters (normal-form coordinates).
  double p = 0.3;
  double delta = 0.5;
  double box_half_height = 0;

  // Single-stage polygon exit (original coordinates).
  ExitDomain domain;
  std::optional<FullExitGeometry> geometry;

  double beta = 1.0;
};

/// Stage-1 stop at |Y1| = eps^(alpha p) with the eta recordings, then
/// continuation of the same trajectory to |Y1| = delta. The rescaled triple
/// of the returned sample is the empirical Theta'.
ExitSample two_stage_exit(const ExperimentSpec& spec, const SimConfig& config, Rng& rng);

/// n_paths independent trajectories; path k draws from the stream keyed by
/// (seed, k). Output is sorted by path_id and bitwise identical for any
/// worker count (worker count from SADDLE_EXIT_THREADS, default 1 core).
std::vector<ExitSample> run_ensemble(const SimConfig& config, const ExperimentSpec& spec);

struct EnsembleSummary {
  long side_hits = 0, top_bottom = 0, censored = 0, escaped = 0;
};
EnsembleSummary summarize(const std::vector<ExitSample>& samples);

/// CSV persistence: header row mandatory, floats with 17 significant digits.
void write_samples_csv(const std::vector<ExitSample>& samples, const std::string& path);
std::string samples_to_csv(const std::vector<ExitSample>& samples);

}  // namespace saddle
