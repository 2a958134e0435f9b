#pragma once

// Sample paths of asLPV-SSAs, empirical covariance estimation, the
// recursive innovation filter and pathwise output comparison.

#include <cstdint>
#include <map>
#include <optional>

#include "aslpv/models.h"

namespace aslpv {

/// Row t holds the values at time t = 0..length-1.
struct Trajectory {
  int length = 0;
  Matrix mu;  // length x pdim
  Matrix y;   // length x ny
  std::optional<Matrix> x;
  std::optional<Matrix> v;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> noise_seed;
  int burn_in = 0;
};

inline constexpr int kDefaultBurnIn = 1000;

/// Independent stream seed derived from a base seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// i.i.d. scheduling draws: uniform coordinates, one-hot regimes, or a
/// constant first coordinate followed by uniform ones. Needs T >= 1.
Trajectory gen_scheduling(const SchedulingSpec& spec, int T,
                          std::uint64_t seed);

/// E[v v^T | regime s] = Q_s / p_s. For the continuous families v is
/// independent of mu, so all Q_s / p_s must coincide (DomainError otherwise).
MatrixFamily conditional_noise_covariances(const AsLpvSsa& s,
                                           const SchedulingSpec& spec);

/// Q'_s = p'_s Q_s / p_s: the same noise law under another scheduling.
AsLpvSsa retarget_scheduling(const AsLpvSsa& s, const SchedulingSpec& from,
                             const SchedulingSpec& to);

/// Runs the system on the given scheduling path with Gaussian noise seeded by
/// noise_seed. The state starts at zero burn_in steps before t = 0; the
/// burn-in scheduling is drawn from derive_seed(scheduling.seed, 1).
Trajectory simulate(const AsLpvSsa& s, const SchedulingSpec& spec,
                    const Trajectory& scheduling, std::uint64_t noise_seed,
                    int burn_in = kDefaultBurnIn);

/// Deterministic core of simulate: mu and standard-normal xi cover burn-in
/// plus retained steps; v(t) = L_s xi(t) with L_s L_s^T = Q_s / p_s.
Trajectory simulate_paths(const AsLpvSsa& s, const SchedulingSpec& spec,
                          const Matrix& mu, const Matrix& xi, int burn_in);

/// Standard-normal innovations of the given width and length.
Matrix standard_normal_path(Eigen::Index rows, Eigen::Index cols,
                            std::uint64_t seed);

struct MomentEstimate {
  Matrix value;
  /// Entrywise batch-means standard error.
  Matrix standard_error;
  long samples = 0;
};

inline constexpr int kStandardErrorBatches = 50;

/// Time average of left(t) z_w^right(t)^T where
/// z_w(t) = right(t-k) mu_{s1}(t-k) ... mu_{sk}(t-1) / sqrt(p_w), k = |w|.
std::map<Word, MomentEstimate> empirical_cross_moments(
    const Matrix& left, const Matrix& right, const Matrix& mu,
    const SchedulingSpec& spec, const std::vector<Word>& words);

/// Psi_y estimates; at w = eps this is the sample second moment of y.
std::map<Word, MomentEstimate> empirical_psi(const Trajectory& traj,
                                             const SchedulingSpec& spec,
                                             const std::vector<Word>& words);

struct FilterRun {
  Matrix xbar;  // length x n
  Matrix ybar;  // length x ny
  Matrix err;   // length x ny
};

/// xbar(t+1) = sum_s ((A_s - K_s C) xbar(t) + K_s y(t)) mu_s(t), xbar(0) = 0.
/// Requires F = I and stable invertability (DomainError otherwise).
FilterRun innovation_filter(const AsLpvSsa& s, const SchedulingSpec& spec,
                            const Trajectory& traj);

struct CompareSeeds {
  std::uint64_t scheduling = 0;
  std::uint64_t noise = 0;
};

struct OutputComparison {
  int length = 0;
  /// Both systems driven by the same standard-normal path (equal m).
  bool shared_noise = false;
  /// mean ||y1 - y2||^2 with its batch-means standard error.
  double mse = 0.0;
  double mse_se = 0.0;
  /// mse / mean ||y1||^2.
  double relative_mse = 0.0;
  /// mean ||y_i||^2 and the gap between the two with its standard error.
  double power1 = 0.0;
  double power2 = 0.0;
  double power_gap = 0.0;
  double power_gap_se = 0.0;
  /// Largest entrywise gap of the model output covariances and of Psi_y over
  /// 1 <= |w| <= 2.
  double model_covariance_gap = 0.0;
  double model_psi_gap = 0.0;
};

/// Simulates both systems on one scheduling path. Requires equal ny.
OutputComparison compare_outputs(const AsLpvSsa& s1, const AsLpvSsa& s2,
                                 const SchedulingSpec& spec, CompareSeeds seeds,
                                 int T, int burn_in = kDefaultBurnIn);

}  // namespace aslpv
