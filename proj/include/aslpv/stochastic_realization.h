#pragma once

// Covariance machinery of asLPV-SSAs: state second moments, the associated
// dLPV-SSA realizing Psi_y, the associated innovation-form asLPV-SSA, the
// two minimization algorithms and the matrix-only checks for stable
// invertability, minimality and innovation form.

#include <string>

#include "aslpv/dlpv_realization.h"
#include "aslpv/models.h"

namespace aslpv {

struct IterationOptions {
  /// Stop when max_s ||X_s^(I+1) - X_s^(I)||_F drops below this.
  double tol = 1e-10;
  int max_iter = 100000;
};

struct MomentSolution {
  /// P_s = E[x(t) x(t)^T mu_s(t)^2].
  MatrixFamily P;
  int iterations = 0;
  double residual = 0.0;
};

/// Iterates P_s <- p_s sum_j (A_j P_j A_j^T + K_j Q_j K_j^T) from zero.
/// DomainError if not mean-square stable; ConvergenceError on the cap.
MomentSolution state_second_moments(const AsLpvSsa& s,
                                    const SchedulingSpec& spec,
                                    IterationOptions options = {});

/// Same fixed point through one n^2 x n^2 linear solve. All P_s share the
/// factor p_s, so P_s = p_s X with X = sum_j p_j A_j X A_j^T + sum_j K_j Q_j K_j^T.
MomentSolution state_second_moments_direct(const AsLpvSsa& s,
                                           const SchedulingSpec& spec);

struct AssociatedDlpv {
  /// ({sqrt(p_s) A_s, B_s}, C, I) with
  /// B_s = (A_s P_s C^T + K_s Q_s F^T) / sqrt(p_s).
  DLpvSsa system;
  /// T^y_{ss} = (C P_s C^T + F Q_s F^T) / p_s, i.e. E[y y^T].
  MatrixFamily Ty;
  MomentSolution moments;
};

AssociatedDlpv associated_dlpv(const AsLpvSsa& s, const SchedulingSpec& spec,
                               IterationOptions options = {});

/// Psi_y(eps) = I; Psi_y(w) = E[y(t) z_w^y(t)^T] = M_assoc(w) otherwise.
Matrix psi_y(const AssociatedDlpv& assoc, const Word& w);
Matrix psi_y_model(const AsLpvSsa& s, const SchedulingSpec& spec,
                   const Word& w);

/// E[y(t) y(t)^T] implied by the model.
Matrix output_covariance(const AssociatedDlpv& assoc);

struct InnovationSolution {
  /// ({A_hat_s / sqrt(p_s), K_hat_s}, C_hat, I, Q_hat).
  AsLpvSsa system;
  MatrixFamily Khat;
  MatrixFamily Qhat;
  MatrixFamily Phat;
  int iterations = 0;
  double residual = 0.0;
};

/// min eig(Q_hat_s) below this fraction of trace(Q_hat_s) is degenerate.
inline constexpr double kInnovationPdFloor = 1e-12;

/// Runs the innovation recursion on a dLPV-SSA ({A_hat_s, G_hat_s}, C_hat, I)
/// realizing Psi_y. DegeneracyError when some Q_hat_s stops being positive
/// definite, ConvergenceError on the iteration cap.
InnovationSolution associated_aslpv(const DLpvSsa& d, const MatrixFamily& ty,
                                    const SchedulingSpec& spec,
                                    IterationOptions options = {});

struct StableInvertability {
  bool flag = false;
  /// rho(sum_s p_s (A_s - K_s C) (x) (A_s - K_s C)).
  double radius = 0.0;
};

/// Requires F = I (DomainError otherwise).
StableInvertability is_stably_invertable(const AsLpvSsa& s,
                                         const SchedulingSpec& spec);

struct Algorithm1Result {
  AsLpvSsa system;
  int n_input = 0;
  int n_min = 0;
  int moment_iterations = 0;
  double moment_residual = 0.0;
  int innovation_iterations = 0;
  double innovation_residual = 0.0;
  /// True when the input has F = I and is stably invertable, the sufficient
  /// condition for innovation form under which minimality is guaranteed.
  bool innovation_hypothesis = false;
  std::string note;
};

/// associated_dlpv -> kalman_minimize -> associated_aslpv.
Algorithm1Result minimize_algorithm1(const AsLpvSsa& s,
                                     const SchedulingSpec& spec,
                                     IterationOptions options = {});

struct InnovationReport {
  MinimalityReport minimality;  // of ({A_s, K_s}, C, I)
  StableInvertability invertability;
  /// Sufficient condition for innovation form (stable invertability); a
  /// false value does not mean the system is not in innovation form.
  bool innovation_form_sufficient = false;
  bool minimal_innovation = false;
};

InnovationReport check_minimal_innovation(const AsLpvSsa& s,
                                          const SchedulingSpec& spec);

enum class NoiseMomentStatus { kInheritedUnverified, kRecomputed };

struct Algorithm2Result {
  AsLpvSsa system;
  KalmanMinimization reduction;
  NoiseMomentStatus q_status = NoiseMomentStatus::kInheritedUnverified;
  /// Only set when the noise moments were recomputed: worst entrywise gap
  /// between the recomputed and the reduced K_s.
  double gain_consistency = 0.0;
  int innovation_iterations = 0;
};

/// Kalman-minimizes ({A_s, K_s}, C, I) of a stably invertable input. With
/// recompute_noise the Q_s of the output come from one innovation pass on
/// the input's covariances; otherwise they are the input's Q_s.
Algorithm2Result minimize_algorithm2(const AsLpvSsa& s,
                                     const SchedulingSpec& spec,
                                     bool recompute_noise = false,
                                     IterationOptions options = {});

}  // namespace aslpv
