#pragma once

// Realization theory of deterministic LPV-SSAs: sub-Markov parameters,
// extended reachability/observability, minimality, Kalman-decomposition
// minimization, isomorphism recovery and the F/D transforms.

#include <optional>

#include "aslpv/models.h"

namespace aslpv {

/// M(eps) = D;  M(s w) = C A_w B_s.
Matrix sub_markov(const DLpvSsa& d, const Word& w);

/// [A_w B_1 | ... | A_w B_pdim] over |w| <= depth in shortlex order.
Matrix reachability_matrix(const DLpvSsa& d, int depth);

/// Rows C A_w over |w| <= depth in shortlex order.
Matrix observability_matrix(const DLpvSsa& d, int depth);

struct MinimalityReport {
  bool minimal = false;
  int reach_rank = 0;
  int obs_rank = 0;
  int n = 0;
};

MinimalityReport is_minimal_dlpv(const DLpvSsa& d);

/// Largest entrywise difference of the sub-Markov parameters over all
/// words |w| <= max_length, each term divided by max(1, |M_1(w)|_max).
/// Both systems must share the alphabet and the output/input dimensions.
double sub_markov_distance(const DLpvSsa& d1, const DLpvSsa& d2,
                           int max_length);

struct KalmanMinimization {
  DLpvSsa reduced;
  /// Orthonormal n x n_min basis of the reduced state inside R^n; the
  /// reduced state is basis^T x (projection) and maps back as basis * z.
  Matrix basis;
  int n_min = 0;

  Matrix projection() const { return basis.transpose(); }
};

/// Restricts to the reachable subspace, then quotients out the unobservable
/// part. Preserves the sub-Markov function; n_min = 0 is allowed.
KalmanMinimization kalman_minimize(const DLpvSsa& d);

struct IsomorphismTolerances {
  /// Sub-Markov agreement for |w| <= 2n (relative to max(1, |M|)).
  double markov = 1e-6;
  /// Entrywise agreement of T A1 T^-1 with A2, T B1 with B2, C1 T^-1 with C2.
  double matrices = 1e-6;
};

/// T with T A1 T^-1 = A2, T B1 = B2, C1 T^-1 = C2, or nullopt when the two
/// systems do not realize the same sub-Markov function. Both inputs must be
/// minimal with equal dimensions (DomainError otherwise).
std::optional<Matrix> find_isomorphism(const DLpvSsa& d1, const DLpvSsa& d2,
                                       IsomorphismTolerances tol = {});

/// Worst entrywise residual of T against the isomorphism equations.
double isomorphism_residual(const DLpvSsa& d1, const DLpvSsa& d2,
                            const Matrix& t);

/// ({A_s - B_s C, B_s}, C, I); requires D = I, which forces nu = ny.
DLpvSsa transform_F(const DLpvSsa& d);

/// ({A_s, B_s}, -C, D).
DLpvSsa transform_D(const DLpvSsa& d);

}  // namespace aslpv
