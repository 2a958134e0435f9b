#pragma once

// The three worked examples with their reference minimal realizations.
// Letters: mu_1 = 1, mu_2 ~ U(-1.5, 1.5); the noise is scalar N(0, 1).

#include "aslpv/dlpv_realization.h"
#include "aslpv/models.h"

namespace aslpv::examples {

inline constexpr int kCount = 3;

/// mu_1 = 1, mu_2 ~ U(-1.5, 1.5): p = (1, 0.75).
SchedulingSpec scheduling();
/// mu_1 = 1, mu_2 ~ U(-sqrt 3, sqrt 3): p = (1, 1).
SchedulingSpec scheduling_prime();

/// Example k in 1..3 with Q_s = p_s (unit noise variance).
AsLpvSsa system(int k);

/// Known minimal form as ({A^m_s, K^m_s}, C^m, I), four decimals.
DLpvSsa reference_minimal(int k);

/// Known basis change of Example 3, from the input to its minimal form.
Matrix reference_isomorphism();

/// Precision of the four-decimal reference matrices.
inline constexpr double kReferenceTolerance = 5e-3;

}  // namespace aslpv::examples
