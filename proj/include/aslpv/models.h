#pragma once

// Scheduling descriptions and the two system representations: the
// stochastic asLPV-SSA and the deterministic dLPV-SSA.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "aslpv/core_algebra.h"

namespace aslpv {

/// Every coordinate i.i.d. uniform on (-bounds[s], bounds[s]).
struct WhiteNoiseUniform {
  std::vector<double> bounds;
};

/// mu(t) is the indicator vector of an i.i.d. regime with the given
/// probabilities.
struct DiscreteIID {
  std::vector<double> probabilities;
};

/// mu_1(t) = 1; coordinate s >= 2 is i.i.d. uniform on (-bounds[s-2],
/// bounds[s-2]).
struct ConstantPlusWhite {
  std::vector<double> bounds;
};

using SchedulingFamily =
    std::variant<WhiteNoiseUniform, DiscreteIID, ConstantPlusWhite>;

class SchedulingSpec {
 public:
  /// Derives the second-moment constants p from the family. Throws
  /// DomainError on nonpositive bounds or probabilities not summing to 1.
  explicit SchedulingSpec(SchedulingFamily family,
                          std::optional<std::vector<double>> alpha = {});

  /// White-noise scheduling with prescribed variances (bounds sqrt(3 p)).
  static SchedulingSpec with_moments(const std::vector<double>& p);

  int pdim() const { return static_cast<int>(p_.size()); }
  const std::vector<double>& p() const { return p_; }
  /// Coefficients with sum_s alpha_s mu_s(t) = 1, when such exist.
  const std::optional<std::vector<double>>& alpha() const { return alpha_; }
  const SchedulingFamily& family() const { return family_; }
  std::string family_name() const;

  /// p_w = p_{s1} ... p_{sk}; 1 for the empty word.
  double p_word(const Word& w) const;

 private:
  SchedulingFamily family_;
  std::vector<double> p_;
  std::optional<std::vector<double>> alpha_;
};

/// x(t+1) = sum_s (A_s x(t) + K_s v(t)) mu_s(t),  y(t) = C x(t) + F v(t),
/// with Q_s = E[v(t) v(t)^T mu_s(t)^2].
struct AsLpvSsa {
  MatrixFamily A;
  MatrixFamily K;
  Matrix C;
  Matrix F;
  MatrixFamily Q;

  int pdim() const { return static_cast<int>(A.size()); }
  Eigen::Index n() const { return C.cols(); }
  Eigen::Index ny() const { return C.rows(); }
  Eigen::Index m() const { return F.cols(); }

  /// Human-readable list of dimension inconsistencies (empty when fine).
  std::vector<std::string> dimension_problems() const;
  /// Throws DomainError listing the first inconsistency.
  void require_consistent() const;
};

/// x(t+1) = sum_s (A_s x(t) + B_s u(t)) mu_s(t),  y(t) = C x(t) + D u(t).
struct DLpvSsa {
  MatrixFamily A;
  MatrixFamily B;
  Matrix C;
  Matrix D;

  int pdim() const { return static_cast<int>(A.size()); }
  Eigen::Index n() const { return C.cols(); }
  Eigen::Index ny() const { return C.rows(); }
  Eigen::Index nu() const { return D.cols(); }

  std::vector<std::string> dimension_problems() const;
  void require_consistent() const;
};

struct ValidationReport {
  bool dimensions_ok = false;
  std::vector<std::string> problems;
  bool q_psd = false;
  double q_min_eigenvalue = 0.0;
  bool ms_stable = false;
  double ms_radius = 0.0;

  bool ok() const { return dimensions_ok && q_psd && ms_stable; }
};

/// Q_s may dip this far below zero and still count as PSD.
inline constexpr double kPsdFloor = -1e-10;

ValidationReport validate_aslpv(const AsLpvSsa& s, const SchedulingSpec& spec);

/// Mean-square stability radius rho(sum_s p_s A_s (x) A_s).
double ms_radius(const AsLpvSsa& s, const SchedulingSpec& spec);

/// Largest condition number accepted for a state-space basis change.
inline constexpr double kMaxConditionNumber = 1e12;

double condition_number(const Matrix& t);

/// ({T A T^-1, T K}, C T^-1, F, Q).
AsLpvSsa change_basis(const AsLpvSsa& s, const Matrix& t);

/// ({T A T^-1, T B}, C T^-1, D).
DLpvSsa change_basis_dlpv(const DLpvSsa& d, const Matrix& t);

/// The deterministic system ({A_s, K_s}, C, I) read off an asLPV-SSA with
/// F = I.
DLpvSsa innovation_dlpv(const AsLpvSsa& s);

}  // namespace aslpv
