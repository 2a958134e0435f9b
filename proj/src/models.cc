#include "aslpv/models.h"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "aslpv/errors.h"

namespace aslpv {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::vector<double> uniform_variances(const std::vector<double>& bounds) {
  std::vector<double> p;
  p.reserve(bounds.size());
  for (double a : bounds) {
    if (!(a > 0) || !std::isfinite(a)) {
      throw DomainError("uniform bounds must be positive and finite");
    }
    p.push_back(a * a / 3.0);
  }
  return p;
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void family_problems(const MatrixFamily& family, Eigen::Index rows,
                     Eigen::Index cols, const char* name,
                     std::vector<std::string>& out) {
  for (std::size_t s = 0; s < family.size(); ++s) {
    if (family[s].rows() != rows || family[s].cols() != cols) {
      out.push_back(std::string(name) + "[" + std::to_string(s + 1) + "] is " +
                    shape(family[s]) + ", expected " + std::to_string(rows) +
                    "x" + std::to_string(cols));
    }
    if (!family[s].allFinite()) {
      out.push_back(std::string(name) + "[" + std::to_string(s + 1) +
                    "] has non-finite entries");
    }
  }
}

}  // namespace

SchedulingSpec::SchedulingSpec(SchedulingFamily family,
                               std::optional<std::vector<double>> alpha)
    : family_(std::move(family)) {
  std::optional<std::vector<double>> default_alpha;
  std::visit(
      Overloaded{
          [&](const WhiteNoiseUniform& f) { p_ = uniform_variances(f.bounds); },
          [&](const DiscreteIID& f) {
            double total = 0.0;
            for (double q : f.probabilities) {
              if (!(q > 0)) {
                throw DomainError("regime probabilities must be positive");
              }
              total += q;
            }
            if (std::abs(total - 1.0) > 1e-12) {
              throw DomainError("regime probabilities must sum to 1");
            }
            p_ = f.probabilities;
            default_alpha = std::vector<double>(p_.size(), 1.0);
          },
          [&](const ConstantPlusWhite& f) {
            p_ = {1.0};
            const auto rest = uniform_variances(f.bounds);
            p_.insert(p_.end(), rest.begin(), rest.end());
            default_alpha = std::vector<double>(p_.size(), 0.0);
            (*default_alpha)[0] = 1.0;
          }},
      family_);
  if (p_.empty()) throw DomainError("scheduling alphabet must be nonempty");

  if (!alpha) {
    alpha_ = default_alpha;
    return;
  }
  if (alpha->size() != p_.size()) {
    throw DomainError("alpha must have one entry per scheduling coordinate");
  }
  // The built-in families admit exactly one affine identity sum alpha mu = 1.
  if (!default_alpha || *alpha != *default_alpha) {
    throw DomainError("alpha does not satisfy sum_s alpha_s mu_s(t) = 1 for " +
                      family_name() + " scheduling");
  }
  alpha_ = std::move(alpha);
}

SchedulingSpec SchedulingSpec::with_moments(const std::vector<double>& p) {
  std::vector<double> bounds;
  bounds.reserve(p.size());
  for (double v : p) {
    if (!(v > 0)) throw DomainError("p constants must be positive");
    bounds.push_back(std::sqrt(3.0 * v));
  }
  SchedulingSpec spec(WhiteNoiseUniform{bounds});
  spec.p_ = p;  // exact, without the sqrt round trip
  return spec;
}

std::string SchedulingSpec::family_name() const {
  return std::visit(
      Overloaded{[](const WhiteNoiseUniform&) { return "white_noise_uniform"; },
                 [](const DiscreteIID&) { return "discrete_iid"; },
                 [](const ConstantPlusWhite&) {
                   return "constant_plus_white";
                 }},
      family_);
}

double SchedulingSpec::p_word(const Word& w) const {
  w.check_alphabet(pdim());
  double product = 1.0;
  for (int letter : w) product *= p_[letter - 1];
  return product;
}

std::vector<std::string> AsLpvSsa::dimension_problems() const {
  std::vector<std::string> out;
  if (A.empty()) out.push_back("A family is empty");
  if (K.size() != A.size()) out.push_back("K family size differs from A");
  if (Q.size() != A.size()) out.push_back("Q family size differs from A");
  const Eigen::Index nx = n(), nv = m();
  family_problems(A, nx, nx, "A", out);
  family_problems(K, nx, nv, "K", out);
  family_problems(Q, nv, nv, "Q", out);
  if (F.rows() != ny()) {
    out.push_back("F has " + std::to_string(F.rows()) + " rows, C has " +
                  std::to_string(ny()));
  }
  if (!C.allFinite()) out.push_back("C has non-finite entries");
  if (!F.allFinite()) out.push_back("F has non-finite entries");
  return out;
}

void AsLpvSsa::require_consistent() const {
  const auto problems = dimension_problems();
  if (!problems.empty()) throw DomainError("asLPV-SSA: " + problems.front());
}

std::vector<std::string> DLpvSsa::dimension_problems() const {
  std::vector<std::string> out;
  if (A.empty()) out.push_back("A family is empty");
  if (B.size() != A.size()) out.push_back("B family size differs from A");
  family_problems(A, n(), n(), "A", out);
  family_problems(B, n(), nu(), "B", out);
  if (D.rows() != ny()) {
    out.push_back("D has " + std::to_string(D.rows()) + " rows, C has " +
                  std::to_string(ny()));
  }
  if (!C.allFinite()) out.push_back("C has non-finite entries");
  if (!D.allFinite()) out.push_back("D has non-finite entries");
  return out;
}

void DLpvSsa::require_consistent() const {
  const auto problems = dimension_problems();
  if (!problems.empty()) throw DomainError("dLPV-SSA: " + problems.front());
}

double ms_radius(const AsLpvSsa& s, const SchedulingSpec& spec) {
  if (spec.pdim() != s.pdim()) {
    throw DomainError("scheduling has " + std::to_string(spec.pdim()) +
                      " coordinates, system has " + std::to_string(s.pdim()));
  }
  return spectral_radius(ms_stability_matrix(s.A, spec.p()));
}

ValidationReport validate_aslpv(const AsLpvSsa& s, const SchedulingSpec& spec) {
  ValidationReport report;
  report.problems = s.dimension_problems();
  if (spec.pdim() != s.pdim()) {
    report.problems.push_back("scheduling has " + std::to_string(spec.pdim()) +
                              " coordinates, system has " +
                              std::to_string(s.pdim()));
  }
  report.dimensions_ok = report.problems.empty();
  if (!report.dimensions_ok) return report;

  report.q_min_eigenvalue = std::numeric_limits<double>::infinity();
  bool symmetric = true;
  for (const Matrix& q : s.Q) {
    if (q.size() == 0) continue;
    if ((q - q.transpose()).cwiseAbs().maxCoeff() >
        1e-10 * std::max(1.0, q.cwiseAbs().maxCoeff())) {
      symmetric = false;
    }
    const Matrix sym = 0.5 * (q + q.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
    report.q_min_eigenvalue =
        std::min(report.q_min_eigenvalue, eig.eigenvalues().minCoeff());
  }
  if (!std::isfinite(report.q_min_eigenvalue)) report.q_min_eigenvalue = 0.0;
  report.q_psd = symmetric && report.q_min_eigenvalue >= kPsdFloor;
  if (!symmetric) report.problems.push_back("some Q_s is not symmetric");
  if (report.q_min_eigenvalue < kPsdFloor) {
    report.problems.push_back("some Q_s is not positive semidefinite");
  }

  report.ms_radius = ms_radius(s, spec);
  report.ms_stable = report.ms_radius < 1.0;
  if (!report.ms_stable) {
    report.problems.push_back("not mean-square stable");
  }
  return report;
}

double condition_number(const Matrix& t) {
  if (t.size() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(t);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0)) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

namespace {

Matrix checked_inverse(const Matrix& t, Eigen::Index n) {
  if (t.rows() != n || t.cols() != n) {
    throw DomainError("basis change must be " + std::to_string(n) + "x" +
                      std::to_string(n));
  }
  check_finite(t, "basis change");
  const double cond = condition_number(t);
  if (!(cond <= kMaxConditionNumber)) {
    std::ostringstream msg;
    msg << "basis change is singular or ill-conditioned (cond = " << cond
        << ")";
    throw DomainError(msg.str());
  }
  return t.inverse();
}

}  // namespace

AsLpvSsa change_basis(const AsLpvSsa& s, const Matrix& t) {
  s.require_consistent();
  const Matrix t_inv = checked_inverse(t, s.n());
  AsLpvSsa out = s;
  for (std::size_t i = 0; i < s.A.size(); ++i) {
    out.A[i] = t * s.A[i] * t_inv;
    out.K[i] = t * s.K[i];
  }
  out.C = s.C * t_inv;
  return out;
}

DLpvSsa change_basis_dlpv(const DLpvSsa& d, const Matrix& t) {
  d.require_consistent();
  const Matrix t_inv = checked_inverse(t, d.n());
  DLpvSsa out = d;
  for (std::size_t i = 0; i < d.A.size(); ++i) {
    out.A[i] = t * d.A[i] * t_inv;
    out.B[i] = t * d.B[i];
  }
  out.C = d.C * t_inv;
  return out;
}

DLpvSsa innovation_dlpv(const AsLpvSsa& s) {
  s.require_consistent();
  if (s.F.rows() != s.F.cols() || !s.F.isIdentity(1e-12)) {
    throw DomainError("innovation-form checks require F = I");
  }
  return DLpvSsa{s.A, s.K, s.C, Matrix::Identity(s.ny(), s.ny())};
}

}  // namespace aslpv
